"""Executable counterexample constructions, each carrying the properties it
must exhibit. `verify_fixture` replays every expectation against the real
checkers, so a regression anywhere in the library surfaces here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Mapping

from .core import (
    Allocation,
    Instance,
    allocation_from_owners,
    counts_to_allocation,
    enumerate_allocations,
    identical_instance,
    iter_counts,
    make_instance,
    rat,
)
from .errors import ParameterError
from . import fairness, shares, welfare

ZERO = Fraction(0)
ONE = Fraction(1)


def _unit(name: str, value) -> Fraction:
    value = rat(value)
    if value < 0 or value > 1:
        raise ParameterError(f"{name} must lie in [0, 1], got {value}")
    return value


def incompatibility_instance(
    x, y, x_alt, y_alt
) -> Instance:
    """Identical-items instance on which no allocation satisfies both
    WPROP(x, y) and WPROP(x_alt, y_alt).

    Requires x_alt + y < 1 or x + y_alt < 1. The agent count, the small
    weight eps, and the item count are derived so that the first notion
    forces one item to each small agent while the second forces all but
    n-2 items to the big agent.
    """
    x, y, x_alt, y_alt = (_unit(nm, v) for nm, v in
                          (("x", x), ("y", y), ("x_alt", x_alt), ("y_alt", y_alt)))
    if x_alt + y >= 1:
        if x + y_alt >= 1:
            raise ParameterError(
                "need x_alt + y < 1 or x + y_alt < 1 for an incompatibility instance"
            )
        x, y, x_alt, y_alt = x_alt, y_alt, x, y

    n = 2
    while True:
        rhs = 1 - y - (y_alt + x_alt * n) / (n - 1)
        if rhs > 0:
            break
        n += 1
    coef = n * x + 1 - n * x_alt
    if coef > 0:
        bound = rhs / coef
        q = bound.denominator // bound.numerator + 2
    else:
        q = 2 * (n - 1)
    q = max(q, n)
    eps = Fraction(1, q)

    lower = n * x + y / eps
    m = lower.numerator // lower.denominator + 1
    upper = (1 + eps * n * x_alt - (y_alt + x_alt * n) / (n - 1)) / eps
    assert m < upper, "derived item count must sit inside the open interval"

    weights = [eps] * (n - 1) + [1 - (n - 1) * eps]
    return identical_instance(weights, m)


def mwnw_violates_wprop_instance(x) -> Instance:
    """Identical-items instance where every maximum-weighted-Nash allocation
    fails WPROP(x, 1-x)."""
    x = _unit("x", x)
    if x < 1:
        threshold = (2 - x) / (1 - x)
        w1 = threshold.numerator // threshold.denominator + 1
        n = w1 + 2
        others = Fraction(n - w1, n - 1)
        weights = [Fraction(w1)] + [others] * (n - 1)
        return identical_instance(weights, n)
    # x == 1: two agents (1, k); grow k until the Nash optimum pins agent 0
    # to a single item out of k + 4.
    k = 1
    while True:
        outcome = welfare.mwnw_identical_counts((1, k), k + 4)
        if all(counts[0] == 1 for counts in outcome.optima):
            return identical_instance([1, k], k + 4)
        k += 1


def nmms_upper_bound_instance(n: int, eps) -> Instance:
    """The 2n-1 item instance showing no rule can beat a 1/n fraction of the
    normalized maximin share."""
    eps = rat(eps)
    if n < 2:
        raise ParameterError(f"need n >= 2, got {n}")
    if not 0 < eps < Fraction(1, n):
        raise ParameterError(f"need 0 < eps < 1/{n}, got {eps}")
    big = 1 - (n - 1) * eps
    weights = [eps] * (n - 1) + [big]
    m = 2 * n - 1
    rows = []
    for _ in range(n - 1):
        rows.append([eps] * (n - 1) + [big] + [ZERO] * (n - 1))
    rows.append([big / n] * n + [eps] * (n - 1))
    return make_instance(weights, rows)


def wef_no_nmms_instance(y, n: int = 3) -> tuple[Instance, Allocation]:
    """Instance plus a WEF(0, y) allocation that leaves agent 0 with zero
    utility despite a positive NMMS."""
    y = _unit("y", y)
    if y == 0:
        raise ParameterError("the construction needs y > 0")
    if n < 3:
        raise ParameterError("the construction needs n >= 3")
    w = 1 / ((1 + 1 / y) * (n - 1) + 1)
    others = (1 - w) / (n - 1)
    values = [ONE] * (n - 1) + [y]
    inst = make_instance([w] + [others] * (n - 1), [values] * n)
    owners = [0] * n
    owners[0] = 1            # one full-value item for agent 1
    owners[n - 1] = 1        # plus the y-valued item
    for g in range(1, n - 1):
        owners[g] = g + 1    # one full-value item for each remaining agent
    return inst, allocation_from_owners(n, owners)


def _rational_above_sqrt(value: Fraction) -> Fraction:
    """Some rational strictly greater than sqrt(value)."""
    return Fraction(isqrt(value.numerator * value.denominator) + 1, value.denominator)


def wef_no_wmms_instance(x, n: int = 3) -> tuple[Instance, Allocation]:
    """Instance plus a WEF(x, 1-x) allocation that gives the last agent zero
    utility despite a positive WMMS. Needs x < 1.

    The weight gap between the last two agents must exceed an irrational
    root; any rational above it works, so one is derived from isqrt.
    """
    x = _unit("x", x)
    if x == 1:
        raise ParameterError("the construction needs x < 1")
    if n < 2:
        raise ParameterError("the construction needs n >= 2")
    rho = (1 + _rational_above_sqrt((5 - x) / (1 - x))) / 2
    t = 1 / (2 * (rho + n))
    weights = [rho * t + Fraction(n - 2 - j, 2) * t for j in range(n - 1)] + [t]
    rows = []
    for i in range(n - 1):
        rows.append([ONE if g == i else ZERO for g in range(n)])
    rows.append(list(weights))
    inst = make_instance(weights, rows)
    owners = list(range(n - 2)) + [n - 2, n - 2]
    return inst, allocation_from_owners(n, owners)


def nmms_no_wmms_instance() -> tuple[Instance, Allocation]:
    """Three-agent instance plus an NMMS-fair allocation giving agent 0 a
    small fraction of her WMMS."""
    weights = [Fraction(16, 20), Fraction(3, 20), Fraction(1, 20)]
    rows = [
        [weights[1], weights[0], weights[2]],
        [ZERO, ONE, ZERO],
        [ZERO, ZERO, ONE],
    ]
    inst = make_instance(weights, rows)
    return inst, allocation_from_owners(3, (0, 1, 2))


def mwnw_no_shares_instance(eps, w) -> Instance:
    """Two agents where the unique Nash optimum leaves agent 0 with an
    arbitrarily small fraction of her NMMS and WMMS."""
    eps = rat(eps)
    w = rat(w)
    if not 0 < eps < Fraction(1, 2):
        raise ParameterError(f"need 0 < eps < 1/2, got {eps}")
    if not 0 < w < 1:
        raise ParameterError(f"need 0 < w < 1, got {w}")
    big = 1 + 1 / w
    rows = [[2 * eps, big, big], [ZERO, ONE, ONE]]
    return make_instance([w, 1 - w], rows)


@dataclass(frozen=True, eq=False)
class Expectation:
    prop: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class NamedFixture:
    id: str
    description: str
    instance: Instance
    expected: tuple[Expectation, ...]


def _run_notion(inst: Instance, alloc: Allocation, notion: str, params: Mapping) -> bool:
    if notion == "wef":
        return fairness.check_wef(inst, alloc, params["x"], params["y"]).satisfied
    if notion == "wprop":
        return fairness.check_wprop(inst, alloc, params["x"], params["y"]).satisfied
    if notion == "wprop-star":
        return fairness.check_wprop_star(inst, alloc, params["x"], params["y"]).satisfied
    if notion == "wwef1":
        return fairness.check_wwef1(inst, alloc).satisfied
    if notion == "oef1":
        return fairness.check_oef1(inst, alloc).satisfied
    if notion == "quota":
        return fairness.check_quota(inst, alloc).satisfied
    if notion in shares.SHARE_KINDS:
        return shares.check_share_fairness(inst, alloc, notion, params["alpha"]).satisfied
    raise ParameterError(f"unknown notion {notion!r}")


def _check_share_equals(inst: Instance, p: Mapping) -> bool:
    return shares.share_value(inst, p["agent"], p["kind"]) == rat(p["value"])


def _check_share_positive(inst: Instance, p: Mapping) -> bool:
    return shares.share_value(inst, p["agent"], p["kind"]) > 0


def _check_verdict(inst: Instance, p: Mapping) -> bool:
    alloc = allocation_from_owners(inst.n, p["owners"])
    return _run_notion(inst, alloc, p["notion"], p) == p["satisfied"]


def _check_agent_utility(inst: Instance, p: Mapping) -> bool:
    alloc = allocation_from_owners(inst.n, p["owners"])
    total = sum((inst.utilities[p["agent"]][g] for g in alloc.bundles[p["agent"]]), ZERO)
    return total == rat(p["value"])


def _check_unique_passing_counts(inst: Instance, p: Mapping) -> bool:
    passing = {
        counts
        for counts in iter_counts(inst.m, inst.n)
        if _run_notion(inst, counts_to_allocation(counts), p["notion"], p)
    }
    return passing == {tuple(p["counts"])}


def _check_jointly_infeasible(inst: Instance, p: Mapping) -> bool:
    first, second = p["first"], p["second"]
    for alloc in enumerate_allocations(inst):
        if _run_notion(inst, alloc, first["notion"], first) and _run_notion(
            inst, alloc, second["notion"], second
        ):
            return False
    return True


def _counts_outcome(inst: Instance, rule: str) -> welfare.CountsOutcome:
    if rule == "mwnw":
        return welfare.mwnw_identical_counts(inst.weights, inst.m)
    if rule == "weg":
        return welfare.weg_identical_counts(inst.weights, inst.m)
    raise ParameterError(f"unknown rule {rule!r}")


def _check_rule_optima_counts(inst: Instance, p: Mapping) -> bool:
    outcome = _counts_outcome(inst, p["rule"])
    return set(outcome.optima) == {tuple(c) for c in p["counts"]}


def _check_rule_optima_owners(inst: Instance, p: Mapping) -> bool:
    if p["rule"] == "mwnw":
        outcome = welfare.max_weighted_nash(inst)
    else:
        outcome = welfare.weg(inst)
    found = {alloc.owners for alloc in outcome.optima}
    return found == {tuple(o) for o in p["owners_set"]}


def _check_every_optimum_fails(inst: Instance, p: Mapping) -> bool:
    outcome = _counts_outcome(inst, p["rule"])
    return all(
        not _run_notion(inst, counts_to_allocation(c), p["notion"], p)
        for c in outcome.optima
    )


def _check_every_optimum_agent_count(inst: Instance, p: Mapping) -> bool:
    outcome = _counts_outcome(inst, p["rule"])
    return all(c[p["agent"]] == p["count"] for c in outcome.optima)


def _check_every_optimum_quota(inst: Instance, p: Mapping) -> bool:
    outcome = _counts_outcome(inst, p["rule"])
    for c in outcome.optima:
        report = fairness.check_quota(inst, counts_to_allocation(c))
        flag = report.lower_ok if p["which"] == "lower" else report.upper_ok
        if flag[p["agent"]] != p["ok"]:
            return False
    return True


def _check_counts_quota(inst: Instance, p: Mapping) -> bool:
    report = fairness.check_quota(inst, counts_to_allocation(p["counts"]))
    if "agent" in p:
        flag = report.lower_ok if p["which"] == "lower" else report.upper_ok
        return flag[p["agent"]] == p["ok"]
    return report.satisfied == p["ok"]


def _check_fair_forces_quota_violation(inst: Instance, p: Mapping) -> bool:
    """Some allocation is share-fair, and every share-fair allocation breaks
    the named quota side for the named agent."""
    thresholds = shares.share_vector(inst, p["kind"])
    alpha = rat(p["alpha"])
    exists_fair = False
    for alloc in enumerate_allocations(inst):
        prof = fairness.AllocationProfile.from_allocation(inst, alloc)
        if all(prof.bundle_values[i][i] >= alpha * thresholds[i] for i in range(inst.n)):
            exists_fair = True
            report = fairness.check_quota(inst, alloc)
            flag = report.lower_ok if p["which"] == "lower" else report.upper_ok
            if flag[p["agent"]]:
                return False
    return exists_fair


_PROPERTY_CHECKS = {
    "share-equals": _check_share_equals,
    "share-positive": _check_share_positive,
    "verdict": _check_verdict,
    "agent-utility": _check_agent_utility,
    "unique-passing-counts": _check_unique_passing_counts,
    "jointly-infeasible": _check_jointly_infeasible,
    "rule-optima-counts": _check_rule_optima_counts,
    "rule-optima-owners": _check_rule_optima_owners,
    "every-optimum-fails": _check_every_optimum_fails,
    "every-optimum-agent-count": _check_every_optimum_agent_count,
    "every-optimum-quota": _check_every_optimum_quota,
    "counts-quota": _check_counts_quota,
    "fair-forces-quota-violation": _check_fair_forces_quota_violation,
}


def verify_expectation(inst: Instance, exp: Expectation) -> bool:
    try:
        handler = _PROPERTY_CHECKS[exp.prop]
    except KeyError:
        raise ParameterError(f"unknown fixture property {exp.prop!r}") from None
    return handler(inst, exp.params)


def verify_fixture(fixture: NamedFixture) -> dict[str, bool]:
    """Run every expectation; keys are '<index>:<property>'."""
    return {
        f"{idx}:{exp.prop}": verify_expectation(fixture.instance, exp)
        for idx, exp in enumerate(fixture.expected)
    }


def catalogue() -> tuple[NamedFixture, ...]:
    """All named counterexample fixtures with their expected properties."""
    fixtures: list[NamedFixture] = []
    half = Fraction(1, 2)

    inst = make_instance(["2/5", "3/5"], [["40", "60"], ["40", "60"]])
    fixtures.append(
        NamedFixture(
            id="aps-vs-cardinal",
            description="APS-fair allocation with zero NMMS/WMMS approximation",
            instance=inst,
            expected=(
                Expectation("share-equals", {"agent": 0, "kind": "mms", "value": 40}),
                Expectation("share-equals", {"agent": 0, "kind": "nmms", "value": 32}),
                Expectation("share-equals", {"agent": 0, "kind": "wmms", "value": 40}),
                Expectation("share-equals", {"agent": 0, "kind": "aps", "value": 0}),
                Expectation(
                    "verdict",
                    {"owners": (1, 1), "notion": "aps", "alpha": ONE, "satisfied": True},
                ),
                Expectation(
                    "verdict",
                    {
                        "owners": (1, 1),
                        "notion": "nmms",
                        "alpha": Fraction(1, 100),
                        "satisfied": False,
                    },
                ),
                Expectation("agent-utility", {"owners": (1, 1), "agent": 0, "value": 0}),
            ),
        )
    )

    inst = make_instance(
        ["1/5", "1/5", "3/5"], [["40", "60"]] * 3
    )
    fixtures.append(
        NamedFixture(
            id="ordinal-vs-cardinal",
            description="everything WMMS/NMMS-fair yet OMMS unprotected",
            instance=inst,
            expected=(
                Expectation("share-equals", {"agent": 2, "kind": "omms", "value": 40}),
                Expectation("share-equals", {"agent": 2, "kind": "wmms", "value": 0}),
                Expectation("share-equals", {"agent": 2, "kind": "nmms", "value": 0}),
                Expectation(
                    "verdict",
                    {"owners": (0, 1), "notion": "wmms", "alpha": ONE, "satisfied": True},
                ),
                Expectation(
                    "verdict",
                    {"owners": (0, 1), "notion": "nmms", "alpha": ONE, "satisfied": True},
                ),
                Expectation(
                    "verdict",
                    {
                        "owners": (0, 1),
                        "notion": "omms",
                        "alpha": Fraction(1, 100),
                        "satisfied": False,
                    },
                ),
            ),
        )
    )

    inst, alloc = wef_no_nmms_instance(half)
    fixtures.append(
        NamedFixture(
            id="wefxy-no-nmms(1/2)",
            description="WEF(0,1/2) allocation starving an agent with positive NMMS",
            instance=inst,
            expected=(
                Expectation(
                    "verdict",
                    {"owners": alloc.owners, "notion": "wef", "x": ZERO, "y": half, "satisfied": True},
                ),
                Expectation("share-positive", {"agent": 0, "kind": "nmms"}),
                Expectation("agent-utility", {"owners": alloc.owners, "agent": 0, "value": 0}),
                Expectation(
                    "verdict",
                    {
                        "owners": alloc.owners,
                        "notion": "nmms",
                        "alpha": Fraction(1, 100),
                        "satisfied": False,
                    },
                ),
            ),
        )
    )

    inst, alloc = wef_no_wmms_instance(half)
    fixtures.append(
        NamedFixture(
            id="wef-no-wmms(1/2)",
            description="WEF(1/2,1/2) allocation starving an agent with positive WMMS",
            instance=inst,
            expected=(
                Expectation(
                    "verdict",
                    {"owners": alloc.owners, "notion": "wef", "x": half, "y": half, "satisfied": True},
                ),
                Expectation("share-positive", {"agent": inst.n - 1, "kind": "wmms"}),
                Expectation(
                    "agent-utility", {"owners": alloc.owners, "agent": inst.n - 1, "value": 0}
                ),
                Expectation(
                    "verdict",
                    {
                        "owners": alloc.owners,
                        "notion": "wmms",
                        "alpha": Fraction(1, 100),
                        "satisfied": False,
                    },
                ),
            ),
        )
    )

    inst, alloc = nmms_no_wmms_instance()
    fixtures.append(
        NamedFixture(
            id="nmms-no-wmms",
            description="NMMS-fair allocation with a vanishing WMMS fraction",
            instance=inst,
            expected=(
                Expectation(
                    "verdict",
                    {"owners": alloc.owners, "notion": "nmms", "alpha": ONE, "satisfied": True},
                ),
                Expectation("share-equals", {"agent": 0, "kind": "wmms", "value": "4/5"}),
                Expectation(
                    "verdict",
                    {
                        "owners": alloc.owners,
                        "notion": "wmms",
                        "alpha": Fraction(1, 4),
                        "satisfied": False,
                    },
                ),
            ),
        )
    )

    eps, w = Fraction(1, 100), Fraction(1, 12)
    inst = mwnw_no_shares_instance(eps, w)
    fixtures.append(
        NamedFixture(
            id="mwnw-no-shares(1/100,1/12)",
            description="unique Nash optimum starves agent 0 of NMMS and WMMS",
            instance=inst,
            expected=(
                Expectation(
                    "rule-optima-owners", {"rule": "mwnw", "owners_set": {(0, 1, 1)}}
                ),
                Expectation(
                    "agent-utility", {"owners": (0, 1, 1), "agent": 0, "value": 2 * eps}
                ),
                Expectation("share-equals", {"agent": 0, "kind": "nmms", "value": 2 * (w + 1)}),
                Expectation(
                    "verdict",
                    {"owners": (0, 1, 1), "notion": "nmms", "alpha": eps, "satisfied": False},
                ),
                Expectation(
                    "verdict",
                    {"owners": (0, 1, 1), "notion": "wmms", "alpha": 2 * eps, "satisfied": False},
                ),
            ),
        )
    )

    inst = identical_instance([4, 1, 1], 3)
    fixtures.append(
        NamedFixture(
            id="quota-identical-411",
            description="three identical items, weights 4:1:1",
            instance=inst,
            expected=(
                Expectation(
                    "unique-passing-counts",
                    {"notion": "wef", "x": ONE, "y": ZERO, "counts": (1, 1, 1)},
                ),
                Expectation(
                    "unique-passing-counts",
                    {"notion": "wef", "x": ZERO, "y": ONE, "counts": (3, 0, 0)},
                ),
                Expectation(
                    "rule-optima-counts", {"rule": "weg", "counts": {(2, 1, 0), (2, 0, 1)}}
                ),
                Expectation("rule-optima-counts", {"rule": "mwnw", "counts": {(1, 1, 1)}}),
                Expectation(
                    "counts-quota",
                    {"counts": (1, 1, 1), "agent": 0, "which": "lower", "ok": False},
                ),
                Expectation(
                    "counts-quota",
                    {"counts": (3, 0, 0), "agent": 0, "which": "upper", "ok": False},
                ),
                Expectation("counts-quota", {"counts": (2, 1, 0), "ok": True}),
                Expectation("counts-quota", {"counts": (2, 0, 1), "ok": True}),
            ),
        )
    )

    inst = identical_instance([2, half, half], 3)
    fixtures.append(
        NamedFixture(
            id="wmms-quota",
            description="WMMS-fairness forces a lower-quota violation",
            instance=inst,
            expected=(
                Expectation("share-equals", {"agent": 0, "kind": "wmms", "value": 1}),
                Expectation("share-equals", {"agent": 1, "kind": "wmms", "value": "1/4"}),
                Expectation(
                    "fair-forces-quota-violation",
                    {"kind": "wmms", "alpha": ONE, "agent": 0, "which": "lower"},
                ),
            ),
        )
    )

    inst = identical_instance([4, half, half], 5)
    fixtures.append(
        NamedFixture(
            id="nmms-quota",
            description="any positive NMMS approximation violates a lower quota",
            instance=inst,
            expected=(
                Expectation("share-equals", {"agent": 0, "kind": "nmms", "value": "12/5"}),
                Expectation(
                    "fair-forces-quota-violation",
                    {"kind": "nmms", "alpha": Fraction(1, 100), "agent": 0, "which": "lower"},
                ),
            ),
        )
    )

    inst = identical_instance([6, 1, 1, 1], 12)
    fixtures.append(
        NamedFixture(
            id="mwnw-upper-quota",
            description="Nash optimum overshoots an upper quota",
            instance=inst,
            expected=(
                Expectation(
                    "every-optimum-agent-count", {"rule": "mwnw", "agent": 0, "count": 9}
                ),
                Expectation(
                    "every-optimum-quota",
                    {"rule": "mwnw", "agent": 0, "which": "upper", "ok": False},
                ),
            ),
        )
    )

    return tuple(fixtures)


def fixture_by_id(fixture_id: str) -> NamedFixture:
    for fixture in catalogue():
        if fixture.id == fixture_id:
            return fixture
    raise ParameterError(f"unknown fixture id {fixture_id!r}")
