"""Command-line interface.

Exit codes: 0 all checks passed, 1 a verdict failed, 2 input error,
3 a search or enumeration budget was exceeded.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import fairness, fixtures, picking, shares, welfare
from .core import (
    Allocation,
    Instance,
    allocation_to_json,
    instance_to_json,
    parse_allocation,
    rat,
    validate_instance,
)
from .errors import BudgetExceededError, FairDivisionError, TooManyItemsError
from .report import (
    RunReport,
    render_figures,
    share_report_to_json,
    verdict_entry,
    write_shares_csv,
    write_verdicts_csv,
)

EXIT_VERDICT_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_INPUT_ERROR, f"cannot read {path}: {exc}")


def _load_instance(path: str) -> Instance:
    raw = _load_json(path)
    try:
        return validate_instance(raw)
    except FairDivisionError as exc:
        _fail(EXIT_INPUT_ERROR, f"invalid instance {path}: {exc}")


def _load_allocation(path: str, inst: Instance) -> Allocation:
    raw = _load_json(path)
    try:
        return parse_allocation(raw, inst)
    except FairDivisionError as exc:
        _fail(EXIT_INPUT_ERROR, f"invalid allocation {path}: {exc}")


def _parse_rational(value: str, name: str) -> Fraction:
    try:
        return rat(value)
    except (ValueError, ZeroDivisionError) as exc:
        _fail(EXIT_INPUT_ERROR, f"bad rational for {name}: {exc}")


class _Budgets:
    def __init__(self, enum_budget: int, search_budget: int, aps_cap: int, jobs: int):
        self.enum_budget = enum_budget
        self.search_budget = search_budget
        self.aps_cap = aps_cap
        self.jobs = jobs


@click.group()
@click.option(
    "--enum-budget",
    type=int,
    default=10**7,
    envvar="FAIRDIV_ENUM_BUDGET",
    show_default=True,
    help="Max allocations an exhaustive rule may enumerate.",
)
@click.option(
    "--search-budget",
    type=int,
    default=10**7,
    envvar="FAIRDIV_SEARCH_BUDGET",
    show_default=True,
    help="Max states a share partition search may visit.",
)
@click.option(
    "--aps-cap",
    type=int,
    default=14,
    envvar="FAIRDIV_APS_CAP",
    show_default=True,
    help="Max item count for AnyPrice-share computations.",
)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes for enumeration-based rules.")
@click.pass_context
def main(ctx, enum_budget: int, search_budget: int, aps_cap: int, jobs: int):
    """Weighted fair division of indivisible items, in exact arithmetic."""
    ctx.obj = _Budgets(enum_budget, search_budget, aps_cap, jobs)


ALGORITHMS = ("picking", "divisor", "mwnw", "weg", "round-robin", "half-nmms")


def _run_algorithm(inst: Instance, algorithm: str, x: Fraction, method: str | None,
                   budgets: _Budgets) -> tuple[Allocation, list[Allocation] | None, dict]:
    if algorithm == "picking":
        seq = picking.adaptive_wef_sequence(inst, x)
        return picking.run_sequence(inst, seq), None, {"x": x}
    if algorithm == "divisor":
        if method not in picking.DIVISOR_METHODS:
            _fail(EXIT_INPUT_ERROR, f"--method must be one of {sorted(picking.DIVISOR_METHODS)}")
        seq = picking.divisor_sequence(inst, picking.DIVISOR_METHODS[method])
        return picking.run_sequence(inst, seq), None, {"method": method}
    if algorithm == "mwnw":
        outcome = welfare.max_weighted_nash(inst, budget=budgets.enum_budget, jobs=budgets.jobs)
        return outcome.canonical, list(outcome.optima), {}
    if algorithm == "weg":
        outcome = welfare.weg(inst, budget=budgets.enum_budget, jobs=budgets.jobs)
        return outcome.canonical, list(outcome.optima), {}
    if algorithm == "round-robin":
        return welfare.ordered_round_robin(inst), None, {}
    if algorithm == "half-nmms":
        return welfare.half_nmms_allocate(inst, budget=budgets.search_budget), None, {}
    _fail(EXIT_INPUT_ERROR, f"unknown algorithm {algorithm!r}")


@main.command()
@click.argument("instance_file", type=click.Path())
@click.option("--algorithm", type=click.Choice(ALGORITHMS), required=True)
@click.option("--x", "x_str", default="1/2", show_default=True,
              help="Parameter for --algorithm picking.")
@click.option("--method", type=str, default=None,
              help="Divisor method: webster, jefferson, or adams.")
@click.option("--all-optima", is_flag=True, help="Report every optimum of mwnw/weg.")
@click.option("--allocation-out", type=click.Path(), default=None,
              help="Write the resulting allocation JSON here.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@click.pass_obj
def allocate(budgets: _Budgets, instance_file: str, algorithm: str, x_str: str,
             method: str | None, all_optima: bool, allocation_out: str | None,
             as_json: bool):
    """Run an allocation algorithm on an instance JSON file."""
    inst = _load_instance(instance_file)
    x = _parse_rational(x_str, "--x")
    started = time.perf_counter()
    try:
        alloc, optima, params = _run_algorithm(inst, algorithm, x, method, budgets)
    except BudgetExceededError as exc:
        _fail(EXIT_BUDGET, str(exc))
    except FairDivisionError as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    elapsed = (time.perf_counter() - started) * 1000
    report = RunReport(
        instance=inst,
        algorithm=algorithm,
        params=params,
        allocation=alloc,
        optima=optima if all_optima and optima is not None else None,
        elapsed_ms=elapsed,
    )
    if allocation_out:
        with open(allocation_out, "w", encoding="utf-8") as handle:
            json.dump(allocation_to_json(alloc), handle, indent=2, sort_keys=True)
            handle.write("\n")
    click.echo(json.dumps(report.to_json(), indent=2) if as_json else report.to_text())


NOTIONS = ("wef", "wprop", "wprop-star", "wwef1", "oef1", "quota")


def _run_verifier(inst: Instance, alloc: Allocation, notion: str,
                  x: Fraction | None, y: Fraction | None) -> dict:
    if notion in ("wef", "wprop", "wprop-star"):
        if x is None or y is None:
            _fail(EXIT_INPUT_ERROR, f"--notion {notion} requires --x and --y")
        checker = {
            "wef": fairness.check_wef,
            "wprop": fairness.check_wprop,
            "wprop-star": fairness.check_wprop_star,
        }[notion]
        return verdict_entry(notion, {"x": x, "y": y},
                             checker(inst, alloc, x, y, include_satisfied=True))
    if notion == "wwef1":
        return verdict_entry(notion, {}, fairness.check_wwef1(inst, alloc, include_satisfied=True))
    if notion == "oef1":
        return verdict_entry(notion, {}, fairness.check_oef1(inst, alloc))
    if notion == "quota":
        return verdict_entry(notion, {}, fairness.check_quota(inst, alloc))
    _fail(EXIT_INPUT_ERROR, f"unknown notion {notion!r}")


@main.command()
@click.argument("instance_file", type=click.Path())
@click.argument("allocation_file", type=click.Path())
@click.option("--notion", "notions", type=click.Choice(NOTIONS), multiple=True,
              required=True, help="May be given several times.")
@click.option("--x", "x_str", default=None, help="Parameter for wef/wprop notions.")
@click.option("--y", "y_str", default=None, help="Parameter for wef/wprop notions.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@click.pass_obj
def verify(budgets: _Budgets, instance_file: str, allocation_file: str,
           notions: tuple[str, ...], x_str: str | None, y_str: str | None,
           as_json: bool):
    """Check fairness notions for an instance/allocation pair."""
    inst = _load_instance(instance_file)
    alloc = _load_allocation(allocation_file, inst)
    x = _parse_rational(x_str, "--x") if x_str is not None else None
    y = _parse_rational(y_str, "--y") if y_str is not None else None
    verdicts = []
    started = time.perf_counter()
    for notion in notions:
        try:
            verdicts.append(_run_verifier(inst, alloc, notion, x, y))
        except FairDivisionError as exc:
            _fail(EXIT_INPUT_ERROR, f"{notion}: {exc}")
    elapsed = (time.perf_counter() - started) * 1000
    report = RunReport(instance=inst, allocation=alloc, verdicts=verdicts,
                       elapsed_ms=elapsed)
    click.echo(json.dumps(report.to_json(), indent=2) if as_json else report.to_text())
    if not all(v["satisfied"] for v in verdicts):
        sys.exit(EXIT_VERDICT_FAILED)


@main.command(name="shares")
@click.argument("instance_file", type=click.Path())
@click.option("--agent", "agent_str", default="all", show_default=True,
              help="Agent index or 'all'.")
@click.pass_obj
def shares_command(budgets: _Budgets, instance_file: str, agent_str: str):
    """Emit the per-agent share table (mms, nmms, wmms, omms, aps) as JSON."""
    inst = _load_instance(instance_file)
    try:
        report = shares.share_report(inst, budget=budgets.search_budget,
                                     item_cap=budgets.aps_cap)
    except (BudgetExceededError, TooManyItemsError) as exc:
        _fail(EXIT_BUDGET, str(exc))
    data = share_report_to_json(report)
    if agent_str != "all":
        try:
            agent = int(agent_str)
            data = {"agents": [data["agents"][agent]]}
        except (ValueError, IndexError):
            _fail(EXIT_INPUT_ERROR, f"bad agent {agent_str!r}")
    click.echo(json.dumps(data, indent=2))


@main.group(name="fixtures")
def fixtures_group():
    """List or emit the built-in counterexample fixtures."""


@fixtures_group.command(name="list")
def fixtures_list():
    for fixture in fixtures.catalogue():
        inst = fixture.instance
        click.echo(
            f"{fixture.id:30s} n={inst.n} m={inst.m} "
            f"expectations={len(fixture.expected)}  {fixture.description}"
        )


@fixtures_group.command(name="emit")
@click.argument("fixture_id")
@click.option("--output", type=click.Path(), default=None,
              help="Write the instance JSON here instead of stdout.")
def fixtures_emit(fixture_id: str, output: str | None):
    try:
        fixture = fixtures.fixture_by_id(fixture_id)
    except FairDivisionError as exc:
        _fail(EXIT_INPUT_ERROR, str(exc))
    data = {"id": fixture.id, "description": fixture.description}
    data.update(instance_to_json(fixture.instance))
    text = json.dumps(data, indent=2) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


DEFAULT_REPORT_NOTIONS = (
    ("wef", Fraction(1), Fraction(0)),
    ("wef", Fraction(1, 2), Fraction(1, 2)),
    ("wef", Fraction(0), Fraction(1)),
    ("wprop", Fraction(0), Fraction(1)),
    ("wwef1", None, None),
    ("oef1", None, None),
)


@main.command(name="report")
@click.argument("instance_file", type=click.Path())
@click.option("--allocation", "allocation_file", type=click.Path(), default=None,
              help="Report on this allocation instead of running an algorithm.")
@click.option("--algorithm", type=click.Choice(ALGORITHMS), default="picking",
              show_default=True)
@click.option("--x", "x_str", default="1/2", show_default=True)
@click.option("--method", type=str, default=None)
@click.option("--outdir", type=click.Path(), required=True,
              help="Directory for report.json, CSV tables, and figures.")
@click.pass_obj
def report_command(budgets: _Budgets, instance_file: str, allocation_file: str | None,
                   algorithm: str, x_str: str, method: str | None, outdir: str):
    """Full report: allocation, verdicts, share table, CSVs, and figures."""
    inst = _load_instance(instance_file)
    started = time.perf_counter()
    if allocation_file is not None:
        alloc = _load_allocation(allocation_file, inst)
        algo_name, params = None, {}
    else:
        x = _parse_rational(x_str, "--x")
        try:
            alloc, _, params = _run_algorithm(inst, algorithm, x, method, budgets)
        except BudgetExceededError as exc:
            _fail(EXIT_BUDGET, str(exc))
        except FairDivisionError as exc:
            _fail(EXIT_INPUT_ERROR, str(exc))
        algo_name = algorithm
    verdicts = []
    for notion, x_param, y_param in DEFAULT_REPORT_NOTIONS:
        verdicts.append(_run_verifier(inst, alloc, notion, x_param, y_param))
    if inst.identical_items:
        verdicts.append(verdict_entry("quota", {}, fairness.check_quota(inst, alloc)))
    try:
        share_table = shares.share_report(inst, budget=budgets.search_budget,
                                          item_cap=budgets.aps_cap)
    except (BudgetExceededError, TooManyItemsError) as exc:
        _fail(EXIT_BUDGET, str(exc))
    elapsed = (time.perf_counter() - started) * 1000
    run = RunReport(instance=inst, algorithm=algo_name, params=params,
                    allocation=alloc, verdicts=verdicts, shares=share_table,
                    elapsed_ms=elapsed)

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(run.to_json(), indent=2) + "\n", encoding="utf-8"
    )
    (out / "allocation.json").write_text(
        json.dumps(allocation_to_json(alloc), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    write_shares_csv(out / "shares.csv", inst, share_table, alloc)
    write_verdicts_csv(out / "verdicts.csv", verdicts)
    figure_paths = render_figures(out, inst, alloc, share_table)
    click.echo(run.to_text())
    for path in [out / "report.json", out / "shares.csv", out / "verdicts.csv"] + figure_paths:
        click.echo(f"wrote {path}")
    if not all(v["satisfied"] for v in verdicts):
        sys.exit(EXIT_VERDICT_FAILED)


if __name__ == "__main__":
    main()
