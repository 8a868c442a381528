"""Weighted fair division of indivisible items, in exact rational arithmetic.

Agents have positive entitlements (weights) and additive nonnegative
utilities. The library provides allocation rules (picking sequences, divisor
methods, weighted Nash welfare, weighted egalitarian, ordered round robin,
a half-NMMS greedy), verifiers for the weighted fairness notions built on
them, exact share thresholds (MMS, NMMS, WMMS, OMMS, APS), and a catalogue
of counterexample fixtures with self-verifying expectations.
"""

from .core import (
    Allocation,
    IdenticalCounts,
    Instance,
    Rational,
    allocation_from_owners,
    allocation_to_json,
    bundle_utility,
    counts_to_allocation,
    enumerate_allocations,
    identical_instance,
    instance_to_json,
    iter_counts,
    iter_owner_vectors,
    make_allocation,
    make_instance,
    parse_allocation,
    rat,
    rat_str,
    validate_instance,
)
from .errors import (
    AllocationError,
    BudgetExceededError,
    DimensionMismatchError,
    DivisorRangeError,
    FairDivisionError,
    InstanceError,
    NegativeUtilityError,
    NonPositiveWeightError,
    NotBinaryError,
    NotIdenticalItemsError,
    NotWastelessError,
    ParameterError,
    PreconditionViolatedError,
    SearchBudgetExceededError,
    TooFewAgentsError,
    TooManyItemsError,
)
from .fairness import (
    QuotaReport,
    Verdict,
    Witness,
    check_oef1,
    check_quota,
    check_wef,
    check_wprop,
    check_wprop_star,
    check_wwef1,
    weighted_envy,
)
from .picking import (
    DIVISOR_METHODS,
    PickingSequence,
    adams,
    adaptive_wef_sequence,
    check_wef_prefix_condition,
    check_wprop_prefix_condition,
    divisor_function_for,
    divisor_sequence,
    jefferson,
    run_sequence,
    webster,
)
from .shares import (
    AgentShares,
    SHARE_KINDS,
    ShareReport,
    aps,
    check_share_fairness,
    mms,
    nmms,
    omms,
    share_report,
    share_value,
    share_vector,
    wmms,
)
from .welfare import (
    CountsOutcome,
    RuleOutcome,
    half_nmms_allocate,
    max_weighted_nash,
    mwnw_identical_counts,
    ordered_round_robin,
    weg,
    weg_binary_quota_graph,
    weg_identical,
    weg_identical_counts,
)
from .fixtures import (
    Expectation,
    NamedFixture,
    catalogue,
    fixture_by_id,
    incompatibility_instance,
    mwnw_no_shares_instance,
    mwnw_violates_wprop_instance,
    nmms_no_wmms_instance,
    nmms_upper_bound_instance,
    verify_expectation,
    verify_fixture,
    wef_no_nmms_instance,
    wef_no_wmms_instance,
)

__version__ = "0.1.0"
