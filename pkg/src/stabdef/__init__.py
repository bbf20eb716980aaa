"""Finite-scale stability: order-property ladders, double limits, local types
and defining predicates for formula tables."""

__version__ = "0.1.0"

from .table import (
    FormulaTable,
    GroupFunction,
    TableError,
    TableParseError,
    TableValidationError,
    constant,
    from_group,
    half_graph,
    identity,
    load_table,
    parse_table,
    restrict,
    save_table,
    transpose,
)
from .kernel import evaluate, parse, sample_table, to_text
from .order import (
    DoubleLimitReport,
    Ladder,
    double_limit,
    find_ladder,
    ladder_index,
    ladder_lower_bound,
    ladder_to_gap,
    verify_ladder,
)
from .types_space import (
    TypePoint,
    density_character,
    extract_convergent_subsequence,
    realized_types,
    sup_dist,
)
from .definability import (
    ConvexDefinition,
    MajorityDefinition,
    RowTarget,
    definability_report,
    greedy_bound,
    greedy_define,
    lp_define,
    majority_define,
    uniform_majority_bound,
    verify_definition,
)
