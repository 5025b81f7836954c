"""Multi-type fractional allocation: mechanisms and axiom oracles.

The package implements three mechanisms for allocating several types of
divisible items among agents with partial (including CP-net) preferences
over bundles: random priority, simultaneous eating, and general
dictatorship over a priority-group structure.  Alongside them it ships
exact verification oracles for the fairness and efficiency axioms the
mechanisms are usually measured by, backed by an exact rational simplex.
"""

from .axioms import (
    ImprovableTuple,
    PropertyReport,
    SdVerdict,
    check_decomposability,
    check_envy,
    check_ete,
    check_ex_post_efficiency,
    check_ordinal_fairness,
    check_sd_efficiency,
    check_strategyproofness,
    check_upper_invariance,
    find_generalized_cycle,
    improvable_tuples,
    sd_compare,
)
from .mechanisms import (
    MpsTrace,
    MrpExact,
    MrpMonteCarlo,
    MrpSingle,
    mgd,
    mgd_decompose,
    mps,
    mrp,
    serial_dictatorship,
)
from .model import (
    DiscreteAssignment,
    FractionalAssignment,
    Instance,
    Lottery,
    TypeDef,
    build_instance,
    enumerate_bundles,
    from_discrete,
    validate_assignment,
)
from .preferences import (
    CPNet,
    PartialOrder,
    PreferenceGraph,
    ext,
    induce_order,
    is_uit,
    preference_graph,
    top_cpnet,
    topological_sort,
    upper_contour_set,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
