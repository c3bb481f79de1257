"""imsolve: exact toolkit for the sampled influence maximization problem.

Pipeline: load a social network, sample (or enumerate) live-arc scenarios,
shrink the covering model by singleton / strongly-connected / isomorphic
aggregation, then solve exactly by Benders decomposition with closed-form
duals, or export the explicit model as LP/MPS text.
"""

from .benders import (
    BendersCut,
    MasterState,
    ReachCache,
    SolveResult,
    closed_form_cut,
    master_enumerate,
    phi,
    separate,
    solve,
    submodular_rows,
)
from .errors import CapExceeded, EdgeListError, ParameterError, StructureError
from .model import MipInstance, build_full, build_reduced, export, parse_lp, parse_mps
from .network import (
    DiffusionParams,
    Model,
    SocialNetwork,
    density,
    icm_params,
    load_edge_list,
    ltm_params,
)
from .oracle import brute_force_opt, spread
from .presolve import (
    CondensedGraph,
    PresolveLevel,
    PresolveStats,
    ReachSet,
    ReducedModel,
    apply_ina,
    apply_scna,
    apply_sna,
    presolve_pipeline,
    reach_sets,
    reduction_stats,
    scc_decompose,
)
from .sampling import (
    LiveArcGraph,
    ScenarioMode,
    ScenarioSet,
    enumerate_scenarios,
    sample_icm,
    sample_ltm,
)
from .theory import (
    BipartiteInstance,
    check_condition_11,
    p_star,
    reduce_bipartite_ltm,
    solve_bipartite,
    verify_theorem1,
    verify_theorem2,
)

__version__ = "0.1.0"

__all__ = [
    "BendersCut",
    "BipartiteInstance",
    "CapExceeded",
    "CondensedGraph",
    "DiffusionParams",
    "EdgeListError",
    "LiveArcGraph",
    "MasterState",
    "MipInstance",
    "Model",
    "ParameterError",
    "PresolveLevel",
    "PresolveStats",
    "ReachCache",
    "ReachSet",
    "ReducedModel",
    "ScenarioMode",
    "ScenarioSet",
    "SocialNetwork",
    "SolveResult",
    "StructureError",
    "apply_ina",
    "apply_scna",
    "apply_sna",
    "brute_force_opt",
    "build_full",
    "build_reduced",
    "check_condition_11",
    "closed_form_cut",
    "density",
    "enumerate_scenarios",
    "export",
    "icm_params",
    "load_edge_list",
    "ltm_params",
    "master_enumerate",
    "p_star",
    "parse_lp",
    "parse_mps",
    "phi",
    "presolve_pipeline",
    "reach_sets",
    "reduce_bipartite_ltm",
    "reduction_stats",
    "sample_icm",
    "sample_ltm",
    "scc_decompose",
    "separate",
    "solve",
    "solve_bipartite",
    "spread",
    "submodular_rows",
    "verify_theorem1",
    "verify_theorem2",
]
