"""Balanced partitioning into highly connected parts."""

from .exact import SolverSettings, export_lp, solve_exact
from .graph import (
    Cutset,
    Graph,
    connected_components,
    is_q_connected,
    minimal_separator,
    minimum_vertex_cutset,
    minimum_vertex_cutset_for_part,
)
from .heuristic import HeuristicSettings, solve_heuristic
from .instance import (
    CostMatrix,
    Instance,
    build_cost_matrix,
    generate,
    load_instance,
    preprocess_extract_biconnected,
    preprocess_raise_connectivity,
    save_instance,
)
from .model import (
    MipModel,
    Partition,
    build_hess_model,
    evaluate_compactness,
    theorem1_oracle,
    verify_feasible,
)
from .report import RunRecord, approximation_gap, geometric_mean_ratio, run_settings_matrix
from .result import SolveResult
from .separation import SeparatorCut, separate

__version__ = "0.1.0"

__all__ = [
    "Cutset",
    "CostMatrix",
    "Graph",
    "HeuristicSettings",
    "Instance",
    "MipModel",
    "Partition",
    "RunRecord",
    "SeparatorCut",
    "SolveResult",
    "SolverSettings",
    "approximation_gap",
    "build_cost_matrix",
    "build_hess_model",
    "connected_components",
    "evaluate_compactness",
    "export_lp",
    "generate",
    "geometric_mean_ratio",
    "is_q_connected",
    "load_instance",
    "minimal_separator",
    "minimum_vertex_cutset",
    "minimum_vertex_cutset_for_part",
    "preprocess_extract_biconnected",
    "preprocess_raise_connectivity",
    "run_settings_matrix",
    "save_instance",
    "separate",
    "solve_exact",
    "solve_heuristic",
    "theorem1_oracle",
    "verify_feasible",
]
