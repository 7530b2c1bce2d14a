"""Geometric measures of entanglement for pure and mixed multipartite states."""

from .appendix import (FhsSpec, constrained_log_min, fhs, fhs_grid_min, fhs_minimum,
                       gt_concavity_counterexample, gt_isotropic_closed)
from .core import (DensityMatrix, MultipartiteSpace, ProductState, PureState, apply_local,
                   as_density, bures_distance, entropies, fidelity, mixture, partial_trace,
                   projector, random_density, random_product, random_pure, random_unitary,
                   relative_entropy, tensor_assemble, trace_distance)
from .errors import BudgetError, DimensionError, GeomentError, InvalidStateError, StateFileError
from .families import (ClassLabel, IsotropicSpec, MaxCorrSpec, classify, concurrence,
                       detect_isotropic, detect_maxcorr, iso_closed_forms, make_dicke, make_ghz,
                       make_isotropic, make_maxcorr, make_mes, make_w, maxcorr_closed_forms,
                       rank2_label, rank2_log_roof, two_qubit_closed_forms)
from .graphs import (GraphAnalysis, GraphSpec, analyze_graph, build_delta, build_graph_state,
                     verify_universal_css)
from .mixed import (gm_mixed, gt, gt_lower_bound, is_certified_separable, lambda2_mixed,
                    trace_ent_bracket)
from .pure import DEFAULT_OPTIONS, OptimizerOptions, gm_pure, lambda2_pure
from .report import MeasureReport, build_report, check_hierarchy, render
from .roof import (DEFAULT_ROOF, Decomposition, RoofOptions, RoofResult, certify, convex_roof,
                   equal_overlap_decomposition, fidelity_extension)
from .statefile import format_state, load_state, parse_state, save_state

__all__ = [
    "FhsSpec", "constrained_log_min", "fhs", "fhs_grid_min", "fhs_minimum",
    "gt_concavity_counterexample", "gt_isotropic_closed", "DensityMatrix", "MultipartiteSpace",
    "ProductState", "PureState", "apply_local", "as_density", "bures_distance", "entropies",
    "fidelity", "mixture", "partial_trace", "projector", "random_density", "random_product",
    "random_pure", "random_unitary", "relative_entropy", "tensor_assemble", "trace_distance",
    "BudgetError", "DimensionError", "GeomentError", "InvalidStateError", "StateFileError",
    "ClassLabel", "IsotropicSpec", "MaxCorrSpec", "classify", "concurrence",
    "detect_isotropic", "detect_maxcorr", "iso_closed_forms", "make_dicke", "make_ghz",
    "make_isotropic", "make_maxcorr", "make_mes", "make_w", "maxcorr_closed_forms",
    "rank2_label", "rank2_log_roof", "two_qubit_closed_forms", "GraphAnalysis", "GraphSpec",
    "analyze_graph", "build_delta", "build_graph_state", "verify_universal_css", "gm_mixed",
    "gt", "gt_lower_bound", "is_certified_separable", "lambda2_mixed", "trace_ent_bracket",
    "DEFAULT_OPTIONS", "OptimizerOptions", "gm_pure", "lambda2_pure", "MeasureReport",
    "build_report", "check_hierarchy", "render", "DEFAULT_ROOF", "Decomposition",
    "RoofOptions", "RoofResult", "certify", "convex_roof", "equal_overlap_decomposition",
    "fidelity_extension", "format_state", "load_state", "parse_state", "save_state",
]

__version__ = "0.1.0"
