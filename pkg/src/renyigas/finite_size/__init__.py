"""Finite-size trace defects tr D_alpha(a, Lambda; f) and their scaling."""
from .entropy import EntanglementEstimate, LocalEntropy, ee_estimate, local_entropy
from .kernel import KernelTable, kernel_table, kernel_transform
from .operator import (NODE_CAP, DiscretizedOperator, TraceResult, apply_to_spectrum,
                       build_w, grid_nodes, spacing_rule, trace_d, trace_f_of_w)
from .oracle import hs_oracle_quadratic
from .scaling import MODES, ScalingReport, fit_slope, scaling_scan
from .sector import SectorSpectrum, sector_spectrum

__all__ = [
    "EntanglementEstimate", "LocalEntropy", "ee_estimate", "local_entropy",
    "KernelTable", "kernel_table", "kernel_transform",
    "NODE_CAP", "DiscretizedOperator", "TraceResult", "apply_to_spectrum",
    "build_w", "grid_nodes", "spacing_rule", "trace_d", "trace_f_of_w",
    "hs_oracle_quadratic", "MODES", "ScalingReport", "fit_slope", "scaling_scan",
    "SectorSpectrum", "sector_spectrum",
]
