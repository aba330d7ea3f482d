"""
Seamless-L0 quantile regression solver
"""
from .models import FitConfig, FitPath, FitResult, InitKind
from .coordinate import coordinate_min, line_min, piecewise_linear_argmin, selo_coordinate_min
from .lla import fit, lla_weights, surrogate_objective
from .path import fit_path

__all__ = [
    "FitConfig",
    "FitPath",
    "FitResult",
    "InitKind",
    "coordinate_min",
    "line_min",
    "piecewise_linear_argmin",
    "selo_coordinate_min",
    "fit",
    "lla_weights",
    "surrogate_objective",
    "fit_path",
]
