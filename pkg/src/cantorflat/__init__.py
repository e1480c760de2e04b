"""C^k functions flat on a Cantor set whose level sets have prescribed fractal dimension."""

from .errors import (AddressError, CantorFlatError, CertificationError, DegenerateError, DomainError,
                     NoPlanError, ParameterError, UnsupportedError)
from .numerics import BoundedReal, ln, exp, log_ratio, pow_rat
from .kernel import PhiKernel, compute_K, make_kernel, phi_derivative, phi_eval
from .geometry import ConstructionParams, GapSegment, GenerationMetrics, Rect, locate, metrics, validate
from .evaluator import EvalResult, evaluate, flatness_probe, kth_diff
from .cantor import (CoverSet, DimensionReport, box_count, closed_form_dimensions, cover_A, cover_D,
                     cover_level_set, estimate_dimension, membership)
from .planner import Certificate, PlanRequest, PlanResult, certify, plan

__all__ = [
    "AddressError", "CantorFlatError", "CertificationError", "DegenerateError", "DomainError",
    "NoPlanError", "ParameterError", "UnsupportedError",
    "BoundedReal", "ln", "exp", "log_ratio", "pow_rat",
    "PhiKernel", "compute_K", "make_kernel", "phi_derivative", "phi_eval",
    "ConstructionParams", "GapSegment", "GenerationMetrics", "Rect", "locate", "metrics", "validate",
    "EvalResult", "evaluate", "flatness_probe", "kth_diff",
    "CoverSet", "DimensionReport", "box_count", "closed_form_dimensions", "cover_A", "cover_D",
    "cover_level_set", "estimate_dimension", "membership",
    "Certificate", "PlanRequest", "PlanResult", "certify", "plan",
]
__version__ = "0.1.0"
