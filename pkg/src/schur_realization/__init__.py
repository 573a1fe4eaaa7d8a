"""
Schur Realization Module

Constructs, classifies, completes and verifies transfer-function
realizations of Schur multipliers of the Drury-Arveson space on the unit
ball of C^d, at the scale of small dense matrices.
"""

__version__ = "1.0.0"

from .colligation import BallPoint, Colligation, OperatorTuple, OutputPair, classify, transfer_eval
from .completion import CompletionParameter, classify_family, parrott_complete
from .config import JobConfig, SamplingConfig
from .exceptions import RealizationError
from .kernels import SchurEvaluator, gram_certify
from .numerics import Tolerances
from .overlap import SampledRKHS, coisometry_and_overlap
from .realization import (
    enumerate_representers,
    example33_suite,
    functional_model,
    gleason_check,
    observability_and_equivalence,
    realize_from_pair_cholesky,
    realize_with_pair,
)
from .report import Report

__all__ = [
    "BallPoint",
    "Colligation",
    "CompletionParameter",
    "JobConfig",
    "OperatorTuple",
    "OutputPair",
    "RealizationError",
    "Report",
    "SampledRKHS",
    "SamplingConfig",
    "SchurEvaluator",
    "Tolerances",
    "classify",
    "classify_family",
    "coisometry_and_overlap",
    "enumerate_representers",
    "example33_suite",
    "functional_model",
    "gleason_check",
    "gram_certify",
    "observability_and_equivalence",
    "parrott_complete",
    "realize_from_pair_cholesky",
    "realize_with_pair",
    "transfer_eval",
]
