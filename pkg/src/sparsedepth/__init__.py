"""Sparse boundary stereo matching and depth-based selective blurring."""

from .errors import ImageFormatError, ParameterError, PipelineError
from .parallel import ExecPlan
from .pipeline import DepthResult, PipelineConfig, estimate_depth, refocus
from .stereo import UNKNOWN, MatchConfig

__all__ = [
    "DepthResult",
    "ExecPlan",
    "ImageFormatError",
    "MatchConfig",
    "ParameterError",
    "PipelineConfig",
    "PipelineError",
    "UNKNOWN",
    "estimate_depth",
    "refocus",
]

__version__ = "0.1.0"
