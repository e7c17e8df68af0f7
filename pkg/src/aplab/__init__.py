"""Discrete experiments with maximal operators and weight classes on a 1-D grid."""

from .grid_core import Grid1D, GridFunction, ParameterError, Window
from .maximal_ops import local_maximal, maximal, sharp, sharp_delta
from .singular_ops import hilbert, hilbert_truncated_max
from .weight_lab import WeightSpec, ap_constant, cp_estimate, make_weight

__version__ = "0.1.0"
