"""Certified finite-dimensional experiments on summing operators and tensor norms."""

from .operators import LinearMap, op_norm
from .report import ExperimentReport, verify_report
from .spaces import GridFunction, SpaceDescriptor, TensorSpace, Vector
from .summing import WeakFamily, gamma2_norm, pi2, pi_pq_lower_search
from .tensor import Tensor2, Tensor3, eps_norm, proj_norm, z_norm_bounds

__version__ = "0.1.0"
