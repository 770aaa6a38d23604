"""Gaussian-process regression with infinite-width neural-network kernels,
and GP collocation solvers for linear and linearized PDEs."""

from .errors import DomainError, FactorizationError
from .gp import (Block, Observations, Posterior, TrainResult, nlml,
                 nlml_grad, posterior, posterior_and_weights, scan_init,
                 train)
from .jets import LinearOp, kernel_jet, operator_gram
from .kernels import (arcsin_kernel, base_kernel, erf_step, gram_matrix,
                      kernel_value, matern52_kernel, nngp_kernel,
                      nngp_kernel_fixed, relu_step, se_kernel)
from .metrics import max_abs_error, relative_l2_error
from .params import FAMILIES, HyperParams, KernelSpec, n_params
from .quadrature import numeric_nngp_kernel, numeric_step
from .sampling import boundary_equispaced, halton, latin_hypercube, to_box

__version__ = "0.1.0"

__all__ = [
    "Block", "DomainError", "FAMILIES", "FactorizationError", "HyperParams",
    "KernelSpec", "LinearOp", "Observations", "Posterior", "TrainResult",
    "arcsin_kernel", "base_kernel", "boundary_equispaced", "erf_step",
    "gram_matrix", "halton", "kernel_jet", "kernel_value", "latin_hypercube",
    "matern52_kernel", "max_abs_error", "n_params", "nlml", "nlml_grad",
    "nngp_kernel", "nngp_kernel_fixed", "numeric_nngp_kernel", "numeric_step",
    "operator_gram", "posterior", "posterior_and_weights", "relative_l2_error",
    "relu_step", "scan_init", "se_kernel", "to_box", "train",
]
