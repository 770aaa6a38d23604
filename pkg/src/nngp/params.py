"""Kernel families and their log-space hyperparameter containers.

All positive hyperparameters (variances, length-scales) are stored as
logarithms so the optimizer works unconstrained; exponentiation happens in
the accessor properties. The flat packing order used by `to_vector` /
`from_vector` is fixed and documented there — finite-difference gradients
and the Halton initialization map both rely on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("nngp_erf", "nngp_relu", "arcsin", "se", "matern52")

#: Families built by iterating a layer recursion on the bilinear base kernel.
NNGP_FAMILIES = ("nngp_erf", "nngp_relu")

#: Families parameterized by the input-layer variances (Lambda, bias).
BASE_KERNEL_FAMILIES = ("nngp_erf", "nngp_relu", "arcsin")

#: Stationary baseline families parameterized by length-scale + signal variance.
STATIONARY_FAMILIES = ("se", "matern52")

#: exp(log_noise) is clipped below this to avoid exact-zero pathologies.
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Which covariance family to use, and its structural (non-learned) shape.

    family    one of `FAMILIES`
    input_dim dimensionality of the input points
    depth     number of recursion layers (NNGP families; 0 = base kernel only)
    ard       per-dimension length-scales for se/matern52
    """

    family: str
    input_dim: int
    depth: int = 0
    ard: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; "
                             f"expected one of {FAMILIES}")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.family in NNGP_FAMILIES:
            if self.depth < 0:
                raise ValueError("depth must be >= 0")
        elif self.depth not in (0,):
            raise ValueError(f"family {self.family!r} has no layer recursion; "
                             "depth must be 0")
        if self.ard and self.family not in STATIONARY_FAMILIES:
            raise ValueError("ard applies to se/matern52 only")

    @property
    def n_kernel_params(self) -> int:
        """Number of learned kernel hyperparameters (noise excluded)."""
        if self.family in NNGP_FAMILIES:
            # input_dim weight variances + 1 bias variance + (w, b) per layer
            return self.input_dim + 1 + 2 * self.depth
        if self.family == "arcsin":
            return self.input_dim + 1
        n_ls = self.input_dim if self.ard else 1
        return n_ls + 1


def n_params(spec: KernelSpec, n_noise: int) -> int:
    """Total flat-vector length for (kernel hyperparameters, noise variances)."""
    return spec.n_kernel_params + n_noise


@dataclass
class HyperParams:
    """Log-space hyperparameters for one `KernelSpec` plus noise variances.

    Unused groups are empty arrays (e.g. `log_lengthscale` for NNGP
    families). `log_noise` holds one log variance per observation block.
    """

    log_weight_in: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_bias_in: float = 0.0
    log_weight: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_bias: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_lengthscale: np.ndarray = field(default_factory=lambda: np.empty(0))
    log_signal: float = 0.0
    log_noise: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.log_weight_in = np.atleast_1d(np.asarray(self.log_weight_in, float))
        self.log_weight = np.atleast_1d(np.asarray(self.log_weight, float))
        self.log_bias = np.atleast_1d(np.asarray(self.log_bias, float))
        self.log_lengthscale = np.atleast_1d(
            np.asarray(self.log_lengthscale, float))
        self.log_noise = np.atleast_1d(np.asarray(self.log_noise, float))

    # -- exponentiated accessors ------------------------------------------
    @property
    def weight_var_in(self) -> np.ndarray:
        """Diagonal of Lambda: per-input-coordinate weight variances."""
        return np.exp(self.log_weight_in)

    @property
    def bias_var_in(self) -> float:
        return float(np.exp(self.log_bias_in))

    @property
    def weight_var(self) -> np.ndarray:
        return np.exp(self.log_weight)

    @property
    def bias_var(self) -> np.ndarray:
        return np.exp(self.log_bias)

    @property
    def lengthscale(self) -> np.ndarray:
        return np.exp(self.log_lengthscale)

    @property
    def signal_var(self) -> float:
        return float(np.exp(self.log_signal))

    @property
    def noise_var(self) -> np.ndarray:
        return np.maximum(np.exp(self.log_noise), NOISE_FLOOR)

    # -- flat-vector round trip -------------------------------------------
    def to_vector(self) -> np.ndarray:
        """Pack as [weight_in..., bias_in, weight..., bias..., noise...] for
        the base-kernel families, or [lengthscale..., signal, noise...] for
        se/matern52. Which grouping applies is read off from which arrays are
        populated."""
        has_base = self.log_weight_in.size > 0
        has_stationary = self.log_lengthscale.size > 0
        if has_base == has_stationary:
            raise ValueError("exactly one of (log_weight_in, log_lengthscale) "
                             "must be populated to pack unambiguously")
        if has_base:
            parts = [self.log_weight_in, [self.log_bias_in], self.log_weight,
                     self.log_bias, self.log_noise]
        else:
            parts = [self.log_lengthscale, [self.log_signal], self.log_noise]
        return np.concatenate([np.atleast_1d(np.asarray(p, float))
                               for p in parts])

    @classmethod
    def from_vector(cls, vec, spec: KernelSpec, n_noise: int) -> "HyperParams":
        vec = np.asarray(vec, float).ravel()
        expect = n_params(spec, n_noise)
        if vec.size != expect:
            raise ValueError(f"expected {expect} packed parameters for "
                             f"{spec.family} (d={spec.input_dim}, "
                             f"L={spec.depth}, {n_noise} noise), got {vec.size}")
        d, L = spec.input_dim, spec.depth
        if spec.family in BASE_KERNEL_FAMILIES:
            L = L if spec.family in NNGP_FAMILIES else 0
            w_in, rest = vec[:d], vec[d:]
            b_in, rest = rest[0], rest[1:]
            w, rest = rest[:L], rest[L:]
            b, rest = rest[:L], rest[L:]
            return cls(log_weight_in=w_in, log_bias_in=float(b_in),
                       log_weight=w, log_bias=b, log_noise=rest)
        n_ls = d if spec.ard else 1
        ls, rest = vec[:n_ls], vec[n_ls:]
        s2, rest = rest[0], rest[1:]
        return cls(log_lengthscale=ls, log_signal=float(s2), log_noise=rest)

    # -- constructors ------------------------------------------------------
    @classmethod
    def zeros(cls, spec: KernelSpec, n_noise: int = 0) -> "HyperParams":
        """All log parameters 0, i.e. every variance/length-scale equal 1."""
        return cls.from_vector(np.zeros(n_params(spec, n_noise)), spec, n_noise)

    @classmethod
    def constant_variance(cls, spec: KernelSpec, weight_var: float,
                          bias_var: float, noise_var=()) -> "HyperParams":
        """Same weight variance at every position (input coordinates and all
        layers) and same bias variance everywhere; handy for fixed-variance
        sweeps and demos."""
        if spec.family not in BASE_KERNEL_FAMILIES:
            raise ValueError("constant_variance applies to NNGP/arcsin families")
        lw, lb = np.log(weight_var), np.log(bias_var)
        L = spec.depth if spec.family in NNGP_FAMILIES else 0
        return cls(log_weight_in=np.full(spec.input_dim, lw), log_bias_in=lb,
                   log_weight=np.full(L, lw), log_bias=np.full(L, lb),
                   log_noise=np.log(np.atleast_1d(noise_var))
                   if len(np.atleast_1d(noise_var)) else np.empty(0))

    def validate(self, spec: KernelSpec) -> None:
        """Raise if the stored shapes do not match `spec`."""
        if spec.family in BASE_KERNEL_FAMILIES:
            if self.log_weight_in.size != spec.input_dim:
                raise ValueError(f"log_weight_in has size "
                                 f"{self.log_weight_in.size}, expected "
                                 f"{spec.input_dim}")
            L = spec.depth if spec.family in NNGP_FAMILIES else 0
            if self.log_weight.size != L or self.log_bias.size != L:
                raise ValueError(f"layer parameter arrays must have size {L}")
        else:
            n_ls = spec.input_dim if spec.ard else 1
            if self.log_lengthscale.size != n_ls:
                raise ValueError(f"log_lengthscale has size "
                                 f"{self.log_lengthscale.size}, expected {n_ls}")
        for name in ("log_weight_in", "log_weight", "log_bias",
                     "log_lengthscale", "log_noise"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")
        if not (np.isfinite(self.log_bias_in) and np.isfinite(self.log_signal)):
            raise ValueError("scalar log parameters must be finite")

    def as_dict(self) -> dict:
        """JSON-friendly snapshot of the exponentiated values."""
        return {
            "weight_var_in": self.weight_var_in.tolist(),
            "bias_var_in": self.bias_var_in,
            "weight_var": self.weight_var.tolist(),
            "bias_var": self.bias_var.tolist(),
            "lengthscale": self.lengthscale.tolist(),
            "signal_var": self.signal_var,
            "noise_var": self.noise_var.tolist(),
        }
