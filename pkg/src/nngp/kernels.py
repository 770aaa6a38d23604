"""Covariance functions: layer-iterated NNGP kernels and baselines.

The NNGP families start from the bilinear base kernel

    k0(x, x') = sum_j lambda_j x_j x'_j + sigma2_b0,   lambda = diag(Lambda)

and iterate one closed-form step per hidden layer. With ReLU units the step
is the order-1 arc-cosine map

    k(l) = (sigma2_w / 2pi) sqrt(k_xx k_x'x') (sin t + (pi - t) cos t) + sigma2_b,
    t = arccos(k_xx' / sqrt(k_xx k_x'x'))

and with erf units

    k(l) = (2 sigma2_w / pi) arcsin(2 k_xx' / sqrt((1+2k_xx)(1+2k_x'x'))) + sigma2_b.

Each step consumes the triple (k(x,x), k(x',x'), k(x,x')) of the previous
layer, so the recursion carries diagonals alongside the cross term.

`arcsin_kernel` is the classic single-transform neural-network kernel
(2/pi) arcsin(...) of the base kernel, used as a non-stationary GP baseline.
`se_kernel` / `matern52_kernel` are the stationary baselines.

All step functions broadcast over arrays; the scalar operations are thin
wrappers around the same code paths used for Gram assembly.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError
from .params import HyperParams, KernelSpec, NNGP_FAMILIES

#: arccos/arcsin arguments may overshoot [-1, 1] by at most this much
#: (pure rounding); anything larger means the input triple was invalid.
CLIP_TOL = 1e-12


def _clip_unit(a):
    a = np.asarray(a, float)
    overshoot = np.max(np.abs(a)) - 1.0 if a.size else 0.0
    if overshoot > CLIP_TOL:
        raise DomainError(f"arc-function argument out of [-1, 1] by "
                          f"{overshoot:.3e}; covariance triple is not PSD")
    return np.clip(a, -1.0, 1.0)


def base_kernel(x, xp, theta: HyperParams) -> float:
    """k0(x, x') for points in R^d."""
    x = np.asarray(x, float).ravel()
    xp = np.asarray(xp, float).ravel()
    lam = theta.weight_var_in
    if x.size != lam.size or xp.size != lam.size:
        raise ValueError(f"point dimension {x.size}/{xp.size} does not match "
                         f"{lam.size} input weight variances")
    return float(np.dot(lam * x, xp) + theta.bias_var_in)


def relu_step(k_xx, k_xpxp, k_xxp, weight_var, bias_var):
    """One ReLU layer step; broadcasts over array triples."""
    k_xx = np.asarray(k_xx, float)
    k_xpxp = np.asarray(k_xpxp, float)
    if np.any(k_xx <= 0) or np.any(k_xpxp <= 0):
        raise DomainError("relu_step needs strictly positive diagonals")
    norm = np.sqrt(k_xx * k_xpxp)
    t = np.arccos(_clip_unit(k_xxp / norm))
    out = weight_var / (2 * np.pi) * norm * (np.sin(t) + (np.pi - t) * np.cos(t)) \
        + bias_var
    return out if out.ndim else float(out)


def erf_step(k_xx, k_xpxp, k_xxp, weight_var, bias_var):
    """One erf layer step; broadcasts over array triples."""
    den = (1 + 2 * np.asarray(k_xx, float)) * (1 + 2 * np.asarray(k_xpxp, float))
    if np.any(den <= 0):
        raise DomainError("erf_step needs 1 + 2k > 0 on both diagonals")
    out = 2 * weight_var / np.pi \
        * np.arcsin(_clip_unit(2 * np.asarray(k_xxp, float) / np.sqrt(den))) \
        + bias_var
    return out if out.ndim else float(out)


_STEPS = {"nngp_relu": relu_step, "nngp_erf": erf_step}


def nngp_kernel(x, xp, spec: KernelSpec, theta: HyperParams) -> float:
    """Depth-`spec.depth` NNGP covariance between two points."""
    if spec.family not in NNGP_FAMILIES:
        raise ValueError(f"nngp_kernel expects an NNGP family, got {spec.family}")
    step = _STEPS[spec.family]
    kxx = base_kernel(x, x, theta)
    kpp = base_kernel(xp, xp, theta)
    kxp = base_kernel(x, xp, theta)
    w, b = theta.weight_var, theta.bias_var
    for l in range(spec.depth):
        kxp = step(kxx, kpp, kxp, w[l], b[l])
        kxx = step(kxx, kxx, kxx, w[l], b[l])
        kpp = step(kpp, kpp, kpp, w[l], b[l])
    return float(kxp)


def nngp_kernel_fixed(x, xp, family: str, depth: int,
                      weight_var: float, bias_var: float) -> float:
    """Two-hyperparameter NNGP kernel: shared sigma2_w / sigma2_b at every
    layer and Lambda = (sigma2_w / d) I. Deliberately a separate, spelled-out
    code path so it can cross-check the general per-layer parameterization.
    """
    x = np.asarray(x, float).ravel()
    xp = np.asarray(xp, float).ravel()
    d = x.size
    kxx = weight_var / d * np.dot(x, x) + bias_var
    kpp = weight_var / d * np.dot(xp, xp) + bias_var
    kxp = weight_var / d * np.dot(x, xp) + bias_var
    for _ in range(depth):
        if family == "nngp_relu":
            norm = np.sqrt(kxx * kpp)
            t = np.arccos(_clip_unit(kxp / norm))
            kxp = weight_var / (2 * np.pi) * norm \
                * (np.sin(t) + (np.pi - t) * np.cos(t)) + bias_var
            kxx = weight_var * kxx / 2 + bias_var
            kpp = weight_var * kpp / 2 + bias_var
        elif family == "nngp_erf":
            kxp = 2 * weight_var / np.pi * np.arcsin(_clip_unit(
                2 * kxp / np.sqrt((1 + 2 * kxx) * (1 + 2 * kpp)))) + bias_var
            kxx = 2 * weight_var / np.pi * np.arcsin(2 * kxx / (1 + 2 * kxx)) \
                + bias_var
            kpp = 2 * weight_var / np.pi * np.arcsin(2 * kpp / (1 + 2 * kpp)) \
                + bias_var
        else:
            raise ValueError(f"unknown NNGP family {family!r}")
    return float(kxp)


def arcsin_kernel(x, xp, theta: HyperParams) -> float:
    """Single-transform neural-network kernel
    (2/pi) arcsin(2 k0(x,x') / sqrt((1+2k0(x,x))(1+2k0(x',x')))); values lie
    in (-1, 1)."""
    kxx = base_kernel(x, x, theta)
    kpp = base_kernel(xp, xp, theta)
    kxp = base_kernel(x, xp, theta)
    # erf_step with unit outer weight variance and no added bias
    return erf_step(kxx, kpp, kxp, 1.0, 0.0)


def se_kernel(x, xp, theta: HyperParams) -> float:
    """Squared-exponential s2 exp(-||x - x'||^2 / (2 l^2)) (per-dimension
    length-scales when theta carries more than one)."""
    r = (np.asarray(x, float).ravel() - np.asarray(xp, float).ravel()) \
        / theta.lengthscale
    return theta.signal_var * float(np.exp(-0.5 * np.dot(r, r)))


def matern52_kernel(x, xp, theta: HyperParams) -> float:
    """Matern covariance with smoothness 5/2:
    s2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r), r = ||x - x'|| / l."""
    diff = (np.asarray(x, float).ravel() - np.asarray(xp, float).ravel()) \
        / theta.lengthscale
    r = float(np.sqrt(np.dot(diff, diff)))
    s5r = np.sqrt(5.0) * r
    return theta.signal_var * float((1 + s5r + 5 * r * r / 3) * np.exp(-s5r))


def kernel_value(x, xp, spec: KernelSpec, theta: HyperParams) -> float:
    """Family dispatch for a single pair of points."""
    if spec.family in NNGP_FAMILIES:
        return nngp_kernel(x, xp, spec, theta)
    if spec.family == "arcsin":
        return arcsin_kernel(x, xp, theta)
    if spec.family == "se":
        return se_kernel(x, xp, theta)
    return matern52_kernel(x, xp, theta)


# ---------------------------------------------------------------------------
# Gram assembly (vectorized; the scalar ops above share the step functions)
# ---------------------------------------------------------------------------

def _base_gram(X, Xp, theta):
    """k0 cross matrix plus the two diagonals, all at once."""
    lam = theta.weight_var_in
    b = theta.bias_var_in
    cross = (X * lam) @ Xp.T + b
    dx = np.einsum("ij,j,ij->i", X, lam, X) + b
    dxp = np.einsum("ij,j,ij->i", Xp, lam, Xp) + b
    return cross, dx, dxp


def _nngp_gram(X, Xp, spec, theta):
    step = _STEPS[spec.family]
    cross, dx, dxp = _base_gram(X, Xp, theta)
    w, b = theta.weight_var, theta.bias_var
    for l in range(spec.depth):
        cross = step(dx[:, None], dxp[None, :], cross, w[l], b[l])
        dx = step(dx, dx, dx, w[l], b[l])
        dxp = step(dxp, dxp, dxp, w[l], b[l])
    return cross


def _arcsin_gram(X, Xp, theta):
    cross, dx, dxp = _base_gram(X, Xp, theta)
    return erf_step(dx[:, None], dxp[None, :], cross, 1.0, 0.0)


def _stationary_gram(X, Xp, spec, theta):
    ls = theta.lengthscale
    if spec.ard and ls.size != spec.input_dim:
        raise ValueError("ard spec needs one length-scale per dimension")
    Xs, Xps = X / ls, Xp / ls
    if spec.family == "se":
        return theta.signal_var * np.exp(-0.5 * cdist(Xs, Xps, "sqeuclidean"))
    r = cdist(Xs, Xps)
    s5r = np.sqrt(5.0) * r
    return theta.signal_var * (1 + s5r + 5 * r * r / 3) * np.exp(-s5r)


def gram_matrix(X, Xp, spec: KernelSpec, theta: HyperParams) -> np.ndarray:
    """n x m covariance matrix between point sets; symmetrized when X is Xp."""
    X = np.atleast_2d(np.asarray(X, float))
    Xp = np.atleast_2d(np.asarray(Xp, float))
    if X.shape[1] != spec.input_dim or Xp.shape[1] != spec.input_dim:
        raise ValueError(f"points have dimension {X.shape[1]}/{Xp.shape[1]}, "
                         f"spec says {spec.input_dim}")
    if spec.family in NNGP_FAMILIES:
        K = _nngp_gram(X, Xp, spec, theta)
    elif spec.family == "arcsin":
        K = _arcsin_gram(X, Xp, theta)
    else:
        K = _stationary_gram(X, Xp, spec, theta)
    if X.shape == Xp.shape and (X is Xp or np.array_equal(X, Xp)):
        K = 0.5 * (K + K.T)
    return K
