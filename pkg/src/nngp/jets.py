"""Kernel jets: mixed partial derivatives of a covariance function,
propagated through the layer recursion, and their contraction with linear
differential operators.

A jet bundles D[a][b][i][j] = d^i/dx_a^i d^j/dx'_b^j k(x, x') for
coordinates a, b and orders i, j in {0, 1, 2}, together with the diagonal
jets d^i/dx_a^i k(x, x). That is exactly what is needed to assemble block
covariances like L_x L_x' k for operators built from Id, d/dx_a and
d2/dx_a2 (Laplacians, advection-diffusion).

Propagation strategy: the layer map is a smooth function of the triple
(k(x,x), k(x',x'), k(x,x')), so instead of transcribing closed-form
derivative recursions we carry truncated bivariate Taylor series in the
perturbations (s, t) of the pair (x + s e_a, x' + t e_b) and push them
through

    F(c, c', w) = (2 sw2 / pi) arcsin(2 w ((1+2c)(1+2c'))^(-1/2)) + sb2

using series products and composition with univariate derivative tables
(arcsin, p^(-1/2), exp) up to total order 4. Series coefficients are numpy
arrays broadcast over (a, b, n, m), so one pass produces a whole Gram block
of operator-applied kernel values.

Only the erf recursion has jets: the ReLU kernel's second derivatives
diverge at x = x' (requesting them is a configuration error), and nothing
here needs Matern derivatives. The squared-exponential jets use the same
series engine (exact quadratic exponent composed with exp), and the
single-transform arcsine kernel is one erf transform with unit outer weight
and no added bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels
from .params import HyperParams, KernelSpec

#: raw-partial <-> Taylor-coefficient conversion, entry [i, j] = i! j!
_FACT = np.array([[1.0, 1.0, 2.0], [1.0, 1.0, 2.0], [2.0, 2.0, 4.0]])

_ASIN_CLIP = 1 - 1e-13


def _is0(x) -> bool:
    return isinstance(x, float) and x == 0.0


# ---------------------------------------------------------------------------
# truncated bivariate Taylor series: list-of-lists S[i][j] of coefficients,
# each a float 0.0 or an ndarray broadcastable over (a, b, n, m)
# ---------------------------------------------------------------------------

def _zeros(P, Q):
    return [[0.0] * Q for _ in range(P)]


def _mul(A, B):
    """Product of two (P, Q)-truncated series, truncated back to (P, Q)."""
    P, Q = len(A), len(A[0])
    C = _zeros(P, Q)
    for i in range(P):
        for j in range(Q):
            acc = None
            for p in range(i + 1):
                for q in range(j + 1):
                    a, b = A[p][q], B[i - p][j - q]
                    if _is0(a) or _is0(b):
                        continue
                    term = a * b
                    if acc is None:
                        acc = term
                    elif isinstance(acc, np.ndarray) and np.shape(term) in (
                            (), acc.shape):
                        acc += term          # `acc` is always a fresh array
                    else:
                        acc = acc + term
            C[i][j] = 0.0 if acc is None else acc
    return C


def _scale(A, c):
    return [[0.0 if _is0(v) else c * v for v in row] for row in A]


def _compose(table, A):
    """g(A) for scalar g with derivative table [g, g', g'', ...] evaluated
    at A[0][0]; the table must reach order (P-1) + (Q-1)."""
    P, Q = len(A), len(A[0])
    K = P + Q - 2
    At = [row[:] for row in A]
    At[0][0] = 0.0
    out = _zeros(P, Q)
    out[0][0] = table[0]
    cur = None
    kfact = 1.0
    for k in range(1, K + 1):
        cur = At if k == 1 else _mul(cur, At)
        kfact *= k
        coef = table[k] / kfact
        for i in range(P):
            for j in range(Q):
                if _is0(cur[i][j]):
                    continue
                term = coef * cur[i][j]
                prev = out[i][j]
                if _is0(prev):
                    out[i][j] = term
                elif isinstance(prev, np.ndarray) and np.shape(term) in (
                        (), prev.shape):
                    prev += term             # fresh: k=1 wrote it, and the
                    # (0, 0) slot (aliasing table[0]) is never accumulated
                else:
                    out[i][j] = prev + term
    return out


def _compose1(table, U):
    """Univariate order-2 composition: coefficients of g(U(s)) given
    U = [u0, u1, u2] and table [g, g', g''] at u0."""
    c1 = 0.0 if _is0(U[1]) else table[1] * U[1]
    c2 = 0.0
    if not _is0(U[2]):
        c2 = table[1] * U[2]
    if not _is0(U[1]):
        c2 = c2 + 0.5 * table[2] * U[1] * U[1]
    return [table[0], c1, c2]


# -- derivative tables -------------------------------------------------------

def _rsqrt_table(p, K):
    """[p^-1/2 and its derivatives]; d^k/dp^k p^-1/2 =
    (-1)^k (2k-1)!! / 2^k * p^-(2k+1)/2."""
    sp = p ** -0.5
    full = [sp, -0.5 * sp / p, 0.75 * sp / p ** 2, -1.875 * sp / p ** 3,
            6.5625 * sp / p ** 4]
    return full[:K + 1]


def _asin_table(z, K):
    z = np.clip(z, -_ASIN_CLIP, _ASIN_CLIP)
    s = (1 - z * z) ** -0.5
    s2 = s * s
    full = [np.arcsin(z), s, z * s * s2, (1 + 2 * z * z) * s * s2 * s2,
            (9 * z + 6 * z ** 3) * s * s2 ** 3]
    return full[:K + 1]


def _h_table(c):
    """h(c) = 2c / (1 + 2c) and its first two derivatives."""
    ip = 1.0 / (1 + 2 * c)
    return [2 * c * ip, 2 * ip * ip, -8 * ip ** 3]


# ---------------------------------------------------------------------------
# linear differential operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearOp:
    """const * Id + sum_a d1[a] d/dx_a + sum_a d2[a] d2/dx_a2.

    Coefficients are scalars or per-evaluation-point arrays (needed when a
    linearized advection speed multiplies d/dx pointwise). Only
    same-coordinate second derivatives appear; every operator used here
    (Laplacian, advection-diffusion) is a per-coordinate sum.
    """

    const: float | np.ndarray = 0.0
    d1: tuple = ()
    d2: tuple = ()

    def __post_init__(self):
        if len(self.d1) != len(self.d2):
            raise ValueError("d1 and d2 must cover the same coordinates")

    @property
    def dim(self) -> int:
        return len(self.d1)

    @staticmethod
    def identity(dim: int) -> "LinearOp":
        return LinearOp(1.0, (0.0,) * dim, (0.0,) * dim)

    @staticmethod
    def laplacian(dim: int, scale: float = 1.0) -> "LinearOp":
        """scale * sum_a d2/dx_a2 (use scale=-1.0 for -Laplacian)."""
        return LinearOp(0.0, (0.0,) * dim, (scale,) * dim)

    @property
    def max_order(self) -> int:
        if any(not _is0(c) if isinstance(c, float) else True for c in self.d2):
            return 2
        if any(not _is0(c) if isinstance(c, float) else True for c in self.d1):
            return 1
        return 0

    @property
    def is_identity(self) -> bool:
        return (isinstance(self.const, float) and self.const == 1.0
                and self.max_order == 0)

    def _map(self, f) -> "LinearOp":
        return LinearOp(f(self.const), tuple(f(c) for c in self.d1),
                        tuple(f(c) for c in self.d2))

    def __mul__(self, scalar):
        return self._map(lambda c: c if _is0(c) else scalar * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other: "LinearOp"):
        if self.dim != other.dim:
            raise ValueError("operator dimensions differ")
        return LinearOp(self.const + other.const,
                        tuple(a + b for a, b in zip(self.d1, other.d1)),
                        tuple(a + b for a, b in zip(self.d2, other.d2)))

    def __sub__(self, other: "LinearOp"):
        return self + (-other)


# ---------------------------------------------------------------------------
# the jet container
# ---------------------------------------------------------------------------

@dataclass
class KernelJet:
    """Taylor data of k(x + s e_a, x' + t e_b) for all coordinate pairs.

    coeffs[i][j] holds the s^i t^j coefficients, broadcastable over
    (a, b, n, m); diag_x / diag_xp hold the univariate series of
    k(x + s e_a, x) restricted to the diagonal, broadcastable over
    (a, 1, n, 1) and (1, b, 1, m). Raw mixed partials are recovered through
    `partial` (coefficient times i! j!).
    """

    dim: int
    n: int
    m: int
    orders: tuple          # (max left order, max right order)
    coeffs: list
    diag_x: list
    diag_xp: list
    scalar: bool = False   # built from a single (x, x') pair

    def _expand(self, entry, a, b):
        if _is0(entry):
            return 0.0 if self.scalar else np.zeros((self.n, self.m))
        arr = np.asarray(entry, float)
        if arr.ndim != 4:
            arr = arr.reshape((1,) * (4 - arr.ndim) + arr.shape)
        ai = a if arr.shape[0] > 1 else 0
        bi = b if arr.shape[1] > 1 else 0
        out = np.broadcast_to(arr[ai, bi], (self.n, self.m))
        return float(out[0, 0]) if self.scalar else np.array(out)

    def partial(self, a: int, b: int, i: int, j: int):
        """Raw mixed partial d^i/dx_a^i d^j/dx'_b^j k(x, x')."""
        if not (0 <= a < self.dim and 0 <= b < self.dim):
            raise ValueError(f"coordinate out of range for dim {self.dim}")
        if i > self.orders[0] or j > self.orders[1]:
            raise ValueError(f"jet stores orders {self.orders}, "
                             f"requested ({i}, {j})")
        return self._expand(self.coeffs[i][j], a, b) * _FACT[i, j]

    @property
    def value(self):
        """The plain kernel value(s) k(x, x')."""
        return self._expand(self.coeffs[0][0], 0, 0)

    def diag_partial_x(self, a: int, i: int):
        """Raw derivative d^i/ds^i k(x + s e_a, x + s e_a) at s = 0."""
        entry = self.diag_x[i]
        if _is0(entry):
            out = np.zeros(self.n)
        else:
            arr = np.asarray(entry)
            out = np.broadcast_to(arr[a if arr.shape[0] > 1 else 0, 0, :, 0],
                                  (self.n,)).copy()
        out = out * _FACT[i, 0]
        return float(out[0]) if self.scalar else out

    def diag_partial_xp(self, b: int, j: int):
        entry = self.diag_xp[j]
        if _is0(entry):
            out = np.zeros(self.m)
        else:
            arr = np.asarray(entry)
            out = np.broadcast_to(arr[0, b if arr.shape[1] > 1 else 0, 0, :],
                                  (self.m,)).copy()
        out = out * _FACT[j, 0]
        return float(out[0]) if self.scalar else out


# ---------------------------------------------------------------------------
# family engines
# ---------------------------------------------------------------------------

def _base_series(X, Xp, theta, P, Q):
    lam = theta.weight_var_in
    b0 = theta.bias_var_in
    C = _zeros(P, Q)
    C[0][0] = ((X * lam) @ Xp.T + b0)[None, None]
    if P > 1:
        C[1][0] = (lam[:, None] * Xp.T)[:, None, None, :]
    if Q > 1:
        C[0][1] = (lam[:, None] * X.T)[None, :, :, None]
    if P > 1 and Q > 1:
        C[1][1] = np.diag(lam)[:, :, None, None]
    dx = np.einsum("ij,j,ij->i", X, lam, X) + b0
    dxp = np.einsum("ij,j,ij->i", Xp, lam, Xp) + b0
    U = [dx[None, None, :, None],
         2 * (lam[:, None] * X.T)[:, None, :, None],
         lam[:, None, None, None]]
    V = [dxp[None, None, None, :],
         2 * (lam[:, None] * Xp.T)[None, :, None, :],
         lam[None, :, None, None]]
    return C, U, V


def _erf_series_step(C, U, V, weight_var, bias_var):
    """One erf layer applied to cross series C and diagonal series U, V."""
    P, Q = len(C), len(C[0])
    K = P + Q - 2
    Pu = [1 + 2 * U[0], 2 * U[1], 2 * U[2]][:P]
    Pv = [1 + 2 * V[0], 2 * V[1], 2 * V[2]][:Q]
    prod = _zeros(P, Q)
    for i in range(P):
        for j in range(Q):
            if _is0(Pu[i]) or _is0(Pv[j]):
                continue
            prod[i][j] = Pu[i] * Pv[j]
    R = _compose(_rsqrt_table(prod[0][0], K), prod)
    A = _scale(_mul(C, R), 2.0)
    out = _scale(_compose(_asin_table(A[0][0], K), A), 2 * weight_var / np.pi)
    out[0][0] = out[0][0] + bias_var

    def diag_step(D):
        h = _compose1(_h_table(D[0]), D)
        g = _compose1(_asin_table(h[0], 2), h)
        s = 2 * weight_var / np.pi
        return [s * g[0] + bias_var,
                0.0 if _is0(g[1]) else s * g[1],
                0.0 if _is0(g[2]) else s * g[2]]

    return out, diag_step(U), diag_step(V)


def _se_series(X, Xp, spec, theta, P, Q):
    ell = theta.lengthscale
    if ell.size not in (1, spec.input_dim):
        raise ValueError("length-scale shape does not match input dimension")
    ell = np.broadcast_to(ell, (spec.input_dim,))
    s2 = theta.signal_var
    K = P + Q - 2
    inv2 = 1.0 / ell ** 2
    sq = cdist(X / ell, Xp / ell, "sqeuclidean")
    q = _zeros(P, Q)
    q[0][0] = (-0.5 * sq)[None, None]
    diffs = (X.T[:, :, None] - Xp.T[:, None, :])          # (d, n, m)
    if P > 1:
        q[1][0] = (-inv2[:, None, None] * diffs)[:, None]
    if Q > 1:
        q[0][1] = (inv2[:, None, None] * diffs)[None, :]
    if P > 2:
        q[2][0] = (-0.5 * inv2)[:, None, None, None]
    if Q > 2:
        q[0][2] = (-0.5 * inv2)[None, :, None, None]
    if P > 1 and Q > 1:
        q[1][1] = np.diag(inv2)[:, :, None, None]
    table = [s2 * np.exp(q[0][0])] * (K + 1)
    C = _compose(table, q)
    U = [np.full((1, 1, X.shape[0], 1), s2), 0.0, 0.0]
    V = [np.full((1, 1, 1, Xp.shape[0]), s2), 0.0, 0.0]
    return C, U, V


def kernel_jet(X, Xp, spec: KernelSpec, theta: HyperParams,
               orders=(2, 2)) -> KernelJet:
    """Jet of the covariance for all point pairs in X x X', carrying mixed
    partials up to `orders` on the left/right argument."""
    X = np.atleast_2d(np.asarray(X, float))
    Xp = np.atleast_2d(np.asarray(Xp, float))
    if X.shape[1] != spec.input_dim or Xp.shape[1] != spec.input_dim:
        raise ValueError("point dimension does not match spec.input_dim")
    oi, oj = orders
    if not (0 <= oi <= 2 and 0 <= oj <= 2):
        raise ValueError("jet orders must lie in 0..2")
    P, Q = oi + 1, oj + 1
    if spec.family == "nngp_erf":
        C, U, V = _base_series(X, Xp, theta, P, Q)
        for l in range(spec.depth):
            C, U, V = _erf_series_step(C, U, V, theta.weight_var[l],
                                       theta.bias_var[l])
    elif spec.family == "arcsin":
        C, U, V = _base_series(X, Xp, theta, P, Q)
        C, U, V = _erf_series_step(C, U, V, 1.0, 0.0)
    elif spec.family == "se":
        C, U, V = _se_series(X, Xp, spec, theta, P, Q)
    elif spec.family == "nngp_relu":
        raise ValueError("the ReLU kernel has no derivative jets: its "
                         "second derivatives diverge at x = x'; use nngp_erf "
                         "for operator blocks")
    else:
        raise ValueError(f"jets not implemented for family {spec.family!r}")
    return KernelJet(dim=spec.input_dim, n=X.shape[0], m=Xp.shape[0],
                     orders=(oi, oj), coeffs=C, diag_x=U, diag_xp=V)


def jet_base(x, xp, theta: HyperParams) -> KernelJet:
    """Jet of the bilinear base kernel at a single point pair (depth 0)."""
    X = np.atleast_2d(np.asarray(x, float))
    Xp = np.atleast_2d(np.asarray(xp, float))
    C, U, V = _base_series(X, Xp, theta, 3, 3)
    return KernelJet(dim=X.shape[1], n=1, m=1, orders=(2, 2),
                     coeffs=C, diag_x=U, diag_xp=V, scalar=True)


def jet_step(prev: KernelJet, weight_var: float, bias_var: float) -> KernelJet:
    """One erf layer applied to an existing jet."""
    C, U, V = _erf_series_step(prev.coeffs, prev.diag_x, prev.diag_xp,
                               weight_var, bias_var)
    return KernelJet(dim=prev.dim, n=prev.n, m=prev.m, orders=prev.orders,
                     coeffs=C, diag_x=U, diag_xp=V, scalar=prev.scalar)


# ---------------------------------------------------------------------------
# operator application
# ---------------------------------------------------------------------------

def _op_terms(op: LinearOp | None, dim: int, npts: int, side: str):
    """(order, coordinate, coefficient) triples with nonzero coefficients;
    array coefficients are validated against the point count."""
    if op is None:
        op = LinearOp.identity(dim)
    if op.dim != dim:
        raise ValueError(f"operator acts on {op.dim} coordinates, "
                         f"jet has {dim}")
    terms = []

    def add(order, coord, coef):
        if isinstance(coef, (int, float)):
            if coef == 0.0:
                return
            coef = float(coef)
        else:
            coef = np.asarray(coef, float)
            if coef.shape != (npts,):
                raise ValueError(f"per-point coefficient on the {side} side "
                                 f"has shape {coef.shape}, expected ({npts},)")
        terms.append((order, coord, coef))

    add(0, 0, op.const)
    for a, c in enumerate(op.d1):
        add(1, a, c)
    for a, c in enumerate(op.d2):
        add(2, a, c)
    return terms


def apply_operator_pair(jet: KernelJet, op_left: LinearOp | None,
                        op_right: LinearOp | None):
    """(L_x L_x' k)(X, X'): contract the jet with an operator on each side.
    Returns an (n, m) matrix (scalar for single-pair jets)."""
    lterms = _op_terms(op_left, jet.dim, jet.n, "left")
    rterms = _op_terms(op_right, jet.dim, jet.m, "right")
    total = np.zeros((jet.n, jet.m))
    for i, a, cl in lterms:
        col = cl if isinstance(cl, float) else cl[:, None]
        for j, b, cr in rterms:
            if _is0(jet.coeffs[i][j]):
                continue
            row = cr if isinstance(cr, float) else cr[None, :]
            total = total + (col * row) * jet.partial(a, b, i, j)
    return float(total[0, 0]) if jet.scalar else total


def operator_gram(X, Xp, spec: KernelSpec, theta: HyperParams,
                  op_left: LinearOp | None = None,
                  op_right: LinearOp | None = None) -> np.ndarray:
    """Gram block of (L_x L_x' k) over two point sets. Identity/identity
    short-circuits to the plain kernel Gram; otherwise the jet truncation
    adapts to the highest derivative order each operator needs."""
    left_id = op_left is None or op_left.is_identity
    right_id = op_right is None or op_right.is_identity
    if left_id and right_id:
        return kernels.gram_matrix(X, Xp, spec, theta)
    oi = 0 if left_id else op_left.max_order
    oj = 0 if right_id else op_right.max_order
    jet = kernel_jet(X, Xp, spec, theta, orders=(oi, oj))
    return apply_operator_pair(jet, op_left, op_right)
