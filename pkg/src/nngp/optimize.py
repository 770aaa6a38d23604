"""Nonlinear conjugate gradient with a hard objective-evaluation budget.

Polak-Ribiere(+) directions with a strong-Wolfe line search (c1 = 1e-4,
c2 = 0.1): cubic-extrapolating bracket, cubic/quadratic interpolating zoom
with bisection fallback. The budget counts objective evaluations only —
gradient calls are free for the caller to account for — and when it runs
out mid-search the result is the best point *evaluated* so far, which is
never worse than the last accepted iterate. Everything is deterministic:
no randomness, no environment dependence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

C1 = 1e-4
C2 = 0.1
_MAX_STEP = 100.0


class _BudgetExhausted(Exception):
    pass


@dataclass
class CGResult:
    x: np.ndarray
    fun: float
    n_evals: int
    n_iters: int
    converged: bool


class _CountedFun:
    """Wraps the objective: enforces the evaluation cap and remembers the
    best (x, f) pair ever evaluated, accepted by the line search or not."""

    def __init__(self, fun, cap):
        self.fun = fun
        self.cap = cap
        self.n = 0
        self.best_f = np.inf
        self.best_x = None

    def __call__(self, x):
        if self.n >= self.cap:
            raise _BudgetExhausted
        self.n += 1
        f = float(self.fun(x))
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x)
        return f


def _cubic_step(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic Hermite interpolant through (a, fa, ga) and
    (b, fb, gb); None when the cubic has no interior minimum."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0.0:
        return None
    s = np.sqrt(disc) * (1.0 if b >= a else -1.0)
    denom = gb - ga + 2.0 * s
    if denom == 0.0:
        return None
    return b - (b - a) * ((gb + s - d1) / denom)


def _quad_step(a, fa, ga, b, fb):
    denom = 2.0 * (fb - fa - ga * (b - a))
    if denom == 0.0:
        return None
    return a - ga * (b - a) ** 2 / denom


def _zoom(phi, dphi, lo, hi, f_lo, g_lo, f_hi, g_hi, f0, g0p, max_iter=25):
    """Interpolation phase: shrink [lo, hi] (lo always satisfies sufficient
    decrease, slope known) by cubic/quadratic fits with a 10% interior
    safeguard, falling back to bisection."""
    for _ in range(max_iter):
        if g_hi is not None:
            a = _cubic_step(lo, f_lo, g_lo, hi, f_hi, g_hi)
        else:
            a = _quad_step(lo, f_lo, g_lo, hi, f_hi)
        span = hi - lo
        safelo, safehi = lo + 0.1 * span, hi - 0.1 * span
        if a is None or not np.isfinite(a) or \
                not (min(safelo, safehi) <= a <= max(safelo, safehi)):
            a = 0.5 * (lo + hi)
        fa = phi(a)
        if fa > f0 + C1 * a * g0p or fa >= f_lo:
            hi, f_hi, g_hi = a, fa, None
        else:
            ga = dphi(a)
            if abs(ga) <= -C2 * g0p:
                return a, fa
            if ga * (hi - lo) >= 0:
                hi, f_hi, g_hi = lo, f_lo, g_lo
            lo, f_lo, g_lo = a, fa, ga
        if abs(hi - lo) < 1e-14 * max(1.0, abs(lo)):
            break
    if lo > 0 and f_lo <= f0 + C1 * lo * g0p:
        return lo, f_lo       # sufficient decrease only; good enough to move
    return None


def _wolfe_search(phi, dphi, f0, g0p, a_first):
    """Bracketing phase of the strong-Wolfe search: cubic extrapolation
    capped at 3x per move; returns (alpha, f) or None when no acceptable
    step exists within the iteration caps."""
    a_prev, f_prev, g_prev = 0.0, f0, g0p
    a = min(a_first, _MAX_STEP)
    for it in range(12):
        fa = phi(a)
        if fa > f0 + C1 * a * g0p or (it > 0 and fa >= f_prev):
            return _zoom(phi, dphi, a_prev, a, f_prev, g_prev, fa, None,
                         f0, g0p)
        ga = dphi(a)
        if abs(ga) <= -C2 * g0p:
            return a, fa
        if ga >= 0:
            return _zoom(phi, dphi, a, a_prev, fa, ga, f_prev, g_prev,
                         f0, g0p)
        if a >= _MAX_STEP:
            return a, fa      # hit the cap while still descending; accept
        nxt = _cubic_step(a_prev, f_prev, g_prev, a, fa, ga)
        if nxt is None or not np.isfinite(nxt) or nxt <= a:
            nxt = 2.0 * a
        a_prev, f_prev, g_prev = a, fa, ga
        a = min(max(nxt, 1.1 * a), 3.0 * a, _MAX_STEP)
    return None


def minimize_cg(fun, grad, x0, max_evals: int = 200, gtol: float = 1e-5,
                max_iters: int = 200, dgrad=None) -> CGResult:
    """Minimize `fun` starting from `x0` with at most `max_evals` objective
    evaluations; `grad` is called separately and not counted.

    `dgrad(x, p)`, when given, supplies the directional derivative used by
    the Wolfe curvature checks; with finite-difference gradients this costs
    two objective evaluations instead of a full stencil. The full `grad` is
    still evaluated once per accepted iterate for the direction update.
    """
    f = _CountedFun(fun, max_evals)
    x = np.asarray(x0, float).copy()
    n_iters = 0
    converged = False
    try:
        fx = f(x)
        g = np.asarray(grad(x), float)
        p = -g
        f_prev = None
        while n_iters < max_iters:
            if np.max(np.abs(g)) <= gtol:
                converged = True
                break
            g0p = float(np.dot(g, p))
            if g0p >= 0:                      # lost descent; restart steepest
                p = -g
                g0p = -float(np.dot(g, g))
                if g0p == 0.0:
                    converged = True
                    break
            if f_prev is None:
                a_first = min(1.0, 1.0 / (1.0 + float(np.linalg.norm(g))))
            else:
                a_first = 2.02 * (fx - f_prev) / g0p
                if not np.isfinite(a_first) or a_first <= 0:
                    a_first = 1.0
                a_first = min(max(a_first, 1e-10), 1.0)

            def phi(a):
                return f(x + a * p)

            def dphi(a):
                if dgrad is not None:
                    return float(dgrad(x + a * p, p))
                return float(np.dot(np.asarray(grad(x + a * p), float), p))

            hit = _wolfe_search(phi, dphi, fx, g0p, a_first)
            if hit is None:
                break
            a, fa = hit
            if fa >= fx - 1e-14 * max(1.0, abs(fx)):
                break                          # no usable progress
            x_new = x + a * p
            g_new = np.asarray(grad(x_new), float)
            beta = max(0.0, float(np.dot(g_new, g_new - g))
                       / max(float(np.dot(g, g)), 1e-300))
            p = -g_new + beta * p
            f_prev, fx, x, g = fx, fa, x_new, g_new
            n_iters += 1
    except _BudgetExhausted:
        pass
    if f.best_x is None:                       # not a single finished eval
        return CGResult(x, np.inf, f.n, n_iters, False)
    return CGResult(f.best_x, f.best_f, f.n, n_iters, converged)
