"""Hartmann 3-D test function and the Halton-design regression datasets.

Coefficients are the standard tabulated values (Dixon & Szego, "The global
optimization problem: an introduction", 1978); the function is smooth with
four local minima on the unit cube.
"""

from __future__ import annotations

import numpy as np

from ..sampling import halton

ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
A = np.array([
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
])
P = 1e-4 * np.array([
    [3689.0, 1170.0, 2673.0],
    [4699.0, 4387.0, 7470.0],
    [1091.0, 8732.0, 5547.0],
    [381.0, 5743.0, 8828.0],
])


def hartmann3(X) -> np.ndarray:
    """Hartmann-3 values at rows of X (unit cube)."""
    X = np.atleast_2d(np.asarray(X, float))
    if X.shape[1] != 3:
        raise ValueError("hartmann3 expects 3-D inputs")
    # (n, 4) matrix of exponents
    e = np.einsum("ij,nij->ni", A, (X[:, None, :] - P[None, :, :]) ** 2)
    return -(np.exp(-e) @ ALPHA)


def hartmann_split(n: int, seed: int = 0, train_frac: float = 0.7):
    """First n Halton points on the cube, randomly permuted and split
    train/test. Returns (X_train, y_train, X_test, y_test)."""
    X = halton(n, 3).points
    y = hartmann3(X)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_frac * n))
    tr, te = perm[:n_train], perm[n_train:]
    return X[tr], y[tr], X[te], y[te]
