"""Error metrics used across the experiments."""

from __future__ import annotations

import numpy as np


def relative_l2_error(approx, exact) -> float:
    """||approx - exact||_2 / ||exact||_2 over the evaluation points."""
    approx = np.asarray(approx, float).ravel()
    exact = np.asarray(exact, float).ravel()
    if approx.shape != exact.shape:
        raise ValueError(f"shape mismatch: {approx.shape} vs {exact.shape}")
    denom = float(np.linalg.norm(exact))
    if denom == 0.0:
        raise ValueError("exact values are identically zero")
    return float(np.linalg.norm(approx - exact)) / denom


def max_abs_error(approx, exact) -> float:
    approx = np.asarray(approx, float).ravel()
    exact = np.asarray(exact, float).ravel()
    return float(np.max(np.abs(approx - exact))) if approx.size else 0.0
