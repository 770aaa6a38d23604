import numpy as np
import pytest

from nngp.errors import DomainError
from nngp.kernels import (arcsin_kernel, base_kernel, erf_step, gram_matrix,
                          kernel_value, matern52_kernel, nngp_kernel,
                          nngp_kernel_fixed, relu_step, se_kernel)
from nngp.params import HyperParams, KernelSpec
from nngp.sampling import halton


def _theta_const(spec, w, b):
    return HyperParams.constant_variance(spec, weight_var=w, bias_var=b)


# ---------------------------------------------------------------------------
# base kernel
# ---------------------------------------------------------------------------

def test_base_kernel_zero_inputs():
    spec = KernelSpec("nngp_erf", input_dim=2, depth=1)
    th = HyperParams(log_weight_in=np.log([0.7, 2.0]), log_bias_in=np.log(0.1),
                     log_weight=np.zeros(1), log_bias=np.zeros(1))
    assert base_kernel([0.0, 0.0], [0.0, 0.0], th) == pytest.approx(0.1)


def test_base_kernel_dot_product():
    th = HyperParams(log_weight_in=np.zeros(2), log_bias_in=np.log(1e-300),
                     log_weight=np.empty(0), log_bias=np.empty(0))
    assert base_kernel([1.0, 2.0], [3.0, 4.0], th) == pytest.approx(11.0)


def test_base_kernel_weighted():
    th = HyperParams(log_weight_in=np.log([1.6, 1.6]),
                     log_bias_in=np.log(0.1),
                     log_weight=np.empty(0), log_bias=np.empty(0))
    assert base_kernel([1.0, 0.0], [1.0, 0.0], th) == pytest.approx(1.7)


# ---------------------------------------------------------------------------
# layer steps
# ---------------------------------------------------------------------------

def test_relu_step_diagonal_identity():
    for c in (0.3, 1.0, 4.2):
        assert relu_step(c, c, c, 1.6, 0.1) == pytest.approx(1.6 * c / 2 + 0.1)


def test_relu_step_orthogonal():
    assert relu_step(1.0, 1.0, 0.0, 1.6, 0.1) == \
        pytest.approx(1.6 / (2 * np.pi) + 0.1)


def test_relu_step_rejects_nonpositive_diagonal():
    with pytest.raises(DomainError):
        relu_step(-1.0, 1.0, 0.0, 1.6, 0.1)


def test_erf_step_zero_cross():
    assert erf_step(0.4, 2.0, 0.0, 1.6, 0.1) == pytest.approx(0.1)


def test_erf_step_diagonal_value():
    # (3.2/pi) asin(2/3) + 0.1; sometimes quoted rounded as 0.84332 but the
    # fifth decimal of the exact value is a 9
    got = erf_step(1.0, 1.0, 1.0, 1.6, 0.1)
    assert got == pytest.approx(3.2 / np.pi * np.arcsin(2 / 3) + 0.1,
                                abs=1e-12)
    assert got == pytest.approx(0.8432947, abs=1e-6)


def test_erf_step_range_bound():
    rng = np.random.default_rng(0)
    for _ in range(100):
        kxx, kpp = rng.uniform(0.01, 5.0, 2)
        kxp = rng.uniform(-1, 1) * np.sqrt(kxx * kpp)
        v = erf_step(kxx, kpp, kxp, 1.6, 0.1)
        assert 0.1 - 1.6 <= v <= 0.1 + 1.6


# ---------------------------------------------------------------------------
# iterated kernels
# ---------------------------------------------------------------------------

def test_nngp_erf_orthogonal_inputs_give_bias():
    spec = KernelSpec("nngp_erf", input_dim=2, depth=1)
    th = HyperParams(log_weight_in=np.zeros(2), log_bias_in=np.log(1e-300),
                     log_weight=np.log([1.3]), log_bias=np.log([0.25]))
    assert nngp_kernel([1.0, 0.0], [0.0, 1.0], spec, th) == pytest.approx(0.25)


def test_nngp_relu_double_diagonal():
    spec = KernelSpec("nngp_relu", input_dim=1, depth=2)
    th = _theta_const(spec, 1.6, 0.1)
    c = base_kernel([0.7], [0.7], th)
    expect = 1.6 * (1.6 * c / 2 + 0.1) / 2 + 0.1
    assert nngp_kernel([0.7], [0.7], spec, th) == pytest.approx(expect)


def test_general_path_matches_fixed_variance_path():
    """Per-layer parameterization with equal values reduces to the classic
    two-hyperparameter NNGP (Lambda = sigma2_w/d I)."""
    rng = np.random.default_rng(7)
    for family in ("nngp_relu", "nngp_erf"):
        for depth in (1, 2, 3):
            for _ in range(10):
                d = rng.integers(1, 4)
                w, b = rng.uniform(0.3, 2.5), rng.uniform(0.01, 0.8)
                x, xp = rng.standard_normal((2, d))
                spec = KernelSpec(family, input_dim=int(d), depth=int(depth))
                th = HyperParams(
                    log_weight_in=np.full(d, np.log(w / d)),
                    log_bias_in=np.log(b),
                    log_weight=np.full(depth, np.log(w)),
                    log_bias=np.full(depth, np.log(b)))
                assert nngp_kernel(x, xp, spec, th) == pytest.approx(
                    nngp_kernel_fixed(x, xp, family, depth, w, b), rel=1e-12)


def test_symmetry_all_families():
    rng = np.random.default_rng(3)
    cases = [
        (KernelSpec("nngp_erf", 2, depth=2), None),
        (KernelSpec("nngp_relu", 2, depth=1), None),
        (KernelSpec("arcsin", 2), None),
        (KernelSpec("se", 2), None),
        (KernelSpec("matern52", 2), None),
    ]
    for spec, _ in cases:
        th = _theta_const(spec, 1.2, 0.3) \
            if spec.family not in ("se", "matern52") else \
            HyperParams(log_lengthscale=np.array([0.2]), log_signal=0.1)
        for _ in range(20):
            x, xp = rng.standard_normal((2, 2))
            assert kernel_value(x, xp, spec, th) == pytest.approx(
                kernel_value(xp, x, spec, th), rel=1e-12)


def test_arcsin_value_bounded_and_consistent():
    spec = KernelSpec("arcsin", input_dim=1)
    th = HyperParams(log_weight_in=np.log([0.9]), log_bias_in=np.log(0.2))
    v = arcsin_kernel([0.5], [-0.5], th)
    assert -1.0 < v < 1.0
    # erf_step with unit outer weight and zero outer bias is the same map
    k0 = base_kernel([0.5], [-0.5], th)
    kxx = base_kernel([0.5], [0.5], th)
    kpp = base_kernel([-0.5], [-0.5], th)
    assert v == pytest.approx(erf_step(kxx, kpp, k0, 1.0, 0.0), rel=1e-12)


def test_arcsin_diagonal_below_one():
    spec = KernelSpec("arcsin", input_dim=1)
    for b in (1e-12, 0.1, 10.0):
        th = HyperParams(log_weight_in=np.zeros(1), log_bias_in=np.log(b))
        v = kernel_value([0.0], [0.0], spec, th)
        assert 0.0 <= v < 1.0


# ---------------------------------------------------------------------------
# stationary baselines
# ---------------------------------------------------------------------------

def test_se_closed_form():
    th = HyperParams(log_lengthscale=np.zeros(1), log_signal=0.0)
    x, xp = np.array([1.0, 0.0]), np.array([0.0, 1.0])   # dist sqrt(2)
    assert se_kernel(x, xp, th) == pytest.approx(np.exp(-1.0))
    assert se_kernel(x, x, th) == pytest.approx(1.0)


def test_matern52_closed_form():
    th = HyperParams(log_lengthscale=np.zeros(1), log_signal=0.0)
    r5 = np.sqrt(5)
    expect = (1 + r5 + 5 / 3) * np.exp(-r5)
    assert matern52_kernel([0.0], [1.0], th) == pytest.approx(expect)
    assert expect == pytest.approx(0.52399, abs=5e-6)


def test_signal_variance_scales_diagonal():
    th = HyperParams(log_lengthscale=np.array([0.3]), log_signal=np.log(2.5))
    assert se_kernel([0.4], [0.4], th) == pytest.approx(2.5)
    assert matern52_kernel([0.4], [0.4], th) == pytest.approx(2.5)


# ---------------------------------------------------------------------------
# gram matrices
# ---------------------------------------------------------------------------

def test_gram_single_point():
    spec = KernelSpec("nngp_erf", input_dim=2, depth=1)
    th = _theta_const(spec, 1.6, 0.1)
    x = np.array([[0.3, 0.4]])
    K = gram_matrix(x, x, spec, th)
    assert K.shape == (1, 1)
    assert K[0, 0] == pytest.approx(nngp_kernel(x[0], x[0], spec, th))


def test_gram_duplicate_rows():
    spec = KernelSpec("arcsin", input_dim=2)
    th = _theta_const(spec, 1.0, 0.1)
    X = np.array([[0.2, 0.7], [0.2, 0.7]])
    K = gram_matrix(X, X, spec, th)
    assert np.allclose(K, K[0, 0])
    assert np.linalg.matrix_rank(K, tol=1e-12) == 1


def test_gram_psd_all_families():
    X5 = halton(5, 2).points
    X50 = halton(50, 2).points
    for spec in (KernelSpec("nngp_erf", 2, depth=2),
                 KernelSpec("nngp_relu", 2, depth=1),
                 KernelSpec("arcsin", 2),
                 KernelSpec("se", 2),
                 KernelSpec("matern52", 2)):
        if spec.family in ("se", "matern52"):
            th = HyperParams(log_lengthscale=np.array([-0.5]), log_signal=0.2)
        else:
            th = _theta_const(spec, 1.6, 0.1)
        for X in (X5, X50):
            K = gram_matrix(X, X, spec, th)
            assert np.allclose(K, K.T)
            lam = np.linalg.eigvalsh(K)
            assert lam.min() >= -1e-8 * K.diagonal().max()


def test_gram_matches_pointwise_values():
    spec = KernelSpec("nngp_erf", input_dim=2, depth=3)
    th = _theta_const(spec, 1.4, 0.2)
    X = halton(4, 2).points
    Xp = halton(7, 2).points[4:]
    K = gram_matrix(X, Xp, spec, th)
    for i in range(X.shape[0]):
        for j in range(Xp.shape[0]):
            assert K[i, j] == pytest.approx(
                nngp_kernel(X[i], Xp[j], spec, th), rel=1e-12)
