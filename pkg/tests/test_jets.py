import numpy as np
import pytest

from nngp.jets import (KernelJet, LinearOp, apply_operator_pair, jet_base,
                       jet_step, kernel_jet, operator_gram)
from nngp.kernels import gram_matrix, kernel_value
from nngp.params import HyperParams, KernelSpec

_STENCILS = {
    0: ((0, 1.0),),
    1: ((1, 0.5), (-1, -0.5)),
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
}


def fd_partial(x, xp, spec, theta, a, b, i, j, h):
    """Central-difference mixed partial d^i/dx_a^i d^j/dx'_b^j k."""
    acc = 0.0
    for s, ws in _STENCILS[i]:
        xs = np.array(x, float)
        xs[a] += s * h
        for t, wt in _STENCILS[j]:
            xt = np.array(xp, float)
            xt[b] += t * h
            acc += ws * wt * kernel_value(xs, xt, spec, theta)
    return acc / h ** (i + j)


def _cases():
    rng = np.random.default_rng(11)
    specs = [
        KernelSpec("nngp_erf", 1, depth=1),
        KernelSpec("nngp_erf", 2, depth=2),
        KernelSpec("nngp_erf", 2, depth=3),
        KernelSpec("arcsin", 2),
        KernelSpec("se", 2),
    ]
    for spec in specs:
        if spec.family == "se":
            th = HyperParams(log_lengthscale=np.array([-0.4]),
                             log_signal=np.log(1.3))
        else:
            th = HyperParams.constant_variance(spec, weight_var=1.5,
                                               bias_var=0.2)
        x = rng.uniform(-1, 1, spec.input_dim)
        xp = rng.uniform(-1, 1, spec.input_dim)
        yield spec, th, x, xp


def test_partials_match_finite_differences():
    for spec, th, x, xp in _cases():
        jet = kernel_jet(x, xp, spec, th)
        for a in range(spec.input_dim):
            for b in range(spec.input_dim):
                for i in range(3):
                    for j in range(3):
                        h = 1e-4 if i + j <= 2 else 5e-3
                        tol = 1e-5 if i + j <= 2 else 1e-3
                        want = fd_partial(x, xp, spec, th, a, b, i, j, h)
                        got = jet.partial(a, b, i, j)[0, 0]
                        assert got == pytest.approx(
                            want, abs=tol * max(1.0, abs(want))), \
                            (spec.family, spec.depth, a, b, i, j)


def test_argument_exchange_symmetry():
    # k(x, x') = k(x', x), so swapping arguments transposes mixed partials
    rng = np.random.default_rng(5)
    spec = KernelSpec("nngp_erf", 2, depth=2)
    th = HyperParams.constant_variance(spec, weight_var=1.6, bias_var=0.1)
    X = rng.uniform(-1, 1, (4, 2))
    Xp = rng.uniform(-1, 1, (3, 2))
    fwd = kernel_jet(X, Xp, spec, th)
    rev = kernel_jet(Xp, X, spec, th)
    for a in range(2):
        for b in range(2):
            for i in range(3):
                for j in range(3):
                    assert np.allclose(fwd.partial(a, b, i, j),
                                       rev.partial(b, a, j, i).T,
                                       rtol=1e-12, atol=1e-12)


def test_diagonal_series_match_finite_differences():
    # diag entries are derivatives of s -> k(x + s e_a, x + s e_a)
    spec = KernelSpec("nngp_erf", 2, depth=2)
    th = HyperParams.constant_variance(spec, weight_var=1.4, bias_var=0.15)
    x = np.array([0.3, -0.6])
    jet = kernel_jet(x[None], x[None], spec, th)
    h = 1e-4
    for a in range(2):
        def g(s):
            xs = x.copy()
            xs[a] += s
            return kernel_value(xs, xs, spec, th)

        d1 = (g(h) - g(-h)) / (2 * h)
        d2 = (g(h) - 2 * g(0) + g(-h)) / h ** 2
        assert jet.diag_partial_x(a, 1)[0] == pytest.approx(d1, abs=1e-6)
        assert jet.diag_partial_x(a, 2)[0] == pytest.approx(
            d2, abs=1e-4 * max(1, abs(d2)))
        assert jet.diag_partial_xp(a, 1)[0] == pytest.approx(d1, abs=1e-6)


def test_relu_and_matern_jets_refused():
    th_r = HyperParams.constant_variance(KernelSpec("nngp_relu", 1, depth=1),
                                         weight_var=1.6, bias_var=0.1)
    with pytest.raises(ValueError, match="ReLU"):
        kernel_jet([[0.1]], [[0.2]], KernelSpec("nngp_relu", 1, depth=1), th_r)
    th_m = HyperParams(log_lengthscale=np.zeros(1), log_signal=0.0)
    with pytest.raises(ValueError):
        kernel_jet([[0.1]], [[0.2]], KernelSpec("matern52", 1), th_m)


def test_order_validation():
    spec = KernelSpec("nngp_erf", 1, depth=1)
    th = HyperParams.constant_variance(spec, weight_var=1.0, bias_var=0.1)
    with pytest.raises(ValueError):
        kernel_jet([[0.0]], [[0.0]], spec, th, orders=(3, 0))
    jet = kernel_jet([[0.0]], [[0.5]], spec, th, orders=(1, 1))
    with pytest.raises(ValueError):
        jet.partial(0, 0, 2, 0)
    with pytest.raises(ValueError):
        jet.partial(1, 0, 0, 0)


# ---------------------------------------------------------------------------
# linear operators
# ---------------------------------------------------------------------------

def test_linear_op_algebra():
    ident = LinearOp.identity(2)
    assert ident.is_identity and ident.max_order == 0
    lap = LinearOp.laplacian(2, scale=-1.0)
    assert lap.max_order == 2 and not lap.is_identity
    combo = 2.0 * ident - lap
    assert combo.const == 2.0
    assert combo.d2 == (1.0, 1.0)
    with pytest.raises(ValueError):
        LinearOp(0.0, (1.0,), (0.0, 0.0))
    with pytest.raises(ValueError):
        LinearOp.identity(1) + LinearOp.identity(2)


def test_identity_pair_reproduces_kernel():
    spec = KernelSpec("nngp_erf", 2, depth=1)
    th = HyperParams.constant_variance(spec, weight_var=1.6, bias_var=0.1)
    X = np.array([[0.1, 0.2], [0.6, -0.3]])
    jet = kernel_jet(X, X, spec, th)
    ident = LinearOp.identity(2)
    assert np.allclose(apply_operator_pair(jet, ident, ident), jet.value)
    # the gram entry point short-circuits to the plain kernel gram
    assert np.array_equal(operator_gram(X, X, spec, th, None, None),
                          gram_matrix(X, X, spec, th))


def test_laplacian_gram_against_finite_differences():
    spec = KernelSpec("nngp_erf", 2, depth=1)
    th = HyperParams.constant_variance(spec, weight_var=1.6, bias_var=0.1)
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, (3, 2))
    Xp = rng.uniform(-1, 1, (2, 2))
    lap = LinearOp.laplacian(2, scale=-1.0)

    K = operator_gram(X, Xp, spec, th, lap, None)
    h = 1e-4
    for n in range(3):
        for m in range(2):
            want = -sum(fd_partial(X[n], Xp[m], spec, th, a, 0, 2, 0, h)
                        for a in range(2))
            assert K[n, m] == pytest.approx(want, abs=1e-5 * max(1, abs(want)))

    Kb = operator_gram(X, Xp, spec, th, lap, lap)
    h = 5e-3
    want = sum(fd_partial(X[0], Xp[0], spec, th, a, b, 2, 2, h)
               for a in range(2) for b in range(2))
    assert Kb[0, 0] == pytest.approx(want, abs=1e-3 * max(1, abs(want)))


def test_pointwise_coefficients():
    # first-order coefficient varying per left point (linearized advection)
    spec = KernelSpec("nngp_erf", 1, depth=1)
    th = HyperParams.constant_variance(spec, weight_var=1.2, bias_var=0.2)
    X = np.array([[0.1], [0.4], [-0.2]])
    Xp = np.array([[0.0], [0.7]])
    speed = np.array([1.0, -2.0, 0.5])
    op = LinearOp(0.0, (speed,), (0.0,))
    K = operator_gram(X, Xp, spec, th, op, None)
    jet = kernel_jet(X, Xp, spec, th, orders=(1, 0))
    assert np.allclose(K, speed[:, None] * jet.partial(0, 0, 1, 0))
    bad = LinearOp(0.0, (np.ones(4),), (0.0,))
    with pytest.raises(ValueError, match="shape"):
        operator_gram(X, Xp, spec, th, bad, None)


def test_jet_step_composition_matches_full_jet():
    spec = KernelSpec("nngp_erf", 2, depth=2)
    th = HyperParams.constant_variance(spec, weight_var=1.5, bias_var=0.2)
    x, xp = np.array([0.2, -0.5]), np.array([0.8, 0.1])
    jet = jet_base(x, xp, th)
    for l in range(2):
        jet = jet_step(jet, th.weight_var[l], th.bias_var[l])
    ref = kernel_jet(x[None], xp[None], spec, th)
    for i in range(3):
        for j in range(3):
            for a in range(2):
                for b in range(2):
                    assert jet.partial(a, b, i, j) == pytest.approx(
                        ref.partial(a, b, i, j)[0, 0], rel=1e-12, abs=1e-14)
