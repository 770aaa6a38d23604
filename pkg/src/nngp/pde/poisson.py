"""GP collocation for -lap u = f on the unit square with Dirichlet data.

Two manufactured solutions drive the experiments:

    u1 = sin(pi x) (y^2 + exp(-y))
    u2 = sin(pi x) cos(2 pi (y^2 + x))

with sources f = -lap u derived by hand below. Interior collocation points
come from the Halton sequence, boundary points are equispaced around the
perimeter. The joint covariance couples a (-lap x)(-lap x') block, a
cross block, and a plain boundary block, all from one latent kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gp import (Block, Observations, TrainResult, posterior, scan_init,
                  train)
from ..jets import LinearOp
from ..metrics import relative_l2_error
from ..params import HyperParams, KernelSpec
from ..sampling import boundary_equispaced, halton

_PI = np.pi


def solution_1(X):
    X = np.atleast_2d(np.asarray(X, float))
    x, y = X[:, 0], X[:, 1]
    return np.sin(_PI * x) * (y ** 2 + np.exp(-y))


def source_1(X):
    """-lap u1: u1_xx = -pi^2 u1 and u1_yy = sin(pi x)(2 + exp(-y))."""
    X = np.atleast_2d(np.asarray(X, float))
    x, y = X[:, 0], X[:, 1]
    return np.sin(_PI * x) * (_PI ** 2 * (y ** 2 + np.exp(-y))
                              - 2.0 - np.exp(-y))


def solution_2(X):
    X = np.atleast_2d(np.asarray(X, float))
    x, y = X[:, 0], X[:, 1]
    return np.sin(_PI * x) * np.cos(2 * _PI * (y ** 2 + x))


def source_2(X):
    """-lap u2 with w = 2 pi (y^2 + x):

    u_xx = -5 pi^2 sin(pi x) cos w - 4 pi^2 cos(pi x) sin w
    u_yy = -4 pi sin(pi x) sin w - 16 pi^2 y^2 sin(pi x) cos w
    """
    X = np.atleast_2d(np.asarray(X, float))
    x, y = X[:, 0], X[:, 1]
    w = 2 * _PI * (y ** 2 + x)
    sx, cx = np.sin(_PI * x), np.cos(_PI * x)
    sw, cw = np.sin(w), np.cos(w)
    return (5 * _PI ** 2 * sx * cw + 4 * _PI ** 2 * cx * sw
            + 4 * _PI * sx * sw + 16 * _PI ** 2 * y ** 2 * sx * cw)


_SOLUTIONS = {1: (solution_1, source_1), 2: (solution_2, source_2)}


@dataclass(frozen=True)
class PoissonProblem:
    """A manufactured-solution setup: which solution, the design sizes,
    the kernel, and how observation noise is handled. `noise_var=None`
    trains the two block noise variances by ML; a float fixes both at
    that value (the data here are exact, so a small nugget is the honest
    model — and it removes the spurious ML optimum that explains the
    oscillatory source away as noise)."""

    solution: int = 1
    n_boundary: int = 24
    n_interior: int = 25
    family: str = "nngp_erf"
    depth: int = 1
    noise_var: float | None = None

    def __post_init__(self):
        if self.solution not in _SOLUTIONS:
            raise ValueError("solution must be 1 or 2")
        if self.noise_var is not None and self.noise_var <= 0:
            raise ValueError("noise_var must be positive (or None to train)")

    @property
    def spec(self) -> KernelSpec:
        depth = self.depth if self.family.startswith("nngp") else 0
        return KernelSpec(self.family, input_dim=2, depth=depth)


@dataclass
class PoissonResult:
    problem: PoissonProblem
    fit: TrainResult
    grid_points: np.ndarray
    grid_mean: np.ndarray
    grid_std: np.ndarray
    grid_error: float
    cut_points: np.ndarray
    cut_mean: np.ndarray
    cut_std: np.ndarray
    cut_exact: np.ndarray
    cut_error: float
    boundary_points: np.ndarray
    boundary_std: np.ndarray

    @property
    def mean_cut_std(self) -> float:
        return float(np.mean(self.cut_std))


def training_inputs(problem: PoissonProblem):
    """(X_f interior Halton points, X_u equispaced boundary points)."""
    return halton(problem.n_interior, 2).points, \
        boundary_equispaced(problem.n_boundary).points


def test_grid(n: int = 441) -> np.ndarray:
    """n = m^2 evenly spaced points covering the closed square."""
    m = int(round(np.sqrt(n)))
    if m * m != n:
        raise ValueError(f"test grid size {n} is not a perfect square")
    g = np.linspace(0.0, 1.0, m)
    return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)


def cut_line(n: int = 101) -> np.ndarray:
    """The diagonal y = x, endpoints included."""
    t = np.linspace(0.0, 1.0, n)
    return np.column_stack([t, t])


def poisson_solve(problem: PoissonProblem, n_restarts: int = 10,
                  max_evals: int = 200, n_test: int = 441,
                  n_cut: int = 101, init: HyperParams | None = None,
                  init_strategy: str = "scan") -> PoissonResult:
    """Fit the joint GP and return posterior summaries on a uniform grid,
    the diagonal cut line, and the boundary points.

    Restart 0 seeds from the data-informed hyperparameter scan by default
    (`init_strategy="halton"` restores plain box restarts); the oscillatory
    sources here sit in a basin the box rows alone miss at useful rates.
    """
    exact_u, exact_f = _SOLUTIONS[problem.solution]
    X_f, X_u = training_inputs(problem)
    neglap = LinearOp.laplacian(2, scale=-1.0)
    obs = Observations(blocks=(
        Block(x=X_u, y=exact_u(X_u), noise_index=0),
        Block(x=X_f, y=exact_f(X_f), noise_index=1, operator=neglap),
    ))
    spec = problem.spec
    if problem.noise_var is not None:
        ln = np.log(np.full(2, problem.noise_var))
        if init is None and init_strategy == "scan":
            init = scan_init(obs, spec, log_noise=ln)
        elif init is None:
            init = HyperParams.from_vector(
                np.concatenate([np.zeros(spec.n_kernel_params), ln]), spec, 2)
        nk = spec.n_kernel_params
        fit = train(obs, spec, init=init, n_restarts=n_restarts,
                    max_evals=max_evals, frozen=(nk, nk + 1))
    else:
        fit = train(obs, spec, init=init, n_restarts=n_restarts,
                    max_evals=max_evals, init_strategy=init_strategy)

    Xq = test_grid(n_test)
    Xc = cut_line(n_cut)
    post = posterior(obs, np.vstack([Xq, Xc, X_u]), spec, fit.theta)
    nq, nc = Xq.shape[0], Xc.shape[0]
    grid_mean, grid_std = post.mean[:nq], post.std[:nq]
    cut_mean, cut_std = post.mean[nq:nq + nc], post.std[nq:nq + nc]
    return PoissonResult(
        problem=problem, fit=fit,
        grid_points=Xq, grid_mean=grid_mean, grid_std=grid_std,
        grid_error=relative_l2_error(grid_mean, exact_u(Xq)),
        cut_points=Xc, cut_mean=cut_mean, cut_std=cut_std,
        cut_exact=exact_u(Xc),
        cut_error=relative_l2_error(cut_mean, exact_u(Xc)),
        boundary_points=X_u, boundary_std=post.std[nq + nc:],
    )


#: Named training setups, all with the exact-data nugget. The solution-2
#: quartet mirrors the uncertainty study — two kernels at two design sizes
#: each, ordered by decreasing cut-line error. Design sizes are calibrated
#: per kernel: the squared-exponential resolves the oscillatory solution 2
#: only slowly (its errors move ~two orders of magnitude between 80 and
#: 150 training points), while the network kernel needs ~120 points before
#: maximum likelihood stops preferring an interpolate-and-revert fit, so
#: matching error levels across kernels means different point budgets.
POISSON_PRESETS = {
    "s1-small": PoissonProblem(solution=1, n_boundary=24, n_interior=25,
                               noise_var=1e-8),
    "s1-gp-small": PoissonProblem(solution=1, n_boundary=24, n_interior=25,
                                  family="se", noise_var=1e-8),
    "s1-large": PoissonProblem(solution=1, n_boundary=32, n_interior=50,
                               noise_var=1e-8),
    "s2-gp-small": PoissonProblem(solution=2, n_boundary=32, n_interior=50,
                                  family="se", noise_var=1e-8),
    "s2-nngp-small": PoissonProblem(solution=2, n_boundary=40, n_interior=80,
                                    noise_var=1e-8),
    "s2-gp-large": PoissonProblem(solution=2, n_boundary=40, n_interior=80,
                                  family="se", noise_var=1e-8),
    "s2-nngp-large": PoissonProblem(solution=2, n_boundary=52,
                                    n_interior=112, noise_var=1e-8),
}

#: The four presets of the solution-2 uncertainty study, worst to best.
S2_QUARTET = ("s2-gp-small", "s2-nngp-small", "s2-gp-large", "s2-nngp-large")
