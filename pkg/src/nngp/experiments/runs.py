"""The five experiment commands behind the CLI.

Each `run_*` function takes an ExperimentConfig, writes its artifacts
under <out>/<experiment>/, and returns a RunRecord whose `thresholds_met`
says whether the run reproduced the reference behavior (the CLI maps that
to the exit code). All are deterministic given (config, seed).
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .. import __version__
from ..gp import Block, Observations, posterior, train
from ..kernels import nngp_kernel_fixed
from ..metrics import relative_l2_error
from ..params import KernelSpec
from ..pde.burgers import BurgersProblem, burgers_march
from ..pde.poisson import POISSON_PRESETS, S2_QUARTET, poisson_solve
from ..quadrature import erf, numeric_step, relu
from .config import ExperimentConfig
from .hartmann import hartmann_split
from .io import RunRecord, write_csv

#: Reference cut-line errors for the solution-2 uncertainty quartet; a run
#: passes if each preset's error is within 3x and the sequence decreases.
QUARTET_TARGETS = (0.049, 0.029, 0.022, 0.0081)


def _out_dir(cfg: ExperimentConfig) -> Path:
    d = Path(cfg.out) / cfg.experiment
    d.mkdir(parents=True, exist_ok=True)
    return d


def _record(cfg: ExperimentConfig, t0: float) -> RunRecord:
    return RunRecord(config=cfg.to_dict(), version=__version__,
                     timing_s=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# validate-kernels
# ---------------------------------------------------------------------------

def _numeric_layers(kxx, kpp, kxp, depth, weight_var, bias_var, phi, method):
    """Iterate the layer map by quadrature; yields k^l(x,x') for l=1..depth."""
    for _ in range(depth):
        nxt = numeric_step(kxx, kpp, kxp, weight_var, bias_var, phi,
                           method=method)
        kxx = numeric_step(kxx, kxx, kxx, weight_var, bias_var, phi,
                           method=method)
        kpp = numeric_step(kpp, kpp, kpp, weight_var, bias_var, phi,
                           method=method)
        kxp = nxt
        yield kxp


def run_validate_kernels(cfg: ExperimentConfig) -> RunRecord:
    """Analytic layer recursions vs the Gauss-Hermite oracle on the unit
    circle: x = (1,0), x'(theta) = (cos theta, sin theta), shared
    sigma2_w = 1.6, sigma2_b = 0.1, depths 0..4."""
    t0 = time.perf_counter()
    out = _out_dir(cfg)
    w, b, d = 1.6, 0.1, 2
    thetas = np.linspace(0.0, np.pi, cfg.n_grid)
    x = np.array([1.0, 0.0])
    rows, worst = [], 0.0
    for family, phi, method in (("nngp_relu", relu, "split"),
                                ("nngp_erf", erf, "hermite")):
        for th in thetas:
            xp = np.array([np.cos(th), np.sin(th)])
            # depth 0 is the shared bilinear base: identical by construction
            base = w / d * float(x @ xp) + b
            diag = w / d + b
            rows.append((family, th, 0, base, base, 0.0))
            numeric = _numeric_layers(diag, diag, base, 4, w, b, phi, method)
            for depth, kn in enumerate(numeric, start=1):
                ka = nngp_kernel_fixed(x, xp, family, depth, w, b)
                rows.append((family, th, depth, ka, kn, abs(ka - kn)))
                worst = max(worst, abs(ka - kn))
    write_csv(out / "kernel_agreement.csv",
              ["nonlinearity", "theta", "layer", "analytic", "numeric",
               "absdiff"], rows)
    rec = _record(cfg, t0)
    rec.errors["max_absdiff"] = worst
    rec.thresholds_met = worst < 1e-6
    rec.save(out / "run.json")
    return rec


# ---------------------------------------------------------------------------
# approx-step
# ---------------------------------------------------------------------------

def step_dataset(n_train: int = 10, n_test: int = 100):
    """Unit step on [-1,1]: even-count symmetric grids keep x=0 (the jump)
    out of both sets."""
    x_tr = np.linspace(-1.0, 1.0, n_train)[:, None]
    x_te = np.linspace(-1.0, 1.0, n_test)[:, None]
    f = lambda x: (x[:, 0] >= 0).astype(float)
    return x_tr, f(x_tr), x_te, f(x_te)


STEP_VARIANTS = (
    ("gp-se", "se", 0),
    ("gp-matern52", "matern52", 0),
    ("nngp-erf-l1", "nngp_erf", 1),
    ("nngp-erf-l2", "nngp_erf", 2),
    ("nngp-erf-l3", "nngp_erf", 3),
    ("nngp-relu-l1", "nngp_relu", 1),
    ("nngp-relu-l2", "nngp_relu", 2),
    ("nngp-relu-l3", "nngp_relu", 3),
)


def _fit_predict(x_tr, y_tr, x_te, spec, cfg):
    obs = Observations(blocks=(Block(x=x_tr, y=y_tr, noise_index=0),))
    fit = train(obs, spec, n_restarts=cfg.n_restarts,
                max_evals=cfg.max_evals)
    return fit, posterior(obs, x_te, spec, fit.theta)


def run_approx_step(cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    out = _out_dir(cfg)
    x_tr, y_tr, x_te, y_te = step_dataset()
    rec = _record(cfg, t0)
    summary = []
    coverage = {}
    for name, family, depth in STEP_VARIANTS:
        spec = KernelSpec(family, input_dim=1, depth=depth)
        try:
            fit, post = _fit_predict(x_tr, y_tr, x_te, spec, cfg)
        except Exception as e:  # record and keep going
            rec.notes.append(f"{name}: training failed: {e}")
            continue
        lo, hi = post.mean - 2 * post.std, post.mean + 2 * post.std
        err = relative_l2_error(post.mean, y_te)
        away = np.abs(x_te[:, 0]) > 0.1
        cov = float(np.mean((y_te >= lo)[away] & (y_te <= hi)[away]))
        rec.errors[name] = err
        rec.nlml[name] = fit.nlml
        rec.hyperparams[name] = fit.theta.as_dict()
        coverage[name] = cov
        summary.append((name, err, cov, fit.nlml))
        write_csv(out / f"profile_{name}.csv",
                  ["x", "mean", "std", "lo", "hi", "exact"],
                  zip(x_te[:, 0], post.mean, post.std, lo, hi, y_te))
    write_csv(out / "errors.csv",
              ["variant", "rel_l2_error", "band_coverage_away", "nlml"],
              summary)
    e = rec.errors
    checks = []
    if "nngp-relu-l1" in e and "gp-se" in e:
        checks.append(e["nngp-relu-l1"] < e["gp-se"])
    relu_errs = [e[k] for k in ("nngp-relu-l1", "nngp-relu-l2",
                                "nngp-relu-l3") if k in e]
    if len(relu_errs) == 3:
        checks.append(max(relu_errs) <= 2 * min(relu_errs))
        checks.append(all(coverage[k] >= 0.9 for k in coverage
                          if k.startswith("nngp-relu")))
    rec.thresholds_met = bool(checks) and all(checks)
    rec.timing_s = time.perf_counter() - t0
    rec.save(out / "run.json")
    return rec


# ---------------------------------------------------------------------------
# approx-hartmann
# ---------------------------------------------------------------------------

HARTMANN_KERNELS = (
    ("gp-se", "se", 0),
    ("nngp-erf-l1", "nngp_erf", 1),
    ("nngp-relu-l1", "nngp_relu", 1),
)


def run_approx_hartmann(cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    out = _out_dir(cfg)
    rec = _record(cfg, t0)
    sizes = cfg.size_list()
    rows = []
    for n in sizes:
        x_tr, y_tr, x_te, y_te = hartmann_split(n, seed=cfg.seed)
        for name, family, depth in HARTMANN_KERNELS:
            spec = KernelSpec(family, input_dim=3, depth=depth)
            try:
                fit, post = _fit_predict(x_tr, y_tr, x_te, spec, cfg)
            except Exception as e:
                rec.notes.append(f"{name} at N={n}: training failed: {e}")
                continue
            err = relative_l2_error(post.mean, y_te)
            rec.errors[f"{name}-n{n}"] = err
            rec.nlml[f"{name}-n{n}"] = fit.nlml
            rows.append((n, name, x_tr.shape[0], x_te.shape[0], err,
                         fit.nlml))
    write_csv(out / "errors.csv",
              ["n", "kernel", "n_train", "n_test", "rel_l2_error", "nlml"],
              rows)
    e = rec.errors
    nmin, nmax = min(sizes), max(sizes)
    checks = []
    if nmin != nmax:
        for k in ("gp-se", "nngp-erf-l1"):
            if f"{k}-n{nmin}" in e and f"{k}-n{nmax}" in e:
                checks.append(e[f"{k}-n{nmax}"] < e[f"{k}-n{nmin}"])
    smooth = (f"gp-se-n{nmax}", f"nngp-erf-l1-n{nmax}")
    if all(k in e for k in smooth + (f"nngp-relu-l1-n{nmax}",)):
        checks.extend(e[k] < e[f"nngp-relu-l1-n{nmax}"] for k in smooth)
        checks.extend(e[k] < 0.05 for k in smooth)
    rec.thresholds_met = bool(checks) and all(checks)
    rec.timing_s = time.perf_counter() - t0
    rec.save(out / "run.json")
    return rec


# ---------------------------------------------------------------------------
# poisson
# ---------------------------------------------------------------------------

def run_poisson(cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    out = _out_dir(cfg)
    rec = _record(cfg, t0)
    if cfg.presets.strip() == "all":
        names = list(POISSON_PRESETS)
    else:
        names = [s.strip() for s in cfg.presets.split(",") if s.strip()]
        unknown = [n for n in names if n not in POISSON_PRESETS]
        if unknown:
            raise ValueError(f"unknown poisson presets: {', '.join(unknown)}")
    results, rows = {}, []
    for name in names:
        p = POISSON_PRESETS[name]
        r = poisson_solve(p, n_restarts=cfg.n_restarts,
                          max_evals=cfg.max_evals)
        results[name] = r
        rec.errors[f"{name}-cut"] = r.cut_error
        rec.errors[f"{name}-grid"] = r.grid_error
        rec.nlml[name] = r.fit.nlml
        rec.hyperparams[name] = r.fit.theta.as_dict()
        rows.append((name, p.family, p.n_boundary, p.n_interior,
                     r.cut_error, r.grid_error, r.mean_cut_std, r.fit.nlml))
        write_csv(out / f"cut_{name}.csv",
                  ["x", "y", "mean", "std", "exact"],
                  zip(r.cut_points[:, 0], r.cut_points[:, 1], r.cut_mean,
                      r.cut_std, r.cut_exact))
        write_csv(out / f"grid_{name}.csv",
                  ["x", "y", "mean", "std"],
                  zip(r.grid_points[:, 0], r.grid_points[:, 1],
                      r.grid_mean, r.grid_std))
    write_csv(out / "errors.csv",
              ["preset", "kernel", "n_boundary", "n_interior", "cut_error",
               "grid_error", "mean_cut_std", "nlml"], rows)
    checks = []
    if set(S2_QUARTET) <= set(names):
        errs = [results[n].cut_error for n in S2_QUARTET]
        stds = [results[n].mean_cut_std for n in S2_QUARTET]
        checks.append(all(t / 3 <= e <= 3 * t
                          for e, t in zip(errs, QUARTET_TARGETS)))
        checks.append(all(a > b for a, b in zip(errs, errs[1:])))
        checks.append(spearmanr(stds, errs).statistic == 1.0)
    if {"s1-small", "s1-gp-small"} <= set(names):
        a = results["s1-small"].grid_error
        b = results["s1-gp-small"].grid_error
        checks.append(max(a, b) <= 3 * min(a, b))
    rec.thresholds_met = bool(checks) and all(checks)
    rec.timing_s = time.perf_counter() - t0
    rec.save(out / "run.json")
    return rec


# ---------------------------------------------------------------------------
# burgers
# ---------------------------------------------------------------------------

def run_burgers(cfg: ExperimentConfig) -> RunRecord:
    t0 = time.perf_counter()
    out = _out_dir(cfg)
    rec = _record(cfg, t0)
    problem = BurgersProblem(dt=cfg.dt, n_steps=cfg.n_steps,
                             n_initial=cfg.n_initial,
                             n_interior=cfg.n_interior, family=cfg.kernel,
                             depth=cfg.depth, noise_sd=cfg.noise_std,
                             seed=cfg.seed)
    run = burgers_march(problem, n_restarts=cfg.n_restarts,
                        max_evals=cfg.max_evals)
    err_rows = []
    for r in run.records:
        rec.errors[f"t{r.time:g}"] = r.error
        err_rows.append((r.time, r.error, float(np.mean(r.std))))
        write_csv(out / f"profile_t{r.time:g}.csv",
                  ["x", "mean", "std", "exact"],
                  zip(run.x_test[:, 0], r.mean, r.std, r.exact))
    write_csv(out / "errors.csv", ["time", "rel_l2_error", "mean_std"],
              err_rows)
    write_csv(out / "nlml_trace.csv", ["step", "nlml"],
              list(enumerate(run.nlml_trace, start=1)))
    rec.nlml["final"] = run.nlml_trace[-1]
    rec.hyperparams["final"] = run.final_state.theta.as_dict()
    # exact covariance-propagation invariant, and the accuracy bar the
    # reference runs clear (looser for the plain arcsine-kernel GP)
    diag_ok = min(run.diag_checks) >= -1e-10
    bar = 0.1 if (cfg.kernel.startswith("nngp")
                  and cfg.noise_std == 0) else 0.5
    final_err = rec.errors.get("t1", np.inf)
    rec.thresholds_met = bool(diag_ok and np.isfinite(final_err)
                              and final_err < bar)
    rec.notes.append(f"min augmented-minus-plain diagonal gap: "
                     f"{min(run.diag_checks):.3g}")
    rec.timing_s = time.perf_counter() - t0
    rec.save(out / "run.json")
    return rec


RUNNERS = {
    "validate-kernels": run_validate_kernels,
    "approx-step": run_approx_step,
    "approx-hartmann": run_approx_hartmann,
    "poisson": run_poisson,
    "burgers": run_burgers,
}
