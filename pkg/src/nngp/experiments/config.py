"""Flat experiment configuration, round-trippable through YAML.

One dataclass covers all five commands; fields a command does not use are
simply ignored by it (and say so below). The defaults ARE the reference
settings — `reference_config(experiment)` is just the defaults with the
experiment name filled in.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import yaml

EXPERIMENTS = ("validate-kernels", "approx-step", "approx-hartmann",
               "poisson", "burgers")
_FAMILIES = ("nngp_erf", "nngp_relu", "arcsin", "se", "matern52")


@dataclass
class ExperimentConfig:
    experiment: str = "validate-kernels"
    seed: int = 0
    out: str = "runs"
    # training protocol (all commands that fit GPs)
    n_restarts: int = 10
    max_evals: int = 200
    # single-kernel selection (burgers; ignored by the suite commands,
    # which fix their own kernel lists)
    kernel: str = "nngp_erf"
    depth: int = 1
    # validate-kernels
    n_grid: int = 100
    # approx-hartmann: comma-separated design sizes
    sizes: str = "100,200,500,1000"
    # poisson: comma-separated preset names, or "all"
    presets: str = "all"
    # burgers march
    dt: float = 0.01
    n_steps: int = 100
    n_initial: int = 24
    n_interior: int = 31
    noise_std: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        if self.kernel not in _FAMILIES:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        for name in ("n_restarts", "max_evals", "n_grid", "n_steps",
                     "n_initial", "n_interior"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        self.size_list()  # parses, raising on junk

    def size_list(self) -> list[int]:
        try:
            out = [int(s) for s in str(self.sizes).split(",") if s.strip()]
        except ValueError:
            raise ValueError(f"sizes must be comma-separated integers, "
                             f"got {self.sizes!r}") from None
        if not out or any(n < 10 for n in out):
            raise ValueError("each design size must be >= 10")
        return out

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            d = yaml.safe_load(fh)
        if d is None:
            d = {}
        if not isinstance(d, dict):
            raise ValueError(f"{path}: expected a flat key/value mapping")
        return cls.from_dict(d)

    def save(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(),
                                             sort_keys=False))


def reference_config(experiment: str, **overrides) -> ExperimentConfig:
    """The reference settings for one experiment (defaults verbatim)."""
    return ExperimentConfig(experiment=experiment, **overrides)
