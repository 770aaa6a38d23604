"""`nngp-solve`: run one of the reference experiments from the command line.

    nngp-solve <command> [--config FILE] [--preset reference] [--seed N]
               [--out DIR] [--kernel FAMILY] [--depth L]

Exit codes: 0 = ran and reproduced the reference behavior, 1 = ran but
missed a threshold, 2 = configuration or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ExperimentConfig, reference_config
from .runs import RUNNERS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nngp-solve",
        description="Reproduce the NNGP regression / PDE experiments.")
    p.add_argument("command", choices=EXPERIMENTS)
    p.add_argument("--config", metavar="FILE",
                   help="YAML key/value file; unknown keys are errors")
    p.add_argument("--preset", choices=["reference"],
                   help="pin every setting to the reference values "
                        "(incompatible with --config)")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--kernel", metavar="FAMILY",
                   help="kernel family for single-kernel commands")
    p.add_argument("--depth", type=int, metavar="L")
    return p


def config_from_args(args) -> ExperimentConfig:
    if args.preset and args.config:
        raise ValueError("--preset reference pins every setting; "
                         "it cannot be combined with --config")
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        cfg.experiment = args.command
    else:
        cfg = reference_config(args.command)
    for name in ("seed", "out", "kernel", "depth"):
        v = getattr(args, name)
        if v is not None:
            setattr(cfg, name, v)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        rec = RUNNERS[cfg.experiment](cfg)
    except Exception as e:
        print(f"nngp-solve: error: {e}", file=sys.stderr)
        return 2
    status = "ok" if rec.thresholds_met else "thresholds missed"
    print(f"{cfg.experiment}: {status} ({rec.timing_s:.1f}s); "
          f"artifacts in {cfg.out}/{cfg.experiment}")
    for k in sorted(rec.errors):
        print(f"  {k}: {rec.errors[k]:.6g}")
    return 0 if rec.thresholds_met else 1


if __name__ == "__main__":
    sys.exit(main())
