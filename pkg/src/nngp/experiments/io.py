"""Run artifacts: atomic CSV/JSON writers and the RunRecord summary.

Everything is written temp-file-then-rename in the target directory so a
crashed run never leaves a half-written artifact. Column orders are part
of the format contract (see docs/formats.md).
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


def _atomic_write(path, write_fn):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows):
    """rows: iterable of equal-length sequences matching `header`."""
    def go(fh):
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_plain(v) for v in row])
    return _atomic_write(path, go)


def write_json(path, obj):
    return _atomic_write(path, lambda fh: json.dump(_plain(obj), fh,
                                                    indent=2, sort_keys=True))


def _plain(v):
    """JSON/CSV-safe plain-Python view of numpy scalars and arrays."""
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


@dataclass
class RunRecord:
    """Summary of one command invocation, sufficient to reproduce it."""

    config: dict
    errors: dict = field(default_factory=dict)
    hyperparams: dict = field(default_factory=dict)
    nlml: dict = field(default_factory=dict)
    thresholds_met: bool = True
    notes: list = field(default_factory=list)
    timing_s: float = 0.0
    version: str = ""

    def save(self, path):
        return write_json(path, asdict(self))
