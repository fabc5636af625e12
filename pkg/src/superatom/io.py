"""CSV artifact and run-manifest read/write.

The CSV schema is stable: header
``t_us,pr0,pr1,pr2,pr_ge3,pop_e_total,purity,trace_err,per_atom_rr_0..``
with an optional trailing ``stderr_pr1`` column for trajectory runs.
Values carry 9 significant digits with locale-independent decimal
points, so identical runs produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .mesolve import ObservableSeries

_FIXED_COLUMNS = ["t_us", "pr0", "pr1", "pr2", "pr_ge3",
                  "pop_e_total", "purity", "trace_err"]


def series_header(n_atoms: int, with_stderr: bool) -> list[str]:
    cols = _FIXED_COLUMNS + [f"per_atom_rr_{j}" for j in range(n_atoms)]
    if with_stderr:
        cols.append("stderr_pr1")
    return cols


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_series(path, series: ObservableSeries) -> None:
    path = Path(path)
    with_stderr = series.stderr_pr1 is not None
    cols = series_header(series.n_atoms, with_stderr)
    lines = [",".join(cols)]
    for k in range(series.times.size):
        row = [
            _fmt(series.times[k]),
            _fmt(series.pr_n[k, 0]),
            _fmt(series.pr_n[k, 1]),
            _fmt(series.pr_n[k, 2]),
            _fmt(series.pr_n[k, 3]),
            _fmt(series.pop_e_total[k]),
            _fmt(series.purity[k]),
            _fmt(series.trace_error[k]),
        ]
        row += [_fmt(v) for v in series.per_atom_rr[k]]
        if with_stderr:
            row.append(_fmt(series.stderr_pr1[k]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


class SchemaError(ValueError):
    """CSV header does not match the artifact schema."""


def read_series(path) -> ObservableSeries:
    path = Path(path)
    with path.open("r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if header[: len(_FIXED_COLUMNS)] != _FIXED_COLUMNS:
        raise SchemaError(f"{path}: unexpected header {header[:8]}")
    rest = header[len(_FIXED_COLUMNS):]
    with_stderr = bool(rest) and rest[-1] == "stderr_pr1"
    rr_cols = rest[:-1] if with_stderr else rest
    expected_rr = [f"per_atom_rr_{j}" for j in range(len(rr_cols))]
    if rr_cols != expected_rr:
        raise SchemaError(f"{path}: unexpected per-atom columns {rr_cols}")
    n = len(rr_cols)
    base = len(_FIXED_COLUMNS)
    return ObservableSeries(
        times=data[:, 0],
        pr_n=data[:, 1:5],
        pop_e_total=data[:, 5],
        purity=data[:, 6],
        trace_error=data[:, 7],
        per_atom_rr=data[:, base:base + n],
        stderr_pr1=data[:, base + n] if with_stderr else None,
    )


def write_jump_log(path, records) -> None:
    """One line per collapse event: trajectory_index,time_us,channel,atom."""
    lines = ["trajectory_index,time_us,channel,atom"]
    for rec in records:
        idx = rec.stats.get("trajectory_index", 0)
        for j in rec.jumps:
            lines.append(f"{idx},{_fmt(j.time)},{j.channel_label},{j.atom_index}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def sha256_of(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest_atomic(path, manifest: dict) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                   encoding="ascii")
    os.replace(tmp, path)
