"""CSV emission for run artifacts.

Every file opens with a ``# schema: ...`` comment line; the column sets
below are fixed and any change to them bumps the version number.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .engine import Trace
from .scenarios import RunArtifact

SCHEMA_VERSION = 1
TRACE_COLUMNS = ("t_s", "v_sw_V", "i_sw_A", "t_ch_K", "t_p_K")
EVENT_COLUMNS = ("neuron_id", "t_onset_s", "t_offset_s", "peak_current_A")
SUMMARY_COLUMNS = ("key", "value")
SWEEP_COLUMNS = ("delta_t_s", "peak_current_A", "fired")


def fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.16e}"
    return str(value)


def _write(path: Path, kind: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    lines = [f"# schema: vo2lif-{kind}/{SCHEMA_VERSION}", ",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_csv(artifact: RunArtifact, destination: str | Path) -> list[Path]:
    """Write the artifact's CSV files and config snapshot into ``destination``.

    Returns the written paths. Raises :class:`OSError` if the directory
    cannot be created or written.
    """
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    snapshot = out / "config.toml"
    snapshot.write_text(artifact.snapshot(), encoding="utf-8")
    written.append(snapshot)

    for nid, tr in artifact.traces.items():
        path = out / f"trace_{nid}.csv"
        rows = zip(tr.t.tolist(), tr.v_sw.tolist(), tr.i_sw.tolist(), tr.channel_temp.tolist(), tr.t_p.tolist())
        _write(path, "trace", TRACE_COLUMNS, rows)
        written.append(path)

    path = out / "events.csv"
    _write(path, "events", EVENT_COLUMNS,
           ((e.neuron_id, e.t_onset, e.t_offset, e.peak_current) for e in artifact.events))
    written.append(path)

    if artifact.sweep is not None:
        path = out / "summary.csv"
        points = sorted(artifact.sweep, key=lambda p: p.delta_t)
        _write(path, "sweep", SWEEP_COLUMNS, ((p.delta_t, p.peak_current, p.fired) for p in points))
        written.append(path)
        path = out / "window.csv"
        _write(path, "summary", SUMMARY_COLUMNS, artifact.summary.items())
    else:
        path = out / "summary.csv"
        _write(path, "summary", SUMMARY_COLUMNS, artifact.summary.items())
    written.append(path)
    return written


def read_trace_csv(path: str | Path, neuron_id: str | None = None) -> Trace:
    """Load a trace file written by :func:`emit_csv`; the phase is not stored."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2, ndmin=2)
    nid = neuron_id or path.stem.removeprefix("trace_")
    return Trace(nid, data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4])
