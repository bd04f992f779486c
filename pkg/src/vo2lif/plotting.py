"""Optional PNG figures rendered next to the CSV output."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .scenarios import RunArtifact  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "figure.dpi": 120,
}


def _iv_figure(artifact: RunArtifact):
    tr = next(iter(artifact.traces.values()))
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    half = len(tr.t) // 2 + 1
    ax.plot(tr.v_sw[:half], tr.i_sw[:half] * 1e3, label="up")
    ax.plot(tr.v_sw[half - 1:], tr.i_sw[half - 1:] * 1e3, "--", label="down")
    ax.set_xlabel("$V_{sw}$ (V)")
    ax.set_ylabel("$I_{sw}$ (mA)")
    ax.set_title(f"T0 = {artifact.config.ambient:g} K")
    ax.legend(frameon=False)
    return fig


def _trace_figure(artifact: RunArtifact):
    fig, (ax_i, ax_t) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    for nid, tr in artifact.traces.items():
        ax_i.plot(tr.t * 1e6, tr.i_sw * 1e3, label=nid)
        ax_t.plot(tr.t * 1e6, tr.channel_temp, label=f"{nid} channel")
    target = artifact.summary.get("target")
    if target in artifact.traces:
        tr = artifact.traces[target]
        ax_t.plot(tr.t * 1e6, artifact.config.ambient + tr.t_p, "k:", label=f"T0 + T_P ({target})")
        thr = artifact.summary.get("effective_threshold_K")
        if thr is not None:
            ax_t.axhline(artifact.config.ambient + thr, color="0.5", lw=0.8)
    ax_i.set_ylabel("$I_{sw}$ (mA)")
    ax_t.set_ylabel("T (K)")
    ax_t.set_xlabel("t (us)")
    ax_i.legend(frameon=False, ncol=3)
    ax_t.legend(frameon=False, ncol=2)
    return fig


def _sweep_figure(artifact: RunArtifact):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    dts = [p.delta_t * 1e6 for p in artifact.sweep]
    ax.plot(dts, [p.peak_current * 1e3 for p in artifact.sweep], "o-", ms=3)
    lo, hi = artifact.summary["window_start_s"], artifact.summary["window_end_s"]
    if not math.isnan(lo):
        ax.axvspan(lo * 1e6, hi * 1e6, color="0.9")
    ax.set_xlabel("delay (us)")
    ax.set_ylabel("peak $I_{sw}$ of target (mA)")
    return fig


def render_figures(artifact: RunArtifact, destination: str | Path) -> list[Path]:
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        if artifact.sweep is not None:
            fig = _sweep_figure(artifact)
        elif artifact.name == "iv_curve":
            fig = _iv_figure(artifact)
        else:
            fig = _trace_figure(artifact)
        fig.tight_layout()
        path = out / f"{artifact.name}.png"
        fig.savefig(path)
        plt.close(fig)
    return [path]
