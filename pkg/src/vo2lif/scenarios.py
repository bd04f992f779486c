"""Preset experiments and the artifacts they produce.

Presets are flat configuration documents. A run is fully described by its
resolved snapshot (the :class:`~vo2lif.engine.SimConfig` plus the
``scenario.*`` block), so feeding the snapshot back through
:func:`run_document` reproduces the artifact exactly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Mapping

import numpy as np

from .circuit import oscillation_regime
from .config import (
    NS,
    config_from_flat,
    emit_config,
    loads_flat,
    scenario_block,
    to_si,
)
from .device import Phase, SwitchState, branch_current, update_phase
from .engine import (
    SimConfig,
    SpikeEvent,
    SweepPoint,
    Trace,
    default_roles,
    detect_spikes,
    firing_window,
    run,
    sweep_points,
)
from .errors import ConfigError
from .thermal import effective_threshold


class PresetName(enum.Enum):
    IV_CURVE = "iv_curve"
    FIG4A_SUBTHRESHOLD = "fig4a_subthreshold"
    FIG4B_FIRE = "fig4b_fire"
    FIG4C_SUMMATION = "fig4c_summation"
    FIG5_SWEEP = "fig5_sweep"
    OSCILLATION = "oscillation"


@dataclass(frozen=True)
class ScenarioPreset:
    name: PresetName
    overrides: Mapping[str, Any] = field(default_factory=dict)


# Switch 3 sits at the origin; switch 2 is farther away than switch 1.
_THREE_NEURONS: dict[str, Any] = {
    "dt_ns": 1,
    "ambient_K": 300,
    "neurons.n1.x_um": -2,
    "neurons.n1.y_um": 0,
    "neurons.n1.r_s_ohm": 1000,
    "neurons.n1.drive.kind": "pulse",
    "neurons.n1.drive.level_V": 6,
    "neurons.n1.drive.pulse_start_ns": 500,
    "neurons.n1.drive.pulse_duration_ns": 300,
    "neurons.n2.x_um": 3,
    "neurons.n2.y_um": 0,
    "neurons.n2.r_s_ohm": 1000,
    "neurons.n2.drive.kind": "constant",
    "neurons.n2.drive.level_V": 0,
    "neurons.n3.x_um": 0,
    "neurons.n3.y_um": 0,
    "neurons.n3.r_s_ohm": 500,
    "neurons.n3.drive.kind": "constant",
    "neurons.n3.drive.level_V": Decimal("1.8"),
    "t_end_ns": 3000,
    "scenario.target": "n3",
}

_SUMMATION = {
    **_THREE_NEURONS,
    "neurons.n1.drive.pulse_start_ns": 1000,
    "neurons.n1.drive.pulse_duration_ns": 195,
    "neurons.n2.drive.kind": "pulse",
    "neurons.n2.drive.level_V": 6,
    "neurons.n2.drive.pulse_start_ns": 850,
    "neurons.n2.drive.pulse_duration_ns": 195,
    "t_end_ns": 3500,
}

PRESETS: dict[PresetName, dict[str, Any]] = {
    PresetName.IV_CURVE: {
        "dt_ns": 1000,
        "t_end_ns": 12000000,
        "ambient_K": 300,
        "neurons.sw.x_um": 0,
        "neurons.sw.y_um": 0,
        "neurons.sw.r_s_ohm": 1,
        "scenario.v_max_V": 6,
        "scenario.v_step_mV": 5,
    },
    PresetName.FIG4A_SUBTHRESHOLD: dict(_THREE_NEURONS),
    PresetName.FIG4B_FIRE: {**_THREE_NEURONS, "neurons.n1.drive.pulse_duration_ns": 550},
    PresetName.FIG4C_SUMMATION: dict(_SUMMATION),
    PresetName.FIG5_SWEEP: {
        **_SUMMATION,
        "scenario.dt_start_ns": -500,
        "scenario.dt_end_ns": 475,
        "scenario.dt_step_ns": 25,
        "scenario.emitters": "n1,n2",
    },
    PresetName.OSCILLATION: {
        "dt_ns": 1,
        "t_end_ns": 3000,
        "ambient_K": 300,
        "neurons.n1.x_um": 0,
        "neurons.n1.y_um": 0,
        "neurons.n1.r_s_ohm": 2000,
        "neurons.n1.drive.kind": "constant",
        "neurons.n1.drive.level_V": Decimal("5.6"),
    },
}


@dataclass
class RunArtifact:
    config: SimConfig
    scenario: dict[str, Any]
    traces: dict[str, Trace]
    events: list[SpikeEvent]
    summary: dict[str, Any]
    sweep: list[SweepPoint] | None = None

    @property
    def name(self) -> str:
        return self.scenario.get("name", "simulate")

    def snapshot(self) -> str:
        return emit_config(self.config, self.scenario)


def preset_document(name: PresetName | str, overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Flat document for a preset with ``overrides`` applied on top."""
    try:
        preset = PresetName(name) if not isinstance(name, PresetName) else name
    except ValueError:
        known = ", ".join(p.value for p in PresetName)
        raise ConfigError(f"unknown preset {name!r} (known: {known})", key="scenario.name") from None
    doc = dict(PRESETS[preset])
    doc.update(overrides or {})
    doc["scenario.name"] = preset.value
    return doc


def run_scenario(preset: ScenarioPreset | PresetName | str, workers: int | None = None) -> RunArtifact:
    if not isinstance(preset, ScenarioPreset):
        preset = ScenarioPreset(PresetName(preset))
    return run_document(preset_document(preset.name, preset.overrides), workers=workers)


def run_document(flat: Mapping[str, Any], workers: int | None = None) -> RunArtifact:
    """Run whatever a flat document describes: a preset when it carries
    ``scenario.name``, a delay sweep when it carries a sweep grid, and a
    plain network simulation otherwise."""
    config = config_from_flat(flat)
    scenario = scenario_block(flat)
    name = scenario.get("name")
    if name == PresetName.IV_CURVE.value:
        return _iv_curve(config, scenario)
    if "dt_step_ns" in scenario:
        return _delay_sweep(config, scenario, workers)
    if name == PresetName.OSCILLATION.value:
        return _oscillation(config, scenario)
    known = {p.value for p in PresetName} | {"sweep"}
    if name is not None and name not in known:
        raise ConfigError(f"unknown scenario {name!r}", key="scenario.name")
    return _network(config, scenario)


def run_text(text: str, workers: int | None = None) -> RunArtifact:
    return run_document(loads_flat(text), workers=workers)


def _scenario_number(scenario: Mapping[str, Any], key: str, scale: Decimal = Decimal(1)) -> float:
    if key not in scenario:
        raise ConfigError("required key is missing", key=f"scenario.{key}")
    return to_si(scenario[key], scale, f"scenario.{key}")


def _per_neuron_summary(result) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for nid, tr in result.traces.items():
        spikes = [e for e in result.events if e.neuron_id == nid]
        out[f"{nid}.spikes"] = len(spikes)
        out[f"{nid}.first_onset_s"] = spikes[0].t_onset if spikes else math.nan
        out[f"{nid}.peak_i_sw_A"] = float(tr.i_sw.max())
        out[f"{nid}.peak_t_p_K"] = float(tr.t_p.max())
        out[f"{nid}.peak_t_ch_K"] = float(tr.channel_temp.max())
    return out


def _target(config: SimConfig, scenario: Mapping[str, Any]) -> str:
    target = scenario.get("target", config.neurons[-1].id)
    config.neuron(target)
    return target


def _network(config: SimConfig, scenario: dict[str, Any]) -> RunArtifact:
    result = run(config)
    summary: dict[str, Any] = {}
    if len(config.neurons) > 1 or "target" in scenario:
        target = _target(config, scenario)
        neuron = config.neuron(target)
        tr = result.traces[target]
        spikes = [e for e in result.events if e.neuron_id == target]
        summary["target"] = target
        summary["fired"] = bool(spikes)
        summary["peak_t_p_K"] = float(tr.t_p.max())
        summary["effective_threshold_K"] = effective_threshold(
            neuron.drive.peak, neuron.r_s, config.params_for(neuron), config.ambient)
        if spikes:
            k = int(np.searchsorted(tr.t, spikes[0].t_onset))
            summary["onset_s"] = spikes[0].t_onset
            summary["t_p_at_onset_K"] = float(tr.t_p[k])
        else:
            summary["onset_s"] = math.nan
            summary["t_p_at_onset_K"] = math.nan
    summary.update(_per_neuron_summary(result))
    return RunArtifact(config, scenario, result.traces, result.events, summary)


def _oscillation(config: SimConfig, scenario: dict[str, Any]) -> RunArtifact:
    result = run(config)
    neuron = config.neurons[0]
    onsets = np.array([e.t_onset for e in result.events if e.neuron_id == neuron.id])
    periods = np.diff(onsets)
    summary: dict[str, Any] = {
        "neuron": neuron.id,
        "predicted_oscillation": oscillation_regime(
            neuron.drive.peak, neuron.r_s, config.params_for(neuron), config.ambient),
        "spikes": len(onsets),
        "mean_period_s": float(periods.mean()) if len(periods) else math.nan,
        "period_cv": float(periods.std() / periods.mean()) if len(periods) > 1 else math.nan,
    }
    summary.update(_per_neuron_summary(result))
    return RunArtifact(config, scenario, result.traces, result.events, summary)


def sweep_offsets(start_ns: Any, end_ns: Any, step_ns: Any) -> list[float]:
    """Inclusive grid of offsets in seconds, built in decimal to avoid drift."""
    start, end, step = (Decimal(repr(v)) if isinstance(v, float) else Decimal(v)
                        for v in (start_ns, end_ns, step_ns))
    if not step > 0:
        raise ConfigError("requires dt_step > 0", key="scenario.dt_step_ns")
    if end < start:
        raise ConfigError("requires dt_end >= dt_start", key="scenario.dt_end_ns")
    count = int((end - start) / step) + 1
    return [float((start + k * step) * NS) for k in range(count)]


def _delay_sweep(config: SimConfig, scenario: dict[str, Any], workers: int | None) -> RunArtifact:
    for key in ("dt_start_ns", "dt_end_ns", "dt_step_ns"):
        _scenario_number(scenario, key)
    offsets = sweep_offsets(scenario["dt_start_ns"], scenario["dt_end_ns"], scenario["dt_step_ns"])
    emitters, target = default_roles(config)
    if "emitters" in scenario:
        parts = tuple(str(scenario["emitters"]).split(","))
        if len(parts) != 2:
            raise ConfigError("expected two comma-separated neuron ids", key="scenario.emitters")
        emitters = parts
    target = scenario.get("target", target)
    for nid in (*emitters, target):
        config.neuron(nid)
    points = sweep_points(config, offsets, emitters, target, workers)

    r_a = config.distance(emitters[0], target)
    r_b = config.distance(emitters[1], target)
    summary: dict[str, Any] = {
        "target": target,
        "points": len(points),
        "fired_points": sum(p.fired for p in points),
        "arrival_alignment_s": (r_a - r_b) / config.kernel.wave_speed,
    }
    window = firing_window(points)
    lo, hi = window if window else (math.nan, math.nan)
    summary.update(window_start_s=lo, window_end_s=hi, window_mid_s=(lo + hi) / 2, window_width_s=hi - lo)
    return RunArtifact(config, scenario, {}, [], summary, points)


def _iv_curve(config: SimConfig, scenario: dict[str, Any]) -> RunArtifact:
    """Quasi-static voltage ramp applied straight across the switch.

    Each ramp point lasts ``dt``; with ``dt`` longer than the switching
    delays every transition settles within its point.
    """
    neuron = config.neurons[0]
    params = config.params_for(neuron)
    v_max = Decimal(str(scenario.get("v_max_V", 6)))
    step = Decimal(str(scenario.get("v_step_mV", 1))) / 1000
    if not (v_max > 0 and step > 0):
        raise ConfigError("requires v_max_V > 0 and v_step_mV > 0", key="scenario.v_step_mV")
    n = int(v_max / step)
    ramp = [float(k * step) for k in range(n + 1)]
    ramp += ramp[-2::-1]

    state = SwitchState.at_rest(config.ambient)
    v_col, i_col, temp_col, metallic = [], [], [], []
    up_switch = down_switch = math.nan
    for k, v in enumerate(ramp):
        before = state.phase
        i = branch_current(params, state.phase, v)
        state = update_phase(state, params, v, i, config.dt)
        if state.phase is not before:
            if state.phase is Phase.METALLIC and math.isnan(up_switch):
                up_switch = v
            elif state.phase is Phase.INSULATING and k > n and math.isnan(down_switch):
                down_switch = v
        i = branch_current(params, state.phase, v)
        v_col.append(v)
        i_col.append(i)
        temp_col.append(config.ambient + v * i / params.thermal_conductance)
        metallic.append(state.phase is Phase.METALLIC)

    v_arr, i_arr, met = np.array(v_col), np.array(i_col), np.array(metallic)

    def slope_resistance(mask):
        ii = i_arr[mask]
        return float(np.dot(v_arr[mask], ii) / np.dot(ii, ii)) if np.any(ii != 0) else math.nan

    t = np.arange(len(ramp)) * config.dt
    trace = Trace(neuron.id, t, v_arr, i_arr, np.array(temp_col), np.zeros(len(ramp)), met)
    summary = {
        "v_up_switch_V": up_switch,
        "v_down_switch_V": down_switch,
        "r_off_fit_ohm": slope_resistance(~met),
        "r_on_fit_ohm": slope_resistance(met),
        "points": len(ramp),
    }
    return RunArtifact(config, scenario, {neuron.id: trace}, detect_spikes(trace), summary)
