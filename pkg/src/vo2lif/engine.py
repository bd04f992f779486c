"""Fixed-step simulation of thermally coupled VO2 neurons.

Each step, every neuron sees the temperature rise produced by the emission
history of all *other* neurons as it stood at the start of the step, solves
its circuit on the current branch, advances its switching timers and its
channel temperature, and opens or closes an emission when its phase commits.
All neurons are updated from the same snapshot, so the result does not
depend on neuron order.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .circuit import OperatingPoint, solve_operating_point
from .device import (
    Phase,
    SwitchParams,
    SwitchState,
    channel_thermal_step,
    update_phase,
)
from .errors import ConfigError
from .thermal import EmissionRecord, ThermalKernel, membrane_potential

# Absolute slack on pulse edges so that k*dt lands on the intended side.
_EDGE_TOL = 1e-15


class WaveformKind(enum.Enum):
    CONSTANT = "constant"
    PULSE = "pulse"


@dataclass(frozen=True)
class Waveform:
    kind: WaveformKind = WaveformKind.CONSTANT
    level: float = 0.0
    pulse_start: float = 0.0
    pulse_duration: float = 0.0
    baseline: float = 0.0

    def __post_init__(self):
        if self.level < 0 or self.baseline < 0:
            raise ConfigError("drive levels must be >= 0", key="drive.level_V")
        if self.kind is WaveformKind.PULSE and not self.pulse_duration > 0:
            raise ConfigError("pulse duration must be > 0", key="drive.pulse_duration_ns")

    @classmethod
    def constant(cls, level: float) -> "Waveform":
        return cls(WaveformKind.CONSTANT, level)

    @classmethod
    def pulse(cls, level: float, start: float, duration: float, baseline: float = 0.0) -> "Waveform":
        return cls(WaveformKind.PULSE, level, start, duration, baseline)

    def __call__(self, t: float) -> float:
        if self.kind is WaveformKind.CONSTANT:
            return self.level
        start = self.pulse_start - _EDGE_TOL
        if start <= t < start + self.pulse_duration:
            return self.level
        return self.baseline

    @property
    def peak(self) -> float:
        return self.level if self.kind is WaveformKind.CONSTANT else max(self.level, self.baseline)


@dataclass(frozen=True)
class NeuronConfig:
    id: str
    position: tuple[float, float]  # metres
    r_s: float
    drive: Waveform = field(default_factory=Waveform)
    switch_params: SwitchParams | None = None

    def __post_init__(self):
        if not self.r_s > 0:
            raise ConfigError("load resistance must be > 0", key=f"neurons.{self.id}.r_s_ohm")


@dataclass(frozen=True)
class SimConfig:
    neurons: tuple[NeuronConfig, ...]
    dt: float = 1e-9
    t_end: float = 3e-6
    ambient: float = 300.0
    kernel: ThermalKernel = field(default_factory=ThermalKernel)
    switch_params: SwitchParams = field(default_factory=SwitchParams)

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(self.neurons))
        if not self.neurons:
            raise ConfigError("at least one neuron is required", key="neurons")
        if not 0 < self.dt <= self.t_end:
            raise ConfigError(f"requires 0 < dt <= t_end (dt={self.dt}, t_end={self.t_end})", key="dt_ns")
        if not self.ambient > 0:
            raise ConfigError("ambient temperature must be > 0", key="ambient_K")
        ids = [n.id for n in self.neurons]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"neuron ids must be unique, got {ids}", key="neurons")
        for a in self.neurons:
            for b in self.neurons:
                if a.id != b.id and a.position == b.position:
                    raise ConfigError(f"neurons {a.id} and {b.id} share a position",
                                      key=f"neurons.{b.id}.x_um")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def params_for(self, neuron: NeuronConfig) -> SwitchParams:
        return neuron.switch_params or self.switch_params

    def neuron(self, neuron_id: str) -> NeuronConfig:
        for n in self.neurons:
            if n.id == neuron_id:
                return n
        raise ConfigError(f"unknown neuron {neuron_id!r}", key="neurons")

    def distance(self, a: str, b: str) -> float:
        pa, pb = self.neuron(a).position, self.neuron(b).position
        return math.hypot(pa[0] - pb[0], pa[1] - pb[1])

    @cached_property
    def _distance_maps(self) -> dict[str, dict[str, float]]:
        return {n.id: {m.id: self.distance(n.id, m.id) for m in self.neurons if m.id != n.id}
                for n in self.neurons}

    def distances_to(self, target: str) -> dict[str, float]:
        """Distances from every other neuron to ``target``."""
        return self._distance_maps[target]

    def with_drive(self, neuron_id: str, drive: Waveform) -> "SimConfig":
        neurons = tuple(replace(n, drive=drive) if n.id == neuron_id else n for n in self.neurons)
        return replace(self, neurons=neurons)


@dataclass
class SimState:
    step: int
    switches: list[SwitchState]
    emissions: list[EmissionRecord]
    open_emission: list[int | None]

    @classmethod
    def initial(cls, config: SimConfig) -> "SimState":
        n = len(config.neurons)
        return cls(0, [SwitchState.at_rest(config.ambient)] * n, [], [None] * n)

    def time(self, config: SimConfig) -> float:
        return self.step * config.dt


@dataclass
class Trace:
    """Sampled observables of one neuron; ``metallic`` may be None for
    traces read back from CSV."""

    neuron_id: str
    t: np.ndarray
    v_sw: np.ndarray
    i_sw: np.ndarray
    channel_temp: np.ndarray
    t_p: np.ndarray
    metallic: np.ndarray | None = None


@dataclass(frozen=True)
class SpikeEvent:
    neuron_id: str
    t_onset: float
    t_offset: float
    peak_current: float


@dataclass
class SimResult:
    config: SimConfig
    traces: dict[str, Trace]
    events: list[SpikeEvent]
    emissions: list[EmissionRecord]

    def __iter__(self):
        return iter((self.traces, self.events))


def _observe(state: SimState, config: SimConfig) -> list[tuple[float, OperatingPoint, float]]:
    t = state.time(config)
    out = []
    multi = len(config.neurons) > 1
    for neuron, sw in zip(config.neurons, state.switches):
        t_p = 0.0
        if multi and state.emissions:
            incident = [em for em in state.emissions if em.emitter_id != neuron.id]
            if incident:
                t_p = membrane_potential(config.kernel, incident, config.distances_to(neuron.id), t)
        v_dd = neuron.drive(t)
        op = solve_operating_point(v_dd, neuron.r_s, sw.phase, config.params_for(neuron))
        out.append((v_dd, op, t_p))
    return out


def _advance(state: SimState, config: SimConfig,
             observed: list[tuple[float, OperatingPoint, float]]) -> SimState:
    dt = config.dt
    t_next = (state.step + 1) * dt
    switches = list(state.switches)
    emissions = list(state.emissions)
    open_emission = list(state.open_emission)
    for i, (neuron, (_, op, t_p)) in enumerate(zip(config.neurons, observed)):
        params = config.params_for(neuron)
        ambient_eff = config.ambient + t_p
        sw = replace(state.switches[i], ambient_eff=ambient_eff)
        sw = update_phase(sw, params, op.v_sw, op.i_sw, dt)
        sw = channel_thermal_step(sw, op.power, ambient_eff, params, dt)
        if sw.phase is not state.switches[i].phase:
            if sw.phase is Phase.METALLIC:
                on = solve_operating_point(neuron.drive(t_next), neuron.r_s, Phase.METALLIC, params)
                open_emission[i] = len(emissions)
                emissions.append(EmissionRecord(neuron.id, t_next, None, on.power))
            else:
                idx = open_emission[i]
                emissions[idx] = replace(emissions[idx], t_off=t_next)
                open_emission[i] = None
        switches[i] = sw
    return SimState(state.step + 1, switches, emissions, open_emission)


def step(state: SimState, config: SimConfig) -> SimState:
    """Advance the network by one ``config.dt``."""
    return _advance(state, config, _observe(state, config))


def run(config: SimConfig) -> SimResult:
    """Simulate from t = 0 to ``config.t_end``; samples include t = 0."""
    n_samples = config.n_steps + 1
    n = len(config.neurons)
    cols = {name: np.empty((n, n_samples)) for name in ("v", "i", "temp", "tp")}
    metallic = np.zeros((n, n_samples), dtype=bool)
    state = SimState.initial(config)
    for k in range(n_samples):
        observed = _observe(state, config)
        for i, (_, op, t_p) in enumerate(observed):
            cols["v"][i, k] = op.v_sw
            cols["i"][i, k] = op.i_sw
            cols["temp"][i, k] = state.switches[i].channel_temp
            cols["tp"][i, k] = t_p
            metallic[i, k] = state.switches[i].phase is Phase.METALLIC
        if k < n_samples - 1:
            state = _advance(state, config, observed)

    t = np.arange(n_samples) * config.dt
    traces = {}
    events = []
    for i, neuron in enumerate(config.neurons):
        tr = Trace(neuron.id, t, cols["v"][i], cols["i"][i], cols["temp"][i], cols["tp"][i], metallic[i])
        traces[neuron.id] = tr
        events.extend(detect_spikes(tr, config.params_for(neuron)))
    events.sort(key=lambda e: (e.t_onset, e.neuron_id))
    return SimResult(config, traces, events, state.emissions)


def _infer_metallic(trace: Trace, params: SwitchParams) -> np.ndarray:
    # Nearest branch by Ohm's law; the origin counts as insulating.
    err_on = np.abs(trace.i_sw * params.r_on - trace.v_sw)
    err_off = np.abs(trace.i_sw * params.r_off - trace.v_sw)
    return (err_on < err_off) & (trace.i_sw != 0)


def detect_spikes(trace: Trace, params: SwitchParams | None = None) -> list[SpikeEvent]:
    """One event per maximal run of metallic samples.

    Without a recorded phase, ``params`` is used to infer it from the
    branch resistance; an unbiased sample (v = i = 0) reads as insulating. A spike still open at the end of the trace is closed
    one sample period after the last sample.
    """
    if trace.metallic is not None:
        metallic = np.asarray(trace.metallic, dtype=bool)
    elif params is not None:
        metallic = _infer_metallic(trace, params)
    else:
        raise ValueError("trace has no phase record and no params to infer it")
    if len(trace.t) == 0:
        raise ValueError("empty trace")
    padded = np.concatenate(([False], metallic, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    period = trace.t[1] - trace.t[0] if len(trace.t) > 1 else 0.0
    events = []
    for start, stop in zip(edges[::2], edges[1::2]):
        t_off = trace.t[stop] if stop < len(trace.t) else trace.t[-1] + period
        if not t_off > trace.t[start]:
            continue
        events.append(SpikeEvent(trace.neuron_id, float(trace.t[start]), float(t_off),
                                 float(trace.i_sw[start:stop].max())))
    return events


@dataclass(frozen=True)
class SweepPoint:
    delta_t: float
    peak_current: float
    fired: bool


def shifted_config(base: SimConfig, delta_t: float, emitters: tuple[str, str]) -> SimConfig:
    """Copy of ``base`` with the second emitter's pulse placed ``delta_t``
    after the first emitter's."""
    first, second = (base.neuron(e) for e in emitters)
    if first.drive.kind is not WaveformKind.PULSE or second.drive.kind is not WaveformKind.PULSE:
        raise ConfigError("sweep emitters must have pulse drives", key=f"neurons.{second.id}.drive.kind")
    moved = replace(second.drive, pulse_start=first.drive.pulse_start + delta_t)
    return base.with_drive(second.id, moved)


def _sweep_point(args: tuple[SimConfig, float, tuple[str, str], str]) -> SweepPoint:
    base, delta_t, emitters, target = args
    result = run(shifted_config(base, delta_t, emitters))
    fired = any(e.neuron_id == target for e in result.events)
    return SweepPoint(delta_t, float(result.traces[target].i_sw.max()), fired)


def default_roles(config: SimConfig) -> tuple[tuple[str, str], str]:
    ids = [n.id for n in config.neurons]
    if len(ids) < 3:
        raise ConfigError("a delay sweep needs two emitters and a target", key="neurons")
    return (ids[0], ids[1]), ids[-1]


def sweep_points(base: SimConfig, offsets: Sequence[float], emitters: tuple[str, str] | None = None,
                 target: str | None = None, workers: int | None = None) -> list[SweepPoint]:
    """Run one simulation per pulse offset; result is ordered by offset."""
    default_emitters, default_target = default_roles(base)
    emitters = emitters or default_emitters
    target = target or default_target
    base.neuron(target)
    jobs = [(base, float(d), emitters, target) for d in sorted(offsets)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, jobs))
    else:
        points = [_sweep_point(job) for job in jobs]
    return sorted(points, key=lambda p: p.delta_t)


def sweep_delta_t(base: SimConfig, offsets: Sequence[float], emitters: tuple[str, str] | None = None,
                  target: str | None = None, workers: int | None = None) -> dict[float, float]:
    """Peak target current for each inter-pulse delay, keyed in ascending order."""
    return {p.delta_t: p.peak_current for p in sweep_points(base, offsets, emitters, target, workers)}


def firing_window(points: Sequence[SweepPoint]) -> tuple[float, float] | None:
    """Bounds of the firing offsets, or None if nothing fired.

    Raises ValueError when the firing offsets are not contiguous on the grid.
    """
    idx = [k for k, p in enumerate(points) if p.fired]
    if not idx:
        return None
    if idx != list(range(idx[0], idx[-1] + 1)):
        raise ValueError(f"firing offsets are not contiguous: {[points[k].delta_t for k in idx]}")
    return points[idx[0]].delta_t, points[idx[-1]].delta_t
