"""Flat, unit-suffixed configuration documents.

A document is TOML restricted to dotted keys, for example::

    dt_ns = 1
    t_end_ns = 3000
    kernel.decay_length_um = 2
    neurons.n1.x_um = -2
    neurons.n1.r_s_ohm = 1000
    neurons.n1.drive.kind = "pulse"

Every numeric key carries its unit in the name and is converted to SI on
load. Unknown keys are rejected. Keys under ``scenario.`` are reserved for
preset parameters; :func:`parse_config` leaves them to the caller.
"""
from __future__ import annotations

import math
from dataclasses import replace
from decimal import Decimal
from typing import Any, Mapping

import tomli

from .device import SwitchParams
from .engine import NeuronConfig, SimConfig, Waveform, WaveformKind
from .errors import ConfigError, InvalidInputError
from .thermal import ThermalKernel

NS = Decimal("1e-9")
UM = Decimal("1e-6")
ONE = Decimal(1)

# attribute name -> (key suffix, SI scale)
SWITCH_KEYS: dict[str, tuple[str, Decimal]] = {
    "r_off": ("r_off_ohm", ONE),
    "r_on": ("r_on_ohm", ONE),
    "v_th_ref": ("v_th_ref_V", ONE),
    "i_th_ref": ("i_th_ref_A", ONE),
    "v_h_ref": ("v_h_ref_V", ONE),
    "i_h_ref": ("i_h_ref_A", ONE),
    "t_ref": ("t_ref_K", ONE),
    "t_transition": ("t_transition_K", ONE),
    "halving_interval": ("halving_interval_K", ONE),
    "tau_on_base": ("tau_on_base_ns", NS),
    "tau_on_sensitivity": ("tau_on_sensitivity_per_V", ONE),
    "tau_off": ("tau_off_ns", NS),
    "thermal_time_constant": ("thermal_time_constant_ns", NS),
    "thermal_conductance": ("thermal_conductance_W_per_K", ONE),
}
KERNEL_KEYS: dict[str, tuple[str, Decimal]] = {
    "wave_speed": ("wave_speed_m_per_s", ONE),
    "decay_length": ("decay_length_um", UM),
    "coupling_gain": ("coupling_gain_K_per_W", ONE),
    "rise_tau": ("rise_tau_ns", NS),
    "fall_tau": ("fall_tau_ns", NS),
}
SIM_KEYS: dict[str, tuple[str, Decimal]] = {
    "dt": ("dt_ns", NS),
    "t_end": ("t_end_ns", NS),
    "ambient": ("ambient_K", ONE),
}
DRIVE_KEYS: dict[str, tuple[str, Decimal]] = {
    "level": ("level_V", ONE),
    "baseline": ("baseline_V", ONE),
    "pulse_start": ("pulse_start_ns", NS),
    "pulse_duration": ("pulse_duration_ns", NS),
}
SCENARIO_PREFIX = "scenario."


def flatten(tree: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, path + "."))
        else:
            flat[path] = value
    return flat


def loads_flat(text: str) -> dict[str, Any]:
    """Parse a document into a flat ``{dotted.key: value}`` mapping.

    Floats are kept as :class:`~decimal.Decimal` so unit scaling rounds once.
    """
    try:
        tree = tomli.loads(text, parse_float=Decimal)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    return flatten(tree)


def parse_value(text: str) -> Any:
    """Interpret a ``--set`` value: a TOML scalar if possible, else a bare string."""
    try:
        return tomli.loads(f"v = {text}", parse_float=Decimal)["v"]
    except tomli.TOMLDecodeError:
        return text


def to_si(value: Any, scale: Decimal, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal, float)):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    exact = Decimal(repr(value)) if isinstance(value, float) else Decimal(value)
    si = float(exact * scale)
    if not math.isfinite(si):
        raise ConfigError(f"expected a finite number, got {value!r}", key=key)
    return si


def from_si(value: float, scale: Decimal) -> str:
    """Shortest decimal text that :func:`to_si` maps back to ``value`` exactly."""
    if scale == ONE:
        return repr(float(value))
    exact = Decimal(value) / scale
    guess = float(exact)
    for candidate in (guess, math.nextafter(guess, math.inf), math.nextafter(guess, -math.inf)):
        text = repr(candidate)
        if float(Decimal(text) * scale) == value:
            return text
    return str(exact)


class _Reader:
    """Hands out keys from a flat document and remembers which were used."""

    def __init__(self, flat: Mapping[str, Any]):
        self.flat = dict(flat)
        self.used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.flat

    def raw(self, key: str) -> Any:
        self.used.add(key)
        return self.flat[key]

    def number(self, key: str, scale: Decimal, default: float | None = None) -> float:
        if key not in self.flat:
            if default is None:
                raise ConfigError("required key is missing", key=key)
            return default
        return to_si(self.raw(key), scale, key)

    def block(self, table: dict[str, tuple[str, Decimal]], prefix: str, base):
        values = {attr: self.number(prefix + suffix, scale)
                  for attr, (suffix, scale) in table.items() if self.has(prefix + suffix)}
        try:
            return replace(base, **values)
        except InvalidInputError as exc:
            raise ConfigError(str(exc), key=prefix.rstrip(".")) from None

    def unused(self) -> list[str]:
        return [k for k in self.flat if k not in self.used and not k.startswith(SCENARIO_PREFIX)]


def _neuron_ids(flat: Mapping[str, Any]) -> list[str]:
    ids: list[str] = []
    for key in flat:
        if key.startswith("neurons."):
            parts = key.split(".")
            if len(parts) < 3:
                raise ConfigError("expected neurons.<id>.<field>", key=key)
            if parts[1] not in ids:
                ids.append(parts[1])
    return ids


def _read_drive(rd: _Reader, prefix: str) -> Waveform:
    kind_key = prefix + "kind"
    if not rd.has(kind_key):
        if any(k.startswith(prefix) for k in rd.flat):
            raise ConfigError("drive block needs a kind", key=kind_key)
        return Waveform()
    kind_text = rd.raw(kind_key)
    try:
        kind = WaveformKind(kind_text)
    except ValueError:
        raise ConfigError(f"unknown drive kind {kind_text!r} (constant|pulse)", key=kind_key) from None
    values = {attr: rd.number(prefix + suffix, scale, 0.0) for attr, (suffix, scale) in DRIVE_KEYS.items()}
    if kind is WaveformKind.CONSTANT:
        for attr in ("pulse_start", "pulse_duration", "baseline"):
            if rd.has(prefix + DRIVE_KEYS[attr][0]):
                raise ConfigError("only meaningful for pulse drives", key=prefix + DRIVE_KEYS[attr][0])
    elif not values["pulse_duration"] > 0:
        raise ConfigError("requires pulse_duration > 0", key=prefix + "pulse_duration_ns")
    if values["level"] < 0 or values["baseline"] < 0:
        raise ConfigError("drive levels must be >= 0", key=prefix + "level_V")
    return Waveform(kind, **values)


def config_from_flat(flat: Mapping[str, Any]) -> SimConfig:
    """Build and validate a :class:`SimConfig` from a flat key mapping."""
    rd = _Reader(flat)
    switch = rd.block(SWITCH_KEYS, "switch.", SwitchParams())
    kernel = rd.block(KERNEL_KEYS, "kernel.", ThermalKernel())
    defaults = SimConfig((NeuronConfig("_", (0.0, 0.0), 1.0),))
    sim = {attr: rd.number(suffix, scale, getattr(defaults, attr)) for attr, (suffix, scale) in SIM_KEYS.items()}
    if not sim["dt"] > 0:
        raise ConfigError(f"requires 0 < dt, got {sim['dt']}", key="dt_ns")
    if not sim["dt"] <= sim["t_end"]:
        raise ConfigError(f"requires dt <= t_end, got t_end={sim['t_end']}", key="t_end_ns")
    if not sim["ambient"] > 0:
        raise ConfigError("requires ambient > 0", key="ambient_K")

    neurons = []
    ids = _neuron_ids(flat)
    if not ids:
        raise ConfigError("at least one neuron is required", key="neurons")
    for nid in ids:
        p = f"neurons.{nid}."
        x = rd.number(p + "x_um", UM)
        y = rd.number(p + "y_um", UM)
        r_s = rd.number(p + "r_s_ohm", ONE)
        if not r_s > 0:
            raise ConfigError("requires r_s > 0", key=p + "r_s_ohm")
        drive = _read_drive(rd, p + "drive.")
        override = None
        if any(k.startswith(p + "switch.") for k in flat):
            override = rd.block(SWITCH_KEYS, p + "switch.", switch)
        neurons.append(NeuronConfig(nid, (x, y), r_s, drive, override))

    extra = rd.unused()
    if extra:
        raise ConfigError("unknown key", key=extra[0])
    return SimConfig(tuple(neurons), kernel=kernel, switch_params=switch, **sim)


def parse_config(text: str) -> SimConfig:
    return config_from_flat(loads_flat(text))


def _format_scalar(value: Any) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def config_to_lines(config: SimConfig) -> list[str]:
    """Fully resolved ``key = value`` lines for ``config``."""
    lines = [f"{suffix} = {from_si(getattr(config, attr), scale)}" for attr, (suffix, scale) in SIM_KEYS.items()]
    for attr, (suffix, scale) in SWITCH_KEYS.items():
        lines.append(f"switch.{suffix} = {from_si(getattr(config.switch_params, attr), scale)}")
    for attr, (suffix, scale) in KERNEL_KEYS.items():
        lines.append(f"kernel.{suffix} = {from_si(getattr(config.kernel, attr), scale)}")
    for n in config.neurons:
        p = f"neurons.{n.id}."
        lines.append(f"{p}x_um = {from_si(n.position[0], UM)}")
        lines.append(f"{p}y_um = {from_si(n.position[1], UM)}")
        lines.append(f"{p}r_s_ohm = {from_si(n.r_s, ONE)}")
        lines.append(f'{p}drive.kind = "{n.drive.kind.value}"')
        lines.append(f"{p}drive.level_V = {from_si(n.drive.level, ONE)}")
        if n.drive.kind is WaveformKind.PULSE:
            for attr in ("baseline", "pulse_start", "pulse_duration"):
                suffix, scale = DRIVE_KEYS[attr]
                lines.append(f"{p}drive.{suffix} = {from_si(getattr(n.drive, attr), scale)}")
        if n.switch_params is not None:
            for attr, (suffix, scale) in SWITCH_KEYS.items():
                lines.append(f"{p}switch.{suffix} = {from_si(getattr(n.switch_params, attr), scale)}")
    return lines


def emit_config(config: SimConfig, scenario: Mapping[str, Any] | None = None) -> str:
    """Render a resolved snapshot; ``scenario`` entries go under ``scenario.``."""
    lines = config_to_lines(config)
    for key, value in (scenario or {}).items():
        lines.append(f"{SCENARIO_PREFIX}{key} = {_format_scalar(value)}")
    return "\n".join(lines) + "\n"


def scenario_block(flat: Mapping[str, Any]) -> dict[str, Any]:
    return {k[len(SCENARIO_PREFIX):]: v for k, v in flat.items() if k.startswith(SCENARIO_PREFIX)}
