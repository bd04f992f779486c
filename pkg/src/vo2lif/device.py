"""Lumped hysteretic VO2 switch.

The switch is two linear resistive branches joined by voltage-triggered
transitions. Threshold and holding voltages fall with the effective ambient
temperature (substrate temperature plus any incident thermal pulse) and
vanish at the metal-insulator transition. Transitions are not instant: a
turn-on or turn-off is scheduled with a delay and only commits if its
trigger still holds when the delay expires.

Units are SI throughout (V, A, Ohm, K, s, W).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import InvalidInputError


class Phase(enum.Enum):
    INSULATING = "insulating"
    METALLIC = "metallic"


@dataclass(frozen=True)
class SwitchParams:
    """Static device constants.

    ``i_th_ref`` and ``i_h_ref`` are informational only: switching is
    triggered on voltage, and a strictly linear off-branch cannot pass
    through both (5 V, 130 uA) and 57.6 kOhm.

    The delay and thermal constants are calibrated so that a 6 V / 1 kOhm
    drive turns on in 33 ns and the metallic channel self-heats well past
    the transition temperature.
    """

    r_off: float = 57.6e3
    r_on: float = 630.0
    v_th_ref: float = 5.0
    i_th_ref: float = 1.3e-4
    v_h_ref: float = 1.45
    i_h_ref: float = 1.7e-3
    t_ref: float = 300.0
    t_transition: float = 340.0
    halving_interval: float = 10.0
    tau_on_base: float = 100e-9
    tau_on_sensitivity: float = 1.2351260417674226
    tau_off: float = 80e-9
    thermal_time_constant: float = 100e-9
    thermal_conductance: float = 1e-4

    def __post_init__(self):
        checks = [
            (self.r_off > self.r_on > 0, "r_off > r_on > 0"),
            (self.v_th_ref > self.v_h_ref > 0, "v_th_ref > v_h_ref > 0"),
            (self.t_transition > self.t_ref, "t_transition > t_ref"),
            (self.halving_interval > 0, "halving_interval > 0"),
            (self.tau_on_base > 0, "tau_on_base > 0"),
            (self.tau_on_sensitivity >= 0, "tau_on_sensitivity >= 0"),
            (self.tau_off > 0, "tau_off > 0"),
            (self.thermal_time_constant > 0, "thermal_time_constant > 0"),
            (self.thermal_conductance > 0, "thermal_conductance > 0"),
        ]
        for ok, rule in checks:
            if not ok:
                raise InvalidInputError(f"SwitchParams requires {rule}")

    def branch_resistance(self, phase: Phase) -> float:
        return self.r_off if phase is Phase.INSULATING else self.r_on


@dataclass(frozen=True)
class SwitchState:
    """Dynamic state of one switch.

    ``transition_timer`` is ``(target_phase, time_remaining)`` while a
    transition is pending, else ``None``.
    """

    phase: Phase
    channel_temp: float
    ambient_eff: float
    transition_timer: tuple[Phase, float] | None = None

    @classmethod
    def at_rest(cls, ambient: float) -> "SwitchState":
        return cls(Phase.INSULATING, ambient, ambient)


def _scaled_law(params: SwitchParams, v_ref: float, ambient_eff: float) -> float:
    if not math.isfinite(ambient_eff):
        raise InvalidInputError(f"ambient temperature must be finite, got {ambient_eff}")
    if ambient_eff <= 0:
        raise InvalidInputError(f"ambient temperature must be positive, got {ambient_eff}")
    if ambient_eff >= params.t_transition:
        return 0.0
    return v_ref * 2.0 ** (-(ambient_eff - params.t_ref) / params.halving_interval)


def threshold_voltage(params: SwitchParams, ambient_eff: float) -> float:
    """Turn-on voltage at the given effective ambient; halves every
    ``halving_interval`` kelvin and is 0 at/above ``t_transition``."""
    return _scaled_law(params, params.v_th_ref, ambient_eff)


def holding_voltage(params: SwitchParams, ambient_eff: float) -> float:
    """Turn-off voltage; same thermal law as :func:`threshold_voltage`."""
    return _scaled_law(params, params.v_h_ref, ambient_eff)


def branch_current(params: SwitchParams, phase: Phase, v_sw: float) -> float:
    return v_sw / params.branch_resistance(phase)


def turn_on_delay(params: SwitchParams, overdrive: float, dt: float | None = None) -> float:
    """Channel formation delay for a drive ``overdrive`` volts above threshold.

    Clamped below at ``dt`` when an integration step is given.
    """
    if not overdrive >= 0:
        raise InvalidInputError(f"overdrive must be >= 0, got {overdrive}")
    delay = params.tau_on_base * math.exp(-params.tau_on_sensitivity * overdrive)
    if dt is not None:
        delay = max(delay, dt)
    return delay


def update_phase(state: SwitchState, params: SwitchParams, v_sw: float, i_sw: float,
                 dt: float) -> SwitchState:
    """Advance the switching state machine over one step of length ``dt``.

    Thresholds are evaluated at ``state.ambient_eff``. A pending transition
    whose trigger no longer holds is dropped; otherwise its timer runs down
    by ``dt`` and the new phase commits once less than half a step remains,
    so delays are realised to the nearest step.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    v_th = threshold_voltage(params, state.ambient_eff)
    v_h = holding_voltage(params, state.ambient_eff)

    if state.phase is Phase.INSULATING:
        triggered = v_sw >= v_th
        target = Phase.METALLIC
    else:
        # Above the transition temperature there is no insulating branch to fall back to.
        triggered = v_h > 0 and v_sw <= v_h
        target = Phase.INSULATING

    if not triggered:
        if state.transition_timer is None:
            return state
        return replace(state, transition_timer=None)

    if state.transition_timer is None:
        if target is Phase.METALLIC:
            remaining = turn_on_delay(params, v_sw - v_th, dt)
        else:
            remaining = params.tau_off
    else:
        remaining = state.transition_timer[1]

    remaining -= dt
    if remaining < 0.5 * dt:
        return replace(state, phase=target, transition_timer=None)
    return replace(state, transition_timer=(target, remaining))


def channel_thermal_step(state: SwitchState, joule_power: float, ambient_eff: float,
                         params: SwitchParams, dt: float) -> SwitchState:
    """Exact exponential step of the lumped channel heat balance.

    G*tau*dT/dt = P - G*(T - T_amb) with P and T_amb held over the step.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    if joule_power < 0:
        raise InvalidInputError(f"joule_power must be >= 0, got {joule_power}")
    t_inf = ambient_eff + joule_power / params.thermal_conductance
    decay = math.exp(-dt / params.thermal_time_constant)
    temp = t_inf + (state.channel_temp - t_inf) * decay
    return replace(state, channel_temp=temp, ambient_eff=ambient_eff)
