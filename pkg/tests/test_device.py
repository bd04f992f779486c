import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vo2lif.device import (
    Phase,
    SwitchParams,
    SwitchState,
    branch_current,
    channel_thermal_step,
    holding_voltage,
    threshold_voltage,
    turn_on_delay,
    update_phase,
)
from vo2lif.errors import InvalidInputError

DT = 1e-9


def test_threshold_voltage_reference_points(params):
    assert threshold_voltage(params, 300.0) == pytest.approx(5.0, rel=1e-12)
    assert threshold_voltage(params, 310.0) == pytest.approx(2.5, rel=1e-12)
    assert threshold_voltage(params, 340.0) == 0.0
    assert threshold_voltage(params, 400.0) == 0.0


def test_holding_voltage_reference_points(params):
    assert holding_voltage(params, 300.0) == pytest.approx(1.45, rel=1e-12)
    # independent evaluation: 1.45 * 2**-1 computed exactly
    assert holding_voltage(params, 310.0) == pytest.approx(float(Fraction("1.45") / 2), rel=1e-12)
    assert holding_voltage(params, 340.0) == 0.0


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_threshold_rejects_non_finite(params, bad):
    with pytest.raises(InvalidInputError):
        threshold_voltage(params, bad)
    with pytest.raises(InvalidInputError):
        holding_voltage(params, bad)


def test_threshold_laws_decrease_and_stay_ordered(params):
    temps = np.linspace(250.0, 339.999, 2000)
    v_th = np.array([threshold_voltage(params, t) for t in temps])
    v_h = np.array([holding_voltage(params, t) for t in temps])
    assert np.all(np.diff(v_th) < 0)
    assert np.all(np.diff(v_h) < 0)
    assert np.all(v_th > v_h)


def test_branch_current_examples(params):
    assert branch_current(params, Phase.INSULATING, 5.0) == pytest.approx(float(Fraction(5, 57600)), rel=1e-15)
    assert branch_current(params, Phase.INSULATING, 5.0) == pytest.approx(86.8e-6, abs=0.05e-6)
    assert branch_current(params, Phase.METALLIC, 1.45) == pytest.approx(float(Fraction("1.45") / 630), rel=1e-15)
    assert branch_current(params, Phase.METALLIC, 1.45) == pytest.approx(2.30e-3, abs=0.005e-3)
    assert branch_current(params, Phase.INSULATING, 0.0) == 0.0


@pytest.mark.parametrize("phase", list(Phase))
def test_branch_current_linear_and_odd(params, phase):
    for v in np.linspace(-6, 6, 49):
        i = branch_current(params, phase, v)
        assert branch_current(params, phase, -v) == -i
        for a in (0.5, 2.0, 3.7):
            assert branch_current(params, phase, a * v) == pytest.approx(a * i, rel=1e-14, abs=1e-300)


def test_turn_on_delay_calibration(params):
    overdrive = 6.0 * 57600 / 58600 - 5.0
    assert turn_on_delay(params, overdrive) == pytest.approx(33e-9, rel=1e-9)
    assert turn_on_delay(params, 0.0) == params.tau_on_base


def test_turn_on_delay_monotone_and_clamped(params):
    grid = np.linspace(0, 10, 5001)
    delays = [turn_on_delay(params, od) for od in grid]
    assert all(a > b for a, b in zip(delays, delays[1:]))
    assert turn_on_delay(params, 100.0, dt=DT) == DT
    with pytest.raises(InvalidInputError):
        turn_on_delay(params, -1e-3)


def test_update_phase_schedules_turn_on(params):
    state = SwitchState.at_rest(300.0)
    v = 5.1
    out = update_phase(state, params, v, v / params.r_off, DT)
    assert out.phase is Phase.INSULATING
    target, remaining = out.transition_timer
    assert target is Phase.METALLIC
    assert 0 < remaining < turn_on_delay(params, 0.1)


def test_update_phase_metallic_holds_above_holding_voltage(params):
    state = SwitchState(Phase.METALLIC, 300.0, 300.0)
    out = update_phase(state, params, 2.0, 2.0 / params.r_on, DT)
    assert out == state


def test_sub_threshold_never_switches(params):
    # brute-force time grid: 4.99 V held for 10 us
    state = SwitchState.at_rest(300.0)
    for _ in range(10_000):
        state = update_phase(state, params, 4.99, 4.99 / params.r_off, DT)
        assert state.phase is Phase.INSULATING
        assert state.transition_timer is None


def test_turn_on_commits_after_delay(params):
    v = 6.0 * 57600 / 58600
    state = SwitchState.at_rest(300.0)
    steps = 0
    while state.phase is Phase.INSULATING:
        state = update_phase(state, params, v, v / params.r_off, DT)
        steps += 1
    assert steps == 33


def test_pending_transition_cancelled(params):
    state = SwitchState.at_rest(300.0)
    state = update_phase(state, params, 5.01, 5.01 / params.r_off, DT)
    assert state.transition_timer is not None
    state = update_phase(state, params, 4.9, 4.9 / params.r_off, DT)
    assert state.transition_timer is None
    assert state.phase is Phase.INSULATING


def test_turn_off_after_tau_off(params):
    state = SwitchState(Phase.METALLIC, 300.0, 300.0)
    steps = 0
    while state.phase is Phase.METALLIC:
        state = update_phase(state, params, 0.0, 0.0, DT)
        steps += 1
    assert steps == 80


def test_permanently_metallic_above_transition(params):
    state = SwitchState(Phase.METALLIC, 350.0, 345.0)
    for _ in range(200):
        state = update_phase(state, params, 0.0, 0.0, DT)
    assert state.phase is Phase.METALLIC


def test_update_phase_deterministic(params):
    state = SwitchState(Phase.INSULATING, 301.0, 305.0, (Phase.METALLIC, 12e-9))
    a = update_phase(state, params, 4.0, 4.0 / params.r_off, DT)
    b = update_phase(state, params, 4.0, 4.0 / params.r_off, DT)
    assert a == b


def test_update_phase_rejects_bad_dt(params):
    with pytest.raises(InvalidInputError):
        update_phase(SwitchState.at_rest(300.0), params, 1.0, 0.0, 0.0)


def test_hysteresis_loop(params):
    up = np.linspace(0, 6, 1201)
    ramp = np.concatenate([up, up[::-1][1:]])
    state = SwitchState.at_rest(300.0)
    switches = []
    for v in ramp:
        before = state.phase
        state = update_phase(state, params, v, branch_current(params, state.phase, v), 1e-6)
        if state.phase is not before:
            switches.append((state.phase, v))
    assert [p for p, _ in switches] == [Phase.METALLIC, Phase.INSULATING]
    v_up, v_down = switches[0][1], switches[1][1]
    assert v_up == pytest.approx(5.0, abs=5e-3)
    assert v_down == pytest.approx(1.45, abs=5e-3)
    # loop area between branches over [V_h, V_th] is non-degenerate
    assert v_up - v_down > 3.0


def test_thermal_step_equilibrium(params):
    state = SwitchState.at_rest(300.0)
    for dt in (1e-12, 1e-9, 1e-3):
        assert channel_thermal_step(state, 0.0, 300.0, params, dt).channel_temp == 300.0


def test_thermal_step_fixed_point(params):
    p = 2e-3
    state = channel_thermal_step(SwitchState.at_rest(300.0), p, 300.0, params, 1.0)
    assert state.channel_temp == pytest.approx(300.0 + p / params.thermal_conductance, rel=1e-12)


def test_thermal_step_matches_closed_form(params):
    p, dt = 1.5e-3, 7e-9
    tau, g = params.thermal_time_constant, params.thermal_conductance
    got = channel_thermal_step(SwitchState.at_rest(300.0), p, 300.0, params, dt).channel_temp
    expected = 300.0 + (p / g) * (1 - math.exp(-dt / tau))
    assert got == pytest.approx(expected, rel=1e-9)


def test_thermal_step_rejects_negative_power(params):
    with pytest.raises(InvalidInputError):
        channel_thermal_step(SwitchState.at_rest(300.0), -1e-6, 300.0, params, 1e-9)


@given(
    temp=st.floats(300, 500),
    power=st.floats(0, 1e-2),
    ambient=st.floats(300, 400),
    dt=st.floats(1e-12, 1e-6),
)
def test_thermal_halving_composes(temp, power, ambient, dt):
    params = SwitchParams()
    s = SwitchState(Phase.INSULATING, temp, ambient)
    one = channel_thermal_step(s, power, ambient, params, dt).channel_temp
    half = channel_thermal_step(s, power, ambient, params, dt / 2)
    two = channel_thermal_step(half, power, ambient, params, dt / 2).channel_temp
    assert two == pytest.approx(one, rel=1e-9)


@given(
    temp=st.floats(300, 500),
    power=st.floats(0, 1e-2),
    rise=st.floats(0, 50),
    dt=st.floats(1e-12, 1e-3),
)
def test_thermal_step_never_below_global_ambient(temp, power, rise, dt):
    params = SwitchParams()
    s = SwitchState(Phase.METALLIC, temp, 300.0 + rise)
    assert channel_thermal_step(s, power, 300.0 + rise, params, dt).channel_temp >= 300.0


@pytest.mark.parametrize("kwargs", [
    {"r_on": 1e6},
    {"v_h_ref": 6.0},
    {"t_transition": 290.0},
    {"halving_interval": 0.0},
    {"tau_off": 0.0},
    {"thermal_conductance": -1.0},
])
def test_params_invariants(kwargs):
    with pytest.raises(InvalidInputError):
        SwitchParams(**kwargs)
