from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vo2lif.circuit import (
    Branch,
    OperatingPoint,
    classify_stability,
    load_line,
    oscillation_regime,
    solve_operating_point,
)
from vo2lif.device import Phase, SwitchParams, threshold_voltage
from vo2lif.engine import NeuronConfig, SimConfig, Waveform, run
from vo2lif.errors import InvalidInputError


def series_oracle(v_dd, r_s, r_b):
    i = Fraction(v_dd) / (Fraction(r_s) + Fraction(r_b))
    return float(Fraction(v_dd) - i * Fraction(r_s)), float(i)


def test_load_line_intercepts():
    assert load_line(6.0, 1000.0, 0.0) == pytest.approx(6e-3)
    assert load_line(6.0, 1000.0, 6.0) == 0.0
    assert load_line(1.8, 500.0, 0.9) == pytest.approx(1.8e-3, rel=1e-15)


@pytest.mark.parametrize("r_s", [0.0, -5.0])
def test_load_line_rejects_bad_resistance(r_s):
    with pytest.raises(InvalidInputError):
        load_line(1.0, r_s, 0.0)


def test_operating_points_against_series_oracle(params):
    op = solve_operating_point(1.8, 500.0, Phase.INSULATING, params)
    v, i = series_oracle(Fraction("1.8"), 500, 57600)
    assert op.branch is Branch.HIGH_R
    assert op.i_sw == pytest.approx(i, rel=1e-12)
    assert op.v_sw == pytest.approx(v, rel=1e-12)
    assert op.i_sw == pytest.approx(30.98e-6, abs=0.005e-6)
    assert op.v_sw == pytest.approx(1.785, abs=5e-4)

    op = solve_operating_point(6.0, 1000.0, Phase.METALLIC, params)
    assert op.i_sw == pytest.approx(series_oracle(6, 1000, 630)[1], rel=1e-12)
    assert op.i_sw == pytest.approx(3.681e-3, abs=0.0005e-3)

    op = solve_operating_point(0.0, 777.0, Phase.METALLIC, params)
    assert (op.v_sw, op.i_sw) == (0.0, 0.0)


@given(
    v_dd=st.floats(0, 50),
    r_s=st.floats(1, 1e6),
    phase=st.sampled_from(list(Phase)),
)
def test_kirchhoff_residual_and_branch_law(v_dd, r_s, phase):
    params = SwitchParams()
    op = solve_operating_point(v_dd, r_s, phase, params)
    assert abs(v_dd - op.i_sw * r_s - op.v_sw) <= 1e-12 * max(1.0, v_dd)
    r_b = params.branch_resistance(phase)
    assert op.i_sw == pytest.approx(op.v_sw / r_b, rel=1e-9, abs=1e-18)


@given(v_dd=st.floats(0.01, 20), scale=st.floats(0.1, 10), r_s=st.floats(10, 1e5))
def test_operating_point_homogeneous(v_dd, scale, r_s):
    params = SwitchParams()
    for phase in Phase:
        a = solve_operating_point(v_dd, r_s, phase, params)
        b = solve_operating_point(scale * v_dd, r_s, phase, params)
        assert b.i_sw == pytest.approx(scale * a.i_sw, rel=1e-12)
        assert b.v_sw == pytest.approx(scale * a.v_sw, rel=1e-12)


@given(v_dd=st.floats(0.01, 20), r_s=st.floats(10, 1e5))
def test_high_r_current_below_low_r(v_dd, r_s):
    params = SwitchParams()
    hi = solve_operating_point(v_dd, r_s, Phase.INSULATING, params)
    lo = solve_operating_point(v_dd, r_s, Phase.METALLIC, params)
    assert hi.i_sw < lo.i_sw


def test_stability_examples(params):
    point_a = OperatingPoint(4.99, 4.99 / params.r_off, Branch.HIGH_R)
    point_b = OperatingPoint(2.0, 2.0 / params.r_on, Branch.LOW_R)
    assert classify_stability(point_a, params, 300.0)
    assert classify_stability(point_b, params, 300.0)
    assert not classify_stability(OperatingPoint(5.0, 5.0 / params.r_off, Branch.HIGH_R), params, 300.0)
    assert not classify_stability(OperatingPoint(1.0, 1.0 / params.r_on, Branch.LOW_R), params, 300.0)


def test_solve_with_ambient_classifies(params):
    assert solve_operating_point(1.8, 500.0, Phase.INSULATING, params, 300.0).stable
    assert not solve_operating_point(1.8, 500.0, Phase.METALLIC, params, 300.0).stable


def test_oscillation_regime_predicate(params):
    assert not oscillation_regime(1.8, 500.0, params, 300.0)
    assert not oscillation_regime(0.0, 500.0, params, 300.0)
    # constructed from the closed forms: HighR >= V_th and LowR <= V_h
    r_s = 2000.0
    v_dd = 5.6
    assert v_dd * params.r_off / (params.r_off + r_s) >= params.v_th_ref
    assert v_dd * params.r_on / (params.r_on + r_s) <= params.v_h_ref
    assert oscillation_regime(v_dd, r_s, params, 300.0)


def test_oscillation_regime_cycles_in_time_domain(params):
    cfg = SimConfig((NeuronConfig("n", (0.0, 0.0), 2000.0, Waveform.constant(5.6)),), t_end=2e-6)
    traces, events = run(cfg)
    assert len(events) >= 3
    metallic = traces["n"].metallic
    assert np.count_nonzero(np.diff(metallic.astype(int)) == -1) >= 3


def test_stable_drive_does_not_cycle(params):
    cfg = SimConfig((NeuronConfig("n", (0.0, 0.0), 1000.0, Waveform.constant(6.0)),), t_end=2e-6)
    _, events = run(cfg)
    assert len(events) == 1
    assert events[0].t_offset == pytest.approx(2e-6 + 1e-9)


def test_high_r_destabilising_set_grows_with_ambient(params):
    r_s = 1000.0
    v_grid = np.linspace(0, 10, 401)
    previous = set()
    for ambient in np.linspace(300, 339, 40):
        unstable = {v for v in v_grid
                    if solve_operating_point(v, r_s, Phase.INSULATING, params).v_sw >= threshold_voltage(params, ambient)}
        assert previous <= unstable
        previous = unstable
