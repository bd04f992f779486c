"""Reduced-order simulator for capacitor-free VO2 integrate-and-fire neurons
whose membrane potential is the temperature at the switch channel."""
from .circuit import (
    Branch,
    OperatingPoint,
    classify_stability,
    load_line,
    oscillation_regime,
    solve_operating_point,
)
from .config import emit_config, parse_config
from .device import (
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
from .engine import (
    NeuronConfig,
    SimConfig,
    SpikeEvent,
    Trace,
    Waveform,
    detect_spikes,
    run,
    step,
    sweep_delta_t,
)
from .errors import ConfigError, InvalidInputError
from .output import emit_csv
from .scenarios import PresetName, RunArtifact, ScenarioPreset, run_scenario
from .thermal import (
    EmissionRecord,
    ThermalKernel,
    effective_threshold,
    fires,
    membrane_potential,
    pulse_response,
)

__version__ = "0.1.0"
