"""Series V_DD - R_s - switch circuit.

With piecewise-linear branches the load line meets the active branch in
closed form, so no root finding is needed. The negative-differential-
resistance segment between the threshold and holding points is never
returned as a solution; it shows up only as the absence of a stable point.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .device import Phase, SwitchParams, holding_voltage, threshold_voltage
from .errors import InvalidInputError


class Branch(enum.Enum):
    HIGH_R = "high_r"
    LOW_R = "low_r"


_BRANCH_OF = {Phase.INSULATING: Branch.HIGH_R, Phase.METALLIC: Branch.LOW_R}


@dataclass(frozen=True)
class OperatingPoint:
    v_sw: float
    i_sw: float
    branch: Branch
    stable: bool = True

    @property
    def power(self) -> float:
        return self.v_sw * self.i_sw


def _check_rs(r_s: float) -> None:
    if not r_s > 0:
        raise InvalidInputError(f"load resistance must be > 0, got {r_s}")


def load_line(v_dd: float, r_s: float, v_sw: float) -> float:
    """Current permitted by the source and load resistor at switch voltage ``v_sw``."""
    _check_rs(r_s)
    return v_dd / r_s - v_sw / r_s


def solve_operating_point(v_dd: float, r_s: float, phase: Phase,
                          params: SwitchParams, ambient_eff: float | None = None) -> OperatingPoint:
    """Intersect the load line with the branch of ``phase``.

    Stability is only classified when ``ambient_eff`` is given; otherwise the
    point is reported stable.
    """
    _check_rs(r_s)
    if v_dd < 0:
        raise InvalidInputError(f"v_dd must be >= 0, got {v_dd}")
    r_b = params.branch_resistance(phase)
    i_sw = v_dd / (r_s + r_b)
    # v_dd - i*r_s rather than i*r_b keeps the Kirchhoff residual at rounding level
    v_sw = v_dd - i_sw * r_s
    op = OperatingPoint(v_sw, i_sw, _BRANCH_OF[phase])
    if ambient_eff is not None:
        op = OperatingPoint(v_sw, i_sw, op.branch, classify_stability(op, params, ambient_eff))
    return op


def classify_stability(op: OperatingPoint, params: SwitchParams, ambient_eff: float) -> bool:
    """True when ``op`` lies inside the validity interval of its branch."""
    if op.branch is Branch.HIGH_R:
        return op.v_sw < threshold_voltage(params, ambient_eff)
    return op.v_sw > holding_voltage(params, ambient_eff)


def oscillation_regime(v_dd: float, r_s: float, params: SwitchParams, ambient_eff: float) -> bool:
    """True when neither branch offers a stable operating point."""
    _check_rs(r_s)
    for phase in Phase:
        op = solve_operating_point(v_dd, r_s, phase, params)
        if classify_stability(op, params, ambient_eff):
            return False
    return True
