"""Supervising relay elements evaluated on phasor bus readings.

Directional elements compare a sequence voltage to the same-sequence
current at the relay point (current measured from the bus into the
monitored line). For a fault ahead of the relay the mapping v/i equals
minus the impedance behind the relay, so the angle settles near -90 deg on
a predominantly inductive system; behind the relay it equals plus the
impedance ahead, near +90 deg. A non-directional blind band of half-width
phi_non around the +/-90 boundary turns ambiguous angles into an explicit
Indeterminate verdict instead of a guess:

    forward      |angle + 90| <= 90 - phi_non   (mod 360)
    reverse      |angle - 90| <= 90 - phi_non
    otherwise    indeterminate

Three operating quantities are provided: negative sequence v2/i2, zero
sequence v0/i0, and incremental positive sequence (v1 - v1_pre)/(i1 -
i1_pre), the latter needing a genuine pre-fault reading.

Phase selection classifies the fault type from two angle differences at
the relay point,

    dd21 = angle(i2) - angle(di1),    d20 = angle(i2) - angle(i0),

whose resting positions for a strongly inductive source sit on a 60-degree
lattice; each fault type owns a lattice point. Magnitude floors guard the
degenerate cases: no negative sequence means a symmetrical fault, no zero
sequence restricts the choice to the line-line set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .network import BusReading, FaultType
from .phasors import angle_between, wrap_angle_deg

__all__ = [
    "Direction",
    "DirectionalConfig",
    "DirectionalResult",
    "directional_negative",
    "directional_zero",
    "directional_incremental",
    "PhaseSelectionConfig",
    "PhaseSelectionResult",
    "phase_select",
    "GROUND_CENTERS",
    "LINE_CENTERS",
]


class Direction(Enum):
    FORWARD = "forward"
    REVERSE = "reverse"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DirectionalConfig:
    """Directional element settings.

    phi_non is the half-width of the non-directional band around the 0/180
    boundary of the operating angle; floor is the minimum magnitude (peak
    pu) for both operands before an angle is trusted.
    """

    phi_non_deg: float = 45.0
    floor: float = 0.02

    def __post_init__(self) -> None:
        if not 30.0 <= self.phi_non_deg <= 60.0:
            raise ValueError(
                f"phi_non must lie in [30, 60] degrees, got {self.phi_non_deg}"
            )
        if self.floor <= 0.0:
            raise ValueError("magnitude floor must be positive")


@dataclass(frozen=True)
class DirectionalResult:
    element: str  # operating quantity tag: "neg", "zero", "inc"
    angle_deg: float | None  # None when an operand sat below the floor
    direction: Direction


def _classify(element: str, v: complex, i: complex, cfg: DirectionalConfig) -> DirectionalResult:
    if abs(v) < cfg.floor or abs(i) < cfg.floor:
        return DirectionalResult(element, None, Direction.INDETERMINATE)
    angle = angle_between(v, i, floor=cfg.floor)
    half = 90.0 - cfg.phi_non_deg
    if abs(wrap_angle_deg(angle + 90.0)) <= half:
        verdict = Direction.FORWARD
    elif abs(wrap_angle_deg(angle - 90.0)) <= half:
        verdict = Direction.REVERSE
    else:
        verdict = Direction.INDETERMINATE
    return DirectionalResult(element, angle, verdict)


def directional_negative(reading: BusReading, cfg: DirectionalConfig) -> DirectionalResult:
    """Negative-sequence directional element: angle of v2/i2."""
    return _classify("neg", reading.v.neg, reading.i.neg, cfg)


def directional_zero(reading: BusReading, cfg: DirectionalConfig) -> DirectionalResult:
    """Zero-sequence directional element: angle of v0/i0."""
    return _classify("zero", reading.v.zero, reading.i.zero, cfg)


def directional_incremental(
    reading: BusReading, prefault: BusReading, cfg: DirectionalConfig
) -> DirectionalResult:
    """Incremental positive-sequence element: angle of dv1/di1."""
    dv = reading.v.pos - prefault.v.pos
    di = reading.i.pos - prefault.i.pos
    return _classify("inc", dv, di, cfg)


# (dd21, d20) lattice points for ground faults, dd21 points for line-line.
GROUND_CENTERS: dict[FaultType, tuple[float, float]] = {
    FaultType.AG: (0.0, 0.0),
    FaultType.BG: (120.0, -120.0),
    FaultType.CG: (-120.0, 120.0),
    FaultType.BCG: (180.0, 0.0),
    FaultType.CAG: (-60.0, -120.0),
    FaultType.ABG: (60.0, 120.0),
}
LINE_CENTERS: dict[FaultType, float] = {
    FaultType.BC: 180.0,
    FaultType.CA: -60.0,
    FaultType.AB: 60.0,
}


@dataclass(frozen=True)
class PhaseSelectionConfig:
    """Band half-widths and magnitude floors for the angle classifier."""

    dd21_half_deg: float = 15.0
    d20_half_deg: float = 30.0
    sym_floor: float = 0.05  # below this |i2|, treat the fault as symmetrical
    ground_floor: float = 0.05  # below this |i0|, exclude the ground types
    inc_floor: float = 0.02  # minimum |di1| for dd21 to mean anything

    def __post_init__(self) -> None:
        if not 0.0 < self.dd21_half_deg <= 30.0:
            raise ValueError("dd21 band half-width must lie in (0, 30] degrees")
        if not 0.0 < self.d20_half_deg <= 60.0:
            raise ValueError("d20 band half-width must lie in (0, 60] degrees")
        for name in ("sym_floor", "ground_floor", "inc_floor"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class PhaseSelectionResult:
    selected: FaultType | None  # None: no band matched
    dd21_deg: float | None
    d20_deg: float | None


def _in_band(angle: float, center: float, half: float) -> bool:
    return abs(wrap_angle_deg(angle - center)) <= half


def phase_select(
    reading: BusReading, prefault: BusReading, cfg: PhaseSelectionConfig
) -> PhaseSelectionResult:
    """Classify the fault type from the relay-point sequence currents."""
    i2 = reading.i.neg
    i0 = reading.i.zero
    di1 = reading.i.pos - prefault.i.pos

    if abs(i2) < cfg.sym_floor:
        return PhaseSelectionResult(FaultType.ABC, None, None)

    if abs(di1) < cfg.inc_floor:
        return PhaseSelectionResult(None, None, None)
    dd21 = angle_between(i2, di1, floor=cfg.inc_floor)

    if abs(i0) < cfg.ground_floor:
        for ftype, center in LINE_CENTERS.items():
            if _in_band(dd21, center, cfg.dd21_half_deg):
                return PhaseSelectionResult(ftype, dd21, None)
        return PhaseSelectionResult(None, dd21, None)

    d20 = angle_between(i2, i0, floor=cfg.ground_floor)
    for ftype, (c21, c20) in GROUND_CENTERS.items():
        if _in_band(dd21, c21, cfg.dd21_half_deg) and _in_band(d20, c20, cfg.d20_half_deg):
            return PhaseSelectionResult(ftype, dd21, d20)
    return PhaseSelectionResult(None, dd21, d20)
