"""Per-unit bases and physical-unit conversion.

The solvers work entirely in per-unit on a single system MVA base with one
voltage base per zone, the zone bases standing in the transformer's nominal
ratio. In that system impedances refer across the transformer unchanged, so
the network model never carries an explicit ratio.

Conventional RMS relations are used for the bases:

    Z_base = V_LL^2 / S          I_base = S / (sqrt(3) * V_LL)

with V_LL the RMS line-to-line base voltage of the zone. Equipment data
quoted as peak line-to-line (amplitude-invariant convention, where 1 p.u. is
the nominal phase peak) is converted with V_LL_rms = V_LL_peak / sqrt(2)
before building a base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["ZoneBase", "PerUnitBase"]


@dataclass(frozen=True)
class ZoneBase:
    """Derived bases for one voltage zone."""

    v_ll: float  # RMS line-line volts
    s_base: float  # VA

    def __post_init__(self) -> None:
        if self.v_ll <= 0.0 or self.s_base <= 0.0:
            raise ValueError("zone base voltage and power must be positive")

    @property
    def z_base(self) -> float:
        """Base impedance in ohms: V_LL^2 / S."""
        return self.v_ll**2 / self.s_base

    @property
    def i_base(self) -> float:
        """Base current in amperes: S / (sqrt(3) * V_LL)."""
        return self.s_base / (math.sqrt(3.0) * self.v_ll)

    def z_to_pu(self, z_ohm: complex) -> complex:
        return z_ohm / self.z_base

    def z_to_ohm(self, z_pu: complex) -> complex:
        return z_pu * self.z_base


@dataclass(frozen=True)
class PerUnitBase:
    """System base: one MVA base, one voltage base per zone."""

    s_base: float  # VA
    zones: dict[str, float]  # zone name -> RMS line-line volts

    def zone(self, name: str) -> ZoneBase:
        try:
            v_ll = self.zones[name]
        except KeyError:
            raise KeyError(f"unknown voltage zone {name!r}; have {sorted(self.zones)}") from None
        return ZoneBase(v_ll=v_ll, s_base=self.s_base)
