"""Scenario configuration: flat key=value schema, defaults, network building.

A scenario is described by a flat dotted-key config (parsed from text or
passed as a dict). Every key has a default; the resolved config and a
provenance tag per key (study-case, default, preset:<name>, user) travel
with the scenario so reports can state where each number came from.
"study-case" marks values taken from the benchmark study-case equipment
table this laboratory replicates; "default" marks artifact choices.

Topology (node names fixed):

    sg:   src emf -[x_sg]- sgt -[collection line]- bus1 -[line]- bus2 -[z_g]- grid emf
    gfm:  reference -[Z_v (+x_f)]- poc -[x_t]- bus1 -[line]- bus2 -[z_g]- grid emf
          plus the transformer zero-sequence leg: bus1 -[x_t0]- gnd
          (series zero path toward poc open: delta winding)

Relays sit at bus1 and bus2, each measuring its bus voltage and the current
flowing from its bus into the line. Forward faults split the line at
fraction m from bus1; reverse faults split the branch behind bus1 (the
collection line, or the converter transformer together with its
zero-sequence leg) at the same fraction. m=0 and m=1 collapse the fault
node onto the adjacent bus instead of creating zero-impedance stubs.

Fault resistance is given in ohms and referred to the high-voltage zone
base everywhere. Voltage bases follow the study-case convention of quoting
line-line amplitudes (peak); circuit.voltages_are_peak=false switches to
conventional RMS quantities.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

from .clc import ClcConfig, ClcKind
from .network import (
    GROUND,
    FaultSpec,
    FaultType,
    NetworkModel,
    Placement,
    RelayTap,
    SeriesElement,
    SourceElement,
)
from .per_unit import PerUnitBase
from .relay import DirectionalConfig, PhaseSelectionConfig
from .sources import GfmModel, SgModel

__all__ = [
    "ConfigError",
    "ParseError",
    "ValidationError",
    "SourceKind",
    "SolverSettings",
    "Scenario",
    "DEFAULTS",
    "parse_config_text",
    "build_scenario",
    "canonical_config_lines",
]

PROV_STUDY = "study-case"
PROV_DEFAULT = "default"
PROV_USER = "user"


class ConfigError(Exception):
    """Base for everything wrong with a scenario description."""


class ParseError(ConfigError):
    """The config text is not well-formed key = value lines."""


class ValidationError(ConfigError):
    """The config parsed but a key, type, or value is unacceptable."""


class SourceKind(Enum):
    SG = "sg"
    GFM = "gfm"


# key -> (default value, provenance of the default)
DEFAULTS: dict[str, tuple[object, str]] = {
    "source.kind": ("sg", PROV_DEFAULT),
    "source.p_ref": (1.0, PROV_DEFAULT),
    "source.q_ref": (0.0, PROV_DEFAULT),
    "circuit.s_base_mva": (100.0, PROV_STUDY),
    "circuit.v_hv_kv": (220.0, PROV_STUDY),
    "circuit.v_lv_kv": (33.0, PROV_STUDY),
    "circuit.voltages_are_peak": (True, PROV_STUDY),
    "circuit.line_km": (100.0, PROV_STUDY),
    "circuit.line_r1_ohm_km": (0.03, PROV_STUDY),
    "circuit.line_x1_ohm_km": (0.34, PROV_STUDY),
    "circuit.line_r0_ohm_km": (0.18, PROV_STUDY),
    "circuit.line_x0_ohm_km": (1.19, PROV_STUDY),
    "circuit.grid_scr": (10.0, PROV_DEFAULT),
    "circuit.grid_x_r": (10.0, PROV_DEFAULT),
    "circuit.grid_z0_scale": (3.0, PROV_DEFAULT),
    "circuit.grid_v_pu": (1.0, PROV_DEFAULT),
    "circuit.grid_angle_deg": (0.0, PROV_DEFAULT),
    "sg.x1_pu": (0.2, PROV_DEFAULT),
    "sg.x2_pu": (0.2, PROV_DEFAULT),
    "sg.x0_pu": (0.1, PROV_DEFAULT),
    "sg.collection_km": (10.0, PROV_DEFAULT),
    "gfm.x_f_pu": (0.15, PROV_STUDY),
    "gfm.x_t_pu": (0.1, PROV_STUDY),
    "gfm.x_t0_pu": (0.1, PROV_DEFAULT),
    "gfm.k_pv": (2.0, PROV_DEFAULT),
    # auto: in-network exactly when the shaping impedance acts on the
    # modulation reference (adaptive kind); the other strategies keep the
    # filter inside the current loop where the relay cannot see it.
    "gfm.filter_in_network": ("auto", PROV_DEFAULT),
    "clc.kind": ("circular", PROV_DEFAULT),
    "clc.i_lim_pu": (1.2, PROV_DEFAULT),
    "clc.clip_level_pu": (1.2, PROV_DEFAULT),
    "clc.i_th_pu": (1.1, PROV_DEFAULT),
    "clc.k_x": (10.0, PROV_DEFAULT),
    "clc.n_x_r": (20.0, PROV_DEFAULT),
    "clc.r_vn_pu": (0.01, PROV_DEFAULT),
    "clc.x_vn_pu": (0.05, PROV_DEFAULT),
    "fault.kind": ("bcg", PROV_DEFAULT),
    "fault.m": (0.5, PROV_DEFAULT),
    "fault.r_g_ohm": (0.0, PROV_DEFAULT),
    "fault.placement": ("forward", PROV_DEFAULT),
    "relay.phi_non_deg": (45.0, PROV_DEFAULT),
    "relay.seq_floor_pu": (0.02, PROV_DEFAULT),
    "relay.asym_floor_pu": (0.05, PROV_DEFAULT),
    "relay.dd21_half_deg": (15.0, PROV_DEFAULT),
    "relay.d20_half_deg": (30.0, PROV_DEFAULT),
    "solver.tol": (1e-9, PROV_DEFAULT),
    "solver.max_iter": (100.0, PROV_DEFAULT),
    "solver.damping": ("auto", PROV_DEFAULT),
    "solver.newton_tol": (1e-8, PROV_DEFAULT),
    "solver.newton_max_iter": (50.0, PROV_DEFAULT),
}


def parse_config_text(text: str) -> dict[str, object]:
    """Parse flat `key = value` lines; `#` starts a comment."""
    out: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key or not value:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in out:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce_token(value)
    return out


def _coerce_token(token: str) -> object:
    low = token.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return float(token)
    except ValueError:
        return token


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-9
    max_iter: int = 100
    damping: float | None = None  # None: per-strategy default
    newton_tol: float = 1e-8
    newton_max_iter: int = 50


@dataclass(frozen=True)
class Scenario:
    """Fully resolved, validated scenario ready for the harness."""

    scenario_id: str
    kind: SourceKind
    p_ref: float
    q_ref: float
    base: PerUnitBase
    sg: SgModel | None
    gfm: GfmModel | None
    fault: FaultSpec
    dir_cfg: DirectionalConfig
    sel_cfg: PhaseSelectionConfig
    solver: SolverSettings
    net: NetworkModel
    overrides: dict[str, object]  # non-default keys as supplied
    resolved: dict[str, object]  # every key, final value
    provenance: dict[str, str]

    @property
    def source(self) -> SgModel | GfmModel:
        model = self.sg if self.kind is SourceKind.SG else self.gfm
        assert model is not None
        return model

    @property
    def config_hash(self) -> str:
        text = "\n".join(canonical_config_lines(self.resolved))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def canonical_config_lines(resolved: dict[str, object]) -> list[str]:
    return [f"{key}={_format_value(resolved[key])}" for key in sorted(resolved)]


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _need_float(resolved: dict[str, object], key: str) -> float:
    value = resolved[key]
    if isinstance(value, bool) or not isinstance(value, float):
        raise ValidationError(f"{key} must be a number, got {value!r}")
    return value


def _need_positive(resolved: dict[str, object], key: str) -> float:
    value = _need_float(resolved, key)
    if value <= 0.0:
        raise ValidationError(f"{key} must be positive, got {value}")
    return value


def _need_bool(resolved: dict[str, object], key: str) -> bool:
    value = resolved[key]
    if not isinstance(value, bool):
        raise ValidationError(f"{key} must be true or false, got {value!r}")
    return value


def _need_int(resolved: dict[str, object], key: str) -> int:
    value = _need_float(resolved, key)
    if value != int(value) or value <= 0:
        raise ValidationError(f"{key} must be a positive integer, got {value}")
    return int(value)


def _need_choice(resolved: dict[str, object], key: str, choices: tuple[str, ...]) -> str:
    value = resolved[key]
    if not isinstance(value, str) or value not in choices:
        raise ValidationError(f"{key} must be one of {', '.join(choices)}; got {value!r}")
    return value


def build_scenario(
    overrides: dict[str, object] | None = None,
    scenario_id: str = "custom",
    origin: str = PROV_USER,
) -> Scenario:
    """Merge overrides onto the defaults, validate, and build the scenario."""
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(DEFAULTS))
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")

    resolved: dict[str, object] = {}
    provenance: dict[str, str] = {}
    for key, (default, prov) in DEFAULTS.items():
        if key in overrides:
            resolved[key] = overrides[key]
            provenance[key] = origin
        else:
            resolved[key] = default
            provenance[key] = prov

    kind = SourceKind(_need_choice(resolved, "source.kind", ("sg", "gfm")))
    p_ref = _need_float(resolved, "source.p_ref")
    q_ref = _need_float(resolved, "source.q_ref")

    s_base = _need_positive(resolved, "circuit.s_base_mva") * 1e6
    v_hv = _need_positive(resolved, "circuit.v_hv_kv") * 1e3
    v_lv = _need_positive(resolved, "circuit.v_lv_kv") * 1e3
    if _need_bool(resolved, "circuit.voltages_are_peak"):
        v_hv /= math.sqrt(2.0)
        v_lv /= math.sqrt(2.0)
    base = PerUnitBase(s_base=s_base, zones={"hv": v_hv, "lv": v_lv})
    zb_hv = base.zone("hv").z_base

    try:
        clc = ClcConfig(
            kind=ClcKind(_need_choice(
                resolved,
                "clc.kind",
                tuple(k.value for k in ClcKind),
            )),
            i_lim=_need_positive(resolved, "clc.i_lim_pu"),
            clip_level=_need_positive(resolved, "clc.clip_level_pu"),
            i_th=_need_positive(resolved, "clc.i_th_pu"),
            k_x=_need_positive(resolved, "clc.k_x"),
            n_x_r=_need_positive(resolved, "clc.n_x_r"),
            r_vn=_need_float(resolved, "clc.r_vn_pu"),
            x_vn=_need_float(resolved, "clc.x_vn_pu"),
        )
        fin_raw = resolved["gfm.filter_in_network"]
        if isinstance(fin_raw, str):
            if fin_raw != "auto":
                raise ValidationError(
                    f"gfm.filter_in_network must be true, false, or 'auto', got {fin_raw!r}"
                )
            filter_in_network = clc.kind is ClcKind.ADAPTIVE_VIRTUAL_IMPEDANCE
        else:
            filter_in_network = _need_bool(resolved, "gfm.filter_in_network")
        gfm = GfmModel(
            clc=clc,
            k_pv=_need_positive(resolved, "gfm.k_pv"),
            x_f=_need_float(resolved, "gfm.x_f_pu"),
            filter_in_network=filter_in_network,
        )
        sg = SgModel(
            x1=_need_positive(resolved, "sg.x1_pu"),
            x2=_need_positive(resolved, "sg.x2_pu"),
            x0=_need_positive(resolved, "sg.x0_pu"),
        )
        dir_cfg = DirectionalConfig(
            phi_non_deg=_need_float(resolved, "relay.phi_non_deg"),
            floor=_need_positive(resolved, "relay.seq_floor_pu"),
        )
        sel_cfg = PhaseSelectionConfig(
            dd21_half_deg=_need_positive(resolved, "relay.dd21_half_deg"),
            d20_half_deg=_need_positive(resolved, "relay.d20_half_deg"),
            sym_floor=_need_positive(resolved, "relay.asym_floor_pu"),
            ground_floor=_need_positive(resolved, "relay.asym_floor_pu"),
            inc_floor=_need_positive(resolved, "relay.seq_floor_pu"),
        )
        fault_m = _need_float(resolved, "fault.m")
        if not 0.0 <= fault_m <= 1.0:
            raise ValidationError(f"fault.m must lie in [0, 1], got {fault_m}")
        fault_r = _need_float(resolved, "fault.r_g_ohm")
        if fault_r < 0.0:
            raise ValidationError(f"fault.r_g_ohm must be non-negative, got {fault_r}")
        fault = FaultSpec(
            fault_type=FaultType(_need_choice(
                resolved, "fault.kind", tuple(t.value for t in FaultType)
            )),
            m=fault_m,
            r_g_ohm=fault_r,
            placement=Placement(_need_choice(resolved, "fault.placement", ("forward", "reverse"))),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    damping_raw = resolved["solver.damping"]
    if isinstance(damping_raw, str):
        if damping_raw != "auto":
            raise ValidationError(f"solver.damping must be a number or 'auto', got {damping_raw!r}")
        damping = None
    else:
        damping = _need_float(resolved, "solver.damping")
        if not 0.0 < damping <= 1.0:
            raise ValidationError(f"solver.damping must lie in (0, 1], got {damping}")
    solver = SolverSettings(
        tol=_need_positive(resolved, "solver.tol"),
        max_iter=_need_int(resolved, "solver.max_iter"),
        damping=damping,
        newton_tol=_need_positive(resolved, "solver.newton_tol"),
        newton_max_iter=_need_int(resolved, "solver.newton_max_iter"),
    )

    net = _build_network(kind, resolved, zb_hv, fault)
    return Scenario(
        scenario_id=scenario_id,
        kind=kind,
        p_ref=p_ref,
        q_ref=q_ref,
        base=base,
        sg=sg if kind is SourceKind.SG else None,
        gfm=gfm if kind is SourceKind.GFM else None,
        fault=fault,
        dir_cfg=dir_cfg,
        sel_cfg=sel_cfg,
        solver=solver,
        net=net,
        overrides=overrides,
        resolved=resolved,
        provenance=provenance,
    )


def _grid_impedance(resolved: dict[str, object]) -> tuple[complex, complex]:
    scr = _need_positive(resolved, "circuit.grid_scr")
    x_r = _need_positive(resolved, "circuit.grid_x_r")
    mag = 1.0 / scr
    denom = math.sqrt(1.0 + x_r * x_r)
    z1 = complex(mag / denom, mag * x_r / denom)
    scale = _need_positive(resolved, "circuit.grid_z0_scale")
    return z1, scale * z1


def _build_network(
    kind: SourceKind, resolved: dict[str, object], zb_hv: float, fault: FaultSpec
) -> NetworkModel:
    km = _need_positive(resolved, "circuit.line_km")
    line_z1 = complex(
        _need_float(resolved, "circuit.line_r1_ohm_km"),
        _need_float(resolved, "circuit.line_x1_ohm_km"),
    ) * km / zb_hv
    line_z0 = complex(
        _need_float(resolved, "circuit.line_r0_ohm_km"),
        _need_float(resolved, "circuit.line_x0_ohm_km"),
    ) * km / zb_hv
    grid_z1, grid_z0 = _grid_impedance(resolved)
    grid_v = _need_positive(resolved, "circuit.grid_v_pu")
    grid_ang = math.radians(_need_float(resolved, "circuit.grid_angle_deg"))
    grid_e = grid_v * complex(math.cos(grid_ang), math.sin(grid_ang))

    elements: list = [
        SourceElement("grid", "bus2", e1=grid_e, z1=grid_z1, z2=grid_z1, z0=grid_z0)
    ]
    taps: dict[str, RelayTap] = {}
    m = fault.m
    forward = fault.placement is Placement.FORWARD

    # the monitored line, split only by a forward fault
    if forward and 0.0 < m < 1.0:
        elements.append(SeriesElement("line_a", "bus1", "flt", m * line_z1, m * line_z1, m * line_z0))
        elements.append(
            SeriesElement(
                "line_b", "flt", "bus2", (1 - m) * line_z1, (1 - m) * line_z1, (1 - m) * line_z0
            )
        )
        taps["bus1"] = RelayTap("bus1", "line_a", +1.0)
        taps["bus2"] = RelayTap("bus2", "line_b", -1.0)
        fault_node = "flt"
    else:
        elements.append(SeriesElement("line", "bus1", "bus2", line_z1, line_z1, line_z0))
        taps["bus1"] = RelayTap("bus1", "line", +1.0)
        taps["bus2"] = RelayTap("bus2", "line", -1.0)
        fault_node = "bus1" if (forward and m == 0.0) else "bus2" if forward else ""

    if kind is SourceKind.SG:
        coll_km = _need_positive(resolved, "sg.collection_km")
        zs1 = complex(
            _need_float(resolved, "circuit.line_r1_ohm_km"),
            _need_float(resolved, "circuit.line_x1_ohm_km"),
        ) * coll_km / zb_hv
        zs0 = complex(
            _need_float(resolved, "circuit.line_r0_ohm_km"),
            _need_float(resolved, "circuit.line_x0_ohm_km"),
        ) * coll_km / zb_hv
        if forward:
            elements.append(SeriesElement("col", "sgt", "bus1", zs1, zs1, zs0))
        elif m == 0.0:
            elements.append(SeriesElement("col", "sgt", "bus1", zs1, zs1, zs0))
            fault_node = "bus1"
        elif m == 1.0:
            elements.append(SeriesElement("col", "sgt", "bus1", zs1, zs1, zs0))
            fault_node = "sgt"
        else:
            elements.append(SeriesElement("col_a", "bus1", "flt", m * zs1, m * zs1, m * zs0))
            elements.append(
                SeriesElement("col_b", "flt", "sgt", (1 - m) * zs1, (1 - m) * zs1, (1 - m) * zs0)
            )
            fault_node = "flt"
        source_node = "sgt"
    else:
        x_t = _need_positive(resolved, "gfm.x_t_pu")
        x_t0 = _need_positive(resolved, "gfm.x_t0_pu")
        if forward or m == 0.0:
            elements.append(SeriesElement("xfmr", "poc", "bus1", 1j * x_t, 1j * x_t, None))
            elements.append(SeriesElement("xfmr0", "bus1", GROUND, None, None, 1j * x_t0))
            if not forward:
                fault_node = "bus1"
        elif m == 1.0:
            raise ValidationError(
                "fault.placement=reverse with fault.m=1 puts the fault at the converter "
                "terminal, where the transformer zero-sequence model degenerates; "
                "use m < 1"
            )
        else:
            elements.append(
                SeriesElement("xfmr_a", "bus1", "flt", 1j * m * x_t, 1j * m * x_t, 1j * m * x_t0)
            )
            elements.append(
                SeriesElement(
                    "xfmr_b", "flt", "poc", 1j * (1 - m) * x_t, 1j * (1 - m) * x_t, None
                )
            )
            elements.append(
                SeriesElement("xfmr0", "flt", GROUND, None, None, 1j * (1 - m) * x_t0)
            )
            fault_node = "flt"
        source_node = "poc"

    return NetworkModel(
        elements=tuple(elements),
        fault_node=fault_node,
        source_node=source_node,
        z_base_fault_ohm=zb_hv,
        relay_taps=taps,
    )
