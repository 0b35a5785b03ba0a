from __future__ import annotations

import pytest

from faultlab.clc import ClcKind
from faultlab.network import FaultType, Placement
from faultlab.presets import PRESETS, preset_scenario_overrides
from faultlab.scenario import (
    DEFAULTS,
    ParseError,
    SourceKind,
    ValidationError,
    build_scenario,
    canonical_config_lines,
    parse_config_text,
)


def test_parse_comments_blanks_and_coercion() -> None:
    text = """
    # a header comment
    source.kind = gfm   # trailing comment
    fault.m = 0.25
    circuit.voltages_are_peak = false
    gfm.filter_in_network = TRUE

    fault.kind = ag
    """
    parsed = parse_config_text(text)
    assert parsed == {
        "source.kind": "gfm",
        "fault.m": 0.25,
        "circuit.voltages_are_peak": False,
        "gfm.filter_in_network": True,
        "fault.kind": "ag",
    }
    assert isinstance(parsed["fault.m"], float)


@pytest.mark.parametrize(
    "bad",
    [
        "source.kind gfm",  # no separator
        "source.kind =",  # empty value
        "= gfm",  # empty key
        "a = 1\na = 2",  # duplicate
    ],
)
def test_parse_rejects_malformed_lines(bad: str) -> None:
    with pytest.raises(ParseError):
        parse_config_text(bad)


def test_parse_error_reports_the_line_number() -> None:
    with pytest.raises(ParseError, match="line 3"):
        parse_config_text("a = 1\n# fine\nbroken line\n")


def test_empty_document_gives_the_default_study_case() -> None:
    s = build_scenario({})
    assert s.kind is SourceKind.SG
    assert s.sg is not None and s.gfm is None
    assert s.fault.fault_type is FaultType.BCG
    assert s.fault.m == pytest.approx(0.5)
    assert s.fault.r_g_ohm == 0.0
    assert s.fault.placement is Placement.FORWARD
    assert s.solver.tol == pytest.approx(1e-9)
    assert s.solver.max_iter == 100
    assert s.solver.damping is None


def test_unknown_keys_are_rejected_by_name() -> None:
    with pytest.raises(ValidationError, match="unknown config keys: fault.depth, zz.top"):
        build_scenario({"zz.top": 1.0, "fault.depth": 2.0})


def test_out_of_range_fault_values_name_the_key() -> None:
    with pytest.raises(ValidationError, match=r"fault\.m"):
        build_scenario({"fault.m": 1.5})
    with pytest.raises(ValidationError, match=r"fault\.r_g_ohm"):
        build_scenario({"fault.r_g_ohm": -3.0})
    with pytest.raises(ValidationError, match=r"fault\.kind"):
        build_scenario({"fault.kind": "abcd"})


def test_resolved_echo_covers_every_key() -> None:
    s = build_scenario({"fault.kind": "ag"})
    assert set(s.resolved) == set(DEFAULTS)
    assert s.resolved["fault.kind"] == "ag"
    assert s.overrides == {"fault.kind": "ag"}


def test_provenance_markers() -> None:
    s = build_scenario({"fault.kind": "ag"}, origin="preset:demo")
    assert s.provenance["fault.kind"] == "preset:demo"
    assert s.provenance["circuit.v_hv_kv"] == "study-case"
    assert s.provenance["fault.m"] == "default"
    default_origin = build_scenario({"fault.kind": "ag"})
    assert default_origin.provenance["fault.kind"] == "user"


def test_config_hash_tracks_the_resolved_values() -> None:
    a = build_scenario({})
    b = build_scenario({})
    c = build_scenario({"fault.m": 0.25})
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash
    assert len(a.config_hash) == 12
    assert int(a.config_hash, 16) >= 0  # hex digest prefix


def test_canonical_lines_are_sorted_and_typed() -> None:
    lines = canonical_config_lines(build_scenario({}).resolved)
    keys = [line.split("=", 1)[0] for line in lines]
    assert keys == sorted(keys)
    as_dict = dict(line.split("=", 1) for line in lines)
    assert as_dict["circuit.voltages_are_peak"] == "true"
    assert as_dict["source.kind"] == "sg"


def test_filter_placement_resolution() -> None:
    auto_circ = build_scenario({"source.kind": "gfm", "clc.kind": "circular"})
    assert auto_circ.gfm.filter_in_network is False
    auto_avi = build_scenario({"source.kind": "gfm", "clc.kind": "adaptive_virtual_impedance"})
    assert auto_avi.gfm.filter_in_network is True
    explicit_off = build_scenario(
        {
            "source.kind": "gfm",
            "clc.kind": "adaptive_virtual_impedance",
            "gfm.filter_in_network": False,
        }
    )
    assert explicit_off.gfm.filter_in_network is False
    with pytest.raises(ValidationError):
        build_scenario(
            {"source.kind": "gfm", "clc.kind": "circular", "gfm.filter_in_network": True}
        )
    with pytest.raises(ValidationError, match="auto"):
        build_scenario({"source.kind": "gfm", "gfm.filter_in_network": "sometimes"})


def test_solver_damping_resolution() -> None:
    assert build_scenario({"solver.damping": "auto"}).solver.damping is None
    assert build_scenario({"solver.damping": 0.3}).solver.damping == pytest.approx(0.3)
    with pytest.raises(ValidationError):
        build_scenario({"solver.damping": 1.5})
    with pytest.raises(ValidationError):
        build_scenario({"solver.damping": "fast"})
    with pytest.raises(ValidationError):
        build_scenario({"solver.max_iter": 2.5})


def test_peak_vs_rms_voltage_convention() -> None:
    # peak-valued 220 kV corresponds to 220/sqrt(2) kV rms: Z_base halves
    peak = build_scenario({})
    assert peak.net.z_base_fault_ohm == pytest.approx(242.0, abs=1e-9)
    rms = build_scenario({"circuit.voltages_are_peak": False})
    assert rms.net.z_base_fault_ohm == pytest.approx(484.0, abs=1e-9)


def test_converter_reverse_bus_fault_is_rejected() -> None:
    with pytest.raises(ValidationError):
        build_scenario({"source.kind": "gfm", "fault.placement": "reverse", "fault.m": 1.0})
    # the generator topology has no such degeneracy
    build_scenario({"source.kind": "sg", "fault.placement": "reverse", "fault.m": 1.0})


def test_clc_kind_tokens_round_trip() -> None:
    for kind in ClcKind:
        s = build_scenario({"source.kind": "gfm", "clc.kind": kind.value})
        assert s.gfm.clc.kind is kind


def test_presets_build_and_unknown_preset_lists_names() -> None:
    for name in PRESETS:
        scenario = build_scenario(
            preset_scenario_overrides(name), scenario_id=name, origin=f"preset:{name}"
        )
        assert scenario.scenario_id == name
    with pytest.raises(KeyError, match="fig13a"):
        preset_scenario_overrides("not-a-preset")


def test_preset_overrides_are_copies() -> None:
    a = preset_scenario_overrides("fig13a")
    a["fault.m"] = 0.99
    assert preset_scenario_overrides("fig13a").get("fault.m") != 0.99
