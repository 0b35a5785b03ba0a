from __future__ import annotations

import pytest

from faultlab.harness import run_scenario
from faultlab.presets import PRESETS, preset_scenario_overrides
from faultlab.scenario import Scenario, build_scenario


def build_preset(name: str) -> Scenario:
    return build_scenario(
        preset_scenario_overrides(name), scenario_id=name, origin=f"preset:{name}"
    )


@pytest.fixture(scope="session")
def preset_reports():
    """Every scenario preset solved once, with the phase-domain cross-check on.

    Shared by the harness and acceptance tests; the converter fixed points are
    the slow part of the suite and never need solving twice.
    """
    out = {}
    for name in sorted(PRESETS):
        scenario = build_preset(name)
        out[name] = (scenario, run_scenario(scenario, oracle_check=True))
    return out


@pytest.fixture(scope="session")
def table1_result():
    """The reliability matrix solved once (12 converter fixed points)."""
    from faultlab.harness import table1_matrix

    return table1_matrix()
