"""Phasor-domain short-circuit laboratory for current-limited grid-forming
sources and the protective relay elements that supervise them.

Layers, bottom up: phasors (symmetrical components and angle arithmetic),
per_unit (bases), network (sequence elements and the linear fault solve),
abc_oracle (independent phase-coordinate re-solve), clc (current-limiting
laws), sources (generator and converter models, the fault fixed point),
relay (directional and phase-selection elements), scenario/presets
(configuration), harness/report/cli (execution and output).
"""

from .clc import ClcConfig, ClcKind
from .network import FaultSpec, FaultType, NetworkModel, Placement
from .phasors import PhaseTriple, SequenceTriple, fortescue, inverse_fortescue
from .relay import Direction, DirectionalConfig, PhaseSelectionConfig
from .scenario import ConfigError, ParseError, Scenario, ValidationError, build_scenario
from .sources import GfmModel, NoConvergenceError, OscillationDetectedError, SgModel

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ClcConfig",
    "ClcKind",
    "FaultSpec",
    "FaultType",
    "NetworkModel",
    "Placement",
    "PhaseTriple",
    "SequenceTriple",
    "fortescue",
    "inverse_fortescue",
    "Direction",
    "DirectionalConfig",
    "PhaseSelectionConfig",
    "ConfigError",
    "ParseError",
    "Scenario",
    "ValidationError",
    "build_scenario",
    "GfmModel",
    "NoConvergenceError",
    "OscillationDetectedError",
    "SgModel",
]
