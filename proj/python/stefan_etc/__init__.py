"""Event-triggered safe boundary control of the one-phase Stefan problem.

Thin Python layer over the C++ core: configure a scenario, run it in memory or to a run
directory, sweep parameters and audit stored runs.
"""

from ._core import (
    ConfigError,
    ControllerGains,
    IoError,
    PlantParams,
    ScenarioConfig,
    SolverError,
    __version__,
    audit,
    default_epsilon,
    forward_transform,
    inverse_transform,
    min_dwell_time,
    read_trace,
    run_scenario,
    simulate,
    sweep,
)

__all__ = [
    "ConfigError",
    "ControllerGains",
    "IoError",
    "PlantParams",
    "ScenarioConfig",
    "SolverError",
    "__version__",
    "audit",
    "default_epsilon",
    "forward_transform",
    "inverse_transform",
    "min_dwell_time",
    "read_trace",
    "run_scenario",
    "simulate",
    "sweep",
]
