"""Deterministic simulation harness: virtual time, links, workloads, metrics."""

from .metrics import MetricsReport
from .script import ScriptError, parse_workload
from .sim import EventQueue, Network
from .world import BadConfig, SimConfig, SimWorld, build_world, run_workload, utilization

__all__ = [
    "EventQueue",
    "Network",
    "MetricsReport",
    "ScriptError",
    "parse_workload",
    "BadConfig",
    "SimConfig",
    "SimWorld",
    "build_world",
    "run_workload",
    "utilization",
]
