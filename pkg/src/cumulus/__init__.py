"""Desk-scale intelligent-community stack.

Subpackages:
    tileproto   -- thin-client wire codecs and the tile-diff engine
    renderhost  -- deterministic server-side canvas application
    vmmanager   -- telemetry polling, placement, habit profiles, prewarming
    dfs         -- block-replicated content-addressed file store
    gateway     -- web-server front: packaging, session routing, file API
    harness     -- deterministic simulated network, workloads, metrics, CLI
"""

__version__ = "0.1.0"
