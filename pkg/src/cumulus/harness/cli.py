"""`cumulus-sim` entry point.

Config files are key=value text (one per line, `#` comments); keys match
SimConfig fields.  Metrics are written as CSV (`name,value,unit`) and a
human-readable summary goes to standard output.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from ..vmmanager import Policy, ResourceVector
from .world import SimConfig, build_world, run_workload

_INT_KEYS = {"seed", "storage_nodes", "render_nodes", "replication", "block_size",
             "latency", "session_slots", "poll_interval"}
_FLOAT_KEYS = {"bandwidth", "loss"}


def parse_config(text: str) -> SimConfig:
    cfg = SimConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _INT_KEYS:
            setattr(cfg, key, int(value))
        elif key in _FLOAT_KEYS:
            setattr(cfg, key, float(value))
        elif key == "policy":
            cfg.policy = Policy(value.lower())
        elif key.startswith("quota."):
            kind = key.split(".", 1)[1]
            if kind not in ("cpu", "mem", "net", "storage"):
                raise ValueError(f"config line {lineno}: unknown quota kind {kind!r}")
            fields = {k: getattr(cfg.quota, k) for k in ("cpu", "mem", "net", "storage")}
            fields[kind] = float(value)
            cfg.quota = ResourceVector(**fields)
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return cfg


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(prog="cumulus-sim",
                                     description="Run a deterministic cluster simulation")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--workload", required=True, help="workload script file")
    parser.add_argument("--seed", type=int, help="override config seed")
    parser.add_argument("--metrics-out", help="write metrics CSV here")
    args = parser.parse_args(argv)

    if args.config:
        with open(args.config) as f:
            config = parse_config(f.read())
    else:
        config = SimConfig()
    if args.seed is not None:
        config.seed = args.seed
    with open(args.workload) as f:
        script = f.read()

    world = build_world(config)
    report = run_workload(world, script)
    print(report.summary())
    if args.metrics_out:
        with open(args.metrics_out, "w") as f:
            f.write(report.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())
