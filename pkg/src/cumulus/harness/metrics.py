"""Run metrics: utilization traces, byte counters, latency distribution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple


class UtilizationTrace:
    """Step function of cluster utilization over virtual time."""

    def __init__(self) -> None:
        self.points: List[Tuple[int, float]] = [(0, 0.0)]

    def record(self, tick: int, value: float) -> None:
        last_t, last_v = self.points[-1]
        if tick == last_t:
            self.points[-1] = (tick, value)
        elif value != last_v:
            self.points.append((tick, value))

    def time_average(self, start: int, end: int) -> float:
        if end <= start:
            return 0.0
        total = 0.0
        pts = self.points
        for i, (t, v) in enumerate(pts):
            seg_start = max(t, start)
            seg_end = pts[i + 1][0] if i + 1 < len(pts) else end
            seg_end = min(seg_end, end)
            if seg_end > seg_start:
                total += v * (seg_end - seg_start)
        return total / (end - start)

    def maximum(self, start: int, end: int) -> float:
        vals = [v for t, v in self.points if start <= t <= end]
        # Include the value in force when the window opens.
        before = [v for t, v in self.points if t <= start]
        if before:
            vals.append(before[-1])
        return max(vals, default=0.0)


def percentile(samples: List[int], q: float) -> float:
    if not samples:
        return 0.0
    ordered = sorted(samples)
    idx = min(len(ordered) - 1, int(q * len(ordered)))
    return float(ordered[idx])


@dataclass
class MetricsReport:
    mean_node_utilization: float = 0.0
    max_node_utilization: float = 0.0
    sessions_opened: int = 0
    sessions_rejected: int = 0
    delta_update_bytes: int = 0
    full_frame_baseline_bytes: int = 0
    per_session_downstream_bytes: float = 0.0
    file_bytes_written: int = 0
    file_bytes_read: int = 0
    read_throughput_bytes_per_tick: float = 0.0
    failover_recovery_ticks: int = -1  # -1: no failover occurred
    event_latency_p50: float = 0.0
    event_latency_p95: float = 0.0
    event_latency_max: float = 0.0
    bytes_offered_to_links: int = 0
    end_tick: int = 0
    latency_samples: List[int] = field(default_factory=list, repr=False)

    _ROWS = (
        ("mean_node_utilization", "ratio"),
        ("max_node_utilization", "ratio"),
        ("sessions_opened", "count"),
        ("sessions_rejected", "count"),
        ("delta_update_bytes", "bytes"),
        ("full_frame_baseline_bytes", "bytes"),
        ("per_session_downstream_bytes", "bytes"),
        ("file_bytes_written", "bytes"),
        ("file_bytes_read", "bytes"),
        ("read_throughput_bytes_per_tick", "bytes/tick"),
        ("failover_recovery_ticks", "ticks"),
        ("event_latency_p50", "ticks"),
        ("event_latency_p95", "ticks"),
        ("event_latency_max", "ticks"),
        ("bytes_offered_to_links", "bytes"),
        ("end_tick", "ticks"),
    )

    @staticmethod
    def _fmt(value) -> str:
        if isinstance(value, int):
            return str(value)
        return f"{value:.6f}"

    def to_csv(self) -> str:
        lines = ["name,value,unit"]
        for name, unit in self._ROWS:
            lines.append(f"{name},{self._fmt(getattr(self, name))},{unit}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lines = ["simulation metrics:"]
        for name, unit in self._ROWS:
            lines.append(f"  {name:<34} {self._fmt(getattr(self, name)):>16} {unit}")
        return "\n".join(lines)

    def finalize(self) -> None:
        self.event_latency_p50 = percentile(self.latency_samples, 0.50)
        self.event_latency_p95 = percentile(self.latency_samples, 0.95)
        self.event_latency_max = float(max(self.latency_samples, default=0))
        if self.sessions_opened:
            self.per_session_downstream_bytes = (
                self.delta_update_bytes / self.sessions_opened)
