"""Virtualization manager: telemetry polling, placement, habit profiles.

Placement scores a node by its min-ratio headroom: the minimum over
resource kinds of free/capacity, the bottleneck-resource view of spare
capacity.  Consolidate packs (best fit, minimal headroom after
placement); Spread levels (least loaded, maximal headroom before).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

RESOURCE_KINDS = ("cpu", "mem", "net", "storage")
SLOTS_PER_DAY = 24

# Telemetry gauge keys, OID-style dotted strings.  Values travel as
# decimal ASCII.
GAUGE_KEYS = tuple(
    f"node.{kind}.{which}" for kind in RESOURCE_KINDS for which in ("capacity", "allocated")
) + ("node.sessions",)


class NoCapacity(RuntimeError):
    pass


class NodeUnreachable(RuntimeError):
    pass


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class ResourceVector:
    cpu: float = 0.0  # milli-cores
    mem: float = 0.0  # MiB
    net: float = 0.0  # Mbit/s
    storage: float = 0.0  # GiB

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.as_tuple()):
            raise ValueError(f"negative resource component: {self}")

    def as_tuple(self) -> tuple:
        return (self.cpu, self.mem, self.net, self.storage)

    def add(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def sub(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(*(max(0.0, a - b) for a, b in zip(self.as_tuple(), other.as_tuple())))

    def fits_into(self, other: "ResourceVector") -> bool:
        return all(a <= b for a, b in zip(self.as_tuple(), other.as_tuple()))

    def scale(self, k: float) -> "ResourceVector":
        return ResourceVector(*(a * k for a in self.as_tuple()))

    @classmethod
    def zero(cls) -> "ResourceVector":
        return cls()


@dataclass
class NodeTelemetry:
    node_id: str
    capacity: ResourceVector
    allocated: ResourceVector
    session_count: int
    poll_time: int

    def free(self) -> ResourceVector:
        return self.capacity.sub(self.allocated)


class Policy(enum.Enum):
    CONSOLIDATE = "consolidate"
    SPREAD = "spread"


@dataclass(frozen=True)
class PlacementDecision:
    session_id: str
    chosen_node: str
    score: float
    policy: Policy


@dataclass(frozen=True)
class PrewarmPlan:
    slot: int
    actions: tuple  # of (node_id, sessions_to_warm)
    shortfall: int


def min_ratio(numer: ResourceVector, denom: ResourceVector) -> float:
    """Minimum componentwise ratio; kinds with zero capacity are skipped."""
    ratios = [n / d for n, d in zip(numer.as_tuple(), denom.as_tuple()) if d > 0]
    return min(ratios) if ratios else 0.0


def place_session(session_id: str, req: ResourceVector,
                  cluster: Sequence[NodeTelemetry], policy: Policy) -> PlacementDecision:
    """Choose a node for `req`; ties break to the lowest node id.

    Raises NoCapacity when no node can fit the request.
    """
    if not cluster:
        raise NoCapacity("empty cluster")
    best: Optional[tuple] = None
    for node in sorted(cluster, key=lambda n: n.node_id):
        free = node.free()
        if not req.fits_into(free):
            continue
        if policy is Policy.CONSOLIDATE:
            score = min_ratio(free.sub(req), node.capacity)
            key = score  # minimize headroom after placement
        else:
            score = min_ratio(free, node.capacity)
            key = -score  # maximize headroom before placement
        if best is None or key < best[0]:
            best = (key, node.node_id, score)
    if best is None:
        raise NoCapacity(f"no node fits {req}")
    return PlacementDecision(session_id=session_id, chosen_node=best[1],
                             score=best[2], policy=policy)


@dataclass
class HabitProfile:
    """Per-user EWMA demand matrix: 24 time slots x 4 resource kinds."""

    user_id: str
    alpha: float = 0.3
    matrix: List[List[float]] = field(
        default_factory=lambda: [[0.0] * len(RESOURCE_KINDS) for _ in range(SLOTS_PER_DAY)])
    observation_counts: List[List[int]] = field(
        default_factory=lambda: [[0] * len(RESOURCE_KINDS) for _ in range(SLOTS_PER_DAY)])

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1]: {self.alpha}")


def update_habit(p: HabitProfile, slot: int, kind: int, observed: float) -> HabitProfile:
    """First observation seeds the cell; later ones blend with weight alpha."""
    if not 0 <= slot < SLOTS_PER_DAY:
        raise ValueError(f"slot out of range: {slot}")
    if not 0 <= kind < len(RESOURCE_KINDS):
        raise ValueError(f"kind out of range: {kind}")
    if observed < 0:
        raise ValueError(f"negative observation: {observed}")
    matrix = [row[:] for row in p.matrix]
    counts = [row[:] for row in p.observation_counts]
    if counts[slot][kind] == 0:
        matrix[slot][kind] = observed
    else:
        matrix[slot][kind] = p.alpha * observed + (1 - p.alpha) * matrix[slot][kind]
    counts[slot][kind] += 1
    return replace(p, matrix=matrix, observation_counts=counts)


def predict_demand(p: HabitProfile, slot: int) -> ResourceVector:
    if not 0 <= slot < SLOTS_PER_DAY:
        raise ValueError(f"slot out of range: {slot}")
    return ResourceVector(*p.matrix[slot])


def sessions_needed(aggregate: ResourceVector, quota: ResourceVector) -> int:
    """Warm sessions needed to cover an aggregate demand at one quota each."""
    need = 0
    for agg, per in zip(aggregate.as_tuple(), quota.as_tuple()):
        if agg > 0:
            if per <= 0:
                raise ValueError("aggregate demand on a zero-quota resource")
            need = max(need, math.ceil(agg / per))
    return need


def prewarm_plan(predictions: Sequence[ResourceVector], cluster: Sequence[NodeTelemetry],
                 warm_free: int, quota: ResourceVector, slot: int) -> PrewarmPlan:
    """Plan warm sessions for `slot` to cover predicted aggregate demand.

    Greedily assigns via Consolidate placement; sessions that fit nowhere
    are reported as shortfall.
    """
    aggregate = ResourceVector.zero()
    for p in predictions:
        aggregate = aggregate.add(p)
    required = max(0, sessions_needed(aggregate, quota) - warm_free)
    sim = {n.node_id: NodeTelemetry(n.node_id, n.capacity, n.allocated,
                                    n.session_count, n.poll_time)
           for n in cluster}
    counts: Dict[str, int] = {}
    placed = 0
    for i in range(required):
        try:
            d = place_session(f"warm-{i}", quota, list(sim.values()), Policy.CONSOLIDATE)
        except NoCapacity:
            break
        node = sim[d.chosen_node]
        node.allocated = node.allocated.add(quota)
        node.session_count += 1
        counts[d.chosen_node] = counts.get(d.chosen_node, 0) + 1
        placed += 1
    actions = tuple(sorted(counts.items()))
    return PrewarmPlan(slot=slot, actions=actions, shortfall=required - placed)


class VmManager:
    """Single logical actor owning telemetry, sessions, and habit profiles.

    `gauge_source` answers OID-keyed gauge GETs for a node id; it may be
    backed by the simulated transport or by a direct in-process cluster.
    Raises NodeUnreachable on timeout, which marks the node suspect.
    """

    def __init__(self, gauge_source: Callable[[str], Dict[str, str]],
                 poll_interval: int = 1000, failure_threshold: int = 3):
        self._gauges = gauge_source
        self.poll_interval = poll_interval
        self.failure_threshold = failure_threshold
        self.telemetry: Dict[str, NodeTelemetry] = {}
        self.last_success: Dict[str, int] = {}
        self.suspect: set = set()
        self.registered: List[str] = []
        self.sessions: Dict[str, tuple] = {}  # session_id -> (node_id, req)
        self.habits: Dict[str, HabitProfile] = {}

    def register_node(self, node_id: str) -> None:
        if node_id not in self.registered:
            self.registered.append(node_id)

    def poll_node(self, node_id: str, now: int) -> NodeTelemetry:
        if node_id not in self.registered:
            raise UnknownNode(node_id)
        try:
            gauges = self._gauges(node_id)
        except NodeUnreachable:
            self.suspect.add(node_id)
            raise
        def vec(which: str) -> ResourceVector:
            return ResourceVector(*(float(gauges[f"node.{k}.{which}"])
                                    for k in RESOURCE_KINDS))
        prev = self.telemetry.get(node_id)
        poll_time = now if prev is None or now > prev.poll_time else prev.poll_time + 1
        t = NodeTelemetry(node_id=node_id, capacity=vec("capacity"),
                          allocated=vec("allocated"),
                          session_count=int(gauges["node.sessions"]),
                          poll_time=poll_time)
        self.telemetry[node_id] = t
        self.last_success[node_id] = poll_time
        self.suspect.discard(node_id)
        return t

    def poll_all(self, now: int) -> None:
        for node_id in self.registered:
            try:
                self.poll_node(node_id, now)
            except NodeUnreachable:
                pass

    def cluster_snapshot(self) -> List[NodeTelemetry]:
        return [self.telemetry[n] for n in self.registered
                if n in self.telemetry and n not in self.suspect]

    def place(self, session_id: str, req: ResourceVector, policy: Policy) -> PlacementDecision:
        decision = place_session(session_id, req, self.cluster_snapshot(), policy)
        node = self.telemetry[decision.chosen_node]
        node.allocated = node.allocated.add(req)
        node.session_count += 1
        self.sessions[session_id] = (decision.chosen_node, req)
        return decision

    def release(self, session_id: str) -> None:
        node_id, req = self.sessions.pop(session_id)
        if node_id in self.telemetry:
            node = self.telemetry[node_id]
            node.allocated = node.allocated.sub(req)
            node.session_count = max(0, node.session_count - 1)

    def detect_failures(self, now: int) -> List[str]:
        """Nodes silent for more than `failure_threshold` poll intervals.

        Their sessions re-enter the placement queue (returned for the
        caller to re-place) and their telemetry is dropped.
        """
        failed = []
        for node_id in self.registered:
            last = self.last_success.get(node_id)
            if last is not None and now - last > self.failure_threshold * self.poll_interval:
                failed.append(node_id)
        for node_id in failed:
            self.suspect.add(node_id)
            self.telemetry.pop(node_id, None)
        return failed

    def orphaned_sessions(self, failed_nodes: Sequence[str]) -> List[tuple]:
        orphans = [(sid, req) for sid, (nid, req) in self.sessions.items()
                   if nid in failed_nodes]
        for sid, _ in orphans:
            del self.sessions[sid]
        return orphans

    def observe_habit(self, user_id: str, slot: int, demand: ResourceVector,
                      alpha: float = 0.3) -> None:
        profile = self.habits.get(user_id) or HabitProfile(user_id=user_id, alpha=alpha)
        for kind, value in enumerate(demand.as_tuple()):
            profile = update_habit(profile, slot, kind, value)
        self.habits[user_id] = profile

    def predicted_aggregate(self, slot: int) -> List[ResourceVector]:
        return [predict_demand(p, slot) for p in self.habits.values()]
