"""Simulated cluster world: bootstrapping, workload execution, metrics."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..dfs import DfsCluster, StorageNode, Unavailable
from ..gateway import Gateway
from ..renderhost import SessionHandle
from ..tileproto import (
    EventKind,
    InputEvent,
    encode_input_event,
    encode_update,
    full_frame_update,
)
from ..vmmanager import (
    NoCapacity,
    NodeUnreachable,
    Policy,
    ResourceVector,
    VmManager,
    min_ratio,
)
from .metrics import MetricsReport, UtilizationTrace
from .script import Directive, ScriptError, parse_workload
from .sim import EventQueue, Network, transfer_ticks


class BadConfig(ValueError):
    pass


@dataclass
class SimConfig:
    seed: int = 42
    storage_nodes: int = 5
    render_nodes: int = 4
    replication: int = 3
    block_size: int = 4 * 1024 * 1024
    latency: int = 5  # ticks per link hop
    bandwidth: float = 100.0  # Mbit/s per link
    loss: float = 0.0
    policy: Policy = Policy.CONSOLIDATE
    session_slots: int = 8
    quota: ResourceVector = field(
        default_factory=lambda: ResourceVector(cpu=1000, mem=1024, net=10, storage=1))
    poll_interval: int = 1000

    def validate(self) -> None:
        if self.storage_nodes < 1 or self.render_nodes < 1:
            raise BadConfig("node counts must be >= 1")
        if not 0 <= self.loss < 1:
            raise BadConfig(f"loss must be in [0, 1): {self.loss}")
        if self.replication < 1 or self.block_size < 1:
            raise BadConfig("replication and block_size must be >= 1")


_EVENT_KINDS = {"KEYDOWN": EventKind.KEY_DOWN, "KEYUP": EventKind.KEY_UP,
                "MOUSEMOVE": EventKind.MOUSE_MOVE, "MOUSEDOWN": EventKind.MOUSE_DOWN,
                "MOUSEUP": EventKind.MOUSE_UP}


class SimWorld:
    GATEWAY = "gw"

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.queue = EventQueue()
        self.rng = random.Random(config.seed)
        self.network = Network(self.queue, config.latency, config.bandwidth,
                               config.loss, random.Random(config.seed ^ 0x5EED))
        self.store = DfsCluster(block_size=config.block_size,
                                replication=config.replication)
        for i in range(config.storage_nodes):
            self.store.add_node(StorageNode(f"s{i}"))
        self.render_down: set = set()
        self.vm = VmManager(self._gauges, poll_interval=config.poll_interval)
        capacity = config.quota.scale(config.session_slots)
        self._render_capacity = capacity
        for i in range(config.render_nodes):
            self.vm.register_node(f"r{i}")
        self.vm.poll_all(now=0)
        self.gateway = Gateway(self.vm, self.store, clock=lambda: self.queue.now,
                               quota=config.quota, policy=config.policy)
        self.util_trace = UtilizationTrace()
        self.metrics = MetricsReport()
        self.sessions_by_name: Dict[str, SessionHandle] = {}
        self._event_seq: Dict[str, int] = {}
        self._storage_free_at: Dict[str, int] = {}
        self._read_ticks = 0
        self._kill_tick: Optional[int] = None
        self._poll_scheduled = False

    # -- telemetry ----------------------------------------------------

    def _gauges(self, node_id: str) -> Dict[str, str]:
        if node_id in self.render_down:
            raise NodeUnreachable(node_id)
        prev = self.vm.telemetry.get(node_id)
        alloc = prev.allocated if prev else ResourceVector()
        sessions = prev.session_count if prev else 0
        out = {}
        for k in ("cpu", "mem", "net", "storage"):
            out[f"node.{k}.capacity"] = str(getattr(self._render_capacity, k))
            out[f"node.{k}.allocated"] = str(getattr(alloc, k))
        out["node.sessions"] = str(sessions)
        return out

    def cluster_utilization(self) -> float:
        """Mean over render nodes of min-ratio allocated/capacity."""
        vals = []
        for nid in self.vm.registered:
            t = self.vm.telemetry.get(nid)
            if t is None:
                vals.append(0.0)
            else:
                vals.append(min_ratio(t.allocated, t.capacity))
        return sum(vals) / len(vals) if vals else 0.0

    def _record_util(self) -> None:
        self.util_trace.record(self.queue.now, self.cluster_utilization())

    def world_digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr(self.config).encode())
        for nid in self.vm.registered:
            t = self.vm.telemetry[nid]
            h.update(f"{nid}:{t.capacity.as_tuple()}:{t.allocated.as_tuple()}".encode())
        for nid in sorted(self.store.nodes):
            h.update(nid.encode())
        return h.hexdigest()

    # -- maintenance loop ---------------------------------------------

    def _maintenance(self) -> None:
        now = self.queue.now
        self.vm.poll_all(now)
        failed = self.vm.detect_failures(now)
        if failed:
            orphans = self.vm.orphaned_sessions(failed)
            for sid, req in orphans:
                try:
                    d = self.vm.place(sid, req, self.config.policy)
                    handle = self.gateway.sessions.get(sid)
                    if handle is not None:
                        handle.host_node = d.chosen_node
                except NoCapacity:
                    self.metrics.sessions_rejected += 1
                    self.gateway.sessions.pop(sid, None)
            self._record_util()
        if not self.store.verify_replication():
            self.store.run_repair()
            if self.store.verify_replication() and self._kill_tick is not None:
                self.metrics.failover_recovery_ticks = now - self._kill_tick
                self._kill_tick = None

    def _schedule_maintenance(self, horizon: int) -> None:
        for t in range(self.config.poll_interval, horizon + 1, self.config.poll_interval):
            self.queue.schedule_at(t, self._maintenance)

    # -- directive handlers -------------------------------------------

    def open_session(self, name: str, user_id: str, policy: Optional[Policy] = None) -> None:
        try:
            handle = self.gateway.open_session(user_id, policy=policy)
        except NoCapacity:
            self.metrics.sessions_rejected += 1
            return
        self.sessions_by_name[name] = handle
        self._event_seq[name] = 0
        self.metrics.sessions_opened += 1
        self._record_util()

    def close_session(self, name: str) -> None:
        handle = self.sessions_by_name.pop(name, None)
        if handle is None:
            return
        self.gateway.close_session(handle.session_id)
        self._event_seq.pop(name, None)
        self._record_util()

    def inject_event(self, name: str, kind: str, args: Tuple[str, ...]) -> None:
        handle = self.sessions_by_name.get(name)
        if handle is None:
            return  # session was rejected or closed; event is dropped
        seq = self._event_seq[name]
        self._event_seq[name] = seq + 1
        ek = _EVENT_KINDS[kind]
        ints = [int(a) for a in args]
        if ek in (EventKind.KEY_DOWN, EventKind.KEY_UP):
            event = InputEvent(kind=ek, seq=seq, keycode=ints[0])
        elif ek is EventKind.MOUSE_MOVE:
            event = InputEvent(kind=ek, seq=seq, x=ints[0], y=ints[1])
        else:
            button = ints[2] if len(ints) > 2 else 0
            event = InputEvent(kind=ek, seq=seq, x=ints[0], y=ints[1], button=button)
        sent = self.queue.now
        wire_event = encode_input_event(event)

        def on_gw(_tick: int) -> None:
            self.network.send(self.GATEWAY, handle.host_node, len(wire_event), on_node)

        def on_node(_tick: int) -> None:
            update_wire = self.gateway.route_events(handle.session_id, [event])
            baseline = encode_update(full_frame_update(handle.last_frame, handle.tile,
                                                       frame_seq=handle.frame_seq))
            self.metrics.delta_update_bytes += len(update_wire)
            self.metrics.full_frame_baseline_bytes += len(baseline)
            self.network.send(handle.host_node, self.GATEWAY, len(update_wire), on_back)

        def on_back(_tick: int) -> None:
            self.network.send(self.GATEWAY, name, 0, on_client)

        def on_client(tick: int) -> None:
            self.metrics.latency_samples.append(tick - sent)

        self.network.send(name, self.GATEWAY, len(wire_event), on_gw)

    def file_data(self, path: str, size: int) -> bytes:
        return random.Random(f"{self.config.seed}:{path}".encode()).randbytes(size)

    def put_file(self, path: str, size: int) -> None:
        data = self.file_data(path, size)
        self.store.put_file(path, data)
        self.metrics.file_bytes_written += size
        # Charge the write fan-out: every replica copy crosses a link.
        ticks = transfer_ticks(size * self.store.replication, self.network.bandwidth)
        self.network.bytes_offered += size * self.store.replication
        self.queue.schedule(ticks + self.config.latency, lambda: None)

    def timed_read(self, path: str, offset: int = 0, length: Optional[int] = None,
                   restrict_nodes: Optional[List[str]] = None) -> Tuple[bytes, int]:
        """Fetch a range and compute its parallel completion time.

        Block fetches fan out across replicas (lowest outstanding count,
        ties to node id); each node's egress is serialized at the link
        bandwidth, so striping across k nodes divides the elapsed time.
        """
        manifest = self.store.manifests.get(path)
        data = self.store.get_file(path, offset, length)
        if manifest is None or not manifest.blocks:
            return data, 0
        if length is None:
            length = manifest.total_length - offset
        bs = manifest.block_size
        first = offset // bs
        last = (offset + max(0, length - 1)) // bs
        assigned: Dict[str, int] = {}
        node_free: Dict[str, int] = {}
        start_tick = self.queue.now
        completion = start_tick
        for idx in range(first, last + 1):
            rec = manifest.blocks[idx]
            holders = sorted(nid for nid in self.store.block_replicas.get(rec.digest, set())
                             if self.store.nodes[nid].alive)
            if restrict_nodes is not None:
                holders = [nid for nid in holders if nid in restrict_nodes]
            if not holders:
                raise Unavailable(f"no usable replica for block {idx}")
            nid = min(holders, key=lambda n: (assigned.get(n, 0), n))
            assigned[nid] = assigned.get(nid, 0) + 1
            start = max(start_tick, node_free.get(nid, 0))
            done = start + transfer_ticks(rec.size, self.network.bandwidth)
            node_free[nid] = done
            self.network.bytes_offered += rec.size
            completion = max(completion, done + self.config.latency)
        elapsed = completion - start_tick
        self.queue.schedule(elapsed, lambda: None)
        return data, elapsed

    def get_file(self, path: str, offset: int = 0, length: Optional[int] = None) -> bytes:
        data, elapsed = self.timed_read(path, offset, length)
        self.metrics.file_bytes_read += len(data)
        self._read_ticks += elapsed
        return data

    def kill_node(self, node_id: str) -> None:
        if node_id in self.store.nodes:
            self.store.kill_node(node_id)
            self.network.set_down(node_id, True)
            if self._kill_tick is None:
                self._kill_tick = self.queue.now
        elif node_id in self.vm.registered:
            self.render_down.add(node_id)
            self.network.set_down(node_id, True)
        else:
            raise KeyError(f"unknown node {node_id}")

    def revive_node(self, node_id: str) -> None:
        if node_id in self.store.nodes:
            self.store.revive_node(node_id)
            self.network.set_down(node_id, False)
        elif node_id in self.vm.registered:
            self.render_down.discard(node_id)
            self.network.set_down(node_id, False)
        else:
            raise KeyError(f"unknown node {node_id}")


def build_world(config: SimConfig) -> SimWorld:
    return SimWorld(config)


def utilization(world: SimWorld, window: Tuple[int, int]) -> float:
    return world.util_trace.time_average(window[0], window[1])


def _apply(world: SimWorld, d: Directive) -> None:
    try:
        if d.op == "OPEN":
            policy = Policy(d.args[2].lower()) if len(d.args) == 3 else None
            world.open_session(d.args[0], d.args[1], policy)
        elif d.op == "CLOSE":
            world.close_session(d.args[0])
        elif d.op == "EVENT":
            world.inject_event(d.args[0], d.args[1].upper(), d.args[2:])
        elif d.op == "PUT":
            world.put_file(d.args[0], int(d.args[1]))
        elif d.op == "GET":
            offset = int(d.args[1]) if len(d.args) > 1 else 0
            length = int(d.args[2]) if len(d.args) > 2 else None
            world.get_file(d.args[0], offset, length)
        elif d.op == "KILL":
            world.kill_node(d.args[0])
        elif d.op == "REVIVE":
            world.revive_node(d.args[0])
    except ScriptError:
        raise
    except Exception as exc:
        raise ScriptError(d.lineno, f"{d.op}: {exc}") from exc


def run_workload(world: SimWorld, script: str) -> MetricsReport:
    directives = parse_workload(script)
    end_tick = None
    for d in directives:
        if d.op == "END":
            end_tick = d.tick
            continue
        world.queue.schedule_at(d.tick, lambda d=d: _apply(world, d))
    horizon = end_tick if end_tick is not None else (
        directives[-1].tick if directives else 0)
    world._schedule_maintenance(horizon)
    world.queue.run_all()
    final = max(world.queue.now, horizon)
    m = world.metrics
    m.end_tick = final
    m.mean_node_utilization = world.util_trace.time_average(0, final)
    m.max_node_utilization = world.util_trace.maximum(0, final)
    m.bytes_offered_to_links = world.network.bytes_offered
    if world._read_ticks > 0:
        m.read_throughput_bytes_per_tick = m.file_bytes_read / world._read_ticks
    m.finalize()
    return m
