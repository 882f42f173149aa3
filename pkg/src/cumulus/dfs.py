"""Block-replicated content-addressed file store.

Files are split into fixed-size blocks addressed by their SHA-256
digest.  A write stores every block on R distinct nodes before the
manifest becomes visible (synchronous replication, all-or-nothing).
Reads verify digests, fail over across replicas, and keep a small
read-ahead cache for streaming access.
"""

from __future__ import annotations

import enum
import hashlib
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

DEFAULT_BLOCK_SIZE = 4 * 1024 * 1024
DEFAULT_REPLICATION = 3
READ_AHEAD_BLOCKS = 2


class NotFound(KeyError):
    pass


class RangeError(ValueError):
    pass


class Unavailable(RuntimeError):
    pass


class InsufficientNodes(RuntimeError):
    pass


class WriteFailed(RuntimeError):
    pass


class RepairReason(enum.Enum):
    UNDER_REPLICATED = "under_replicated"
    CORRUPT_REPLICA = "corrupt_replica"


@dataclass(frozen=True)
class RepairAction:
    digest: str
    source_node: Optional[str]  # None flags unrecoverable data loss
    target_node: Optional[str]
    reason: RepairReason


@dataclass
class BlockRecord:
    digest: str
    size: int
    replicas: set


@dataclass
class Manifest:
    path: str
    total_length: int
    block_size: int
    blocks: List[BlockRecord] = field(default_factory=list)


def block_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def chunk(data: bytes, block_size: int) -> Manifest:
    """Split into fixed-size blocks (last one short); digest each block."""
    if block_size <= 0:
        raise ValueError(f"block_size must be positive: {block_size}")
    blocks = []
    for off in range(0, len(data), block_size):
        piece = data[off:off + block_size]
        blocks.append(BlockRecord(digest=block_digest(piece), size=len(piece),
                                  replicas=set()))
    return Manifest(path="", total_length=len(data), block_size=block_size,
                    blocks=blocks)


def choose_replicas(digest: str, nodes: Sequence[Tuple[str, int]], r: int) -> List[str]:
    """The R least-loaded nodes by stored bytes, ties to ascending node id."""
    if r < 1:
        raise ValueError(f"replication factor must be >= 1: {r}")
    if len(nodes) < r:
        raise InsufficientNodes(f"{len(nodes)} live nodes < R={r}")
    ranked = sorted(nodes, key=lambda nb: (nb[1], nb[0]))
    return [nid for nid, _ in ranked[:r]]


class StorageNode:
    """One storage actor: a digest-keyed block map plus liveness."""

    def __init__(self, node_id: str):
        self.node_id = node_id
        self.alive = True
        self.blocks: Dict[str, bytes] = {}
        self.stored_bytes = 0

    def store(self, digest: str, data: bytes) -> None:
        if not self.alive:
            raise Unavailable(f"node {self.node_id} is down")
        if digest not in self.blocks:
            self.blocks[digest] = data
            self.stored_bytes += len(data)

    def fetch(self, digest: str) -> bytes:
        if not self.alive:
            raise Unavailable(f"node {self.node_id} is down")
        if digest not in self.blocks:
            raise NotFound(digest)
        return self.blocks[digest]

    def drop(self, digest: str) -> None:
        data = self.blocks.pop(digest, None)
        if data is not None:
            self.stored_bytes -= len(data)


class DiskBlockStore(StorageNode):
    """Real-mode node store: one file per digest, filename = lowercase hex."""

    def __init__(self, node_id: str, root: str):
        super().__init__(node_id)
        self.root = root
        os.makedirs(root, exist_ok=True)
        for name in os.listdir(root):
            path = os.path.join(root, name)
            self.blocks[name] = b""  # presence marker; content stays on disk
            self.stored_bytes += os.path.getsize(path)

    def store(self, digest: str, data: bytes) -> None:
        if not self.alive:
            raise Unavailable(f"node {self.node_id} is down")
        if digest in self.blocks:
            return
        with open(os.path.join(self.root, digest), "wb") as f:
            f.write(data)
        self.blocks[digest] = b""
        self.stored_bytes += len(data)

    def fetch(self, digest: str) -> bytes:
        if not self.alive:
            raise Unavailable(f"node {self.node_id} is down")
        if digest not in self.blocks:
            raise NotFound(digest)
        with open(os.path.join(self.root, digest), "rb") as f:
            return f.read()

    def drop(self, digest: str) -> None:
        if digest in self.blocks:
            path = os.path.join(self.root, digest)
            self.stored_bytes -= os.path.getsize(path)
            os.remove(path)
            del self.blocks[digest]


def save_manifest(m: Manifest) -> str:
    """Line format: `path total_length block_size`, then one block per line."""
    lines = [f"{m.path} {m.total_length} {m.block_size}"]
    for b in m.blocks:
        lines.append(f"{b.digest} {b.size} {','.join(sorted(b.replicas))}")
    return "\n".join(lines) + "\n"


def load_manifest(text: str) -> Manifest:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty manifest")
    path, total, bsize = lines[0].rsplit(" ", 2)
    m = Manifest(path=path, total_length=int(total), block_size=int(bsize))
    for line in lines[1:]:
        digest, size, nodes = line.split(" ")
        replicas = set(nodes.split(",")) if nodes else set()
        m.blocks.append(BlockRecord(digest=digest, size=int(size), replicas=replicas))
    return m


class DfsCluster:
    """Metadata manager plus its storage nodes.

    Metadata is a single serialized actor: one manifest map, one global
    digest -> replica-set map shared by every BlockRecord.
    """

    def __init__(self, block_size: int = DEFAULT_BLOCK_SIZE,
                 replication: int = DEFAULT_REPLICATION):
        self.block_size = block_size
        self.replication = replication
        self.nodes: Dict[str, StorageNode] = {}
        self.manifests: Dict[str, Manifest] = {}
        self.block_replicas: Dict[str, set] = {}
        self.repair_log: List[RepairAction] = []
        self._cache: Dict[str, bytes] = {}
        self._cache_order: List[str] = []

    def add_node(self, node: StorageNode) -> None:
        self.nodes[node.node_id] = node

    def live_nodes(self) -> List[StorageNode]:
        return [n for n in self.nodes.values() if n.alive]

    def kill_node(self, node_id: str) -> None:
        self.nodes[node_id].alive = False

    def revive_node(self, node_id: str) -> None:
        self.nodes[node_id].alive = True

    # -- write path ---------------------------------------------------

    def put_file(self, path: str, data: bytes) -> Manifest:
        live = self.live_nodes()
        if len(live) < self.replication:
            raise InsufficientNodes(f"{len(live)} live nodes < R={self.replication}")
        manifest = chunk(data, self.block_size)
        manifest.path = path
        written: List[Tuple[StorageNode, str]] = []
        try:
            for i, rec in enumerate(manifest.blocks):
                existing = self.block_replicas.get(rec.digest)
                if existing:
                    live_holders = {nid for nid in existing if self.nodes[nid].alive}
                    if len(live_holders) >= self.replication:
                        rec.replicas = self.block_replicas[rec.digest]
                        continue
                piece = data[i * self.block_size:i * self.block_size + rec.size]
                targets = self._store_block(rec.digest, piece, written)
                rec.replicas = self.block_replicas.setdefault(rec.digest, set())
                rec.replicas.update(targets)
        except (Unavailable, InsufficientNodes) as exc:
            for node, digest in written:
                node.drop(digest)
                holders = self.block_replicas.get(digest)
                if holders:
                    holders.discard(node.node_id)
            raise WriteFailed(str(exc)) from exc
        # Replication complete for every block: publish atomically.
        self.manifests[path] = manifest
        return manifest

    def _store_block(self, digest: str, piece: bytes, written: list) -> List[str]:
        loads = [(n.node_id, n.stored_bytes) for n in self.live_nodes()]
        choose_replicas(digest, loads, self.replication)  # InsufficientNodes gate
        stored: List[str] = []
        candidates = [nid for nid, _ in sorted(loads, key=lambda nb: (nb[1], nb[0]))]
        for nid in candidates:
            if len(stored) == self.replication:
                break
            node = self.nodes[nid]
            try:
                node.store(digest, piece)
            except Unavailable:
                continue  # retry on the next least-loaded node
            written.append((node, digest))
            stored.append(nid)
        if len(stored) < self.replication:
            raise InsufficientNodes(
                f"only {len(stored)} replicas stored for {digest[:12]}")
        return stored

    # -- read path ----------------------------------------------------

    def _pick_replica(self, rec: BlockRecord, assigned: Dict[str, int]) -> StorageNode:
        holders = [self.nodes[nid] for nid in sorted(self.block_replicas.get(rec.digest, rec.replicas))
                   if nid in self.nodes and self.nodes[nid].alive
                   and rec.digest in self.nodes[nid].blocks]
        if not holders:
            raise Unavailable(f"no live replica of {rec.digest[:12]}")
        return min(holders, key=lambda n: (assigned.get(n.node_id, 0), n.node_id))

    def _fetch_block(self, rec: BlockRecord, assigned: Dict[str, int]) -> bytes:
        if rec.digest in self._cache:
            return self._cache[rec.digest]
        tried = set()
        while True:
            holders_left = False
            try:
                node = self._pick_replica(rec, assigned)
            except Unavailable:
                node = None
            while node is not None and node.node_id in tried:
                remaining = [self.nodes[nid] for nid in sorted(self.block_replicas.get(rec.digest, set()))
                             if self.nodes[nid].alive and nid not in tried
                             and rec.digest in self.nodes[nid].blocks]
                node = remaining[0] if remaining else None
            if node is None:
                raise Unavailable(f"every replica of {rec.digest[:12]} failed")
            tried.add(node.node_id)
            assigned[node.node_id] = assigned.get(node.node_id, 0) + 1
            try:
                data = node.fetch(rec.digest)
            except (Unavailable, NotFound):
                continue
            if block_digest(data) != rec.digest:
                # Corrupt replica: evict it and fail over.
                self.repair_log.append(RepairAction(
                    digest=rec.digest, source_node=None, target_node=node.node_id,
                    reason=RepairReason.CORRUPT_REPLICA))
                node.drop(rec.digest)
                holders = self.block_replicas.get(rec.digest)
                if holders:
                    holders.discard(node.node_id)
                continue
            self._cache_put(rec.digest, data)
            return data

    def _cache_put(self, digest: str, data: bytes) -> None:
        if digest in self._cache:
            return
        self._cache[digest] = data
        self._cache_order.append(digest)
        while len(self._cache_order) > 2 * READ_AHEAD_BLOCKS + 2:
            old = self._cache_order.pop(0)
            self._cache.pop(old, None)

    def get_file(self, path: str, offset: int = 0, length: Optional[int] = None) -> bytes:
        manifest = self.manifests.get(path)
        if manifest is None:
            raise NotFound(path)
        if length is None:
            length = manifest.total_length - offset
        if offset < 0 or length < 0 or offset + length > manifest.total_length:
            raise RangeError(
                f"range [{offset}, {offset + length}) outside length {manifest.total_length}")
        if length == 0:
            return b""
        bs = manifest.block_size
        first = offset // bs
        last = (offset + length - 1) // bs
        assigned: Dict[str, int] = {}
        parts = []
        for idx in range(first, last + 1):
            rec = manifest.blocks[idx]
            data = self._fetch_block(rec, assigned)
            lo = offset - idx * bs if idx == first else 0
            hi = offset + length - idx * bs if idx == last else rec.size
            parts.append(data[max(0, lo):hi])
        # Sequential read-ahead: pre-pull the next window into the cache.
        for idx in range(last + 1, min(last + 1 + READ_AHEAD_BLOCKS, len(manifest.blocks))):
            try:
                self._fetch_block(manifest.blocks[idx], assigned)
            except Unavailable:
                break
        return b"".join(parts)

    # -- repair -------------------------------------------------------

    def repair(self) -> List[RepairAction]:
        """Plan re-replication for every under-replicated block."""
        actions: List[RepairAction] = []
        seen = set()
        for manifest in self.manifests.values():
            for rec in manifest.blocks:
                if rec.digest in seen:
                    continue
                seen.add(rec.digest)
                holders = self.block_replicas.get(rec.digest, rec.replicas)
                live_holders = sorted(nid for nid in holders
                                      if nid in self.nodes and self.nodes[nid].alive
                                      and rec.digest in self.nodes[nid].blocks)
                missing = self.replication - len(live_holders)
                if missing <= 0:
                    continue
                if not live_holders:
                    actions.append(RepairAction(digest=rec.digest, source_node=None,
                                                target_node=None,
                                                reason=RepairReason.UNDER_REPLICATED))
                    continue
                candidates = sorted(
                    ((n.stored_bytes, n.node_id) for n in self.live_nodes()
                     if n.node_id not in live_holders))
                source = live_holders[0]
                for _, target in candidates[:missing]:
                    actions.append(RepairAction(digest=rec.digest, source_node=source,
                                                target_node=target,
                                                reason=RepairReason.UNDER_REPLICATED))
        return actions

    def run_repair(self) -> List[RepairAction]:
        """Plan and execute repair; returns the executed (or data-loss) actions."""
        actions = self.repair()
        for a in actions:
            if a.source_node is None or a.target_node is None:
                continue
            data = self.nodes[a.source_node].fetch(a.digest)
            self.nodes[a.target_node].store(a.digest, data)
            self.block_replicas.setdefault(a.digest, set()).add(a.target_node)
        return actions

    def verify_replication(self) -> bool:
        """Full scan: every block of every manifest has R live verified replicas."""
        for manifest in self.manifests.values():
            for rec in manifest.blocks:
                holders = self.block_replicas.get(rec.digest, rec.replicas)
                live = [nid for nid in holders
                        if nid in self.nodes and self.nodes[nid].alive
                        and rec.digest in self.nodes[nid].blocks]
                if len(live) < self.replication:
                    return False
        return True
