"""Web-server front: compact form packaging, session routing, file API.

The gateway owns no protocol logic of its own: events and updates pass
through byte-identical, placement goes to the VM manager, and file
operations go to the DFS.  Form submissions are repackaged into the
compact binary layout before they cross into the cluster.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import dfs as dfs_mod
from . import renderhost
from .tileproto import DEFAULT_TILE, InputEvent, encode_update, full_frame_update
from .vmmanager import Policy, ResourceVector, VmManager

MAX_KEY_LEN = 255
MAX_VALUE_LEN = 65535


class KeyTooLong(ValueError):
    pass


class ValueTooLong(ValueError):
    pass


class MalformedMessage(ValueError):
    pass


class UnknownSession(KeyError):
    pass


def package_form(fields: Sequence[Tuple[str, str]]) -> bytes:
    """Compact layout: count u16 | per field key_len u8, key, val_len u16, value."""
    parts = [struct.pack(">H", len(fields))]
    for key, value in fields:
        kb = key.encode("utf-8")
        vb = value.encode("utf-8")
        if not 0 < len(kb) <= MAX_KEY_LEN:
            raise KeyTooLong(f"key length {len(kb)}")
        if len(vb) > MAX_VALUE_LEN:
            raise ValueTooLong(f"value length {len(vb)}")
        parts.append(struct.pack(">B", len(kb)))
        parts.append(kb)
        parts.append(struct.pack(">H", len(vb)))
        parts.append(vb)
    return b"".join(parts)


def unpackage_form(b: bytes) -> List[Tuple[str, str]]:
    if len(b) < 2:
        raise MalformedMessage("truncated count")
    (count,) = struct.unpack_from(">H", b)
    off = 2
    out = []
    for _ in range(count):
        if len(b) - off < 1:
            raise MalformedMessage("truncated key length")
        klen = b[off]
        off += 1
        if klen == 0 or len(b) - off < klen + 2:
            raise MalformedMessage("truncated key")
        key = b[off:off + klen].decode("utf-8")
        off += klen
        (vlen,) = struct.unpack_from(">H", b, off)
        off += 2
        if len(b) - off < vlen:
            raise MalformedMessage("truncated value")
        out.append((key, b[off:off + vlen].decode("utf-8")))
        off += vlen
    if off != len(b):
        raise MalformedMessage(f"{len(b) - off} trailing bytes")
    return out


def urlencoded_size(fields: Sequence[Tuple[str, str]]) -> int:
    """Size of the equivalent `k=v&k=v` text, for the compactness comparison."""
    if not fields:
        return 0
    return sum(len(k.encode()) + len(v.encode()) + 2 for k, v in fields) - 1


@dataclass
class Subscription:
    session_id: str
    pending: List[bytes] = field(default_factory=list)


class Gateway:
    """Single gateway instance fronting the cluster.

    `clock` supplies virtual-time ticks (ms); the habit slot is the
    current virtual hour of day.
    """

    def __init__(self, vm: VmManager, store: dfs_mod.DfsCluster,
                 clock: Callable[[], int] = lambda: 0,
                 quota: Optional[ResourceVector] = None,
                 policy: Policy = Policy.CONSOLIDATE,
                 tile: int = DEFAULT_TILE):
        self.vm = vm
        self.store = store
        self.clock = clock
        self.quota = quota or ResourceVector(cpu=1000, mem=1024, net=10, storage=1)
        self.policy = policy
        self.tile = tile
        self.sessions: Dict[str, renderhost.SessionHandle] = {}
        self.subscribers: Dict[str, List[Subscription]] = {}

    def current_slot(self) -> int:
        return (self.clock() // 3_600_000) % 24

    def open_session(self, user_id: str, width: int = 640, height: int = 480,
                     policy: Optional[Policy] = None) -> renderhost.SessionHandle:
        handle = renderhost.open_session(user_id, host_node="", width=width,
                                         height=height, tile=self.tile)
        decision = self.vm.place(handle.session_id, self.quota, policy or self.policy)
        handle.host_node = decision.chosen_node
        self.sessions[handle.session_id] = handle
        self.vm.observe_habit(user_id, self.current_slot(), self.quota)
        return handle

    def close_session(self, session_id: str) -> None:
        if session_id not in self.sessions:
            raise UnknownSession(session_id)
        del self.sessions[session_id]
        self.vm.release(session_id)
        self.subscribers.pop(session_id, None)

    def subscribe(self, session_id: str) -> Subscription:
        """Attach an update stream; the first message is a full-frame sync."""
        handle = self.sessions.get(session_id)
        if handle is None:
            raise UnknownSession(session_id)
        sub = Subscription(session_id=session_id)
        sync = full_frame_update(handle.last_frame, handle.tile,
                                 frame_seq=handle.frame_seq)
        sub.pending.append(encode_update(sync))
        self.subscribers.setdefault(session_id, []).append(sub)
        return sub

    def route_events(self, session_id: str, events: List[InputEvent]) -> bytes:
        """Forward events to the session's host and fan the update out."""
        handle = self.sessions.get(session_id)
        if handle is None:
            raise UnknownSession(session_id)
        update = renderhost.step_session(handle, events)
        wire = encode_update(update)
        for sub in self.subscribers.get(session_id, []):
            sub.pending.append(wire)
        return wire

    # -- file endpoints -------------------------------------------------

    def put_object(self, path: str, data: bytes) -> int:
        """HTTP-status-mapped DFS put."""
        try:
            self.store.put_file(path, data)
        except (dfs_mod.InsufficientNodes, dfs_mod.WriteFailed):
            return 503
        return 200

    def get_object(self, path: str, offset: int = 0,
                   length: Optional[int] = None) -> Tuple[int, bytes]:
        """HTTP-status-mapped DFS get: 200 / 404 / 416 / 503."""
        try:
            return 200, self.store.get_file(path, offset, length)
        except dfs_mod.NotFound:
            return 404, b""
        except dfs_mod.RangeError:
            return 416, b""
        except dfs_mod.Unavailable:
            return 503, b""
