"""Discrete-event core: virtual clock, event queue, lossy links.

One tick is 1 ms of virtual time.  Everything is driven by the event
queue; nothing reads the wall clock, so a run is a pure function of
(config, script, seed).
"""

from __future__ import annotations

import heapq
import math
import random
from typing import Callable, Dict, Optional

BYTES_PER_TICK_PER_MBPS = 125  # 1 Mbit/s = 125 bytes per 1 ms tick


class EventQueue:
    """Priority queue of (tick, seq) -> callback; seq keeps FIFO order at a tick."""

    def __init__(self) -> None:
        self.now = 0
        self._seq = 0
        self._heap: list = []

    def schedule(self, delay: int, fn: Callable[[], None]) -> None:
        if delay < 0:
            raise ValueError(f"negative delay {delay}")
        heapq.heappush(self._heap, (self.now + delay, self._seq, fn))
        self._seq += 1

    def schedule_at(self, tick: int, fn: Callable[[], None]) -> None:
        self.schedule(max(0, tick - self.now), fn)

    def run_until(self, tick: Optional[int] = None) -> None:
        while self._heap:
            t, _, fn = self._heap[0]
            if tick is not None and t > tick:
                break
            heapq.heappop(self._heap)
            self.now = max(self.now, t)
            fn()
        if tick is not None:
            self.now = max(self.now, tick)

    def run_all(self) -> None:
        self.run_until(None)

    def __len__(self) -> int:
        return len(self._heap)


def transfer_ticks(size_bytes: int, bandwidth_mbps: float) -> int:
    """Ticks to push `size_bytes` through a link: ceil(size / (B * 125))."""
    if bandwidth_mbps <= 0:
        raise ValueError("bandwidth must be positive")
    return math.ceil(size_bytes / (bandwidth_mbps * BYTES_PER_TICK_PER_MBPS))


class Network:
    """Point-to-point links with latency, bandwidth, and per-message loss.

    Each node's egress is serialized: a transfer occupies the sender's
    link for its full transfer time.  Loss is recovered by stop-and-wait
    resend after one round trip; all loss draws come from the seeded
    generator, so delivery times are deterministic.
    """

    def __init__(self, queue: EventQueue, latency: int, bandwidth_mbps: float,
                 loss: float, rng: random.Random):
        if not 0 <= loss < 1:
            raise ValueError(f"loss must be in [0, 1): {loss}")
        self.queue = queue
        self.latency = latency
        self.bandwidth = bandwidth_mbps
        self.loss = loss
        self.rng = rng
        self.egress_free_at: Dict[str, int] = {}
        self.bytes_offered = 0
        self.down: set = set()

    def set_down(self, node: str, down: bool) -> None:
        if down:
            self.down.add(node)
        else:
            self.down.discard(node)

    def earliest_start(self, src: str) -> int:
        return max(self.queue.now, self.egress_free_at.get(src, 0))

    def send(self, src: str, dst: str, size: int,
             on_delivery: Callable[[int], None],
             on_fail: Optional[Callable[[], None]] = None,
             max_attempts: int = 16) -> None:
        """Queue a message; `on_delivery(arrival_tick)` fires when it lands.

        A down endpoint fails delivery immediately (the transport's
        retries cannot mask a dead node; the poller's timeout handles it).
        """
        start = self.earliest_start(src)
        transfer = transfer_ticks(size, self.bandwidth)
        arrival = start + transfer + self.latency
        self.egress_free_at[src] = start + transfer
        self.bytes_offered += size
        attempt_rtt = transfer + 2 * self.latency + 1

        attempts = [0]

        def attempt(arrival_tick: int) -> None:
            if src in self.down or dst in self.down:
                if on_fail is not None:
                    on_fail()
                return
            if self.rng.random() < self.loss:
                attempts[0] += 1
                self.bytes_offered += size
                if attempts[0] >= max_attempts:
                    if on_fail is not None:
                        on_fail()
                    return
                # Stop-and-wait: sender times out after one RTT and resends.
                self.queue.schedule_at(arrival_tick + attempt_rtt,
                                       lambda: attempt(arrival_tick + attempt_rtt))
                return
            on_delivery(arrival_tick)

        self.queue.schedule_at(arrival, lambda: attempt(arrival))

    def transfer_time(self, size: int) -> int:
        """Latency-inclusive one-way time for a message, ignoring queueing."""
        return transfer_ticks(size, self.bandwidth) + self.latency
