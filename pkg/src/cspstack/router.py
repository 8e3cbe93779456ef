"""Bounded ingress queue, port-based delivery, and the socket API.

Ownership rule: every packet entering the global queue leaves it through
exactly one path: handed to a socket (the receiver releases it) or
released here on a counted drop. The contract is multi-producer enqueue,
single-threaded routing, and concurrent per-socket consumers.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .cfp import CanFrame, fragment
from .config import Config
from .csp import CspPacket, Stats
from .errors import PortInUse, QueueFull
from .pool import PacketBuf

MAX_PORT = 63


class GlobalQueue:
    """Bounded FIFO of (packet, ingress interface tag)."""

    def __init__(self, depth: int):
        self._q: queue.Queue = queue.Queue(maxsize=depth)

    def write(self, packet: PacketBuf, iface: str, stats: Optional[Stats] = None) -> None:
        """Append one packet; raises QueueFull and leaves ownership with the caller."""
        try:
            self._q.put_nowait((packet, iface))
        except queue.Full:
            if stats is not None:
                stats.inc("q_overflow")
            raise QueueFull(f"ingress queue at capacity {self._q.maxsize}")

    def pop(self) -> Optional[tuple[PacketBuf, str]]:
        try:
            return self._q.get_nowait()
        except queue.Empty:
            return None

    def depth(self) -> int:
        return self._q.qsize()


class Socket:
    """One bound port; recv transfers buffer ownership to the caller."""

    def __init__(self, port: int, depth: int):
        self.port = port
        self._q: queue.Queue = queue.Queue(maxsize=depth)

    def recv(self) -> Optional[PacketBuf]:
        try:
            return self._q.get_nowait()
        except queue.Empty:
            return None

    def pending(self) -> int:
        return self._q.qsize()

    def _offer(self, packet: PacketBuf) -> bool:
        try:
            self._q.put_nowait(packet)
            return True
        except queue.Full:
            return False


class SocketTable:
    """Port to socket map; at most one socket per port."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self._lock = threading.Lock()
        self._sockets: dict[int, Socket] = {}

    def bind(self, port: int) -> Socket:
        if not 0 <= port <= MAX_PORT:
            raise ValueError(f"port out of range: {port}")
        with self._lock:
            if port in self._sockets:
                raise PortInUse(f"port {port} already bound")
            sock = Socket(port, self.cfg.queue_depth)
            self._sockets[port] = sock
            return sock

    def lookup(self, port: int) -> Optional[Socket]:
        with self._lock:
            return self._sockets.get(port)


@dataclass(frozen=True)
class DeliveredToPort:
    port: int


@dataclass(frozen=True)
class DroppedUnbound:
    pass


@dataclass(frozen=True)
class DroppedNotLocal:
    pass


@dataclass(frozen=True)
class Empty:
    pass


RouteOutcome = Union[DeliveredToPort, DroppedUnbound, DroppedNotLocal, Empty]


def route_once(
    q: GlobalQueue, table: SocketTable, cfg: Config, stats: Optional[Stats] = None
) -> RouteOutcome:
    """Pop one packet and deliver it locally or release it on a counted drop."""
    entry = q.pop()
    if entry is None:
        return Empty()
    packet, _iface = entry
    if packet.id.destination != cfg.local_address:
        packet.release()
        if stats is not None:
            stats.inc("not_local")
        return DroppedNotLocal()
    sock = table.lookup(packet.id.dest_port)
    if sock is None or not sock._offer(packet):
        packet.release()
        if stats is not None:
            stats.inc("port_unbound")
        return DroppedUnbound()
    return DeliveredToPort(sock.port)


def csp_send(
    packet: CspPacket,
    tx: Callable[[CanFrame], None],
    identifier: int,
    cfg: Config,
) -> int:
    """Fragment and emit a packet through a frame callback; returns the count.

    Validation happens before the first emit, so an invalid packet emits
    nothing.
    """
    frames = fragment(packet, identifier, cfg.max_data_len)
    for frame in frames:
        tx(frame)
    return len(frames)
