"""Protocol identity types and the 32-bit header codec.

Header bit layout (big-endian on the wire, most significant first):

    [31:30] priority     (2 bits)
    [29:25] source       (5 bits)
    [24:20] destination  (5 bits)
    [19:14] dest_port    (6 bits)
    [13:8]  source_port  (6 bits)
    [7:0]   flags        (8 bits, opaque)

Every 32-bit word decodes; encode/decode form a bijection over valid ids.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, fields

from .errors import LengthExceedsBuffer, LengthMismatch


@dataclass(frozen=True)
class CspId:
    priority: int = 0
    source: int = 0
    destination: int = 0
    dest_port: int = 0
    source_port: int = 0
    flags: int = 0

    def __post_init__(self) -> None:
        _check_range("priority", self.priority, 0x03)
        _check_range("source", self.source, 0x1F)
        _check_range("destination", self.destination, 0x1F)
        _check_range("dest_port", self.dest_port, 0x3F)
        _check_range("source_port", self.source_port, 0x3F)
        _check_range("flags", self.flags, 0xFF)


def _check_range(name: str, value: int, maximum: int) -> None:
    if not isinstance(value, int) or not 0 <= value <= maximum:
        raise ValueError(f"{name} out of range: {value!r} (max {maximum})")


def encode_csp_header(cid: CspId) -> int:
    """Pack a CspId into its 32-bit header word."""
    return (
        cid.priority << 30
        | cid.source << 25
        | cid.destination << 20
        | cid.dest_port << 14
        | cid.source_port << 8
        | cid.flags
    )


def decode_csp_header(word: int) -> CspId:
    """Exact inverse of encode_csp_header; any 32-bit word decodes."""
    word &= 0xFFFFFFFF
    return CspId(
        priority=(word >> 30) & 0x03,
        source=(word >> 25) & 0x1F,
        destination=(word >> 20) & 0x1F,
        dest_port=(word >> 14) & 0x3F,
        source_port=(word >> 8) & 0x3F,
        flags=word & 0xFF,
    )


@dataclass(frozen=True)
class CspPacket:
    """A decoded packet: identity plus a length-bounded payload."""

    id: CspId
    data: bytes = b""
    length: int = -1  # -1: take len(data)

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", bytes(self.data))
        if self.length < 0:
            object.__setattr__(self, "length", len(self.data))


def validate_packet(packet: CspPacket, cfg) -> None:
    """Raise unless the packet fits cfg and its declared length is honest."""
    if packet.length > cfg.max_data_len:
        raise LengthExceedsBuffer(
            f"length {packet.length} exceeds max_data_len {cfg.max_data_len}"
        )
    if len(packet.data) != packet.length:
        raise LengthMismatch(
            f"declared length {packet.length}, data has {len(packet.data)} bytes"
        )


@dataclass
class Stats:
    """Monotone event counters. inc() is safe under concurrent producers."""

    rx_delivered: int = 0
    rx_dropped_no_begin: int = 0
    rx_dropped_len: int = 0
    rx_dropped_overflow: int = 0
    rx_dropped_truncated: int = 0
    rx_no_buffer: int = 0
    rx_preempted: int = 0
    rx_timeout: int = 0
    q_overflow: int = 0
    port_unbound: int = 0
    not_local: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def inc(self, name: str, n: int = 1) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + n)

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                f.name: getattr(self, f.name)
                for f in fields(self)
                if f.name != "_lock"
            }
