"""CAN fragmentation protocol: 29-bit fragment ids, transmit-side
fragmentation, and the hardened reassembly engine.

Fragment id layout inside the 29-bit extended CAN identifier:

    [28:24] source      (5 bits)
    [23:19] destination (5 bits)
    [18]    kind        (1 bit: 0=BEGIN, 1=MORE)
    [17:10] remain      (8 bits: frames still expected after this one)
    [9:0]   identifier  (10 bits: stream tag)

A BEGIN payload is `total_length` as big-endian 16-bit, the 4-byte packet
header, then up to 2 data bytes; MORE frames carry up to 8 data bytes.
`total_length` counts data bytes only.

The reassembly engine enforces three hard rules:
  * a declared total beyond max_data_len is rejected before any buffer is
    acquired;
  * a frame that would take received past the declared total is rejected
    before any byte is copied, while an exact fill is accepted;
  * buffer exhaustion is a counted drop, never an abort, and leaves no slot
    holding a dead handle.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .config import MAX_ADDRESSABLE_DATA_LEN, Config
from .csp import CspId, CspPacket, Stats, decode_csp_header, encode_csp_header
from .errors import InvalidId, LengthExceedsBuffer, PoolExhausted
from .pool import PacketBuf

KIND_BEGIN = 0
KIND_MORE = 1

# BEGIN payload prefix: 2-byte total length + 4-byte header.
BEGIN_OVERHEAD = 6

EXT_ID_MASK = 0x1FFFFFFF


@dataclass(frozen=True)
class CfpId:
    source: int = 0
    destination: int = 0
    kind: int = 0
    remain: int = 0
    identifier: int = 0

    def __post_init__(self) -> None:
        for name, value, maximum in (
            ("source", self.source, 0x1F),
            ("destination", self.destination, 0x1F),
            ("kind", self.kind, 0x1),
            ("remain", self.remain, 0xFF),
            ("identifier", self.identifier, 0x3FF),
        ):
            if not isinstance(value, int) or not 0 <= value <= maximum:
                raise ValueError(f"{name} out of range: {value!r} (max {maximum})")


def cfp_pack(cid: CfpId) -> int:
    """Pack a CfpId into a 29-bit extended CAN identifier."""
    return (
        cid.source << 24
        | cid.destination << 19
        | cid.kind << 18
        | cid.remain << 10
        | cid.identifier
    )


def cfp_unpack(ext_id: int) -> CfpId:
    """Exact inverse of cfp_pack; raises InvalidId beyond 29 bits."""
    if not 0 <= ext_id <= EXT_ID_MASK:
        raise InvalidId(f"extended id 0x{ext_id:X} does not fit in 29 bits")
    return CfpId(
        source=(ext_id >> 24) & 0x1F,
        destination=(ext_id >> 19) & 0x1F,
        kind=(ext_id >> 18) & 0x1,
        remain=(ext_id >> 10) & 0xFF,
        identifier=ext_id & 0x3FF,
    )


@dataclass(frozen=True)
class CanFrame:
    """A raw frame: 29-bit id, dlc, and 8 bytes of storage (first dlc used)."""

    ext_id: int
    dlc: int
    data: bytes = b""

    def __post_init__(self) -> None:
        if not 0 <= self.ext_id <= EXT_ID_MASK:
            raise InvalidId(f"extended id 0x{self.ext_id:X} exceeds 29 bits")
        if not 0 <= self.dlc <= 8:
            raise ValueError(f"dlc out of range: {self.dlc}")
        padded = bytes(self.data)[:8]
        object.__setattr__(self, "data", padded + b"\x00" * (8 - len(padded)))

    def payload(self) -> bytes:
        return self.data[: self.dlc]


def fragment(packet: CspPacket, identifier: int, max_data_len: int) -> list[CanFrame]:
    """Split a packet into an ordered BEGIN + MORE frame sequence.

    Inverse of the reassembly path: replaying the result through can_rx in
    order reproduces the packet exactly.
    """
    if packet.length > max_data_len:
        raise LengthExceedsBuffer(
            f"length {packet.length} exceeds max_data_len {max_data_len}"
        )
    if packet.length > MAX_ADDRESSABLE_DATA_LEN:
        raise LengthExceedsBuffer(
            f"length {packet.length} exceeds the 8-bit remain ceiling"
        )
    data = packet.data
    total = packet.length
    count = 1 if total <= 2 else 1 + -(-(total - 2) // 8)
    src, dst = packet.id.source, packet.id.destination

    head = total.to_bytes(2, "big") + encode_csp_header(packet.id).to_bytes(4, "big")
    first = min(total, 2)
    frames = [
        CanFrame(
            cfp_pack(CfpId(src, dst, KIND_BEGIN, count - 1, identifier)),
            BEGIN_OVERHEAD + first,
            head + data[:first],
        )
    ]
    offset = first
    for i in range(1, count):
        chunk = data[offset : offset + 8]
        frames.append(
            CanFrame(
                cfp_pack(CfpId(src, dst, KIND_MORE, count - 1 - i, identifier)),
                len(chunk),
                chunk,
            )
        )
        offset += len(chunk)
    return frames


def format_frame(frame: CanFrame) -> str:
    """Text form `IIIIIIII#DD..DD`: 8 hex id digits, '#', dlc hex byte pairs."""
    return f"{frame.ext_id:08x}#{frame.payload().hex()}"


def parse_frame_line(line: str) -> Optional[CanFrame]:
    """Parse one text-form frame; None for blank and `#` comment lines."""
    line = line.strip()
    if not line or line.startswith("#"):
        return None
    ident, sep, payload = line.partition("#")
    if not sep or len(ident) != 8:
        raise ValueError(f"malformed frame line: {line!r}")
    try:
        ext_id = int(ident, 16)
        data = bytes.fromhex(payload)
    except ValueError:
        raise ValueError(f"malformed frame line: {line!r}") from None
    if len(data) > 8:
        raise ValueError(f"frame payload exceeds 8 bytes: {line!r}")
    return CanFrame(ext_id & EXT_ID_MASK, len(data), data)


def parse_frames_text(text: str) -> list[CanFrame]:
    frames = []
    for line in text.splitlines():
        frame = parse_frame_line(line)
        if frame is not None:
            frames.append(frame)
    return frames


class DropReason(Enum):
    BAD_DLC = "BadDlc"
    LENGTH_EXCEEDS_BUFFER = "LengthExceedsBuffer"
    NO_BUFFER = "NoBuffer"
    NO_MATCHING_BEGIN = "NoMatchingBegin"
    REMAIN_MISMATCH = "RemainMismatch"
    OVERFLOW = "Overflow"
    TRUNCATED = "Truncated"


# Every drop increments exactly one Stats counter.
_DROP_COUNTER = {
    DropReason.BAD_DLC: "rx_dropped_len",
    DropReason.LENGTH_EXCEEDS_BUFFER: "rx_dropped_len",
    DropReason.NO_BUFFER: "rx_no_buffer",
    DropReason.NO_MATCHING_BEGIN: "rx_dropped_no_begin",
    DropReason.REMAIN_MISMATCH: "rx_dropped_truncated",
    DropReason.OVERFLOW: "rx_dropped_overflow",
    DropReason.TRUNCATED: "rx_dropped_truncated",
}


@dataclass(frozen=True)
class Delivered:
    packet: PacketBuf


@dataclass(frozen=True)
class Consumed:
    pass


@dataclass(frozen=True)
class Dropped:
    reason: DropReason


RxOutcome = Union[Delivered, Consumed, Dropped]


@dataclass
class _RxSlot:
    key: tuple[int, int, int]
    handle: object
    packet_id: CspId
    expected: int
    received: int
    last_remain: int
    deadline: int


class RxEngine:
    """Per-interface reassembly engine.

    Single-threaded by contract (calls must be externally serialized); the
    buffer source may be shared with other engines. `buffers` is anything
    with acquire()/release(handle)/storage(handle): a BufferPool or a
    host-callback adapter.
    """

    def __init__(self, buffers, cfg: Config, stats: Optional[Stats] = None):
        self.buffers = buffers
        self.cfg = cfg
        self.stats = stats if stats is not None else Stats()
        self._slots: list[Optional[_RxSlot]] = [None] * cfg.rx_slot_count

    def active_slots(self) -> int:
        return sum(1 for s in self._slots if s is not None)

    def can_rx(self, frame: CanFrame, now: int) -> RxOutcome:
        """Feed one frame; every input maps to exactly one outcome."""
        cid = cfp_unpack(frame.ext_id)
        key = (cid.source, cid.destination, cid.identifier)
        if cid.kind == KIND_BEGIN:
            return self._rx_begin(cid, key, frame, now)
        return self._rx_more(cid, key, frame, now)

    def poll_timeouts(self, now: int) -> int:
        """Evict every slot whose deadline has passed (deadline == now survives)."""
        evicted = 0
        for i, slot in enumerate(self._slots):
            if slot is not None and slot.deadline < now:
                self.buffers.release(slot.handle)
                self._slots[i] = None
                self.stats.inc("rx_timeout")
                evicted += 1
        return evicted

    def _rx_begin(self, cid: CfpId, key, frame: CanFrame, now: int) -> RxOutcome:
        if frame.dlc < BEGIN_OVERHEAD:
            return self._drop(DropReason.BAD_DLC)
        total = int.from_bytes(frame.data[0:2], "big")
        # Size field checked before any buffer is acquired.
        if total > self.cfg.max_data_len:
            return self._drop(DropReason.LENGTH_EXCEEDS_BUFFER)

        existing = self._find(key)
        if existing is not None:
            self._discard(existing)
            self.stats.inc("rx_preempted")

        index = self._claim_slot(now)
        if index is None:
            return self._drop(DropReason.NO_BUFFER)
        try:
            handle = self.buffers.acquire()
        except PoolExhausted:
            return self._drop(DropReason.NO_BUFFER)

        fill = frame.dlc - BEGIN_OVERHEAD
        if fill > total:
            self.buffers.release(handle)
            return self._drop(DropReason.OVERFLOW)
        packet_id = decode_csp_header(int.from_bytes(frame.data[2:6], "big"))
        self.buffers.storage(handle)[0:fill] = frame.data[
            BEGIN_OVERHEAD : BEGIN_OVERHEAD + fill
        ]
        if fill == total and cid.remain == 0:
            self.stats.inc("rx_delivered")
            return Delivered(PacketBuf(self.buffers, handle, packet_id, total))
        self._slots[index] = _RxSlot(
            key=key,
            handle=handle,
            packet_id=packet_id,
            expected=total,
            received=fill,
            last_remain=cid.remain,
            deadline=now + self.cfg.reassembly_timeout_ms,
        )
        return Consumed()

    def _rx_more(self, cid: CfpId, key, frame: CanFrame, now: int) -> RxOutcome:
        index = self._find(key)
        if index is None:
            return self._drop(DropReason.NO_MATCHING_BEGIN)
        slot = self._slots[index]
        if cid.remain != slot.last_remain - 1:
            self._discard(index)
            return self._drop(DropReason.REMAIN_MISMATCH)
        # Overflow checked before any byte is copied; an exact fill is legal.
        if slot.received + frame.dlc > slot.expected:
            self._discard(index)
            return self._drop(DropReason.OVERFLOW)
        self.buffers.storage(slot.handle)[
            slot.received : slot.received + frame.dlc
        ] = frame.data[: frame.dlc]
        slot.received += frame.dlc
        if cid.remain == 0:
            self._slots[index] = None
            if slot.received == slot.expected:
                self.stats.inc("rx_delivered")
                return Delivered(
                    PacketBuf(self.buffers, slot.handle, slot.packet_id, slot.expected)
                )
            self.buffers.release(slot.handle)
            return self._drop(DropReason.TRUNCATED)
        slot.last_remain = cid.remain
        slot.deadline = now + self.cfg.reassembly_timeout_ms
        return Consumed()

    def _find(self, key) -> Optional[int]:
        for i, slot in enumerate(self._slots):
            if slot is not None and slot.key == key:
                return i
        return None

    def _claim_slot(self, now: int) -> Optional[int]:
        for i, slot in enumerate(self._slots):
            if slot is None:
                return i
        for i, slot in enumerate(self._slots):
            if slot.deadline < now:
                self.buffers.release(slot.handle)
                self._slots[i] = None
                self.stats.inc("rx_timeout")
                return i
        return None

    def _discard(self, index: int) -> None:
        self.buffers.release(self._slots[index].handle)
        self._slots[index] = None

    def _drop(self, reason: DropReason) -> Dropped:
        self.stats.inc(_DROP_COUNTER[reason])
        return Dropped(reason)
