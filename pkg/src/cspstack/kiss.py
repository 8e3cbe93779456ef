"""KISS framing for serial links: FEND-delimited frames with FESC escaping.

A frame on the wire is the 4-byte big-endian packet header followed by the
data bytes; there is no command byte. The decoder is a byte-at-a-time state
machine that acquires a buffer at the opening FEND and writes decoded data
bytes straight into it, so a frame is copied exactly once. When no buffer
is available the whole frame is skipped and counted, and decoding resumes
at the next frame boundary; exhaustion never stops the decoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .config import Config
from .csp import Stats, decode_csp_header
from .errors import PoolExhausted
from .pool import PacketBuf

FEND = 0xC0
FESC = 0xDB
TFEND = 0xDC
TFESC = 0xDD

HEADER_LEN = 4


def kiss_encode(header_word: int, data: bytes) -> bytes:
    """Encode one packet as a delimited, escaped KISS frame."""
    out = bytearray([FEND])
    for byte in header_word.to_bytes(4, "big") + bytes(data):
        if byte == FEND:
            out += bytes([FESC, TFEND])
        elif byte == FESC:
            out += bytes([FESC, TFESC])
        else:
            out.append(byte)
    out.append(FEND)
    return bytes(out)


_HEX_DIGITS = set("0123456789abcdefABCDEF")


def parse_hex_stream(text: str) -> bytes:
    """Parse whitespace-separated hex bytes ("c0 00 1A db") into raw bytes.

    Each token is one byte, one or two hex digits; anything else raises
    ValueError. This is the text form for feeding captured serial data to
    a decoder.
    """
    out = bytearray()
    for token in text.split():
        if not 1 <= len(token) <= 2 or any(c not in _HEX_DIGITS for c in token):
            raise ValueError(f"not a hex byte: {token!r}")
        out.append(int(token, 16))
    return bytes(out)


class KissDropReason(Enum):
    NO_BUFFER = "NoBuffer"
    RUNT = "Runt"
    OVERSIZE = "Oversize"


@dataclass(frozen=True)
class KissDrop:
    reason: KissDropReason


KissEvent = Union[PacketBuf, KissDrop]


class _State(Enum):
    IDLE = 0
    IN_FRAME = 1
    ESCAPED = 2
    DISCARD = 3


class KissDecoder:
    """Incremental decoder; feed arbitrary byte chunks, collect events.

    Frames are FEND ... FEND; bytes between frames are ignored. A bare FEND
    always acts as a delimiter, even after FESC. Splitting the input stream
    at any byte boundary yields the same event sequence as feeding it whole.
    Holds at most one buffer at a time; none while Idle or Discard.
    """

    def __init__(self, cfg: Config, stats: Optional[Stats] = None):
        self.cfg = cfg
        self.stats = stats if stats is not None else Stats()
        self._state = _State.IDLE
        self._handle = None
        self._buffers = None
        self._length = 0
        self._head = bytearray()

    def reset(self) -> None:
        """Return to idle, releasing any partially decoded frame."""
        self._abandon()
        self._state = _State.IDLE

    def holds_buffer(self) -> bool:
        return self._handle is not None

    def push(self, data: bytes, buffers) -> list[KissEvent]:
        """Decode a chunk against the given buffer source; returns events."""
        events: list[KissEvent] = []
        for byte in bytes(data):
            event = self._step(byte, buffers)
            if event is not None:
                events.append(event)
        return events

    def _step(self, byte: int, buffers) -> Optional[KissEvent]:
        if self._state is _State.IDLE:
            if byte == FEND:
                return self._begin_frame(buffers)
            return None
        if self._state is _State.DISCARD:
            if byte == FEND:
                self._state = _State.IDLE
            return None
        if self._state is _State.ESCAPED:
            if byte == FEND:
                return self._end_frame()
            self._state = _State.IN_FRAME
            if byte == TFEND:
                return self._accept(FEND)
            if byte == TFESC:
                return self._accept(FESC)
            # Invalid escape: keep the byte as-is, matching permissive decoders.
            return self._accept(byte)
        # IN_FRAME
        if byte == FEND:
            return self._end_frame()
        if byte == FESC:
            self._state = _State.ESCAPED
            return None
        return self._accept(byte)

    def _begin_frame(self, buffers) -> Optional[KissEvent]:
        try:
            self._handle = buffers.acquire()
        except PoolExhausted:
            # Exhaustion skips this frame but never stops the decoder.
            self._state = _State.DISCARD
            self.stats.inc("rx_no_buffer")
            return KissDrop(KissDropReason.NO_BUFFER)
        self._buffers = buffers
        self._length = 0
        self._head.clear()
        self._state = _State.IN_FRAME
        return None

    def _accept(self, byte: int) -> Optional[KissEvent]:
        if len(self._head) < HEADER_LEN:
            self._head.append(byte)
            return None
        if self._length >= self.cfg.max_data_len:
            self._abandon()
            self._state = _State.DISCARD
            self.stats.inc("rx_dropped_len")
            return KissDrop(KissDropReason.OVERSIZE)
        self._buffers.storage(self._handle)[self._length] = byte
        self._length += 1
        return None

    def _end_frame(self) -> KissEvent:
        self._state = _State.IDLE
        if len(self._head) < HEADER_LEN:
            self._abandon()
            self.stats.inc("rx_dropped_len")
            return KissDrop(KissDropReason.RUNT)
        packet_id = decode_csp_header(int.from_bytes(self._head, "big"))
        packet = PacketBuf(self._buffers, self._handle, packet_id, self._length)
        self._handle = None
        self._buffers = None
        self._head.clear()
        self._length = 0
        self.stats.inc("rx_delivered")
        return packet

    def _abandon(self) -> None:
        if self._handle is not None:
            self._buffers.release(self._handle)
            self._handle = None
            self._buffers = None
        self._length = 0
        self._head.clear()
