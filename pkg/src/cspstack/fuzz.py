"""Deterministic fuzz entry points, corpus replay, and a reference
reassembler for differential testing.

Raw fuzz input is shaped into frames as repeated 13-byte records: a 4-byte
big-endian id masked to 29 bits, one dlc byte reduced mod 9, and 8 data
bytes; a trailing partial record is ignored. The reference reassembler
mirrors the engine's acceptance rules with unbounded storage and unlimited
concurrent streams, so engine-vs-reference comparison is meaningful only
for streams whose peak concurrent stream count fits the engine's slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cfp import (
    BEGIN_OVERHEAD,
    KIND_BEGIN,
    KIND_MORE,
    CanFrame,
    CfpId,
    Delivered,
    Dropped,
    RxEngine,
    cfp_pack,
    cfp_unpack,
    fragment,
)
from .config import Config
from .csp import CspId, CspPacket, decode_csp_header, encode_csp_header
from .errors import CorruptCorpus
from .pool import BufferPool

RECORD_LEN = 13
CORPUS_MAGIC = b"CSPF"


def decode_frame_stream(data: bytes) -> list[CanFrame]:
    """Shape arbitrary bytes into frames; total over any input."""
    frames = []
    for offset in range(0, len(data) - RECORD_LEN + 1, RECORD_LEN):
        record = data[offset : offset + RECORD_LEN]
        ext_id = int.from_bytes(record[0:4], "big") & 0x1FFFFFFF
        dlc = record[4] % 9
        frames.append(CanFrame(ext_id, dlc, record[5:13]))
    return frames


def encode_frame_stream(frames: Iterable[CanFrame]) -> bytes:
    """Inverse of decode_frame_stream for well-formed frames."""
    out = bytearray()
    for frame in frames:
        out += frame.ext_id.to_bytes(4, "big")
        out.append(frame.dlc)
        out += frame.data
    return bytes(out)


def _simulate(frames: list[CanFrame], cfg: Config) -> tuple[list[CspPacket], int]:
    """Unbounded reassembly mirroring the engine's acceptance rules.

    Returns the delivered packets and the peak stream pressure: the largest
    number of streams momentarily open at any accepted BEGIN, counting that
    BEGIN itself even when it delivers or dies within the same frame.
    """
    streams: dict[tuple, list] = {}
    delivered: list[CspPacket] = []
    peak = 0
    for frame in frames:
        cid = cfp_unpack(frame.ext_id)
        key = (cid.source, cid.destination, cid.identifier)
        if cid.kind == KIND_BEGIN:
            if frame.dlc < BEGIN_OVERHEAD:
                continue
            total = int.from_bytes(frame.data[0:2], "big")
            if total > cfg.max_data_len:
                continue
            streams.pop(key, None)
            peak = max(peak, len(streams) + 1)
            fill = frame.dlc - BEGIN_OVERHEAD
            if fill > total:
                continue
            packet_id = decode_csp_header(int.from_bytes(frame.data[2:6], "big"))
            buf = bytearray(frame.data[BEGIN_OVERHEAD : BEGIN_OVERHEAD + fill])
            if fill == total and cid.remain == 0:
                delivered.append(CspPacket(packet_id, bytes(buf)))
                continue
            streams[key] = [buf, total, cid.remain, packet_id]
        else:
            state = streams.get(key)
            if state is None:
                continue
            buf, total, last_remain, packet_id = state
            if cid.remain != last_remain - 1:
                del streams[key]
                continue
            if len(buf) + frame.dlc > total:
                del streams[key]
                continue
            buf += frame.data[: frame.dlc]
            if cid.remain == 0:
                del streams[key]
                if len(buf) == total:
                    delivered.append(CspPacket(packet_id, bytes(buf)))
                continue
            state[2] = cid.remain
    return delivered, peak


def reference_reassemble(frames: list[CanFrame], cfg: Config) -> list[CspPacket]:
    """Reference result for a frame stream; drops are silent."""
    return _simulate(frames, cfg)[0]


@dataclass
class FuzzReport:
    frames: int = 0
    outcomes: dict = field(default_factory=dict)
    delivered: int = 0
    leak: int = 0
    compared: bool = False
    divergence: bool = False

    def ok(self) -> bool:
        return self.leak == 0 and not self.divergence


def run_fuzz_case(data: bytes, cfg: Optional[Config] = None) -> FuzzReport:
    """Drive a fresh engine and pool over shaped input; never aborts.

    Delivered buffers are snapshotted and released immediately, so the only
    pool pressure is the engine's own slots. The engine-vs-reference
    comparison runs only when the stream's peak pressure fits the slot
    count and the pool is strictly deeper than the slots; outside that gate
    the bounded engine legitimately sheds streams the reference keeps.
    """
    cfg = cfg if cfg is not None else Config()
    frames = decode_frame_stream(data)
    pool = BufferPool(cfg.pool_capacity, cfg.max_data_len)
    engine = RxEngine(pool, cfg)
    report = FuzzReport(frames=len(frames))
    got: list[CspPacket] = []
    for now, frame in enumerate(frames):
        outcome = engine.can_rx(frame, now)
        if isinstance(outcome, Delivered):
            report.outcomes["Delivered"] = report.outcomes.get("Delivered", 0) + 1
            got.append(CspPacket(outcome.packet.id, outcome.packet.data()))
            outcome.packet.release()
        elif isinstance(outcome, Dropped):
            name = f"Dropped({outcome.reason.value})"
            report.outcomes[name] = report.outcomes.get(name, 0) + 1
        else:
            report.outcomes["Consumed"] = report.outcomes.get("Consumed", 0) + 1
    engine.poll_timeouts(len(frames) + cfg.reassembly_timeout_ms + 1)
    report.delivered = len(got)
    report.leak = pool.in_use()
    expected, peak = _simulate(frames, cfg)
    report.compared = (
        peak <= cfg.rx_slot_count and cfg.pool_capacity > cfg.rx_slot_count
    )
    if report.compared:
        report.divergence = got != expected
    return report


@dataclass
class CorpusReport:
    cases: int = 0
    frames: int = 0
    delivered: int = 0
    leaks: int = 0
    divergences: int = 0

    def ok(self) -> bool:
        return self.leaks == 0 and self.divergences == 0


def read_corpus(path: str) -> list[bytes]:
    """Load corpus records; raises CorruptCorpus on any framing damage."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(CORPUS_MAGIC)] != CORPUS_MAGIC:
        raise CorruptCorpus(f"{path}: bad magic")
    cases = []
    view = memoryview(blob)[len(CORPUS_MAGIC) :]
    offset = 0
    while offset < len(view):
        if offset + 4 > len(view):
            raise CorruptCorpus(f"{path}: truncated record length at byte {offset}")
        length = int.from_bytes(view[offset : offset + 4], "big")
        offset += 4
        if offset + length > len(view):
            raise CorruptCorpus(f"{path}: truncated record body at byte {offset}")
        cases.append(bytes(view[offset : offset + length]))
        offset += length
    return cases


def write_corpus(path: str, cases: Iterable[bytes]) -> int:
    """Write records in corpus format; returns the case count."""
    count = 0
    with open(path, "wb") as fh:
        fh.write(CORPUS_MAGIC)
        for case in cases:
            fh.write(len(case).to_bytes(4, "big"))
            fh.write(case)
            count += 1
    return count


def replay_corpus(path: str, cfg: Optional[Config] = None) -> CorpusReport:
    """Run every corpus record through run_fuzz_case; deterministic."""
    report = CorpusReport()
    for case in read_corpus(path):
        result = run_fuzz_case(case, cfg)
        report.cases += 1
        report.frames += result.frames
        report.delivered += result.delivered
        report.leaks += 1 if result.leak else 0
        report.divergences += 1 if result.divergence else 0
    return report


def _pattern(length: int) -> bytes:
    return bytes((i * 31 + 7) % 256 for i in range(length))


def _begin(src: int, dst: int, ident: int, total: int, remain: int, data: bytes) -> CanFrame:
    head = total.to_bytes(2, "big") + encode_csp_header(
        CspId(1, src, dst, 7, 8, 0)
    ).to_bytes(4, "big")
    return CanFrame(
        cfp_pack(CfpId(src, dst, KIND_BEGIN, remain, ident)),
        BEGIN_OVERHEAD + len(data),
        head + data,
    )


def _more(src: int, dst: int, ident: int, remain: int, data: bytes) -> CanFrame:
    return CanFrame(
        cfp_pack(CfpId(src, dst, KIND_MORE, remain, ident)), len(data), data
    )


def regression_cases(cfg: Optional[Config] = None) -> dict[str, list[CanFrame]]:
    """The three named regression transcripts as deterministic frame lists.

    boundary_fill: a stream filling the declared length exactly is
    delivered, then a stream overrunning its declared length is cut at the
    first frame that would cross it.

    overdeclared_len: a declared total one past the buffer limit is
    rejected outright, then a well-formed packet shows the engine
    unharmed.

    pool_exhaustion: with every slot held by an open stream, a further
    stream is shed as a counted no-buffer drop; once one holder finishes,
    a retry of the shed stream is delivered.
    """
    cfg = cfg if cfg is not None else Config()
    limit = cfg.max_data_len
    pid = CspId(1, 2, 1, 7, 8, 0)

    exact = fragment(CspPacket(pid, _pattern(limit)), 5, limit)
    overrun = [_begin(2, 1, 6, limit, 33, _pattern(2))]
    overrun += [_more(2, 1, 6, 32 - i, _pattern(8)) for i in range(33)]
    boundary_fill = exact + overrun

    overdeclared = [_begin(2, 1, 5, limit + 1, 32, _pattern(2))]
    recovery = fragment(CspPacket(pid, _pattern(10)), 6, limit)
    overdeclared_len = overdeclared + recovery

    opener_a = fragment(CspPacket(pid, _pattern(100)), 1, limit)
    opener_b = [_begin(3, 1, 2, 100, 13, _pattern(2))]
    shed = fragment(CspPacket(CspId(1, 4, 1, 7, 8, 0), _pattern(2)), 3, limit)
    pool_exhaustion = (
        opener_a[:1] + opener_b + shed + opener_a[1:] + shed
    )

    return {
        "boundary_fill": boundary_fill,
        "overdeclared_len": overdeclared_len,
        "pool_exhaustion": pool_exhaustion,
    }
