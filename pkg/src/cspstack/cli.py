"""Command-line tool: inspect ids, fragment packets, reassemble frame
files, replay fuzz corpora, and run a local loopback demo.

Exit codes: 0 success, 1 protocol or input failure, 2 usage error. Output
is line-oriented and stable so transcripts diff cleanly against golden
files.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from typing import Optional

from .cfp import (
    Delivered,
    RxEngine,
    cfp_unpack,
    format_frame,
    fragment,
    parse_frame_line,
)
from .config import Config, load_config
from .csp import CspId, CspPacket, Stats, decode_csp_header, encode_csp_header
from .errors import CspError
from .fuzz import replay_corpus
from .pool import BufferPool, PacketBuf
from .router import Empty, GlobalQueue, SocketTable, route_once


def _print_fields(value) -> None:
    for f in fields(value):
        print(f"{f.name}={getattr(value, f.name)}")


def _parse_hex_word(text: str) -> int:
    word = int(text, 16)
    if not 0 <= word <= 0xFFFFFFFF:
        raise ValueError(f"value does not fit in 32 bits: {text}")
    return word


def _cmd_inspect(args, cfg: Config) -> int:
    if args.cfp is not None:
        _print_fields(cfp_unpack(_parse_hex_word(args.cfp)))
    else:
        _print_fields(decode_csp_header(_parse_hex_word(args.header)))
    return 0


def _cmd_fragment(args, cfg: Config) -> int:
    packet = CspPacket(
        CspId(args.pri, args.src, args.dst, args.dport, args.sport, args.flags),
        bytes.fromhex(args.data_hex),
    )
    for frame in fragment(packet, args.ident, cfg.max_data_len):
        print(format_frame(frame))
    return 0


def _print_packet(packet: PacketBuf) -> None:
    word = encode_csp_header(packet.id)
    print(f"header={word:08x} len={packet.length} data={packet.data().hex()}")


def _cmd_reassemble(args, cfg: Config) -> int:
    with open(getattr(args, "in"), "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    pool = BufferPool(cfg.pool_capacity, cfg.max_data_len)
    engine = RxEngine(pool, cfg)
    now = 0
    for line in lines:
        frame = parse_frame_line(line)
        if frame is None:
            continue
        outcome = engine.can_rx(frame, now)
        now += 1
        if isinstance(outcome, Delivered):
            _print_packet(outcome.packet)
            outcome.packet.release()
    return 0


def _cmd_fuzz_replay(args, cfg: Config) -> int:
    report = replay_corpus(args.corpus, cfg)
    print(
        f"cases={report.cases} frames={report.frames} "
        f"delivered={report.delivered} leaks={report.leaks} "
        f"divergences={report.divergences}"
    )
    return 0 if report.ok() else 1

def _cmd_loopback(args, cfg: Config) -> int:
    packet = CspPacket(
        CspId(
            priority=0,
            source=cfg.local_address,
            destination=cfg.local_address,
            dest_port=args.port,
            source_port=args.port,
            flags=0,
        ),
        bytes.fromhex(args.data_hex),
    )
    pool = BufferPool(cfg.pool_capacity, cfg.max_data_len)
    stats = Stats()
    engine = RxEngine(pool, cfg, stats)
    q = GlobalQueue(cfg.queue_depth)
    table = SocketTable(cfg)
    sock = table.bind(args.port)

    now = 0
    for frame in fragment(packet, 0, cfg.max_data_len):
        outcome = engine.can_rx(frame, now)
        now += 1
        if isinstance(outcome, Delivered):
            q.write(outcome.packet, "loopback", stats)
    while not isinstance(route_once(q, table, cfg, stats), Empty):
        pass
    received = sock.recv()
    if received is None:
        print("no packet delivered", file=sys.stderr)
        return 1
    _print_packet(received)
    received.release()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cspstack",
        description="Packet stack tools: id inspection, fragmentation, "
        "reassembly, corpus replay, loopback.",
    )
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="decode a fragment id or header word")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--cfp", metavar="HEX8", help="29-bit fragment id")
    group.add_argument("--header", metavar="HEX8", help="32-bit header word")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("fragment", help="split a packet into frames")
    p.add_argument("--pri", type=int, default=0)
    p.add_argument("--src", type=int, default=0)
    p.add_argument("--dst", type=int, default=0)
    p.add_argument("--dport", type=int, default=0)
    p.add_argument("--sport", type=int, default=0)
    p.add_argument("--flags", type=lambda v: int(v, 0), default=0)
    p.add_argument("--data-hex", default="", metavar="HEX")
    p.add_argument("--ident", type=int, default=0)
    p.set_defaults(func=_cmd_fragment)

    p = sub.add_parser("reassemble", help="reassemble packets from a frames file")
    p.add_argument("--in", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_reassemble)

    p = sub.add_parser("fuzz-replay", help="replay a corpus file")
    p.add_argument("corpus", metavar="CORPUS")
    p.set_defaults(func=_cmd_fuzz_replay)

    p = sub.add_parser("loopback", help="send a packet to a local socket")
    p.add_argument("--data-hex", default="", metavar="HEX")
    p.add_argument("--port", type=int, required=True)
    p.set_defaults(func=_cmd_loopback)

    return parser


def run_cli(argv: Optional[list] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else Config()
        return args.func(args, cfg)
    except (CspError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(run_cli(sys.argv[1:]))
