"""Shared independent oracles used across test modules.

These are written straight from the documented bit layouts and framing
rules, independently of the package internals, so a codec bug cannot hide
behind its own inverse.
"""

import pytest

from cspstack import shim_reset


def oracle_header_word(priority, source, destination, dest_port, source_port, flags):
    return (
        (priority << 30)
        | (source << 25)
        | (destination << 20)
        | (dest_port << 14)
        | (source_port << 8)
        | flags
    )


def oracle_ext_id(source, destination, kind, remain, identifier):
    return (source << 24) | (destination << 19) | (kind << 18) | (remain << 10) | identifier


def oracle_frame_count(length):
    if length <= 2:
        return 1
    return 1 + (length - 2 + 7) // 8


def oracle_kiss_escape(raw):
    out = bytearray()
    for byte in raw:
        if byte == 0xC0:
            out += b"\xdb\xdc"
        elif byte == 0xDB:
            out += b"\xdb\xdd"
        else:
            out.append(byte)
    return bytes(out)


def pattern(length, seed=7):
    return bytes((i * 31 + seed) % 256 for i in range(length))


@pytest.fixture(autouse=True)
def _fresh_shim():
    shim_reset()
    yield
    shim_reset()
