"""Generate the frame transcripts used by the host fixture equivalence check.

Each transcript is a text file of "<8 hex id>#<hex payload>" lines, one CAN
frame per line, exercising a distinct receive path. Run from this directory
with the package importable (installed, or PYTHONPATH=../src).
"""

from __future__ import annotations

import pathlib

from cspstack import CspId, CspPacket, format_frame, fragment, regression_cases


def _pattern(length: int) -> bytes:
    return bytes((i * 31 + 7) % 256 for i in range(length))


def main() -> None:
    out_dir = pathlib.Path(__file__).resolve().parent / "transcripts"
    out_dir.mkdir(exist_ok=True)

    max_len = 256
    single = fragment(
        CspPacket(CspId(1, 2, 1, 7, 8, 0), b"\xca\xfe"), 1, max_len
    )
    multi = fragment(
        CspPacket(CspId(1, 2, 1, 7, 8, 0), _pattern(200)), 2, max_len
    )
    stream_a = fragment(
        CspPacket(CspId(1, 2, 1, 7, 8, 0), _pattern(64)), 3, max_len
    )
    stream_b = fragment(
        CspPacket(CspId(1, 3, 1, 7, 8, 0), _pattern(64)), 4, max_len
    )
    interleaved = [
        frame for pair in zip(stream_a, stream_b) for frame in pair
    ]

    transcripts = {
        "single_frame": single,
        "multi_frame": multi,
        "interleaved": interleaved,
    }
    transcripts.update(regression_cases())

    for name, frames in transcripts.items():
        path = out_dir / f"{name}.frames"
        lines = [f"# {name}"]
        lines.extend(format_frame(frame) for frame in frames)
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path.name}: {len(frames)} frames")


if __name__ == "__main__":
    main()
