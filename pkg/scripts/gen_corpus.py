#!/usr/bin/env python3
"""Regenerate the shipped regression corpus files in corpus/.

Each named regression becomes one corpus file holding a single case; the
test suite asserts the files on disk are byte-identical to what this
script produces, so stale corpora fail loudly.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from cspstack import encode_frame_stream, regression_cases, write_corpus


def main() -> int:
    corpus_dir = pathlib.Path(__file__).resolve().parent.parent / "corpus"
    corpus_dir.mkdir(exist_ok=True)
    for name, frames in regression_cases().items():
        path = corpus_dir / f"{name}.cspf"
        write_corpus(str(path), [encode_frame_stream(frames)])
        print(f"wrote {path} ({len(frames)} frames)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
