import pathlib
import subprocess
import sys

import pytest

from cspstack import encode_frame_stream, regression_cases, write_corpus
from cspstack.cli import run_cli

from conftest import pattern

REPO = pathlib.Path(__file__).resolve().parent.parent


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_inspect_cfp_zero(capsys):
    code, out, _ = run(capsys, "inspect", "--cfp", "00000000")
    assert code == 0
    assert out == "source=0\ndestination=0\nkind=0\nremain=0\nidentifier=0\n"


def test_inspect_cfp_known_id(capsys):
    code, out, _ = run(capsys, "inspect", "--cfp", "01140c04")
    assert code == 0
    assert out == "source=1\ndestination=2\nkind=1\nremain=3\nidentifier=4\n"


def test_inspect_header_known_word(capsys):
    code, out, _ = run(capsys, "inspect", "--header", "44310506")
    assert code == 0
    assert out == (
        "priority=1\nsource=2\ndestination=3\ndest_port=4\nsource_port=5\nflags=6\n"
    )


def test_inspect_rejects_bad_hex(capsys):
    code, _, err = run(capsys, "inspect", "--cfp", "zz")
    assert code == 1
    assert "error:" in err


def test_inspect_rejects_out_of_range_cfp(capsys):
    code, _, err = run(capsys, "inspect", "--cfp", "20000000")
    assert code == 1
    assert "error:" in err


def test_inspect_requires_exactly_one_selector():
    with pytest.raises(SystemExit) as exc:
        run_cli(["inspect"])
    assert exc.value.code == 2


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run_cli(["no-such-command"])
    assert exc.value.code == 2


def test_fragment_known_packet(capsys):
    code, out, _ = run(
        capsys,
        "fragment",
        "--pri", "1", "--src", "2", "--dst", "3", "--dport", "4", "--sport", "5",
        "--data-hex", "00010203", "--ident", "9",
    )
    assert code == 0
    assert out == "02180409#0004443105000001\n021c0009#0203\n"


def test_fragment_full_length_packet_line_count(capsys):
    code, out, _ = run(capsys, "fragment", "--data-hex", pattern(256).hex())
    assert code == 0
    assert len(out.splitlines()) == 33


def test_fragment_rejects_over_length(capsys):
    code, out, err = run(capsys, "fragment", "--data-hex", "00" * 257)
    assert code == 1
    assert out == ""
    assert "error:" in err


def test_fragment_reassemble_identity(tmp_path, capsys):
    data = pattern(200)
    code, frames_text, _ = run(
        capsys, "fragment", "--src", "2", "--dst", "3", "--data-hex", data.hex()
    )
    assert code == 0
    frames_file = tmp_path / "frames.txt"
    frames_file.write_text("# round trip\n" + frames_text)
    code, out, _ = run(capsys, "reassemble", "--in", str(frames_file))
    assert code == 0
    assert out == f"header=04300000 len=200 data={data.hex()}\n"


def test_reassemble_empty_file(tmp_path, capsys):
    frames_file = tmp_path / "empty.txt"
    frames_file.write_text("")
    code, out, _ = run(capsys, "reassemble", "--in", str(frames_file))
    assert code == 0
    assert out == ""


def test_reassemble_missing_file(capsys):
    code, _, err = run(capsys, "reassemble", "--in", "/nonexistent/frames.txt")
    assert code == 1
    assert "error:" in err


def test_reassemble_malformed_line(tmp_path, capsys):
    frames_file = tmp_path / "bad.txt"
    frames_file.write_text("not a frame line\n")
    code, _, err = run(capsys, "reassemble", "--in", str(frames_file))
    assert code == 1
    assert "error:" in err


def test_reassemble_drops_are_not_errors(tmp_path, capsys):
    # A lone continuation frame is dropped; the run still succeeds.
    frames_file = tmp_path / "drop.txt"
    frames_file.write_text("02140009#0203\n")
    code, out, _ = run(capsys, "reassemble", "--in", str(frames_file))
    assert code == 0
    assert out == ""


def test_fuzz_replay_clean_corpus(tmp_path, capsys):
    corpus = tmp_path / "clean.cspf"
    frames = regression_cases()["boundary_fill"]
    write_corpus(str(corpus), [encode_frame_stream(frames)])
    code, out, _ = run(capsys, "fuzz-replay", str(corpus))
    assert code == 0
    assert out == "cases=1 frames=67 delivered=1 leaks=0 divergences=0\n"


def test_fuzz_replay_corrupt_corpus(tmp_path, capsys):
    corpus = tmp_path / "corrupt.cspf"
    corpus.write_bytes(b"JUNK")
    code, _, err = run(capsys, "fuzz-replay", str(corpus))
    assert code == 1
    assert "error:" in err


def test_loopback_round_trip(capsys):
    code, out, _ = run(capsys, "loopback", "--data-hex", "cafebabe", "--port", "7")
    assert code == 0
    assert out == "header=0211c700 len=4 data=cafebabe\n"


def test_loopback_empty_payload(capsys):
    code, out, _ = run(capsys, "loopback", "--data-hex", "", "--port", "0")
    assert code == 0
    assert out == "header=02100000 len=0 data=\n"


def test_config_flag_changes_limits(tmp_path, capsys):
    config = tmp_path / "small.json"
    config.write_text('{"max_data_len": 8}')
    code, _, err = run(
        capsys, "--config", str(config), "fragment", "--data-hex", "00" * 9
    )
    assert code == 1
    assert "error:" in err


def test_config_flag_rejects_unknown_keys(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text('{"pool_size": 4}')
    code, _, err = run(capsys, "--config", str(config), "inspect", "--cfp", "0")
    assert code == 1
    assert "error:" in err


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "cspstack", "inspect", "--cfp", "01140c04"],
        capture_output=True,
        text=True,
        cwd=str(REPO),
    )
    assert result.returncode == 0
    assert "identifier=4" in result.stdout


def test_console_script_usage_error():
    result = subprocess.run(
        [sys.executable, "-m", "cspstack", "bogus"], capture_output=True, text=True
    )
    assert result.returncode == 2
    assert "usage" in result.stderr.lower()
