import pytest
from hypothesis import given
from hypothesis import strategies as st

from cspstack import (
    Config,
    CspId,
    CspPacket,
    LengthExceedsBuffer,
    LengthMismatch,
    Stats,
    decode_csp_header,
    encode_csp_header,
    validate_packet,
)

from conftest import oracle_header_word

csp_ids = st.builds(
    CspId,
    priority=st.integers(0, 3),
    source=st.integers(0, 31),
    destination=st.integers(0, 31),
    dest_port=st.integers(0, 63),
    source_port=st.integers(0, 63),
    flags=st.integers(0, 255),
)


def test_known_header_word():
    cid = CspId(priority=1, source=2, destination=3, dest_port=4, source_port=5, flags=0x06)
    assert encode_csp_header(cid) == 0x44310506


def test_known_word_decodes_back():
    cid = decode_csp_header(0x44310506)
    assert cid == CspId(1, 2, 3, 4, 5, 0x06)


def test_zero_id_is_zero_word():
    assert encode_csp_header(CspId(0, 0, 0, 0, 0, 0)) == 0
    assert decode_csp_header(0) == CspId(0, 0, 0, 0, 0, 0)


def test_all_ones_word_decodes_to_field_maxima():
    cid = decode_csp_header(0xFFFFFFFF)
    assert cid == CspId(3, 31, 31, 63, 63, 255)


@given(csp_ids)
def test_encode_matches_independent_oracle(cid):
    assert encode_csp_header(cid) == oracle_header_word(
        cid.priority, cid.source, cid.destination, cid.dest_port, cid.source_port, cid.flags
    )


@given(csp_ids)
def test_id_round_trip(cid):
    assert decode_csp_header(encode_csp_header(cid)) == cid


@given(st.integers(0, 0xFFFFFFFF))
def test_word_round_trip(word):
    assert encode_csp_header(decode_csp_header(word)) == word


@pytest.mark.parametrize(
    "field,value",
    [
        ("priority", 4),
        ("source", 32),
        ("destination", 32),
        ("dest_port", 64),
        ("source_port", 64),
        ("flags", 256),
        ("priority", -1),
        ("flags", -1),
    ],
)
def test_out_of_range_field_rejected(field, value):
    kwargs = dict(priority=0, source=0, destination=0, dest_port=0, source_port=0, flags=0)
    kwargs[field] = value
    with pytest.raises(ValueError):
        CspId(**kwargs)


def test_packet_length_defaults_to_data_length():
    packet = CspPacket(CspId(0, 0, 0, 0, 0, 0), b"abc")
    assert packet.length == 3


def test_validate_packet_accepts_exact_limit():
    cfg = Config(max_data_len=8)
    validate_packet(CspPacket(CspId(0, 0, 0, 0, 0, 0), bytes(8)), cfg)


def test_validate_packet_rejects_over_limit():
    cfg = Config(max_data_len=8)
    with pytest.raises(LengthExceedsBuffer):
        validate_packet(CspPacket(CspId(0, 0, 0, 0, 0, 0), bytes(9)), cfg)


def test_validate_packet_rejects_length_mismatch():
    cfg = Config()
    with pytest.raises(LengthMismatch):
        validate_packet(CspPacket(CspId(0, 0, 0, 0, 0, 0), b"abc", 2), cfg)


def test_stats_increment_and_snapshot():
    stats = Stats()
    stats.inc("rx_delivered")
    stats.inc("rx_no_buffer", 3)
    snap = stats.snapshot()
    assert snap["rx_delivered"] == 1
    assert snap["rx_no_buffer"] == 3
    assert all(v == 0 for k, v in snap.items() if k not in ("rx_delivered", "rx_no_buffer"))
