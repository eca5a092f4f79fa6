import hashlib
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recoil.exceptions import (BadMagic, InconsistentMetadata, TruncatedContainer, TruncatedSeries,
                               UnsupportedVersion, ValueOverflow)
from recoil.interleaved import interleaved_encode
from recoil.metadata import (HEADER, BitReader, BitWriter, bit_length, combine_container, expected_max_group,
                             expected_offset, pack_series, read_container, section_sizes, series_bytes,
                             split_record, unpack_series, write_container)
from recoil.model import QuantizedModel
from recoil.splitter import SplitPoint, SplitTable, choose_splits, combine_splits

from conftest import random_model, sample

L = 1 << 16
DATA = Path(__file__).parent / "data"


def test_pack_examples():
    assert pack_series([1, 0, 1, 0]).bits() == "00001010"
    assert pack_series([0, 0, 0]).bits() == "0000000"
    assert pack_series([1, -1], signed=True, field_bits=5).bits() == "000001011"
    assert pack_series([]).bits() == "0000"


def test_unpack_examples():
    assert unpack_series(BitReader.from_bits("00001010"), 4) == [1, 0, 1, 0]
    assert unpack_series(BitReader.from_bits("0000"), 0) == []
    with pytest.raises(TruncatedSeries):
        unpack_series(BitReader.from_bits("0000101"), 4)
    with pytest.raises(InconsistentMetadata):
        unpack_series(BitReader.from_bits("00000" "01"), 1, signed=True, field_bits=5)


def test_width_uses_ceiling_form():
    assert [bit_length(v) for v in (0, 1, 2, 3, 4, 5, 7, 8)] == [1, 1, 2, 2, 3, 3, 3, 4]
    assert pack_series([5]).bits() == "0010" "101"


def test_overflow():
    pack_series([(1 << 16) - 1])
    with pytest.raises(ValueOverflow):
        pack_series([1 << 16])
    pack_series([-(1 << 32) + 1], signed=True, field_bits=5)
    with pytest.raises(ValueOverflow):
        pack_series([1 << 32], signed=True, field_bits=5)
    with pytest.raises(ValueError):
        pack_series([-1])


@given(st.lists(st.integers(0, (1 << 16) - 1), max_size=70))
def test_unsigned_roundtrip(values):
    w = pack_series(values)
    r = BitReader(w.getvalue(), limit=w.nbits)
    assert unpack_series(r, len(values)) == values
    assert r.pos == w.nbits
    assert len(w.getvalue()) == series_bytes(len(values), max(map(bit_length, values), default=1))
    # repacking reproduces the exact bits
    assert pack_series(unpack_series(BitReader.from_bits(w.bits()), len(values))).bits() == w.bits()


@given(st.lists(st.integers(-(1 << 32) + 1, (1 << 32) - 1), max_size=70))
def test_signed_roundtrip(values):
    w = pack_series(values, signed=True, field_bits=5)
    assert unpack_series(BitReader.from_bits(w.bits()), len(values), signed=True, field_bits=5) == values


def test_expectations():
    assert expected_offset(1, 10, 2) == 5
    assert expected_offset(3, 11, 4) == 9
    assert expected_max_group(1, 40, 2, 4) == 5
    assert expected_max_group(2, 41, 3, 4) == 7  # ceil(2 * 14 / 4)


def _walkthrough_table():
    # one split point: word offset 6 against an expected 5, max group 4 against an expected 5
    point = SplitPoint(6, (11, 22, 33, 44), (3, 4, 3, 4))
    return SplitTable(40, 10, 4, (point,), (L, L + 1, L + 2, L + 3))


def test_walkthrough_layout():
    table = _walkthrough_table()
    model = QuantizedModel.from_frequencies({0: 1024, 1: 1024}, 11)
    words = np.arange(10, dtype=np.uint16)
    blob = write_container(table, model, words)
    sizes = section_sizes(blob)
    assert sizes == {"header": HEADER.size, "model": 4 + 2 * 5, "final_states": 16, "split_offsets": 2,
                     "split_records": 9, "words": 20}
    g = HEADER.size + 14 + 16
    # offset diff +1, group diff -1, each in its own 5-bit-width series
    assert format(int.from_bytes(blob[g:g + 2], "big"), "016b") == "00000" "10" "00000" "11" "00"
    rec = blob[g + 2:g + 11]
    assert np.frombuffer(rec[:8], "<u2").tolist() == [11, 22, 33, 44]
    assert rec[8] == 0b00001010
    assert split_record(table.points[0]) == rec
    back = read_container(blob)
    assert back.table == table and back.model == model
    assert np.array_equal(back.words, words)


def test_single_split_has_no_global_block(rng):
    m = random_model(rng, 11, 10)
    enc = interleaved_encode(sample(rng, m, 300), m, 4)
    table = choose_splits(enc.log, enc.count, len(enc.words), 4, 1, enc.final_states)
    blob = write_container(table, m, enc.words)
    assert section_sizes(blob)["split_offsets"] == 0
    assert len(blob) == HEADER.size + 4 + 5 * 10 + 16 + 2 * len(enc.words)


@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(0, 700), st.integers(1, 30), st.sampled_from([8, 16]))
def test_container_roundtrip(seed, lanes, size, splits, width):
    rng = np.random.default_rng(seed)
    m = random_model(rng, int(rng.integers(8, 17)), int(rng.integers(1, 30)))
    enc = interleaved_encode(sample(rng, m, size), m, lanes)
    table = choose_splits(enc.log, enc.count, len(enc.words), lanes, splits, enc.final_states)
    blob = write_container(table, m, enc.words, symbol_width=width)
    back = read_container(blob)
    assert back.table == table and back.model == m and back.symbol_width == width
    assert write_container(back.table, back.model, back.words, symbol_width=width) == blob
    # per-split record size formula
    for p in table.points:
        width_bits = max(bit_length(p.max_group - g) for g in p.groups)
        assert len(split_record(p)) == 2 * lanes + -(-(4 + lanes * width_bits) // 8)


def _sample_container(rng, splits=12, lanes=4, size=2000):
    m = random_model(rng, 11, 20)
    enc = interleaved_encode(sample(rng, m, size), m, lanes)
    table = choose_splits(enc.log, enc.count, len(enc.words), lanes, splits, enc.final_states)
    return table, m, enc, write_container(table, m, enc.words)


def test_combine_container_matches_table_combine(rng):
    table, m, enc, blob = _sample_container(rng)
    assert table.n_splits == 12
    for target in range(1, 14):
        assert combine_container(blob, target) == write_container(combine_splits(table, target), m, enc.words)
    assert combine_container(blob, 12) == blob


def test_corruption_is_detected(rng):
    _, _, _, blob = _sample_container(rng)
    with pytest.raises(BadMagic):
        read_container(b"XXXX" + blob[4:])
    with pytest.raises(UnsupportedVersion):
        read_container(blob[:4] + b"\x09" + blob[5:])
    for cut in (3, HEADER.size + 2, HEADER.size + 60, len(blob) - 1):
        with pytest.raises(TruncatedContainer):
            read_container(blob[:cut])
    with pytest.raises(InconsistentMetadata):
        read_container(blob + b"\0\0")


def test_decreasing_offsets_rejected():
    a = SplitPoint(3, (1, 1), (2, 2))
    b = SplitPoint(8, (1, 1), (5, 5))
    table = SplitTable(40, 20, 2, (a, b), (L, L))
    model = QuantizedModel.from_frequencies({0: 2048}, 11)
    blob = bytearray(write_container(table, model, np.zeros(20, np.uint16)))
    g = HEADER.size + 4 + 5 + 8
    reader = BitReader(bytes(blob), 8 * g)
    assert unpack_series(reader, 2, signed=True, field_bits=5) == [3 - 7, 8 - 14]
    # same-width rewrite of the offset series putting the first point at 14, past the second
    w = BitWriter()
    pack_series([14 - 7, 8 - 14], signed=True, field_bits=5, writer=w)
    new = w.bits() + format(int.from_bytes(blob[g:g + 4], "big"), "032b")[w.nbits:]
    blob[g:g + 4] = int(new, 2).to_bytes(4, "big")
    with pytest.raises(InconsistentMetadata):
        read_container(bytes(blob))


def _golden_inputs():
    rng = np.random.default_rng(2024)
    m = random_model(rng, 11, 12)
    data = sample(rng, m, 1500)
    enc = interleaved_encode(data, m, 4)
    table = choose_splits(enc.log, enc.count, len(enc.words), 4, 6, enc.final_states)
    return data, write_container(table, m, enc.words)


def test_golden_container():
    data, blob = _golden_inputs()
    golden = (DATA / "golden_w4_m6.rcl").read_bytes()
    assert blob == golden
    assert hashlib.sha256(golden).hexdigest() == (DATA / "golden_w4_m6.sha256").read_text().split()[0]
    from recoil.decoder import parallel_decode
    assert np.array_equal(parallel_decode(read_container(golden), 2), data)
