"""Container serialization.

Layout (all multi-byte integers little-endian)::

    header      magic "RCL1", version u8, symbol width u8, n u8, lanes u16,
                splits u32, symbols u64, words u64
    model       alphabet size u32, then (symbol value, frequency u32) pairs
    final       lanes x u32 final states
    global      signed series of word-offset differences, signed series of
                max-group differences (5-bit width fields), byte padded;
                absent when there is a single split
    per split   lanes x u16 anchor states, unsigned series of group-id
                differences from the split's max group (4-bit width field),
                byte padded
    words       n_words x u16
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (BadMagic, InconsistentMetadata, TruncatedContainer, TruncatedSeries,
                         UnsupportedVersion, ValueOverflow)
from .model import QuantizedModel
from .splitter import SplitPoint, SplitTable

MAGIC = b"RCL1"
VERSION = 1
HEADER = struct.Struct("<4sBBBHIQQ")
L = 1 << 16

GROUP_FIELD_BITS = 4
GLOBAL_FIELD_BITS = 5


class BitWriter:
    """MSB-first bit accumulator."""

    def __init__(self):
        self._acc = 0
        self.nbits = 0

    def write(self, value: int, nbits: int) -> None:
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self.nbits += nbits

    def bits(self) -> str:
        return format(self._acc, f"0{self.nbits}b") if self.nbits else ""

    def getvalue(self) -> bytes:
        """Contents padded with zero bits to a whole number of bytes."""
        pad = -self.nbits % 8
        return (self._acc << pad).to_bytes((self.nbits + pad) // 8, "big")


class BitReader:
    def __init__(self, data: bytes, pos: int = 0, limit: int | None = None):
        self._data = data
        self.pos = pos  # in bits
        self._limit = 8 * len(data) if limit is None else limit

    @classmethod
    def from_bits(cls, bits: str) -> "BitReader":
        w = BitWriter()
        for ch in bits:
            w.write(ch == "1", 1)
        return cls(w.getvalue(), limit=len(bits))

    def read(self, nbits: int) -> int:
        end = self.pos + nbits
        if end > self._limit:
            raise TruncatedSeries(f"need {nbits} bits at bit {self.pos}, only {self._limit - self.pos} left")
        first, last = self.pos // 8, (end + 7) // 8
        chunk = int.from_bytes(self._data[first:last], "big")
        chunk >>= 8 * last - end
        self.pos = end
        return chunk & ((1 << nbits) - 1)

    def align(self) -> int:
        """Skip to the next byte boundary; returns the byte position."""
        self.pos += -self.pos % 8
        return self.pos // 8


def bit_length(v: int) -> int:
    """Bits for a magnitude, with zero taking one bit."""
    return max(1, int(v).bit_length())


def pack_series(values: Iterable[int], *, signed: bool = False, field_bits: int = GROUP_FIELD_BITS,
                writer: BitWriter | None = None) -> BitWriter:
    """Append a width field and fixed-width elements to ``writer``.

    Each element is its magnitude in ``field + 1`` bits, followed by a sign
    bit (1 = negative) when ``signed``.
    """
    values = [int(v) for v in values]
    if not signed and any(v < 0 for v in values):
        raise ValueError("negative value in an unsigned series")
    mags = [abs(v) for v in values]
    limit = 1 << (1 << field_bits)
    if any(m >= limit for m in mags):
        raise ValueOverflow(f"magnitude exceeds {(1 << field_bits)} bits")
    width = max((bit_length(m) for m in mags), default=1)
    w = writer if writer is not None else BitWriter()
    w.write(width - 1, field_bits)
    for v, m in zip(values, mags):
        w.write(m, width)
        if signed:
            w.write(v < 0, 1)
    return w


def unpack_series(reader: BitReader, count: int, *, signed: bool = False,
                  field_bits: int = GROUP_FIELD_BITS) -> list[int]:
    width = reader.read(field_bits) + 1
    out = []
    for _ in range(count):
        m = reader.read(width)
        if signed and reader.read(1):
            if m == 0:
                raise InconsistentMetadata("negative zero in a signed series")
            m = -m
        out.append(m)
    return out


def series_bytes(n_values: int, width: int, *, signed: bool = False,
                 field_bits: int = GROUP_FIELD_BITS) -> int:
    return math.ceil((field_bits + n_values * (width + signed)) / 8)


def expected_offset(i: int, n_words: int, n_splits: int) -> int:
    return i * -(-n_words // n_splits)


def expected_max_group(i: int, count: int, n_splits: int, lanes: int) -> int:
    return -(-(i * -(-count // n_splits)) // lanes)


@dataclass
class RecoilContainer:
    table: SplitTable
    model: QuantizedModel
    words: np.ndarray
    symbol_width: int = 8

    @property
    def final_states(self) -> tuple[int, ...]:
        return self.table.final_states


# -- writing -------------------------------------------------------------------

def _model_block(model: QuantizedModel, symbol_width: int) -> bytes:
    freqs = model.frequencies
    sym_fmt = "<B" if symbol_width == 8 else "<H"
    parts = [struct.pack("<I", len(freqs))]
    for s, f in freqs.items():
        parts.append(struct.pack(sym_fmt, s) + struct.pack("<I", f))
    return b"".join(parts)


def _global_block(offsets: Sequence[int], max_groups: Sequence[int], table_like) -> bytes:
    count, n_words, lanes, n_splits = table_like
    if n_splits == 1:
        return b""
    w = BitWriter()
    pack_series([o - expected_offset(i, n_words, n_splits) for i, o in enumerate(offsets, 1)],
                signed=True, field_bits=GLOBAL_FIELD_BITS, writer=w)
    pack_series([g - expected_max_group(i, count, n_splits, lanes) for i, g in enumerate(max_groups, 1)],
                signed=True, field_bits=GLOBAL_FIELD_BITS, writer=w)
    return w.getvalue()


def split_record(point: SplitPoint) -> bytes:
    states = np.asarray(point.states, dtype="<u2").tobytes()
    top = point.max_group
    return states + pack_series([top - g for g in point.groups]).getvalue()


def write_container(table: SplitTable, model: QuantizedModel, words, *, symbol_width: int = 8) -> bytes:
    if symbol_width not in (8, 16):
        raise ValueError("symbol width must be 8 or 16")
    words = np.asarray(words, dtype="<u2")
    if len(words) != table.n_words:
        raise ValueError("word count differs from the split table")
    n_splits = table.n_splits
    header = HEADER.pack(MAGIC, VERSION, symbol_width, model.n, table.lanes, n_splits,
                         table.count, table.n_words)
    final = np.asarray(table.final_states, dtype="<u4").tobytes()
    shape = (table.count, table.n_words, table.lanes, n_splits)
    glob = _global_block([p.word_offset for p in table.points], [p.max_group for p in table.points], shape)
    records = b"".join(split_record(p) for p in table.points)
    return b"".join([header, _model_block(model, symbol_width), final, glob, records, words.tobytes()])


# -- reading -------------------------------------------------------------------

@dataclass
class _Layout:
    """Byte positions of the container sections."""

    symbol_width: int
    n: int
    lanes: int
    n_splits: int
    count: int
    n_words: int
    model_start: int
    final_start: int
    global_start: int
    records_start: int
    record_ends: list[int]
    words_start: int
    offsets: list[int]
    max_groups: list[int]


def _need(data, end: int, what: str) -> None:
    if end > len(data):
        raise TruncatedContainer(f"container ends inside the {what}")


def _parse_layout(data) -> _Layout:
    _need(data, HEADER.size, "header")
    magic, version, sw, n, lanes, n_splits, count, n_words = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(magic)!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"container version {version} is not supported")
    if sw not in (8, 16) or not 1 <= n <= 16 or lanes < 1 or n_splits < 1:
        raise InconsistentMetadata("header fields out of range")

    pos = HEADER.size
    model_start = pos
    _need(data, pos + 4, "model block")
    (alphabet,) = struct.unpack_from("<I", data, pos)
    pos += 4 + alphabet * (sw // 8 + 4)
    _need(data, pos, "model block")
    final_start = pos
    pos += 4 * lanes
    _need(data, pos, "final states")

    global_start = pos
    n_points = n_splits - 1
    offsets: list[int] = []
    max_groups: list[int] = []
    if n_points:
        reader = BitReader(data, 8 * pos)
        try:
            off_diff = unpack_series(reader, n_points, signed=True, field_bits=GLOBAL_FIELD_BITS)
            grp_diff = unpack_series(reader, n_points, signed=True, field_bits=GLOBAL_FIELD_BITS)
        except TruncatedSeries as exc:
            raise TruncatedContainer(f"container ends inside the split metadata: {exc}") from None
        pos = reader.align()
        offsets = [expected_offset(i, n_words, n_splits) + d for i, d in enumerate(off_diff, 1)]
        max_groups = [expected_max_group(i, count, n_splits, lanes) + d for i, d in enumerate(grp_diff, 1)]
    records_start = pos
    record_ends = []
    for _ in range(n_points):
        pos += 2 * lanes
        _need(data, pos + 1, "split records")
        width = (data[pos] >> (8 - GROUP_FIELD_BITS)) + 1
        pos += series_bytes(lanes, width)
        record_ends.append(pos)
    _need(data, pos, "split records")
    words_start = pos
    if len(data) - words_start != 2 * n_words:
        if len(data) - words_start < 2 * n_words:
            raise TruncatedContainer("container ends inside the word stream")
        raise InconsistentMetadata("trailing bytes after the word stream")
    return _Layout(sw, n, lanes, n_splits, count, n_words, model_start, final_start, global_start,
                   records_start, record_ends, words_start, offsets, max_groups)


def _read_model(data, lay: _Layout) -> QuantizedModel:
    (alphabet,) = struct.unpack_from("<I", data, lay.model_start)
    fmt = "<BI" if lay.symbol_width == 8 else "<HI"
    step = struct.calcsize(fmt)
    freqs = {}
    pos = lay.model_start + 4
    for _ in range(alphabet):
        s, f = struct.unpack_from(fmt, data, pos)
        if s in freqs or f == 0:
            raise InconsistentMetadata(f"bad model entry for symbol {s}")
        freqs[s] = f
        pos += step
    if not freqs:
        if lay.count:
            raise InconsistentMetadata("empty model for a non-empty stream")
        return QuantizedModel.empty(lay.n)
    if sum(freqs.values()) != 1 << lay.n:
        raise InconsistentMetadata(f"model frequencies do not sum to 2**{lay.n}")
    return QuantizedModel.from_frequencies(freqs, lay.n)


def _read_points(data, lay: _Layout) -> list[SplitPoint]:
    points = []
    start = lay.records_start
    for k, end in enumerate(lay.record_ends):
        states = tuple(int(s) for s in np.frombuffer(data, dtype="<u2", count=lay.lanes, offset=start))
        reader = BitReader(data, 8 * (start + 2 * lay.lanes))
        diffs = unpack_series(reader, lay.lanes)
        top = lay.max_groups[k]
        groups = tuple(top - d for d in diffs)
        if min(diffs) != 0:
            raise InconsistentMetadata(f"split point {k + 1}: no lane sits at the anchor group")
        points.append(SplitPoint(lay.offsets[k], states, groups))
        start = end
    return points


def read_container(data) -> RecoilContainer:
    data = memoryview(data).toreadonly() if not isinstance(data, bytes) else data
    lay = _parse_layout(data)
    model = _read_model(data, lay)
    final = tuple(int(x) for x in np.frombuffer(data, dtype="<u4", count=lay.lanes, offset=lay.final_start))
    if lay.count and any(not L <= x < L << 16 for x in final):
        raise InconsistentMetadata("final states outside the normalized interval")
    points = _read_points(data, lay)
    table = SplitTable(lay.count, lay.n_words, lay.lanes, tuple(points), final)
    table.validate()
    words = np.frombuffer(data, dtype="<u2", count=lay.n_words, offset=lay.words_start)
    return RecoilContainer(table, model, words, lay.symbol_width)


def peek_magic(data) -> bytes:
    return bytes(data[:4])


def combine_container(data, target: int) -> bytes:
    """Drop split records so at most ``target`` splits remain.

    Works on the serialized form: the global series is re-coded for the new
    split count, kept per-split records and the word stream are copied as-is.
    """
    if target < 1:
        raise ValueError("target split count must be at least 1")
    lay = _parse_layout(data)
    if target >= lay.n_splits:
        return bytes(data)
    k = -(-lay.n_splits // target)
    keep = list(range(k - 1, lay.n_splits - 1, k))
    new_splits = len(keep) + 1
    header = HEADER.pack(MAGIC, VERSION, lay.symbol_width, lay.n, lay.lanes, new_splits,
                         lay.count, lay.n_words)
    shape = (lay.count, lay.n_words, lay.lanes, new_splits)
    glob = _global_block([lay.offsets[i] for i in keep], [lay.max_groups[i] for i in keep], shape)
    starts = [lay.records_start] + lay.record_ends[:-1]
    mv = memoryview(data)
    parts = [header, mv[HEADER.size:lay.global_start], glob]
    parts.extend(mv[starts[i]:lay.record_ends[i]] for i in keep)
    parts.append(mv[lay.words_start:])
    return b"".join(parts)


def section_sizes(data) -> dict[str, int]:
    """Byte count of every container section, keyed by section name."""
    lay = _parse_layout(data)
    return {
        "header": HEADER.size,
        "model": lay.final_start - lay.model_start,
        "final_states": lay.global_start - lay.final_start,
        "split_offsets": lay.records_start - lay.global_start,
        "split_records": lay.words_start - lay.records_start,
        "words": len(data) - lay.words_start,
    }
