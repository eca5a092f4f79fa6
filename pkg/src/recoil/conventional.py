"""Symbol-partitioning baseline: independent interleaved coders per partition.

Container layout (little-endian)::

    header      magic "RCV1", version u8, symbol width u8, n u8, lanes u16,
                partitions u32, symbols u64
    offsets     partitions x u32 starting word offset of each sub-stream
    final       partitions x lanes x u32 final states
    model       same encoding as the split container's model block
    words       concatenated sub-streams, u16 each
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .decoder import chunk_bounds, run_tasks
from .exceptions import BadMagic, InconsistentMetadata, TruncatedContainer, UnsupportedVersion
from .interleaved import EncodedStream, TaskBatch, decode_batch, interleaved_encode, model_tables
from .metadata import _model_block
from .model import QuantizedModel

MAGIC = b"RCV1"
VERSION = 1
HEADER = struct.Struct("<4sBBBHIQ")


def partition_bounds(count: int, parts: int) -> list[tuple[int, int]]:
    """0-based half-open ``[start, stop)`` of every partition."""
    return [((p * count) // parts, ((p + 1) * count) // parts) for p in range(parts)]


@dataclass
class PartitionedContainer:
    model: QuantizedModel
    lanes: int
    count: int
    offsets: list[int]
    final_states: list[tuple[int, ...]]
    words: np.ndarray
    symbol_width: int = 8

    @property
    def parts(self) -> int:
        return len(self.offsets)

    def to_bytes(self) -> bytes:
        header = HEADER.pack(MAGIC, VERSION, self.symbol_width, self.model.n, self.lanes,
                             self.parts, self.count)
        offsets = np.asarray(self.offsets, dtype="<u4").tobytes()
        finals = np.asarray(self.final_states, dtype="<u4").reshape(-1).tobytes()
        return b"".join([header, offsets, finals, _model_block(self.model, self.symbol_width),
                         np.asarray(self.words, dtype="<u2").tobytes()])

    @classmethod
    def from_bytes(cls, data) -> "PartitionedContainer":
        if len(data) < HEADER.size:
            raise TruncatedContainer("container ends inside the header")
        magic, version, sw, n, lanes, parts, count = HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(magic)!r}")
        if version != VERSION:
            raise UnsupportedVersion(f"container version {version} is not supported")
        if sw not in (8, 16) or not 1 <= n <= 16 or lanes < 1 or parts < 1:
            raise InconsistentMetadata("header fields out of range")
        pos = HEADER.size
        end = pos + 4 * parts + 4 * parts * lanes + 4
        if len(data) < end:
            raise TruncatedContainer("container ends inside the offset table")
        offsets = np.frombuffer(data, dtype="<u4", count=parts, offset=pos).astype(np.int64)
        pos += 4 * parts
        finals = np.frombuffer(data, dtype="<u4", count=parts * lanes, offset=pos).reshape(parts, lanes)
        pos += 4 * parts * lanes
        (alphabet,) = struct.unpack_from("<I", data, pos)
        fmt = "<BI" if sw == 8 else "<HI"
        step = struct.calcsize(fmt)
        pos += 4
        if len(data) < pos + alphabet * step:
            raise TruncatedContainer("container ends inside the model block")
        freqs = dict(struct.unpack_from(fmt, data, pos + k * step) for k in range(alphabet))
        pos += alphabet * step
        if (len(data) - pos) % 2:
            raise TruncatedContainer("word stream has an odd byte count")
        words = np.frombuffer(data, dtype="<u2", offset=pos)
        if np.any(np.diff(offsets) < 0) or (parts and offsets[-1] > len(words)) or (parts and offsets[0] != 0):
            raise InconsistentMetadata("offset table is not monotone within the word stream")
        if freqs and sum(freqs.values()) != 1 << n:
            raise InconsistentMetadata(f"model frequencies do not sum to 2**{n}")
        model = QuantizedModel.from_frequencies(freqs, n) if freqs else QuantizedModel.empty(n)
        return cls(model, lanes, count, [int(o) for o in offsets],
                   [tuple(int(x) for x in row) for row in finals], words, sw)


def conventional_encode(symbols, model: QuantizedModel, lanes: int, parts: int,
                        *, symbol_width: int = 8) -> PartitionedContainer:
    if parts < 1:
        raise ValueError("partition count must be at least 1")
    symbols = np.asarray(symbols)
    streams: list[EncodedStream] = [
        interleaved_encode(symbols[a:b], model, lanes, with_log=False)
        for a, b in partition_bounds(len(symbols), parts)
    ]
    sizes = [len(s.words) for s in streams]
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64).tolist()
    words = np.concatenate([s.words for s in streams]) if streams else np.empty(0, np.uint16)
    return PartitionedContainer(model, lanes, len(symbols), offsets,
                                [s.final_states for s in streams], words.astype(np.uint16), symbol_width)


def conventional_decode(container: PartitionedContainer, workers: int = 1) -> np.ndarray:
    lanes, count, parts = container.lanes, container.count, container.parts
    out = np.empty(count, dtype=np.uint8 if container.symbol_width == 8 else np.uint16)
    words = np.ascontiguousarray(container.words, dtype=np.uint16)
    # each partition decodes its own sub-stream into its own slice of ``out``
    offsets = np.asarray(container.offsets, dtype=np.int64)
    word_bounds = np.stack([offsets, np.append(offsets[1:], len(words))], axis=1)
    out_bounds = np.asarray(partition_bounds(count, parts), dtype=np.int64).reshape(parts, 2)
    sizes = out_bounds[:, 1] - out_bounds[:, 0]
    tops = np.where(sizes > 0, (sizes - 1) // lanes + 1, 0)
    batch = TaskBatch(word_bounds, word_bounds[:, 1] - word_bounds[:, 0],
                      np.asarray(container.final_states, dtype=np.uint64).reshape(parts, lanes),
                      np.repeat(tops[:, None], lanes, axis=1), tops, np.ones(parts, dtype=np.int64), sizes,
                      out_bounds, sizes)
    tables = model_tables(container.model, out)
    run_tasks(lambda c: decode_batch(out, words, container.model, lanes, batch, *c, tables=tables),
              chunk_bounds(sizes, workers), workers)
    return out
