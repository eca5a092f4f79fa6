"""W-way interleaved rANS over a single shared word stream."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .exceptions import BitstreamUnderflow, SyncFailure, ZeroFrequencySymbol
from .model import QuantizedModel
from .rans import Bitstream, CodecParams, decode_step, encode_step, renorm_decode, renorm_encode

DEFAULT_LANES = 32


class RenormEvent(NamedTuple):
    word_offset: int
    lane: int
    symbol_index: int
    post_state: int


class RenormLog:
    """Encoder-side record of every emitted word, stored column-wise.

    Event ``e`` describes the word at offset ``e``: which lane emitted it, the
    index of that lane's most recently encoded symbol (``<= 0`` when the lane
    had not encoded anything yet) and the lane state left after the shift.
    """

    def __init__(self, lane, symbol_index, post_state, lanes: int):
        self.lane = np.asarray(lane, dtype=np.int32)
        self.symbol_index = np.asarray(symbol_index, dtype=np.int64)
        self.post_state = np.asarray(post_state, dtype=np.uint32)
        self.lanes = int(lanes)
        if not len(self.lane) == len(self.symbol_index) == len(self.post_state):
            raise ValueError("log columns differ in length")

    @classmethod
    def from_events(cls, events: Sequence[tuple[int, int, int]], lanes: int) -> "RenormLog":
        """Build from ``(lane, symbol_index, post_state)`` triples in word order."""
        if not events:
            return cls([], [], [], lanes)
        lane, idx, state = zip(*events)
        return cls(lane, idx, state, lanes)

    def __len__(self) -> int:
        return len(self.lane)

    def __getitem__(self, e: int) -> RenormEvent:
        if e < 0:
            e += len(self)
        return RenormEvent(e, int(self.lane[e]), int(self.symbol_index[e]), int(self.post_state[e]))

    def __iter__(self):
        return (self[e] for e in range(len(self)))

    @cached_property
    def sync_start(self) -> np.ndarray:
        """Per event: the synchronization start if the split ended there."""
        return _kernels.sync_starts(self.lane, self.symbol_index, self.lanes)


@dataclass
class EncodedStream:
    words: np.ndarray
    final_states: tuple[int, ...]
    log: RenormLog | None
    count: int
    lanes: int
    model: QuantizedModel = field(repr=False)


def model_tables(model: QuantizedModel, symbols: np.ndarray):
    size = 1 << (8 * symbols.dtype.itemsize)
    return model.dense_tables(max(size, len(model.freqs)))


def interleaved_encode(symbols, model: QuantizedModel, lanes: int = DEFAULT_LANES,
                       *, with_log: bool = True) -> EncodedStream:
    symbols = np.ascontiguousarray(symbols)
    if symbols.dtype not in (np.uint8, np.uint16):
        symbols = symbols.astype(np.uint16 if symbols.size and symbols.max() > 255 else np.uint8)
    if lanes < 1:
        raise ValueError("lane count must be positive")
    count = len(symbols)
    freqs, cdf = model_tables(model, symbols)
    words = np.empty(max(count, 1), dtype=np.uint16)
    cap = max(count, 1) if with_log else 1
    ev_lane = np.empty(cap, dtype=np.int32)
    ev_index = np.empty(cap, dtype=np.int64)
    ev_state = np.empty(cap, dtype=np.uint32)
    p, states, bad = _kernels.encode_interleaved(
        symbols, lanes, freqs, cdf, model.n, words, ev_lane, ev_index, ev_state, with_log)
    if bad:
        raise ZeroFrequencySymbol(
            f"symbol {int(symbols[bad - 1])} at index {bad} is absent from the model")
    log = RenormLog(ev_lane[:p].copy(), ev_index[:p].copy(), ev_state[:p].copy(), lanes) if with_log else None
    return EncodedStream(words[:p].copy(), tuple(int(x) for x in states), log, count, lanes, model)


def decode_into(out: np.ndarray, words: np.ndarray, model: QuantizedModel, lanes: int, *,
                cursor: int, init_states, init_groups, top_group: int, lo: int, hi: int,
                count: int, trailing_refill: bool = False, tables=None):
    """Thin checked wrapper over the compiled range decoder.

    ``tables`` may carry precomputed ``(freqs, cdf)`` to skip rebuilding
    them when many ranges share one model.
    """
    freqs, cdf = tables if tables is not None else model_tables(model, out)
    status, cursor, states = _kernels.decode_range(
        words, cursor, np.asarray(init_states, dtype=np.uint64), np.asarray(init_groups, dtype=np.int64),
        top_group, lo, hi, count, lanes, freqs, cdf, model.lookup, model.n, out, trailing_refill)
    if status == _kernels.ERR_UNDERFLOW:
        raise BitstreamUnderflow("word stream exhausted while refilling")
    if status == _kernels.ERR_SYNC:
        raise SyncFailure(f"a lane was never initialized before reaching index range [{lo}, {hi}]")
    return cursor, states


class TaskBatch(NamedTuple):
    """Column form of many range decodes over one word stream and output buffer."""

    word_bounds: np.ndarray   # (tasks, 2) int64
    cursors: np.ndarray
    init_states: np.ndarray   # (tasks, lanes) uint64
    init_groups: np.ndarray   # (tasks, lanes) int64
    top_groups: np.ndarray
    los: np.ndarray
    his: np.ndarray
    out_bounds: np.ndarray    # (tasks, 2) int64
    counts: np.ndarray

    def __len__(self) -> int:
        return len(self.cursors)


def decode_batch(out: np.ndarray, words: np.ndarray, model: QuantizedModel, lanes: int, batch: TaskBatch,
                 first: int, last: int, tables=None) -> None:
    """Decode tasks ``first .. last - 1`` of ``batch`` in a single compiled call."""
    freqs, cdf = tables if tables is not None else model_tables(model, out)
    status, task = _kernels.decode_batch(
        words, batch.word_bounds, batch.cursors, batch.init_states, batch.init_groups, batch.top_groups,
        batch.los, batch.his, batch.out_bounds, batch.counts, lanes, freqs, cdf, model.lookup, model.n, out,
        first, last)
    if status == _kernels.ERR_UNDERFLOW:
        raise BitstreamUnderflow(f"word stream exhausted while refilling (task {task + 1})")
    if status == _kernels.ERR_SYNC:
        raise SyncFailure(f"task {task + 1} reached its committed range with a lane not yet initialized")


def interleaved_decode(encoded: EncodedStream, dtype=np.uint8) -> np.ndarray:
    """Full-stream decode starting from the final states."""
    lanes, count = encoded.lanes, encoded.count
    out = np.empty(count, dtype=dtype)
    if count == 0:
        return out
    top = (count - 1) // lanes + 1
    decode_into(out, np.asarray(encoded.words, dtype=np.uint16), encoded.model, lanes,
                cursor=len(encoded.words), init_states=encoded.final_states,
                init_groups=np.full(lanes, top), top_group=top, lo=1, hi=count, count=count)
    return out


# -- reference implementations -------------------------------------------------

def interleaved_encode_reference(symbols, model: QuantizedModel, lanes: int = DEFAULT_LANES):
    """Group-by-group encode built from the scalar primitives.

    Returns ``(Bitstream, final_states, events)`` with events as
    :class:`RenormEvent` tuples.
    """
    params = CodecParams(model.n)
    out = Bitstream()
    states = [params.L] * lanes
    events = []
    symbols = [int(s) for s in symbols]
    for base in range(0, len(symbols), lanes):
        for j, s in enumerate(symbols[base:base + lanes]):
            before = out.p
            x = renorm_encode(states[j], s, model, out, params)
            for offset in range(before, out.p):
                events.append(RenormEvent(offset, j + 1, base + j + 1 - lanes, x))
            states[j] = encode_step(x, s, model)
    return out, states, events


def interleaved_decode_reference(stream: Bitstream, start_states, model: QuantizedModel, lanes: int,
                                 count: int, start_index: int, *, reads: list | None = None):
    """Decode ``count`` symbols from ``start_index`` downward.

    Returns symbols in reverse index order. ``reads`` collects
    ``(lane, word_offset)`` for every word consumed.
    """
    params = CodecParams(model.n)
    states = list(start_states)
    out = []
    if count == 0:
        return out
    stop = start_index - count + 1
    group = (start_index - 1) // lanes + 1
    while True:
        base = (group - 1) * lanes
        for j in range(lanes - 1, -1, -1):
            while states[j] < params.L:
                if reads is not None:
                    reads.append((j + 1, stream.p - 1))
                states[j] = renorm_decode(states[j], stream, params)
        for j in range(lanes - 1, -1, -1):
            idx = base + j + 1
            if idx > start_index or idx < stop:
                continue
            s, states[j] = decode_step(states[j], model)
            out.append((idx, s))
        if base + 1 <= stop:
            break
        group -= 1
    out.sort(reverse=True)
    return [s for _, s in out]
