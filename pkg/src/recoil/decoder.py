"""Multi-worker split decoding.

Every split becomes one task. A task entered through a split point first
synchronizes (lanes join one by one at their anchor groups, output dropped),
then decodes normally down to its lower boundary and keeps going through the
previous split's synchronization section. The task for the top split starts
from the transmitted final states instead.
"""

from __future__ import annotations

from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import BitstreamUnderflow, SyncFailure
from .interleaved import TaskBatch, decode_batch, decode_into, model_tables
from .metadata import RecoilContainer
from .model import QuantizedModel
from .rans import Bitstream, CodecParams, decode_step
from .splitter import SplitTable, group_of


@dataclass(frozen=True)
class DecodeTask:
    ordinal: int
    cursor: int
    init_states: Sequence[int]
    init_groups: Sequence[int]
    top_group: int
    lo: int
    hi: int
    lower_boundary: int = 0

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def plan_tasks(table: SplitTable) -> list[DecodeTask]:
    lanes = table.lanes
    top = group_of(table.count, lanes) if table.count else 0
    a = table.arrays
    starts = [1] + a.sync_start.tolist() + [table.count + 1]
    boundaries = [0] + a.boundary_index.tolist()
    states = a.states.astype(np.uint64)
    tasks = []
    for k in range(len(starts) - 1):
        lo, hi = starts[k], starts[k + 1] - 1
        if k == len(table.points):
            task = DecodeTask(k + 1, table.n_words, table.final_states, (top,) * lanes, top, lo, hi,
                              boundaries[k])
        else:
            task = DecodeTask(k + 1, int(a.offsets[k]) + 1, states[k], a.groups[k], int(a.max_group[k]),
                              lo, hi, boundaries[k])
        tasks.append(task)
    return tasks


def plan_batch(table: SplitTable) -> TaskBatch:
    """All tasks of :func:`plan_tasks` as one column batch."""
    lanes, count, a = table.lanes, table.count, table.arrays
    k = len(table.points)
    top = group_of(count, lanes) if count else 0
    starts = np.concatenate([[1], a.sync_start, [count + 1]]).astype(np.int64)
    states = np.empty((k + 1, lanes), dtype=np.uint64)
    states[:k] = a.states
    states[k] = np.asarray(table.final_states, dtype=np.uint64)
    groups = np.empty((k + 1, lanes), dtype=np.int64)
    groups[:k] = a.groups
    groups[k] = top
    whole = lambda size: np.tile(np.array([0, size], dtype=np.int64), (k + 1, 1))
    return TaskBatch(whole(table.n_words), np.append(a.offsets + 1, table.n_words).astype(np.int64),
                     states, groups, np.append(a.max_group, top).astype(np.int64), starts[:-1],
                     starts[1:] - 1, whole(count), np.full(k + 1, count, dtype=np.int64))


def chunk_bounds(sizes: np.ndarray, workers: int) -> list[tuple[int, int]]:
    """Contiguous task ranges of similar total size, a few per worker."""
    if workers == 1 or len(sizes) <= 1:
        return [(0, len(sizes))]
    pieces = min(len(sizes), 4 * workers)
    total = np.cumsum(sizes)
    cuts = np.searchsorted(total, total[-1] * np.arange(1, pieces) / pieces, side="right")
    edges = np.unique(np.concatenate([[0], cuts, [len(sizes)]]))
    return list(zip(edges[:-1].tolist(), edges[1:].tolist()))


def decode_split(task: DecodeTask, words: np.ndarray, model: QuantizedModel, lanes: int,
                 count: int, out: np.ndarray, tables=None) -> None:
    if task.size <= 0:
        return
    decode_into(out, words, model, lanes, cursor=task.cursor, init_states=task.init_states,
                init_groups=task.init_groups, top_group=task.top_group, lo=task.lo, hi=task.hi,
                count=count, tables=tables)


def _dtype(symbol_width: int):
    return np.uint8 if symbol_width == 8 else np.uint16


def run_tasks(fn, tasks, workers: int) -> None:
    """Run ``fn(task)`` for every task with at most ``workers`` in flight.

    The first failure cancels whatever has not started and is re-raised.
    """
    if workers < 1:
        raise ValueError("worker count must be at least 1")
    if workers == 1 or len(tasks) <= 1:
        for t in tasks:
            fn(t)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, t) for t in tasks]
        done, pending = wait(futures, return_when=FIRST_EXCEPTION)
        for f in pending:
            f.cancel()
        for f in futures:
            if f.done() and not f.cancelled() and f.exception() is not None:
                raise f.exception()


def parallel_decode(container: RecoilContainer, workers: int = 1) -> np.ndarray:
    table = container.table
    table.validate()
    out = np.empty(table.count, dtype=_dtype(container.symbol_width))
    if table.count == 0:
        return out
    words = np.ascontiguousarray(container.words, dtype=np.uint16)
    tables = model_tables(container.model, out)
    batch = plan_batch(table)
    run_tasks(lambda c: decode_batch(out, words, container.model, table.lanes, batch, *c, tables=tables),
              chunk_bounds(batch.his - batch.los + 1, workers), workers)
    return out


# -- instrumented reference ----------------------------------------------------

class TraceEvent(NamedTuple):
    kind: str      # "init", "read" or "decode"
    group: int
    lane: int
    value: int     # anchor state, word offset, or symbol index
    phase: str     # "sync", "decode" or "cross"


def decode_split_reference(task: DecodeTask, words, model: QuantizedModel, lanes: int, count: int,
                           out: dict, *, trace: list | None = None) -> int:
    """Literal three-phase decode of one task; returns the final cursor.

    ``out`` maps each committed index to its symbol. ``trace`` receives
    :class:`TraceEvent` records for lane joins, word reads and decodes.
    """
    params = CodecParams(model.n)
    stream = Bitstream.for_reading(words)
    stream.p = task.cursor
    states: list[int | None] = [None] * lanes
    bottom = group_of(task.lo, lanes)
    for g in range(task.top_group, bottom - 1, -1):
        base = (g - 1) * lanes
        pass_phase = _phase(base + 1, task)
        for j in range(lanes - 1, -1, -1):
            if states[j] is None:
                if task.init_groups[j] != g:
                    continue
                states[j] = int(task.init_states[j])
                if trace is not None:
                    trace.append(TraceEvent("init", g, j + 1, states[j], pass_phase))
            if states[j] < params.L:
                if stream.p == 0:
                    raise BitstreamUnderflow("word stream exhausted while refilling")
                if trace is not None:
                    trace.append(TraceEvent("read", g, j + 1, stream.p - 1, pass_phase))
                states[j] = (states[j] << params.b) | stream.pop()
        for j in range(lanes):
            idx = base + j + 1
            if idx > count:
                break
            if states[j] is None:
                if task.lo <= idx <= task.hi:
                    raise SyncFailure(f"lane {j + 1} not initialized at index {idx}")
                continue
            s, states[j] = decode_step(states[j], model)
            if trace is not None:
                trace.append(TraceEvent("decode", g, j + 1, idx, _phase(idx, task)))
            if task.lo <= idx <= task.hi:
                out[idx] = s
    return stream.p


def _phase(idx: int, task: DecodeTask) -> str:
    if idx > task.hi:
        return "sync"
    return "decode" if idx > task.lower_boundary else "cross"
