"""Split placement over an encoded stream, and split combining."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._kernels import NO_EVENT
from .exceptions import IncompleteCoverage, InconsistentMetadata
from .interleaved import RenormLog

# group-id differences are stored in a series with a 4-bit width field
MAX_GROUP_SPREAD = (1 << 16) - 1


class LaneAnchor(NamedTuple):
    lane: int
    state: int
    group_id: int


def group_of(index: int, lanes: int) -> int:
    """1-based symbol group holding 1-based symbol ``index``."""
    return (index - 1) // lanes + 1


@dataclass(frozen=True)
class SplitPoint:
    """Per-lane anchors at a split boundary.

    ``states[j]`` and ``groups[j]`` belong to lane ``j + 1``; ``word_offset``
    is the boundary word (the last word of the split below it).
    """

    word_offset: int
    states: tuple[int, ...]
    groups: tuple[int, ...]

    @property
    def lanes(self) -> int:
        return len(self.states)

    @property
    def anchors(self) -> list[LaneAnchor]:
        return [LaneAnchor(j + 1, s, g) for j, (s, g) in enumerate(zip(self.states, self.groups))]

    @cached_property
    def indices(self) -> tuple[int, ...]:
        w = self.lanes
        return tuple((g - 1) * w + j + 1 for j, g in enumerate(self.groups))

    @property
    def max_group(self) -> int:
        return max(self.groups)

    @property
    def boundary_index(self) -> int:
        return max(self.indices)

    @property
    def sync_start(self) -> int:
        return min(self.indices)

    @property
    def sync_length(self) -> int:
        return self.boundary_index - self.sync_start + 1


@dataclass(frozen=True)
class SplitTable:
    count: int
    n_words: int
    lanes: int
    points: tuple[SplitPoint, ...]
    final_states: tuple[int, ...]

    @property
    def n_splits(self) -> int:
        return len(self.points) + 1

    def committed_ranges(self) -> list[tuple[int, int]]:
        """Inclusive 1-based output range owned by each split, bottom to top."""
        starts = [1] + self.arrays.sync_start.tolist() + [self.count + 1]
        return [(starts[k], starts[k + 1] - 1) for k in range(len(starts) - 1)]

    @cached_property
    def arrays(self) -> "SplitArrays":
        """Column view of the split points."""
        k, w = len(self.points), self.lanes
        if any(len(p.states) != w or len(p.groups) != w for p in self.points):
            raise InconsistentMetadata(f"split points must carry {w} anchors each")
        groups = np.array([p.groups for p in self.points], dtype=np.int64).reshape(k, w)
        states = np.array([p.states for p in self.points], dtype=np.int64).reshape(k, w)
        offsets = np.array([p.word_offset for p in self.points], dtype=np.int64)
        indices = (groups - 1) * w + np.arange(1, w + 1)
        return SplitArrays(offsets, states, groups, indices.min(axis=1, initial=np.iinfo(np.int64).max),
                           indices.max(axis=1, initial=0), groups.max(axis=1, initial=0))

    def validate(self) -> None:
        """Structural checks that need only the metadata."""
        if len(self.final_states) != self.lanes:
            raise InconsistentMetadata("final state count differs from lane count")
        if not self.points:
            return
        a = self.arrays
        prev_offsets = np.concatenate([[-1], a.offsets[:-1]])
        bad = np.flatnonzero((a.offsets <= prev_offsets) | (a.offsets >= self.n_words))
        if bad.size:
            k = int(bad[0])
            raise InconsistentMetadata(f"split point {k + 1} word offset {a.offsets[k]} out of order")
        bad = np.flatnonzero(a.groups.min(axis=1) < 1)
        if bad.size:
            raise InconsistentMetadata(f"split point {int(bad[0]) + 1} has a group id below 1")
        prev_boundary = np.concatenate([[0], a.boundary_index[:-1]])
        bad = np.flatnonzero(a.sync_start <= prev_boundary)
        if bad.size:
            raise InconsistentMetadata(
                f"split point {int(bad[0]) + 1} synchronization section overlaps the previous boundary")
        if a.boundary_index[-1] > self.count:
            raise InconsistentMetadata(f"split point {len(self.points)} lies beyond the last symbol")


class SplitArrays(NamedTuple):
    offsets: np.ndarray
    states: np.ndarray
    groups: np.ndarray
    sync_start: np.ndarray
    boundary_index: np.ndarray
    max_group: np.ndarray


def backward_scan(log: RenormLog, boundary: int) -> SplitPoint:
    """Walk the log down from ``boundary``, keeping the first event per lane."""
    lanes = log.lanes
    states: list[int | None] = [None] * lanes
    indices: list[int | None] = [None] * lanes
    missing = lanes
    e = boundary
    while missing and e >= 0:
        j = int(log.lane[e]) - 1
        if indices[j] is None:
            indices[j] = int(log.symbol_index[e])
            states[j] = int(log.post_state[e])
            missing -= 1
        e -= 1
    if missing:
        absent = [j + 1 for j in range(lanes) if indices[j] is None]
        raise IncompleteCoverage(f"lanes {absent} have no event at or before offset {boundary}")
    groups = tuple(group_of(i, lanes) for i in indices)
    return SplitPoint(boundary, tuple(states), groups)


def heuristic_cost(t: int, t_sync: int, target: int) -> int:
    return abs(t - target) + abs(t - t_sync - target)


def choose_splits(log: RenormLog, count: int, n_words: int, lanes: int, n_splits: int,
                  final_states=()) -> SplitTable:
    """Greedy left-to-right boundary placement.

    Boundary ``m`` looks at events whose symbol index lies within a window
    around ``m * ceil(count / n_splits)`` (doubling until something feasible
    turns up) and keeps the cheapest, earliest on ties. Anchoring the window
    to the cumulative target rather than to the previous split keeps the
    shortfall of one split from carrying into the next. ``t`` counts what the
    task entering at the candidate decodes (previous synchronization section
    included), ``t_sync`` the candidate's own synchronization section.
    Boundaries with no feasible candidate are skipped.
    """
    if n_splits < 1:
        raise ValueError("split count must be at least 1")
    points: list[SplitPoint] = []
    if n_splits == 1 or len(log) == 0 or count == 0:
        return SplitTable(count, n_words, lanes, (), tuple(final_states))

    target = math.ceil(count / n_splits)
    idx = log.symbol_index
    sync = log.sync_start
    last_index = int(idx[-1])
    prev_boundary, prev_sync = 0, 1

    def scored(lo: int, hi: int):
        a, b = np.searchsorted(idx, [lo, hi + 1])
        s = sync[a:b]
        ok = (s != NO_EVENT) & (s > prev_boundary)
        ok &= (idx[a:b] - 1) // lanes - (s - 1) // lanes <= MAX_GROUP_SPREAD
        cand = np.arange(a, b)[ok]
        t = idx[cand] - prev_sync + 1
        t_sync = idx[cand] - sync[cand] + 1
        return cand, np.abs(t - target) + np.abs(t - t_sync - target)

    for m in range(1, n_splits):
        centre = m * target
        radius = 2 * lanes
        while True:
            lo, hi = max(prev_boundary + 1, centre - radius), centre + radius
            cand, cost = scored(lo, hi)
            if len(cand) or (lo <= prev_boundary + 1 and hi >= last_index):
                break
            radius *= 2
        if not len(cand):
            continue
        pick = int(cand[int(np.argmin(cost))])
        point = backward_scan(log, pick)
        assert point.sync_start == int(sync[pick]) and point.boundary_index == int(idx[pick])
        points.append(point)
        prev_boundary, prev_sync = point.boundary_index, point.sync_start
    return SplitTable(count, n_words, lanes, tuple(points), tuple(final_states))


def combine_splits(table: SplitTable, target: int) -> SplitTable:
    """Keep every ``k``-th split point so at most ``target`` splits remain."""
    if target < 1:
        raise ValueError("target split count must be at least 1")
    if target >= table.n_splits:
        return table
    k = -(-table.n_splits // target)
    kept = table.points[k - 1::k]
    return SplitTable(table.count, table.n_words, table.lanes, tuple(kept), table.final_states)


def drop_points(table: SplitTable, keep) -> SplitTable:
    """Table restricted to the split points at the given 0-based positions."""
    kept = tuple(table.points[i] for i in sorted(keep))
    return SplitTable(table.count, table.n_words, table.lanes, kept, table.final_states)
