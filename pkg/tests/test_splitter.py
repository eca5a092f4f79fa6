import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recoil._kernels import NO_EVENT
from recoil.exceptions import IncompleteCoverage, InconsistentMetadata
from recoil.interleaved import RenormLog, interleaved_encode
from recoil.model import QuantizedModel
from recoil.splitter import (MAX_GROUP_SPREAD, SplitPoint, SplitTable, backward_scan, choose_splits,
                             combine_splits, drop_points, group_of, heuristic_cost)

from conftest import random_model, sample

L = 1 << 16

# offsets 0..6; the last five mirror the four-lane walkthrough
FIG_LOG = [(2, 3, 100), (1, 5, 101), (1, 9, 102), (3, 11, 103), (4, 12, 104), (2, 14, 105), (4, 16, 106)]


def test_backward_scan_example():
    log = RenormLog.from_events(FIG_LOG, 4)
    p = backward_scan(log, 6)
    assert p.word_offset == 6
    assert p.indices == (9, 14, 11, 16)
    assert p.states == (102, 105, 103, 106)  # offset-4 event of lane 4 skipped
    assert p.groups == (3, 4, 3, 4)
    assert p.max_group == 4
    assert (p.sync_start, p.boundary_index, p.sync_length) == (9, 16, 8)
    assert [a.lane for a in p.anchors] == [1, 2, 3, 4]


def test_backward_scan_same_group():
    log = RenormLog.from_events([(1, 5, 1), (2, 6, 2), (3, 7, 3), (4, 8, 4)], 4)
    p = backward_scan(log, 3)
    assert (p.sync_start, p.boundary_index) == (5, 8)
    assert set(p.groups) == {2}


def test_backward_scan_incomplete():
    log = RenormLog.from_events(FIG_LOG, 4)
    with pytest.raises(IncompleteCoverage):
        backward_scan(log, 3)


@given(st.lists(st.tuples(st.integers(1, 5), st.integers(0, 2)), min_size=1, max_size=80), st.data())
def test_backward_scan_matches_filter(steps, data):
    lanes, group, events = 5, 1, []
    for lane, advance in steps:
        group += advance
        index = (group - 1) * lanes + lane
        events.append((lane, index, len(events)))
    log = RenormLog.from_events(events, lanes)
    boundary = data.draw(st.integers(0, len(events) - 1))
    last = {}
    for lane, index, state in events[: boundary + 1]:
        last[lane] = (index, state)
    if len(last) < lanes:
        with pytest.raises(IncompleteCoverage):
            backward_scan(log, boundary)
        return
    p = backward_scan(log, boundary)
    assert p.indices == tuple(last[j][0] for j in range(1, lanes + 1))
    assert p.states == tuple(last[j][1] for j in range(1, lanes + 1))
    assert p.sync_start == min(v[0] for v in last.values())
    assert p.sync_start == log.sync_start[boundary]


@pytest.mark.parametrize("t,ts,target,cost", [(25, 0, 25, 0), (25, 3, 25, 3), (26, 1, 25, 1)])
def test_heuristic_cost(t, ts, target, cost):
    assert heuristic_cost(t, ts, target) == cost


def _table(n_points, lanes=2):
    pts = tuple(SplitPoint(10 * k, (1,) * lanes, (2 * k,) * lanes) for k in range(1, n_points + 1))
    return SplitTable(1000, 1000, lanes, pts, (L,) * lanes)


def test_combine_rule():
    t = _table(7)
    c = combine_splits(t, 4)
    assert [p.word_offset for p in c.points] == [20, 40, 60]
    assert c.n_splits == 4
    assert combine_splits(t, 8) is t and combine_splits(t, 100) is t
    assert combine_splits(t, 1).points == ()
    assert drop_points(t, [6, 0]).points == (t.points[0], t.points[6])


@given(st.integers(1, 3000), st.integers(1, 3000))
def test_combine_never_exceeds_target(m, target):
    t = _table(m - 1)
    assert combine_splits(t, target).n_splits <= max(target, 1)


def test_trivial_split_requests(rng):
    m = random_model(rng, 11, 20)
    enc = interleaved_encode(sample(rng, m, 2000), m, 8)
    t = choose_splits(enc.log, enc.count, len(enc.words), 8, 1, enc.final_states)
    assert t.points == () and t.final_states == enc.final_states
    single = QuantizedModel.from_frequencies({3: 1 << 11}, 11)
    enc = interleaved_encode(np.full(5000, 3, np.uint8), single, 8)
    assert choose_splits(enc.log, enc.count, 0, 8, 64, enc.final_states).n_splits == 1


def _brute_force_picks(log, count, lanes, n_splits):
    """Boundary events chosen by scanning every event inside each window."""
    target = -(-count // n_splits)
    events = list(log)
    last_index = events[-1].symbol_index
    prev_boundary, prev_sync, picks = 0, 1, []
    for m in range(1, n_splits):
        radius = 2 * lanes
        while True:
            lo, hi = max(prev_boundary + 1, m * target - radius), m * target + radius
            feasible = []
            for e in events:
                if not lo <= e.symbol_index <= hi:
                    continue
                try:
                    p = backward_scan(log, e.word_offset)
                except IncompleteCoverage:
                    continue
                if p.sync_start > prev_boundary and min(p.groups) >= 1 \
                        and p.max_group - min(p.groups) <= MAX_GROUP_SPREAD:
                    t = e.symbol_index - prev_sync + 1
                    feasible.append((heuristic_cost(t, p.sync_length, target), e.word_offset, p))
            if feasible or (lo <= prev_boundary + 1 and hi >= last_index):
                break
            radius *= 2
        if feasible:
            _, _, p = min(feasible, key=lambda c: (c[0], c[1]))
            picks.append(p)
            prev_boundary, prev_sync = p.boundary_index, p.sync_start
    return picks


@pytest.mark.parametrize("seed", range(3))
def test_choose_splits_balanced_and_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, 11, 50)
    data = sample(rng, m, 10_000)
    enc = interleaved_encode(data, m, 32)
    table = choose_splits(enc.log, enc.count, len(enc.words), 32, 8, enc.final_states)
    table.validate()
    assert table.n_splits == 8
    sizes = [hi - lo + 1 for lo, hi in table.committed_ranges()]
    assert sum(sizes) == 10_000 and max(sizes) <= 2 * 10_000 / 8
    assert list(table.points) == _brute_force_picks(enc.log, enc.count, 32, 8)


@given(st.integers(0, 2**32), st.integers(1, 6), st.integers(0, 400), st.integers(2, 12))
def test_choose_splits_matches_brute_force_fuzzed(seed, lanes, size, n_splits):
    rng = np.random.default_rng(seed)
    m = random_model(rng, int(rng.integers(4, 17)), int(rng.integers(1, 16)))
    enc = interleaved_encode(sample(rng, m, size), m, lanes)
    if len(enc.log) == 0:
        return
    table = choose_splits(enc.log, enc.count, len(enc.words), lanes, n_splits, enc.final_states)
    assert list(table.points) == _brute_force_picks(enc.log, enc.count, lanes, n_splits)


@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(0, 800), st.integers(1, 40))
def test_choose_splits_structure(seed, lanes, size, n_splits):
    rng = np.random.default_rng(seed)
    m = random_model(rng, 11, int(rng.integers(1, 30)))
    enc = interleaved_encode(sample(rng, m, size), m, lanes)
    table = choose_splits(enc.log, enc.count, len(enc.words), lanes, n_splits, enc.final_states)
    table.validate()
    assert table.n_splits <= n_splits
    offsets = [p.word_offset for p in table.points]
    assert offsets == sorted(set(offsets))
    for p in table.points:
        assert all(s < L for s in p.states)
        assert enc.log[p.word_offset].symbol_index == p.boundary_index


def test_validate_rejects_overlap():
    a = SplitPoint(5, (1, 1), (3, 3))
    b = SplitPoint(6, (1, 1), (3, 4))
    with pytest.raises(InconsistentMetadata):
        SplitTable(100, 50, 2, (a, b), (L, L)).validate()
    with pytest.raises(InconsistentMetadata):
        SplitTable(100, 50, 2, (SplitPoint(60, (1, 1), (3, 3)),), (L, L)).validate()
    with pytest.raises(InconsistentMetadata):
        SplitTable(100, 50, 2, (), (L,)).validate()
