import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from recoil.exceptions import AlphabetTooLarge, EmptyInput
from recoil.model import QuantizedModel, histogram, lookup_symbol, quantize_model, shannon_bits

from conftest import A, B, C, D

hists = st.dictionaries(st.integers(0, 255), st.integers(0, 10_000), min_size=1, max_size=60)


def test_uniform_four_symbols():
    m = quantize_model({A: 1, B: 1, C: 1, D: 1}, 2)
    assert m.frequencies == {A: 1, B: 1, C: 1, D: 1}
    assert [m.cum(s) for s in (A, B, C, D)] == [0, 1, 2, 3]


def test_exact_proportional_split():
    m = quantize_model({A: 3, B: 1}, 2)
    assert m.frequencies == {A: 3, B: 1}
    assert (m.cum(A), m.cum(B)) == (0, 3)


def test_single_symbol_takes_full_range():
    m = quantize_model({A: 5}, 4)
    assert m.frequencies == {A: 16}
    assert m.cum(A) == 0


@pytest.mark.parametrize("slot,expected", [(0, A), (8, B), (15, C)])
def test_lookup_examples(abc_model, slot, expected):
    assert lookup_symbol(abc_model, slot) == expected


def test_errors():
    with pytest.raises(EmptyInput):
        quantize_model({}, 11)
    with pytest.raises(EmptyInput):
        quantize_model({A: 0}, 11)
    with pytest.raises(AlphabetTooLarge):
        quantize_model({s: 1 for s in range(5)}, 2)
    with pytest.raises(ValueError):
        QuantizedModel.from_frequencies({A: 3}, 2)


def test_histogram_counts():
    assert histogram(np.array([1, 1, 5], dtype=np.uint8)) == {1: 2, 5: 1}
    assert histogram(np.array([], dtype=np.uint8)) == {}


@given(hists, st.integers(6, 16))
def test_invariants(hist, n):
    present = {s: c for s, c in hist.items() if c > 0}
    if not present:
        return
    m = quantize_model(hist, n)
    f = m.frequencies
    assert sum(f.values()) == 1 << n
    assert set(f) == set(present)
    assert min(f.values()) >= 1
    # CDF is the running sum in symbol order
    running = 0
    for s in sorted(f):
        assert m.cum(s) == running
        running += f[s]
    # lookup agrees with a linear CDF scan on every slot
    scan = np.empty(1 << n, dtype=np.int64)
    for s in sorted(f):
        scan[m.cum(s):m.cum(s) + f[s]] = s
    assert np.array_equal(m.lookup[: 1 << n], scan)
    # order preservation
    for a in present:
        for b in present:
            if present[a] > present[b]:
                assert f[a] >= f[b]
    # idempotent re-quantization
    assert quantize_model(f, n) == m


def test_shannon_bits():
    assert shannon_bits({A: 1, B: 1}) == pytest.approx(2.0)
    assert shannon_bits({}) == 0.0
