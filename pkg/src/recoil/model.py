"""Static quantized probability models."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import AlphabetTooLarge, EmptyInput

MAX_QUANT_BITS = 16


def histogram(symbols: np.ndarray) -> dict[int, int]:
    """Occurrence counts of every symbol value present in ``symbols``."""
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        return {}
    counts = np.bincount(symbols.ravel().astype(np.int64))
    present = np.flatnonzero(counts)
    return {int(s): int(counts[s]) for s in present}


@dataclass(frozen=True, eq=False)
class QuantizedModel:
    """Quantized PDF/CDF over a symbol alphabet at quantization level ``n``.

    ``freqs`` and ``cdf`` are dense arrays indexed by symbol value; absent
    symbols have frequency 0. ``lookup`` maps each of the ``2**n`` slots to
    the symbol owning it.
    """

    n: int
    freqs: np.ndarray
    cdf: np.ndarray
    lookup: np.ndarray = field(repr=False)

    @classmethod
    def from_frequencies(cls, freqs: Mapping[int, int], n: int) -> "QuantizedModel":
        if not 1 <= n <= MAX_QUANT_BITS:
            raise ValueError(f"quantization level must be in 1..{MAX_QUANT_BITS}, got {n}")
        items = sorted((int(s), int(f)) for s, f in freqs.items() if f)
        size = (items[-1][0] + 1) if items else 1
        dense = np.zeros(size, dtype=np.uint32)
        for s, f in items:
            if s < 0:
                raise ValueError(f"negative symbol value {s}")
            dense[s] = f
        total = int(dense.sum(dtype=np.uint64))
        if items and total != 1 << n:
            raise ValueError(f"frequencies sum to {total}, expected {1 << n}")
        cdf = np.zeros(size, dtype=np.uint32)
        cdf[1:] = np.cumsum(dense[:-1], dtype=np.uint64)
        lookup = np.repeat(np.arange(size, dtype=np.uint32), dense.astype(np.int64))
        if not items:
            lookup = np.zeros(1 << n, dtype=np.uint32)
        return cls(n=n, freqs=dense, cdf=cdf, lookup=lookup)

    @classmethod
    def empty(cls, n: int) -> "QuantizedModel":
        """Model with no symbols; only valid for zero-length inputs."""
        return cls.from_frequencies({}, n)

    @property
    def symbols(self) -> list[int]:
        return [int(s) for s in np.flatnonzero(self.freqs)]

    @property
    def frequencies(self) -> dict[int, int]:
        return {s: int(self.freqs[s]) for s in self.symbols}

    def freq(self, symbol: int) -> int:
        return int(self.freqs[symbol]) if 0 <= symbol < len(self.freqs) else 0

    def cum(self, symbol: int) -> int:
        return int(self.cdf[symbol]) if 0 <= symbol < len(self.cdf) else 1 << self.n

    def dense_tables(self, alphabet_size: int) -> tuple[np.ndarray, np.ndarray]:
        """``(freqs, cdf)`` padded to ``alphabet_size`` entries for kernel lookups."""
        if alphabet_size < len(self.freqs):
            raise ValueError("alphabet_size smaller than the model's largest symbol")
        freqs = np.zeros(alphabet_size, dtype=np.uint32)
        cdf = np.full(alphabet_size, 1 << self.n, dtype=np.uint32)
        freqs[: len(self.freqs)] = self.freqs
        cdf[: len(self.cdf)] = self.cdf
        return freqs, cdf

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantizedModel):
            return NotImplemented
        return self.n == other.n and self.frequencies == other.frequencies

    def __hash__(self) -> int:
        return hash((self.n, tuple(sorted(self.frequencies.items()))))


def quantize_model(hist: Mapping[int, int], n: int) -> QuantizedModel:
    """Scale a histogram to frequencies summing to exactly ``2**n``.

    Largest-remainder apportionment: floor of the proportional share, the
    deficit handed out by descending remainder, then every present symbol
    lifted to at least 1 by taking units from the currently largest
    frequencies.
    """
    if not 1 <= n <= MAX_QUANT_BITS:
        raise ValueError(f"quantization level must be in 1..{MAX_QUANT_BITS}, got {n}")
    items = sorted((int(s), int(c)) for s, c in hist.items() if c > 0)
    if not items:
        raise EmptyInput("cannot build a model from an empty histogram")
    scale = 1 << n
    if len(items) > scale:
        raise AlphabetTooLarge(f"{len(items)} distinct symbols do not fit quantization level {n}")

    syms = [s for s, _ in items]
    counts = [c for _, c in items]
    total = sum(counts)
    # exact integer arithmetic: share = c * scale / total
    freqs = [c * scale // total for c in counts]
    rems = [c * scale % total for c in counts]
    deficit = scale - sum(freqs)
    order = sorted(range(len(items)), key=lambda k: (-rems[k], -counts[k], syms[k]))
    for k in order[:deficit]:
        freqs[k] += 1

    excess = 0
    for k, f in enumerate(freqs):
        if f == 0:
            freqs[k] = 1
            excess += 1
    heap = [(-f, c, -s, k) for k, (s, c, f) in enumerate(zip(syms, counts, freqs))]
    heapq.heapify(heap)
    while excess:
        _, c, neg_s, k = heapq.heappop(heap)
        freqs[k] -= 1
        excess -= 1
        heapq.heappush(heap, (-freqs[k], c, neg_s, k))

    return QuantizedModel.from_frequencies(dict(zip(syms, freqs)), n)


def lookup_symbol(model: QuantizedModel, slot: int) -> int:
    return int(model.lookup[slot])


def shannon_bits(hist: Mapping[int, int]) -> float:
    """Empirical entropy of a histogram, in total bits."""
    counts = np.array([c for c in hist.values() if c > 0], dtype=np.float64)
    if counts.size == 0:
        return 0.0
    p = counts / counts.sum()
    return float(-(counts * np.log2(p)).sum())
