"""Single-state rANS primitives.

These are the readable reference versions of the encode/decode step and the
two renormalization loops. The vectorised kernels in ``_kernels`` implement
the same arithmetic and are tested against these.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import BitstreamUnderflow, ZeroFrequencySymbol
from .model import QuantizedModel


@dataclass(frozen=True)
class CodecParams:
    n: int
    state_bits: int = 32
    lower_bound_bits: int = 16
    word_bits: int = 16

    def __post_init__(self):
        if not 1 <= self.n <= 16:
            raise ValueError(f"quantization level must be in 1..16, got {self.n}")
        if self.lower_bound_bits < self.n:
            raise ValueError("lower bound must be a multiple of 2**n")
        if self.word_bits < self.n:
            raise ValueError("word size must be at least n for single-step renormalization")
        if self.lower_bound_bits + self.word_bits > self.state_bits:
            raise ValueError("L * 2**b overflows the state width")

    @property
    def L(self) -> int:
        return 1 << self.lower_bound_bits

    @property
    def b(self) -> int:
        return self.word_bits


@dataclass
class Bitstream:
    """Word stack: encoding appends at ``p``, decoding reads below ``p``."""

    words: list[int] = field(default_factory=list)
    p: int = 0

    @classmethod
    def for_reading(cls, words) -> "Bitstream":
        words = [int(w) for w in words]
        return cls(words, len(words))

    def push(self, word: int) -> None:
        del self.words[self.p:]
        self.words.append(word)
        self.p += 1

    def pop(self) -> int:
        if self.p == 0:
            raise BitstreamUnderflow("bitstream exhausted")
        self.p -= 1
        return self.words[self.p]


def encode_step(x: int, s: int, model: QuantizedModel) -> int:
    f = model.freq(s)
    if f == 0:
        raise ZeroFrequencySymbol(f"symbol {s} has zero frequency")
    n = model.n
    return ((x // f) << n) + model.cum(s) + (x % f)


def decode_step(x: int, model: QuantizedModel) -> tuple[int, int]:
    n = model.n
    slot = x & ((1 << n) - 1)
    s = int(model.lookup[slot])
    return s, model.freq(s) * (x >> n) - model.cum(s) + slot


def renorm_threshold(s: int, model: QuantizedModel, params: CodecParams) -> int:
    return (params.L << params.b >> model.n) * model.freq(s)


def renorm_encode(x: int, s: int, model: QuantizedModel, out: Bitstream,
                  params: CodecParams | None = None, *, counter: list | None = None) -> int:
    """Shift words out of ``x`` until it may encode ``s``.

    ``counter``, when given, gets the number of emitted words appended.
    """
    params = params or CodecParams(model.n)
    if model.freq(s) == 0:
        raise ZeroFrequencySymbol(f"symbol {s} has zero frequency")
    limit = renorm_threshold(s, model, params)
    mask = (1 << params.b) - 1
    emitted = 0
    while x >= limit:
        out.push(x & mask)
        x >>= params.b
        emitted += 1
    if counter is not None:
        counter.append(emitted)
    return x


def renorm_decode(x: int, stream: Bitstream, params: CodecParams | None = None,
                  *, counter: list | None = None) -> int:
    params = params or CodecParams(16)
    reads = 0
    while x < params.L:
        x = (x << params.b) | stream.pop()
        reads += 1
    if counter is not None:
        counter.append(reads)
    return x


def renorm_encode_once(x: int, s: int, model: QuantizedModel, out: Bitstream,
                       params: CodecParams | None = None) -> int:
    """Single-branch renormalization, valid because ``b >= n``."""
    params = params or CodecParams(model.n)
    if model.freq(s) == 0:
        raise ZeroFrequencySymbol(f"symbol {s} has zero frequency")
    if x >= renorm_threshold(s, model, params):
        out.push(x & ((1 << params.b) - 1))
        x >>= params.b
        assert x < renorm_threshold(s, model, params)
    return x


def encode_serial(symbols, model: QuantizedModel, params: CodecParams | None = None):
    """Plain single-state encode. Returns ``(words, final_state)``."""
    params = params or CodecParams(model.n)
    out = Bitstream()
    x = params.L
    for s in symbols:
        x = renorm_encode(x, int(s), model, out, params)
        x = encode_step(x, int(s), model)
    return out.words, x


def decode_serial(words, final_state: int, count: int, model: QuantizedModel,
                  params: CodecParams | None = None):
    """Inverse of :func:`encode_serial`; returns ``(symbols, state, stream)``."""
    params = params or CodecParams(model.n)
    stream = Bitstream.for_reading(words)
    x = final_state
    out = []
    for _ in range(count):
        x = renorm_decode(x, stream, params)
        s, x = decode_step(x, model)
        out.append(s)
    x = renorm_decode(x, stream, params)
    out.reverse()
    return out, x, stream
