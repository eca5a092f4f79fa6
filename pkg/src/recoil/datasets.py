"""Seeded synthetic corpora for tests and benchmarks."""

import numpy as np

DEFAULT_SEED = 20230325
MB = 1 << 20

_LETTERS = np.frombuffer(b"etaoinshrdlcumwfgypbvkjxqz", dtype=np.uint8)
_PUNCT = np.frombuffer(b"..,,,;:!?", dtype=np.uint8)


def exponential_bytes(lam: float, size: int = 10 * MB, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Bytes ``min(255, floor(256 * X))`` with ``X ~ Exp(rate=lam)``.

    Larger ``lam`` concentrates mass near zero and compresses better.
    """
    rng = np.random.default_rng([seed, int(lam * 1000)])
    x = np.floor(rng.exponential(256.0 / lam, size))
    return np.minimum(x, 255).astype(np.uint8)


def text_like(size: int = MB, seed: int = DEFAULT_SEED, vocabulary: int = 5000) -> np.ndarray:
    """ASCII prose stand-in: Zipf-distributed pseudo-words, spaces, punctuation, newlines."""
    rng = np.random.default_rng([seed, 7])
    lengths = np.clip(rng.poisson(4.0, vocabulary) + 1, 1, 14)
    letter_p = 1.0 / np.arange(1, len(_LETTERS) + 1) ** 0.9
    letter_p /= letter_p.sum()
    words = [bytes(rng.choice(_LETTERS, n, p=letter_p)) for n in lengths]
    rank_p = 1.0 / np.arange(1, vocabulary + 1) ** 1.07
    rank_p /= rank_p.sum()

    parts, total = [], 0
    while total < size:
        picks = rng.choice(vocabulary, 4096, p=rank_p)
        tails = rng.random(4096)
        chunk = []
        for w, u in zip(picks, tails):
            chunk.append(words[w])
            if u < 0.06:
                chunk.append(bytes([rng.choice(_PUNCT)]))
            chunk.append(b"\n" if u > 0.985 else b" ")
        block = b"".join(chunk)
        parts.append(block)
        total += len(block)
    return np.frombuffer(b"".join(parts)[:size], dtype=np.uint8).copy()


def constant(size: int = MB, value: int = 65) -> np.ndarray:
    return np.full(size, value, dtype=np.uint8)


def alternating(size: int = MB, a: int = 0, b: int = 1) -> np.ndarray:
    out = np.full(size, a, dtype=np.uint8)
    out[1::2] = b
    return out
