"""Estimator-style front end.

``fit`` learns the static model from a symbol sequence, ``transform``
encodes to container bytes and ``inverse_transform`` decodes them again::

    codec = RecoilCodec(splits=2176).fit(data)
    blob = codec.transform(data)
    assert (codec.inverse_transform(blob) == data).all()
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .conventional import MAGIC as CONVENTIONAL_MAGIC
from .conventional import PartitionedContainer, conventional_decode, conventional_encode
from .decoder import parallel_decode
from .exceptions import BadMagic
from .interleaved import DEFAULT_LANES, EncodedStream, interleaved_encode
from .metadata import MAGIC as RECOIL_MAGIC
from .metadata import combine_container, read_container, write_container
from .model import QuantizedModel, histogram, quantize_model
from .splitter import SplitTable, choose_splits
from .validation import (check_lanes, check_positive_int, check_quant_bits, check_symbol_width,
                         check_symbols)

DEFAULT_QUANT_BITS = 11


class _CodecBase(TransformerMixin, BaseEstimator):

    def _check_params(self):
        check_lanes(self.lanes)
        check_quant_bits(self.quant_bits)
        check_symbol_width(self.symbol_width)
        check_positive_int(self.threads, "threads")

    def fit(self, X, y=None):
        """Build the quantized model from the symbol histogram of ``X``."""
        self._check_params()
        X = check_symbols(X, self.symbol_width)
        hist = histogram(X)
        self.model_ = quantize_model(hist, self.quant_bits) if hist else QuantizedModel.empty(self.quant_bits)
        self.n_symbols_seen_ = len(X)
        return self

    def decode(self, data) -> np.ndarray:
        return decode(data, threads=self.threads)

    def inverse_transform(self, X) -> np.ndarray:
        return self.decode(X)


class RecoilCodec(_CodecBase):
    """One interleaved stream plus split metadata for parallel decoding.

    Parameters
    ----------
    lanes : int, default=32
        Number of interleaved rANS states.
    quant_bits : int, default=11
        Probability quantization level ``n``.
    splits : int, default=1
        Requested split count; fewer are emitted when the stream has too
        few renormalization points.
    symbol_width : {8, 16}, default=8
    threads : int, default=1
        Decode workers used by :meth:`inverse_transform`.
    """

    def __init__(self, lanes=DEFAULT_LANES, quant_bits=DEFAULT_QUANT_BITS, splits=1,
                 symbol_width=8, threads=1):
        self.lanes = lanes
        self.quant_bits = quant_bits
        self.splits = splits
        self.symbol_width = symbol_width
        self.threads = threads

    def encode(self, X) -> EncodedStream:
        """Encode ``X`` and keep the renormalization log for split placement."""
        check_is_fitted(self, "model_")
        X = check_symbols(X, self.symbol_width)
        return interleaved_encode(X, self.model_, self.lanes)

    def split(self, encoded: EncodedStream, splits: int | None = None) -> SplitTable:
        splits = check_positive_int(self.splits if splits is None else splits, "splits")
        return choose_splits(encoded.log, encoded.count, len(encoded.words), encoded.lanes, splits,
                             encoded.final_states)

    def transform(self, X) -> bytes:
        self._check_params()
        encoded = self.encode(X)
        table = self.split(encoded)
        return write_container(table, self.model_, encoded.words, symbol_width=self.symbol_width)


class ConventionalCodec(_CodecBase):
    """Baseline: ``partitions`` independently encoded interleaved streams."""

    def __init__(self, lanes=DEFAULT_LANES, quant_bits=DEFAULT_QUANT_BITS, partitions=1,
                 symbol_width=8, threads=1):
        self.lanes = lanes
        self.quant_bits = quant_bits
        self.partitions = partitions
        self.symbol_width = symbol_width
        self.threads = threads

    def transform(self, X) -> bytes:
        self._check_params()
        check_is_fitted(self, "model_")
        parts = check_positive_int(self.partitions, "partitions")
        X = check_symbols(X, self.symbol_width)
        container = conventional_encode(X, self.model_, self.lanes, parts, symbol_width=self.symbol_width)
        return container.to_bytes()


def decode(data, threads: int = 1) -> np.ndarray:
    """Decode either container kind, dispatching on its magic."""
    magic = bytes(data[:4])
    if magic == RECOIL_MAGIC:
        return parallel_decode(read_container(data), threads)
    if magic == CONVENTIONAL_MAGIC:
        return conventional_decode(PartitionedContainer.from_bytes(data), threads)
    raise BadMagic(f"unrecognized container magic {magic!r}")


def combine(data, splits: int) -> bytes:
    """Shrink a split container to at most ``splits`` splits."""
    if bytes(data[:4]) != RECOIL_MAGIC:
        raise BadMagic("only split containers can be combined")
    return combine_container(data, check_positive_int(splits, "splits"))
