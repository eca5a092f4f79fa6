"""Interleaved rANS with split metadata for parallel, decoder-adaptive decoding."""

from .conventional import PartitionedContainer, conventional_decode, conventional_encode
from .decoder import parallel_decode
from .estimator import ConventionalCodec, RecoilCodec, combine, decode
from .exceptions import (BadMagic, BitstreamUnderflow, ContainerError, DecodeError, InconsistentMetadata,
                         ModelError, RecoilError, SyncFailure, TruncatedContainer)
from .interleaved import interleaved_decode, interleaved_encode
from .metadata import combine_container, read_container, write_container
from .model import QuantizedModel, histogram, quantize_model
from .splitter import SplitPoint, SplitTable, choose_splits, combine_splits

__all__ = [
    "BadMagic", "BitstreamUnderflow", "ContainerError", "ConventionalCodec", "DecodeError",
    "InconsistentMetadata", "ModelError", "PartitionedContainer", "QuantizedModel", "RecoilCodec",
    "RecoilError", "SplitPoint", "SplitTable", "SyncFailure", "TruncatedContainer", "choose_splits",
    "combine", "combine_container", "combine_splits", "conventional_decode", "conventional_encode",
    "decode", "histogram", "interleaved_decode", "interleaved_encode", "parallel_decode",
    "quantize_model", "read_container", "write_container",
]
