"""Input checks shared by the estimators and the command line."""

import numbers

import numpy as np
from sklearn.utils import column_or_1d

from .interleaved import DEFAULT_LANES


def check_symbols(X, symbol_width: int = 8) -> np.ndarray:
    """Coerce ``X`` to a contiguous 1-D array of unsigned symbols.

    Byte-like input is reinterpreted (little-endian pairs for 16-bit
    symbols); anything else must be integer-valued and within range.
    """
    check_symbol_width(symbol_width)
    dtype = np.dtype(np.uint8) if symbol_width == 8 else np.dtype("<u2")
    if isinstance(X, (bytes, bytearray, memoryview)):
        raw = memoryview(X).cast("B")
        if len(raw) % dtype.itemsize:
            raise ValueError(f"byte length {len(raw)} is not a multiple of {dtype.itemsize}")
        return np.frombuffer(raw, dtype=dtype).astype(dtype.newbyteorder("="), copy=False)
    arr = np.asarray(X)
    if arr.size == 0:
        return np.empty(0, dtype=dtype.newbyteorder("="))
    arr = column_or_1d(arr)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.floating) or not np.all(np.mod(arr, 1) == 0):
            raise ValueError(f"symbols must be integers, got dtype {arr.dtype}")
    if arr.min() < 0 or arr.max() >= 1 << symbol_width:
        raise ValueError(f"symbols must lie in [0, {1 << symbol_width})")
    return np.ascontiguousarray(arr.astype(dtype.newbyteorder("=")))


def check_symbol_width(symbol_width) -> int:
    if symbol_width not in (8, 16):
        raise ValueError(f"symbol_width must be 8 or 16, got {symbol_width!r}")
    return symbol_width


def check_positive_int(value, name: str, upper: int | None = None) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    if upper is not None and value > upper:
        raise ValueError(f"{name} must be at most {upper}, got {value!r}")
    return int(value)


def check_lanes(lanes=DEFAULT_LANES) -> int:
    return check_positive_int(lanes, "lanes", upper=0xFFFF)


def check_quant_bits(n) -> int:
    check_positive_int(n, "quant_bits", upper=16)
    return int(n)
