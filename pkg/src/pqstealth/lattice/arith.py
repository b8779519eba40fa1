"""Exact integer arithmetic over Z_q: reduction, rounding, compression.

Every function accepts either a Python int or an integer numpy array and
returns the same kind. Nothing here touches floating point.
"""
from typing import Union

import numpy as np

from pqstealth.core.errors import ParameterError

IntLike = Union[int, np.ndarray]


def coeff_bits(q: int) -> int:
    """ceil(log2 q) for q >= 2."""
    return (q - 1).bit_length()


def mod_reduce(r: IntLike, q: int) -> IntLike:
    """Representative of r in [0, q), correct for negative r."""
    if q < 1:
        raise ParameterError(f"modulus must be >= 1, got {q}")
    if isinstance(r, np.ndarray):
        return np.mod(r, q)
    return r % q


def symmetric_mod(r: IntLike, q: int) -> IntLike:
    """Representative of r in (-q/2, q/2] for even q, [-(q-1)/2, (q-1)/2] for odd q."""
    if q < 2:
        raise ParameterError(f"symmetric reduction needs q >= 2, got {q}")
    r = mod_reduce(r, q)
    # 2r <= q is r <= q/2 for even q and r <= (q-1)/2 for odd q
    if isinstance(r, np.ndarray):
        return np.where(2 * r <= q, r, r - q)
    return r if 2 * r <= q else r - q


def round_div(a: IntLike, b: int) -> IntLike:
    """Round a/b to the nearest integer, ties going up: floor((2a + b) / 2b)."""
    return (2 * a + b) // (2 * b)


def _check_width(d: int, q: int):
    if not 1 <= d < coeff_bits(q):
        raise ParameterError(f"compression width d={d} must satisfy 1 <= d < {coeff_bits(q)} for q={q}")


def compress(x: IntLike, d: int, q: int) -> IntLike:
    """Compress_q(x, d) = round(2^d * x / q) mod 2^d."""
    _check_width(d, q)
    return round_div((1 << d) * x, q) % (1 << d)


def decompress(y: IntLike, d: int, q: int) -> IntLike:
    """Decompress_q(y, d) = round(q * y / 2^d) mod q."""
    _check_width(d, q)
    return round_div(q * y, 1 << d) % q


def compression_bound(d: int, q: int) -> int:
    """Worst-case round-trip error round(q / 2^(d+1))."""
    return round_div(q, 1 << (d + 1))


def inf_norm(x, q: int = None) -> int:
    """Largest centred absolute coefficient of a ring element, vector or array."""
    if hasattr(x, "coeffs"):
        q = x.q if q is None else q
        x = x.coeffs
    if q is None:
        raise ParameterError("inf_norm of a raw array needs q")
    arr = np.asarray(x, dtype=np.int64)
    if arr.size == 0:
        return 0
    return int(np.max(np.abs(symmetric_mod(arr, q))))
