"""Canonical little-endian bit-packing of coefficient arrays.

Coefficient 0 occupies the lowest bits of byte 0; a module vector is packed
element by element. These encodings feed H(pk), H(c), view tags and
addresses, so they are part of the external format.
"""
from typing import Optional, Sequence, Union

import numpy as np

from pqstealth.core.errors import EncodingError


def packed_length(count: int, bits: int) -> int:
    return (count * bits + 7) // 8


def pack_bits(values, bits: int) -> bytes:
    arr = np.asarray(values, dtype=np.int64).reshape(-1)
    if not 1 <= bits <= 32:
        raise EncodingError(f"unsupported coefficient width {bits}")
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= (1 << bits)):
        raise EncodingError(f"coefficient out of range for {bits}-bit packing")
    if bits == 8:
        return arr.astype(np.uint8).tobytes()
    if bits == 16:
        return arr.astype("<u2").tobytes()
    bit_matrix = ((arr[:, np.newaxis] >> np.arange(bits)) & 1).astype(np.uint8)
    return np.packbits(bit_matrix.reshape(-1), bitorder="little").tobytes()


def unpack_bits(data: bytes, bits: int, count: int) -> np.ndarray:
    expected = packed_length(count, bits)
    if len(data) != expected:
        raise EncodingError(f"expected {expected} bytes for {count} x {bits}-bit values, got {len(data)}")
    raw = np.frombuffer(data, dtype=np.uint8)
    if bits == 8:
        return raw.astype(np.int64)
    if bits == 16:
        return np.frombuffer(data, dtype="<u2").astype(np.int64)
    flat = np.unpackbits(raw, bitorder="little")[:count * bits].reshape(count, bits)
    return flat.astype(np.int64) @ (np.int64(1) << np.arange(bits, dtype=np.int64))


def serialize(value, bits: int) -> bytes:
    """Pack a RingElement, ModuleVector or integer array at ``bits`` per coefficient."""
    coeffs = value.coeffs if hasattr(value, "coeffs") else value
    return pack_bits(coeffs, bits)


def deserialize(data: bytes, bits: int, shape: Union[int, Sequence[int]],
                bound: Optional[int] = None) -> np.ndarray:
    """Inverse of ``serialize``; ``bound`` rejects coefficients >= bound (e.g. q)."""
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    count = int(np.prod(shape))
    values = unpack_bits(data, bits, count)
    if bound is not None and values.size and int(values.max()) >= bound:
        bad = int(np.argmax(values >= bound))
        raise EncodingError(f"coefficient {bad} is {int(values[bad])}, not below {bound}")
    return values.reshape(shape)
