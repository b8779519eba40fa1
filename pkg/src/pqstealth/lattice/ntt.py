"""Negacyclic number-theoretic transform for q = 3329, n = 256.

The transform stops at degree-one residues (128 pairs), so products in the
NTT domain use ``basemul`` on coefficient pairs. Every function works on
arrays of shape (..., 256) and transforms along the last axis.

The butterflies run once at import, on the identity, to build the forward
and inverse transform matrices. ``ntt`` and ``ntt_inverse`` are then a
single float64 matrix product each, exact because 256 * (q - 1)^2 < 2^53.
"""
import numpy as np

Q = 3329
N = 256
ROOT = 17  # primitive 256-th root of unity mod Q
N_INV = pow(128, -1, Q)


def _bitrev7(i: int) -> int:
    return int(f"{i:07b}"[::-1], 2)


ZETAS = np.array([pow(ROOT, _bitrev7(i), Q) for i in range(128)], dtype=np.int64)
GAMMAS = np.array([pow(ROOT, 2 * _bitrev7(i) + 1, Q) for i in range(128)], dtype=np.int64)


def butterfly_ntt(f: np.ndarray) -> np.ndarray:
    """Cooley-Tukey layers, 128 down to 2."""
    f = np.array(f, dtype=np.int64, copy=True) % Q
    lead = f.shape[:-1]
    length, blocks = 128, 1
    while length >= 2:
        view = f.reshape(lead + (blocks, 2, length))
        zetas = ZETAS[blocks:2 * blocks].reshape((blocks, 1))
        t = (zetas * view[..., 1, :]) % Q
        hi = (view[..., 0, :] - t) % Q
        lo = (view[..., 0, :] + t) % Q
        view[..., 0, :] = lo
        view[..., 1, :] = hi
        length //= 2
        blocks *= 2
    return f


def butterfly_ntt_inverse(f: np.ndarray) -> np.ndarray:
    """Gentleman-Sande layers, 2 up to 128, then scaling by 1/128."""
    f = np.array(f, dtype=np.int64, copy=True) % Q
    lead = f.shape[:-1]
    length, blocks = 2, 64
    while length <= 128:
        view = f.reshape(lead + (blocks, 2, length))
        # zetas are consumed from the top of the table downwards
        zetas = ZETAS[2 * blocks - 1:blocks - 1:-1].reshape((blocks, 1))
        lo = view[..., 0, :].copy()
        hi = view[..., 1, :]
        view[..., 0, :] = (lo + hi) % Q
        view[..., 1, :] = (zetas * (hi - lo)) % Q
        length *= 2
        blocks //= 2
    return (f * N_INV) % Q


# row j is the transform of the j-th unit vector
_FORWARD = butterfly_ntt(np.eye(N, dtype=np.int64)).astype(np.float64)
_INVERSE = butterfly_ntt_inverse(np.eye(N, dtype=np.int64)).astype(np.float64)


def _transform(f, matrix: np.ndarray) -> np.ndarray:
    reduced = np.asarray(f, dtype=np.int64) % Q
    return (reduced.astype(np.float64) @ matrix).astype(np.int64) % Q


def ntt(f: np.ndarray) -> np.ndarray:
    return _transform(f, _FORWARD)


def ntt_inverse(f: np.ndarray) -> np.ndarray:
    return _transform(f, _INVERSE)


def basemul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product of two NTT-domain arrays (broadcasting over leading axes)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    a0, a1 = a[..., 0::2], a[..., 1::2]
    b0, b1 = b[..., 0::2], b[..., 1::2]
    c0 = (a0 * b0 + ((a1 * b1) % Q) * GAMMAS) % Q
    c1 = (a0 * b1 + a1 * b0) % Q
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    out[..., 0::2] = c0
    out[..., 1::2] = c1
    return out
