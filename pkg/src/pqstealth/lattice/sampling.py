"""XOF streams, centred binomial noise and uniform matrix expansion."""
import hashlib
from typing import Union

import numpy as np

from pqstealth.core.errors import SamplingError
from pqstealth.lattice.arith import coeff_bits
from pqstealth.lattice.encoding import unpack_bits
from pqstealth.lattice.params import ParamSet
from pqstealth.lattice.ring import ModuleMatrix, ModuleVector

MAX_REJECTION_ROUNDS = 10_000


class Domain:
    """Single-byte domain tags appended to seeds."""
    MATRIX = 0x01
    SECRET = 0x02
    ERROR = 0x03
    NOISE_V = 0x04
    SAP_Y = 0x10
    SAP_E = 0x11
    META_SPEND = 0x20
    META_VIEW = 0x21
    SEND = 0x30
    DECOY_META = 0x31
    DECOY_SEND = 0x32
    SYNTH_LAYOUT = 0x33
    BENCH = 0x34
    SELFTEST = 0x35


def tag(domain: int, *indices: int) -> bytes:
    """Domain byte followed by each index as four little-endian bytes."""
    return bytes([domain]) + b"".join(i.to_bytes(4, "little") for i in indices)


class XofStream:
    """Extendable SHAKE-128 output read sequentially."""

    def __init__(self, seed: bytes, domain: bytes = b""):
        self._shake = hashlib.shake_128(bytes(seed) + bytes(domain))
        self._buffer = b""
        self._offset = 0

    def read(self, nbytes: int) -> bytes:
        end = self._offset + nbytes
        if end > len(self._buffer):
            # SHAKE output is prefix-consistent, so a longer digest extends the old one
            self._buffer = self._shake.digest(max(end, 2 * len(self._buffer), 168))
        out = self._buffer[self._offset:end]
        self._offset = end
        return out

    @property
    def position(self) -> int:
        return self._offset


def xof(seed: bytes, domain: Union[bytes, int] = b"") -> XofStream:
    if isinstance(domain, int):
        domain = bytes([domain])
    return XofStream(seed, domain)


def derive_bytes(seed: bytes, domain: bytes, length: int = 32) -> bytes:
    return xof(seed, domain).read(length)


def cbd_sample(stream: Union[bytes, XofStream], eta: int, count: int) -> np.ndarray:
    """Centred binomial samples sum(a_i - b_i) over eta bit pairs, in [-eta, eta]."""
    if eta < 1 or count < 1:
        raise SamplingError(f"cbd needs eta >= 1 and count >= 1, got {eta}, {count}")
    nbits = 2 * eta * count
    needed = (nbits + 7) // 8
    if isinstance(stream, XofStream):
        data = stream.read(needed)
    else:
        data = bytes(stream)
        if len(data) < needed:
            raise SamplingError(f"cbd needs {needed} bytes, stream has {len(data)}")
        data = data[:needed]
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:nbits]
    halves = bits.reshape(count, 2, eta).sum(axis=2, dtype=np.int64)
    return halves[:, 0] - halves[:, 1]


def sample_uniform(stream: XofStream, count: int, q: int) -> np.ndarray:
    """Uniform values in [0, q) from ceil(log2 q)-bit little-endian candidates.

    For a power-of-two q the stream is read as 16-bit words masked to log2 q
    bits, which is already uniform.
    """
    if q & (q - 1) == 0:
        if q > 1 << 16:
            raise SamplingError(f"power-of-two modulus {q} wider than 16 bits")
        words = np.frombuffer(stream.read(2 * count), dtype="<u2").astype(np.int64)
        return words & (q - 1)
    bits = coeff_bits(q)
    found = []
    remaining = count
    for _ in range(MAX_REJECTION_ROUNDS):
        # about two candidates per missing value, in groups of 8 so reads stay byte aligned
        groups = 2 * remaining // 8 + 1
        batch = unpack_bits(stream.read(groups * bits), bits, groups * 8)
        accepted = batch[batch < q]
        found.append(accepted[:remaining])
        remaining -= min(remaining, accepted.size)
        if remaining == 0:
            return np.concatenate(found)
    raise SamplingError(f"rejection sampling gave up after {MAX_REJECTION_ROUNDS} rounds")


def expand_matrix(rho: bytes, params: ParamSet) -> ModuleMatrix:
    """The public matrix A derived from rho, one XOF stream per entry (or per row for LWE)."""
    n, k, q = params.n, params.k, params.q
    if params.structured:
        data = np.empty((k, k, n), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                data[i, j] = sample_uniform(xof(rho, tag(Domain.MATRIX, i, j)), n, q)
        return ModuleMatrix(data, q, structured=True)
    data = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        data[i] = sample_uniform(xof(rho, tag(Domain.MATRIX, i)), n, q)
    return ModuleMatrix(data, q, structured=False)


def sample_noise_vector(seed: bytes, domain: int, eta: int, params: ParamSet, offset: int = 0) -> ModuleVector:
    """k rows of CBD noise, row i drawn from xof(seed, domain || offset + i), reduced mod q."""
    rows = [cbd_sample(xof(seed, tag(domain, offset + i)), eta, params.n) for i in range(params.k)]
    return ModuleVector(np.stack(rows) % params.q, params.q)


def sample_noise_slots(seed: bytes, domain: int, eta: int, count: int, q: int) -> np.ndarray:
    return cbd_sample(xof(seed, tag(domain)), eta, count) % q
