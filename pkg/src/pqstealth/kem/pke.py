"""IND-CPA public-key encryption over the three lattice variants.

The ring variants encrypt one message bit per coefficient of ``v``. The LWE
variant works with n x k secret matrices; ``v`` is the k x k block
<r_i, b_j> and each of its 64 slots carries four message bits.
"""
import secrets
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from pqstealth.core.errors import EncodingError, ParameterError
from pqstealth.lattice.arith import compress, decompress
from pqstealth.lattice.encoding import deserialize, serialize
from pqstealth.lattice.params import MESSAGE_BITS, SEED_BYTES, ParamSet
from pqstealth.lattice.ring import ModuleMatrix, ModuleVector, RingElement, inner, matvec
from pqstealth.lattice.sampling import Domain, expand_matrix, sample_noise_slots, sample_noise_vector

MESSAGE_BYTES = MESSAGE_BITS // 8


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def _squeeze(values, d: int, params: ParamSet):
    return compress(values, d, params.q) if params.compresses(d) else values


def _expand(values, d: int, params: ParamSet):
    return decompress(values, d, params.q) if params.compresses(d) else values


def _bound(d: int, params: ParamSet) -> Optional[int]:
    # uncompressed components must still be reduced mod q
    return None if params.compresses(d) else params.q


@dataclass(frozen=True, eq=False)
class PkePublicKey:
    """(t, rho): ``t`` holds the d_t-bit compressed coefficients of A s + e."""
    t: np.ndarray
    rho: bytes
    params: ParamSet

    def __post_init__(self):
        if len(self.rho) != SEED_BYTES:
            raise EncodingError(f"rho must be {SEED_BYTES} bytes, got {len(self.rho)}")
        t = _frozen(self.t)
        if t.shape != (self.params.k, self.params.n):
            raise EncodingError(f"t has shape {t.shape}, expected {(self.params.k, self.params.n)}")
        object.__setattr__(self, "t", t)

    def matrix(self) -> ModuleMatrix:
        """A from rho.

        Ring-structured matrices are expanded once per key and keep their NTT
        form. The n x n LWE matrix is never stored and is regenerated from rho
        on every call.
        """
        if self.params.structured:
            return self._structured_matrix
        return expand_matrix(self.rho, self.params)

    @cached_property
    def _structured_matrix(self) -> ModuleMatrix:
        return expand_matrix(self.rho, self.params)

    def t_hat(self) -> ModuleVector:
        """Decompressed t as a module vector over Z_q."""
        return self._t_hat

    @cached_property
    def _t_hat(self) -> ModuleVector:
        return ModuleVector(_expand(self.t, self.params.d_t, self.params), self.params.q)

    def to_bytes(self) -> bytes:
        return serialize(self.t, self.params.d_t) + self.rho

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "PkePublicKey":
        if len(data) != params.pk_bytes:
            raise EncodingError(f"{params.name} public key is {params.pk_bytes} bytes, got {len(data)}")
        t = deserialize(data[:params.t_bytes], params.d_t, (params.k, params.n), _bound(params.d_t, params))
        return cls(t, bytes(data[params.t_bytes:]), params)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PkePublicKey):
            return NotImplemented
        return self.params == other.params and self.to_bytes() == other.to_bytes()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PkeSecretKey:
    s: ModuleVector
    params: ParamSet

    def to_bytes(self) -> bytes:
        return serialize(self.s, self.params.coeff_bits)

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "PkeSecretKey":
        if len(data) != params.s_bytes:
            raise EncodingError(f"{params.name} secret vector is {params.s_bytes} bytes, got {len(data)}")
        s = deserialize(data, params.coeff_bits, (params.k, params.n), params.q)
        return cls(ModuleVector(s, params.q), params)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PkeSecretKey):
            return NotImplemented
        return self.params == other.params and self.s == other.s

    __hash__ = None


@dataclass(frozen=True, eq=False)
class KemCiphertext:
    """(u, v) with u at d_u bits and v at d_v bits per coefficient."""
    u: np.ndarray
    v: np.ndarray
    params: ParamSet
    _encoded: bytes = field(init=False, repr=False)

    def __post_init__(self):
        p = self.params
        u, v = _frozen(self.u), _frozen(self.v)
        if u.shape != (p.k, p.n) or v.shape != (p.v_slots,):
            raise EncodingError(f"ciphertext shapes {u.shape}, {v.shape} do not match {p.name}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "_encoded", serialize(u, p.d_u) + serialize(v, p.d_v))

    def to_bytes(self) -> bytes:
        return self._encoded

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "KemCiphertext":
        if len(data) != params.ct_bytes:
            raise EncodingError(f"{params.name} ciphertext is {params.ct_bytes} bytes, got {len(data)}")
        u = deserialize(data[:params.u_bytes], params.d_u, (params.k, params.n), _bound(params.d_u, params))
        v = deserialize(data[params.u_bytes:], params.d_v, params.v_slots, _bound(params.d_v, params))
        return cls(u, v, params)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KemCiphertext):
            return NotImplemented
        return self.params == other.params and self._encoded == other._encoded

    __hash__ = None


def encode_message(m: bytes, params: ParamSet) -> RingElement:
    """Spread 256 message bits over ``v_slots`` slots of msg_bits each, scaled towards q."""
    if len(m) != MESSAGE_BYTES:
        raise ParameterError(f"message must be {MESSAGE_BYTES} bytes, got {len(m)}")
    b = params.msg_bits
    bits = np.unpackbits(np.frombuffer(m, dtype=np.uint8), bitorder="little").astype(np.int64)
    values = np.zeros(params.v_slots, dtype=np.int64)
    values[:MESSAGE_BITS // b] = bits.reshape(-1, b) @ (np.int64(1) << np.arange(b, dtype=np.int64))
    return RingElement(decompress(values, b, params.q), params.q)


def decode_message(w: RingElement, params: ParamSet) -> bytes:
    b = params.msg_bits
    values = compress(w.coeffs[:MESSAGE_BITS // b], b, params.q)
    bits = ((values[:, np.newaxis] >> np.arange(b)) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def cpa_keygen(seed: bytes, params: ParamSet) -> Tuple[PkePublicKey, PkeSecretKey]:
    """Key pair from a 64-byte seed: the first half is rho, the second the noise seed."""
    if len(seed) != 2 * SEED_BYTES:
        raise ParameterError(f"cpa_keygen needs a {2 * SEED_BYTES}-byte seed, got {len(seed)}")
    rho, sigma = bytes(seed[:SEED_BYTES]), bytes(seed[SEED_BYTES:])
    a = expand_matrix(rho, params)
    s = sample_noise_vector(sigma, Domain.SECRET, params.eta1, params)
    e = sample_noise_vector(sigma, Domain.ERROR, params.eta1, params)
    t = matvec(a, s) + e
    pk = PkePublicKey(_squeeze(t.coeffs, params.d_t, params), rho, params)
    return pk, PkeSecretKey(s, params)


def cpa_encrypt(pk: PkePublicKey, m: bytes, coins: Optional[bytes] = None) -> KemCiphertext:
    params = pk.params
    if coins is None:
        coins = secrets.token_bytes(SEED_BYTES)
    a = pk.matrix()
    r = sample_noise_vector(coins, Domain.SECRET, params.eta1, params)
    e1 = sample_noise_vector(coins, Domain.ERROR, params.eta2, params)
    e2 = RingElement(sample_noise_slots(coins, Domain.NOISE_V, params.eta2, params.v_slots, params.q), params.q)
    u = matvec(a, r, transpose=True) + e1
    v = inner(r, pk.t_hat(), params.structured) + e2 + encode_message(m, params)
    return KemCiphertext(_squeeze(u.coeffs, params.d_u, params), _squeeze(v.coeffs, params.d_v, params), params)


def cpa_decrypt(sk: PkeSecretKey, c: KemCiphertext) -> bytes:
    params = sk.params
    u = ModuleVector(_expand(c.u, params.d_u, params), params.q)
    v = RingElement(_expand(c.v, params.d_v, params), params.q)
    return decode_message(v - inner(u, sk.s, params.structured), params)
