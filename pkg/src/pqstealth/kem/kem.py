"""CCA-secure KEM from the CPA scheme via the Fujisaki-Okamoto transform.

H is SHA3-256 and G is SHA3-512. Decapsulation never fails: a ciphertext
that does not re-encrypt identically yields the implicit-rejection key
H(z || H(c)).
"""
import hashlib
import hmac
import secrets
from dataclasses import dataclass, field
from typing import Optional, Tuple

from pqstealth.core.errors import EncodingError, ParameterError
from pqstealth.kem.pke import (
    KemCiphertext, PkePublicKey, PkeSecretKey, cpa_decrypt, cpa_encrypt, cpa_keygen,
)
from pqstealth.lattice.params import SEED_BYTES, SHARED_SECRET_BYTES, ParamSet

KEYGEN_SEED_BYTES = 3 * SEED_BYTES


def H(data: bytes) -> bytes:
    return hashlib.sha3_256(data).digest()


def G(data: bytes) -> Tuple[bytes, bytes]:
    digest = hashlib.sha3_512(data).digest()
    return digest[:32], digest[32:]


@dataclass(frozen=True)
class SharedSecret:
    value: bytes

    def __post_init__(self):
        if len(self.value) != SHARED_SECRET_BYTES:
            raise EncodingError(f"shared secret must be {SHARED_SECRET_BYTES} bytes, got {len(self.value)}")

    def __bytes__(self) -> bytes:
        return self.value

    def __repr__(self) -> str:
        return "SharedSecret(<redacted>)"


@dataclass(frozen=True, eq=False)
class KemSecretKey:
    """CPA secret plus the implicit-rejection secret z and the public key for re-encryption."""
    s: PkeSecretKey
    z: bytes
    pk: PkePublicKey
    pk_hash: bytes = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.z) != SEED_BYTES:
            raise EncodingError(f"z must be {SEED_BYTES} bytes, got {len(self.z)}")
        if self.s.params != self.pk.params:
            raise EncodingError("secret and public halves use different parameter sets")
        object.__setattr__(self, "pk_hash", H(self.pk.to_bytes()))

    @property
    def params(self) -> ParamSet:
        return self.pk.params

    def to_bytes(self) -> bytes:
        return self.s.to_bytes() + self.pk.to_bytes() + self.pk_hash + self.z

    @classmethod
    def from_bytes(cls, data: bytes, params: ParamSet) -> "KemSecretKey":
        if len(data) != params.sk_bytes:
            raise EncodingError(f"{params.name} secret key is {params.sk_bytes} bytes, got {len(data)}")
        cut = params.s_bytes
        s = PkeSecretKey.from_bytes(data[:cut], params)
        pk = PkePublicKey.from_bytes(data[cut:cut + params.pk_bytes], params)
        cut += params.pk_bytes
        stored_hash, z = data[cut:cut + 32], bytes(data[cut + 32:])
        key = cls(s, z, pk)
        if not hmac.compare_digest(stored_hash, key.pk_hash):
            raise EncodingError("secret key carries a public-key hash that does not match its public key")
        return key

    def __eq__(self, other) -> bool:
        if not isinstance(other, KemSecretKey):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    __hash__ = None

    def __repr__(self) -> str:
        return f"KemSecretKey(params={self.params.name})"


def cca_keygen(seed: Optional[bytes], params: ParamSet) -> Tuple[PkePublicKey, KemSecretKey]:
    """Key pair from a 96-byte seed (rho || sigma || z), or fresh randomness when seed is None."""
    if seed is None:
        seed = secrets.token_bytes(KEYGEN_SEED_BYTES)
    if len(seed) != KEYGEN_SEED_BYTES:
        raise ParameterError(f"cca_keygen needs a {KEYGEN_SEED_BYTES}-byte seed, got {len(seed)}")
    pk, s = cpa_keygen(seed[:2 * SEED_BYTES], params)
    return pk, KemSecretKey(s, bytes(seed[2 * SEED_BYTES:]), pk)


def encaps(pk: PkePublicKey, m_seed: Optional[bytes] = None) -> Tuple[KemCiphertext, SharedSecret]:
    if m_seed is None:
        m_seed = secrets.token_bytes(SEED_BYTES)
    if len(m_seed) != SEED_BYTES:
        raise ParameterError(f"encaps needs a {SEED_BYTES}-byte message seed, got {len(m_seed)}")
    k_bar, coins = G(H(pk.to_bytes()) + m_seed)
    c = cpa_encrypt(pk, m_seed, coins)
    return c, SharedSecret(H(k_bar + H(c.to_bytes())))


def decaps(sk: KemSecretKey, c: KemCiphertext) -> SharedSecret:
    m = cpa_decrypt(sk.s, c)
    k_bar, coins = G(sk.pk_hash + m)
    c_bytes = c.to_bytes()
    c_hash = H(c_bytes)
    accepted = hmac.compare_digest(cpa_encrypt(sk.pk, m, coins).to_bytes(), c_bytes)
    good = H(k_bar + c_hash)
    rejected = H(sk.z + c_hash)
    return SharedSecret(good if accepted else rejected)
