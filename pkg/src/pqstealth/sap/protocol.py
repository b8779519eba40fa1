"""Stealth address derivation, announcements and key recovery.

Both sides derive everything non-public from the shared secret S:
``y`` (the stealth offset) and, for RLWE and LWE, a noise term ``e1_S``.
The sender computes P = A_K y + t_K [+ e1_S]; the recipient holding k
computes p = k + y and e1 = t_K - A_K k [+ e1_S], so that P = A_K p + e1
holds exactly.
"""
import hashlib
import logging
import secrets
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from pqstealth.core.errors import DimensionError, EncodingError, ParameterError
from pqstealth.kem.kem import SharedSecret, decaps, encaps
from pqstealth.kem.pke import KemCiphertext, PkePublicKey, PkeSecretKey
from pqstealth.lattice.arith import coeff_bits
from pqstealth.lattice.encoding import serialize
from pqstealth.lattice.params import SEED_BYTES, ParamSet
from pqstealth.lattice.ring import ModuleVector, matvec
from pqstealth.lattice.sampling import Domain, expand_matrix, sample_noise_vector
from pqstealth.sap.keys import RecipientKeys, StealthMetaAddress, ViewingKey

ADDRESS_BYTES = 20


class ViewTagMode(Enum):
    NONE = "none"
    ONE_BYTE = "1byte"
    FULL_HASH = "fullhash"

    @property
    def width(self) -> int:
        return _WIDTHS[self]

    @classmethod
    def parse(cls, value) -> "ViewTagMode":
        """Accept a mode, its CLI name or its byte width."""
        if isinstance(value, cls):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            for mode, width in _WIDTHS.items():
                if width == value:
                    return mode
            raise ParameterError(f"view tag width must be 0, 1 or 32 bytes, got {value}")
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"unknown view tag mode '{value}' (use none, 1byte or fullhash)") from None


_WIDTHS = {ViewTagMode.NONE: 0, ViewTagMode.ONE_BYTE: 1, ViewTagMode.FULL_HASH: 32}


@dataclass(frozen=True)
class Announcement:
    """Ephemeral public key R (KEM ciphertext bytes), view tag and the address paid to."""
    ephemeral: bytes
    view_tag: bytes
    address: bytes
    index: Optional[int] = None

    def ciphertext(self, params: ParamSet) -> KemCiphertext:
        return KemCiphertext.from_bytes(self.ephemeral, params)

    def with_index(self, index: int) -> "Announcement":
        return Announcement(self.ephemeral, self.view_tag, self.address, index)


@dataclass(frozen=True, eq=False)
class StealthAddress:
    P: ModuleVector
    address: bytes

    @property
    def hex(self) -> str:
        return "0x" + self.address.hex()

    def __eq__(self, other) -> bool:
        if not isinstance(other, StealthAddress):
            return NotImplemented
        return self.address == other.address and self.P == other.P

    __hash__ = None


@dataclass(frozen=True, eq=False)
class StealthPrivateKey:
    p: ModuleVector
    e1: ModuleVector
    params: ParamSet

    def __repr__(self) -> str:
        return f"StealthPrivateKey(params={self.params.name})"


@dataclass(frozen=True, eq=False)
class SharedDerivation:
    """y and (RLWE/LWE only) e1_S, expanded from a shared secret."""
    S: SharedSecret
    y: ModuleVector
    e1_S: Optional[ModuleVector]

    @classmethod
    def expand(cls, S: SharedSecret, params: ParamSet) -> "SharedDerivation":
        y = sample_noise_vector(S.value, Domain.SAP_Y, params.eta1, params)
        e1_S = sample_noise_vector(S.value, Domain.SAP_E, params.eta2, params) if params.sap_noise else None
        return cls(S, y, e1_S)


def address_from_pubkey(P: ModuleVector) -> bytes:
    return hashlib.sha256(serialize(P, coeff_bits(P.q))).digest()[:ADDRESS_BYTES]


def compute_view_tag(S: SharedSecret, width) -> bytes:
    width = ViewTagMode.parse(width).width
    return hashlib.sha256(S.value).digest()[:width]


def derive_stealth_pubkey(K: PkePublicKey, S: SharedSecret) -> StealthAddress:
    params = K.params
    shared = SharedDerivation.expand(S, params)
    P = matvec(K.matrix(), shared.y) + K.t_hat()
    if shared.e1_S is not None:
        P = P + shared.e1_S
    return StealthAddress(P, address_from_pubkey(P))


def derive_stealth_privkey(k: PkeSecretKey, K: PkePublicKey, S: SharedSecret) -> StealthPrivateKey:
    """p = k + y together with the noise e1 that reconstructs P from p."""
    params = K.params
    shared = SharedDerivation.expand(S, params)
    p = k.s + shared.y
    e1 = K.t_hat() - matvec(K.matrix(), k.s)
    if shared.e1_S is not None:
        e1 = e1 + shared.e1_S
    return StealthPrivateKey(p, e1, params)


def verify_key_pair(P: ModuleVector, p: ModuleVector, e1: ModuleVector, rho_K: bytes, params: ParamSet) -> bool:
    expected = (params.k, params.n)
    for label, value in (("P", P), ("p", p), ("e1", e1)):
        if value.coeffs.shape != expected or value.q != params.q:
            raise DimensionError(f"{label} has shape {value.coeffs.shape}, expected {expected} mod {params.q}")
    return P == matvec(expand_matrix(rho_K, params), p) + e1


def send(meta: StealthMetaAddress, entropy: Optional[bytes] = None,
         vt_mode=ViewTagMode.ONE_BYTE) -> Tuple[Announcement, StealthAddress]:
    """Encapsulate against V, derive the stealth address from K and build the announcement."""
    mode = ViewTagMode.parse(vt_mode)
    if entropy is None:
        entropy = secrets.token_bytes(SEED_BYTES)
    R, S = encaps(meta.view, entropy)
    stealth = derive_stealth_pubkey(meta.spend, S)
    announcement = Announcement(R.to_bytes(), compute_view_tag(S, mode), stealth.address)
    logging.debug(f"Announcement built for {stealth.hex} ({mode.value} view tag)")
    return announcement, stealth


def check_announcement(view_key: ViewingKey, announcement: Announcement,
                       vt_mode) -> Tuple[bool, bool, Optional[Tuple[SharedSecret, StealthAddress]]]:
    """Test one announcement: returns (tag_passed, matched, (S, address) on match).

    Raises EncodingError for an announcement that cannot be parsed under the
    key's parameters or whose tag has the wrong width.
    """
    mode = ViewTagMode.parse(vt_mode)
    params = view_key.params
    if len(announcement.view_tag) != mode.width:
        raise EncodingError(f"view tag is {len(announcement.view_tag)} bytes, registry uses {mode.width}")
    if len(announcement.address) != ADDRESS_BYTES:
        raise EncodingError(f"address is {len(announcement.address)} bytes, expected {ADDRESS_BYTES}")
    S = decaps(view_key.view_sk, announcement.ciphertext(params))
    if mode.width and compute_view_tag(S, mode) != announcement.view_tag:
        return False, False, None
    stealth = derive_stealth_pubkey(view_key.spend_pk, S)
    if stealth.address != announcement.address:
        return True, False, None
    return True, True, (S, stealth)


def recover_spend(keys: RecipientKeys, S: SharedSecret) -> Tuple[StealthAddress, StealthPrivateKey]:
    stealth = derive_stealth_pubkey(keys.spend_pk, S)
    private = derive_stealth_privkey(keys.spend_sk.s, keys.spend_pk, S)
    return stealth, private

