"""Named lattice parameter bundles for the three protocol variants."""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List

from pqstealth.core.errors import ParameterError

SEED_BYTES = 32
SHARED_SECRET_BYTES = 32
MESSAGE_BITS = 256


class Variant(Enum):
    MLWE = "MLWE"
    RLWE = "RLWE"
    LWE = "LWE"


@dataclass(frozen=True)
class ParamSet:
    """A parameter bundle selecting MLWE, RLWE or LWE behaviour.

    For the ring variants ``n`` is the polynomial degree and ``k`` the module
    rank (always 1 for RLWE). For LWE ``n`` is the dimension of the square
    public matrix and ``k`` the number of secret columns, so secrets and
    errors are n x k matrices and the message occupies k*k slots.
    A compression width equal to ``coeff_bits`` means the component is sent
    uncompressed.
    """
    name: str
    variant: Variant
    n: int
    k: int
    q: int
    eta1: int
    eta2: int
    d_t: int
    d_u: int
    d_v: int
    msg_bits: int = 1
    vt_bytes: int = 1

    def __post_init__(self):
        if self.q <= 0:
            raise ParameterError(f"{self.name}: q must be positive")
        if self.n <= 0 or self.k <= 0:
            raise ParameterError(f"{self.name}: n and k must be positive")
        if self.variant is Variant.MLWE:
            if self.n != 256 or self.q != 3329:
                raise ParameterError(f"{self.name}: MLWE sets require n=256, q=3329")
            if max(self.d_t, self.d_u, self.d_v) >= self.coeff_bits:
                raise ParameterError(f"{self.name}: MLWE compression widths must be < {self.coeff_bits}")
        if self.variant is Variant.RLWE and self.k != 1:
            raise ParameterError(f"{self.name}: RLWE sets have k=1")
        for label, d in (("d_t", self.d_t), ("d_u", self.d_u), ("d_v", self.d_v)):
            if not 1 <= d <= self.coeff_bits:
                raise ParameterError(f"{self.name}: {label}={d} out of range")
        if self.v_slots * self.msg_bits < MESSAGE_BITS:
            raise ParameterError(f"{self.name}: {self.v_slots} slots cannot carry a 256-bit message")

    @property
    def coeff_bits(self) -> int:
        """Bits needed for one coefficient in [0, q), i.e. ceil(log2 q)."""
        return (self.q - 1).bit_length()

    @property
    def structured(self) -> bool:
        return self.variant is not Variant.LWE

    @property
    def uses_ntt(self) -> bool:
        return self.q == 3329 and self.n == 256

    @property
    def v_slots(self) -> int:
        """Number of coefficients in the second ciphertext component."""
        return self.n if self.structured else self.k * self.k

    @property
    def sap_noise(self) -> bool:
        """RLWE and LWE stealth keys add deterministic noise derived from S."""
        return self.variant is not Variant.MLWE

    def compresses(self, d: int) -> bool:
        return d < self.coeff_bits

    @property
    def t_bytes(self) -> int:
        return self.k * self.n * self.d_t // 8

    @property
    def pk_bytes(self) -> int:
        return self.t_bytes + SEED_BYTES

    @property
    def s_bytes(self) -> int:
        return self.k * self.n * self.coeff_bits // 8

    @property
    def sk_bytes(self) -> int:
        # s || pk || H(pk) || z
        return self.s_bytes + self.pk_bytes + 32 + 32

    @property
    def u_bytes(self) -> int:
        return self.k * self.n * self.d_u // 8

    @property
    def v_bytes(self) -> int:
        return self.v_slots * self.d_v // 8

    @property
    def ct_bytes(self) -> int:
        return self.u_bytes + self.v_bytes

    @property
    def shared_secret_bytes(self) -> int:
        return SHARED_SECRET_BYTES

    def sizes(self) -> Dict[str, int]:
        return {
            "pk_bytes": self.pk_bytes,
            "sk_bytes": self.sk_bytes,
            "ct_bytes": self.ct_bytes,
            "ss_bytes": self.shared_secret_bytes,
        }


KYBER512 = ParamSet("kyber512", Variant.MLWE, n=256, k=2, q=3329, eta1=3, eta2=2, d_t=10, d_u=10, d_v=4)
KYBER768 = ParamSet("kyber768", Variant.MLWE, n=256, k=3, q=3329, eta1=2, eta2=2, d_t=10, d_u=10, d_v=4)
KYBER1024 = ParamSet("kyber1024", Variant.MLWE, n=256, k=4, q=3329, eta1=2, eta2=2, d_t=11, d_u=11, d_v=5)

RLWE512 = ParamSet("rlwe512", Variant.RLWE, n=512, k=1, q=12289, eta1=8, eta2=8, d_t=14, d_u=14, d_v=4)
RLWE1024 = ParamSet("rlwe1024", Variant.RLWE, n=1024, k=1, q=12289, eta1=8, eta2=8, d_t=14, d_u=14, d_v=4)

LWE640 = ParamSet("lwe640", Variant.LWE, n=640, k=8, q=1 << 15, eta1=4, eta2=4, d_t=15, d_u=15, d_v=15, msg_bits=4)
LWE976 = ParamSet("lwe976", Variant.LWE, n=976, k=8, q=1 << 16, eta1=6, eta2=6, d_t=16, d_u=16, d_v=16, msg_bits=4)
LWE1344 = ParamSet("lwe1344", Variant.LWE, n=1344, k=8, q=1 << 16, eta1=4, eta2=4, d_t=16, d_u=16, d_v=16, msg_bits=4)

PARAM_SETS: Dict[str, ParamSet] = {
    p.name: p for p in (KYBER512, KYBER768, KYBER1024, RLWE512, RLWE1024, LWE640, LWE976, LWE1344)
}


def get_params(name: str) -> ParamSet:
    """Look up a parameter set by id (case-insensitive)."""
    try:
        return PARAM_SETS[name.lower()]
    except KeyError:
        known = ", ".join(PARAM_SETS)
        raise ParameterError(f"Unknown parameter set '{name}' (known: {known})") from None


def param_names() -> List[str]:
    return list(PARAM_SETS)
