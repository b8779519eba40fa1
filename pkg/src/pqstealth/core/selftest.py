from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence
import hashlib
import logging
import time

import numpy as np

from pqstealth.kem.kem import cca_keygen, decaps, encaps
from pqstealth.lattice import arith
from pqstealth.lattice.params import PARAM_SETS, ParamSet, Variant, get_params
from pqstealth.lattice.sampling import Domain, derive_bytes, tag
from pqstealth.sap.keys import export_viewing_key, generate_meta
from pqstealth.sap.protocol import ViewTagMode, check_announcement, recover_spend, send, verify_key_pair

CompressFn = Callable[[np.ndarray, int, int], np.ndarray]

SELFTEST_SEED = hashlib.sha256(b"pqstealth-selftest").digest()


def faulty_compress(x, d: int, q: int):
    """compress() shifted by one step, for negative-control runs."""
    return (arith.compress(x, d, q) + 1) % (1 << d)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class SelfTestReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


class SelfTest:
    """Compression bound, KEM round-trips, implicit rejection and SAP completeness."""

    def __init__(self,
                 kem_trials: int = 20,
                 lwe_trials: int = 3,
                 compress_widths: Sequence[int] = (1, 4, 5, 10, 11),
                 paramsets: Optional[Sequence[str]] = None,
                 compress_fn: CompressFn = arith.compress):
        self.kem_trials = kem_trials
        self.lwe_trials = lwe_trials
        self.compress_widths = list(compress_widths)
        self.paramsets = [get_params(p) for p in (paramsets or PARAM_SETS)]
        self.compress_fn = compress_fn

    def _seed(self, *indices: int) -> bytes:
        return derive_bytes(SELFTEST_SEED, tag(Domain.SELFTEST, *indices), 96)

    def check_compression(self, q: int = 3329) -> CheckResult:
        x = np.arange(q, dtype=np.int64)
        worst = []
        for d in self.compress_widths:
            back = arith.decompress(self.compress_fn(x, d, q), d, q)
            error = int(np.max(np.abs(arith.symmetric_mod(back - x, q))))
            bound = arith.compression_bound(d, q)
            if error > bound:
                return CheckResult("compression bound", False, f"d={d}: error {error} exceeds {bound}")
            worst.append(f"d={d}:{error}")
        return CheckResult("compression bound", True, ", ".join(worst))

    def check_kem(self, params: ParamSet) -> CheckResult:
        trials = self.lwe_trials if params.variant is Variant.LWE else self.kem_trials
        for i in range(trials):
            seed = self._seed(0, i)
            pk, sk = cca_keygen(seed, params)
            c, K = encaps(pk, seed[:32])
            if decaps(sk, c) != K:
                return CheckResult(f"kem {params.name}", False, f"shared secret mismatch in trial {i}")
        return CheckResult(f"kem {params.name}", True, f"{trials} round-trips")

    def check_rejection(self, params: ParamSet) -> CheckResult:
        seed = self._seed(1, 0)
        pk, sk = cca_keygen(seed, params)
        c, K = encaps(pk, seed[:32])
        raw = bytearray(c.to_bytes())
        raw[len(raw) // 2] ^= 0x01
        tampered = type(c).from_bytes(bytes(raw), params)
        if decaps(sk, tampered) == K:
            return CheckResult(f"implicit rejection {params.name}", False, "tampered ciphertext kept the key")
        return CheckResult(f"implicit rejection {params.name}", True)

    def check_sap(self, params: ParamSet) -> CheckResult:
        name = f"stealth round-trip {params.name}"
        keys, meta = generate_meta(self._seed(2, 0)[:32], params)
        announcement, sent = send(meta, self._seed(2, 1)[:32], ViewTagMode.ONE_BYTE)
        _, matched, found = check_announcement(export_viewing_key(keys), announcement, ViewTagMode.ONE_BYTE)
        if not matched:
            return CheckResult(name, False, "scan missed the announcement")
        recovered, private = recover_spend(keys, found[0])
        if recovered.address != sent.address:
            return CheckResult(name, False, "recovered address differs from the sender's")
        if not verify_key_pair(recovered.P, private.p, private.e1, keys.spend_pk.rho, params):
            return CheckResult(name, False, "P != A p + e1")
        return CheckResult(name, True, recovered.hex)

    def run(self, on_result: Optional[Callable[[CheckResult], None]] = None) -> SelfTestReport:
        report = SelfTestReport()
        steps = [self.check_compression]
        for params in self.paramsets:
            steps.append(lambda p=params: self.check_kem(p))
            if params.variant is Variant.MLWE:
                steps.append(lambda p=params: self.check_rejection(p))
        variants_seen = set()
        for params in self.paramsets:
            if params.variant not in variants_seen:
                variants_seen.add(params.variant)
                steps.append(lambda p=params: self.check_sap(p))

        for step in steps:
            start = time.perf_counter()
            result = step()
            result.seconds = time.perf_counter() - start
            level = logging.INFO if result.passed else logging.ERROR
            logging.log(level, f"Self-test {result.name}: {'pass' if result.passed else 'FAIL'} {result.detail}")
            report.checks.append(result)
            if on_result:
                on_result(result)
        return report
