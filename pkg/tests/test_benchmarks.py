"""
Per-operation timings.

Run with: pytest tests/test_benchmarks.py -m benchmark
"""
import pytest

pytest.importorskip("pytest_benchmark")

from pqstealth.kem.kem import cca_keygen, decaps, encaps  # noqa: E402
from pqstealth.lattice.params import get_params  # noqa: E402
from pqstealth.sap.keys import export_viewing_key, generate_meta  # noqa: E402
from pqstealth.sap.protocol import ViewTagMode, check_announcement, send  # noqa: E402

pytestmark = pytest.mark.benchmark

NAMES = ["kyber512", "kyber768", "kyber1024", "rlwe512", "rlwe1024", "lwe640"]


@pytest.fixture(scope="module", params=NAMES)
def kem_keys(request):
    params = get_params(request.param)
    return cca_keygen(bytes(96), params)


@pytest.fixture(scope="module", params=NAMES)
def recipient_keys(request):
    return generate_meta(bytes(32), get_params(request.param))


def test_keygen(benchmark, kem_keys):
    params = kem_keys[0].params
    benchmark(cca_keygen, None, params)


def test_encaps(benchmark, kem_keys):
    pk, _ = kem_keys
    benchmark(encaps, pk)


def test_decaps(benchmark, kem_keys):
    pk, sk = kem_keys
    c, _ = encaps(pk)
    benchmark(decaps, sk, c)


def test_send(benchmark, recipient_keys):
    _, meta = recipient_keys
    benchmark(send, meta)


@pytest.mark.parametrize("mode", [ViewTagMode.NONE, ViewTagMode.ONE_BYTE])
def test_check_non_matching_announcement(benchmark, recipient_keys, mode):
    keys, meta = recipient_keys
    _, stranger = generate_meta(b"\x01" * 32, keys.params)
    announcement, _ = send(stranger, b"\x02" * 32, mode)
    benchmark(check_announcement, export_viewing_key(keys), announcement, mode)
