import numpy as np
import pytest

from pqstealth.core.errors import SamplingError
from pqstealth.lattice.params import get_params
from pqstealth.lattice.sampling import (
    Domain, cbd_sample, derive_bytes, expand_matrix, sample_noise_vector, sample_uniform, tag, xof,
)

SEED = b"\x07" * 32
HISTOGRAM_BINS = 64
# 99th percentile of chi-squared with 63 degrees of freedom
CHI2_CRITICAL = 92.01
HISTOGRAM_DRAWS = 100_000
HISTOGRAM_RUNS = 10


def chi_squared_uniform(values, q: int) -> float:
    """Chi-squared statistic of values in [0, q) against uniform, over 64 near-equal buckets."""
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    observed = np.bincount(values * HISTOGRAM_BINS // q, minlength=HISTOGRAM_BINS)
    widths = np.bincount(np.arange(q, dtype=np.int64) * HISTOGRAM_BINS // q, minlength=HISTOGRAM_BINS)
    expected = widths * (values.size / q)
    return float(((observed - expected) ** 2 / expected).sum())


def test_tag_layout():
    assert tag(Domain.MATRIX) == b"\x01"
    assert tag(Domain.MATRIX, 1, 2) == b"\x01\x01\x00\x00\x00\x02\x00\x00\x00"
    assert tag(Domain.DECOY_SEND, 70000) == b"\x32" + (70000).to_bytes(4, "little")


def test_stream_reads_are_prefix_consistent():
    stream = xof(SEED, Domain.SECRET)
    chunks = stream.read(5) + stream.read(300) + stream.read(1)
    assert stream.position == 306
    assert chunks == derive_bytes(SEED, bytes([Domain.SECRET]), 306)


def test_domains_separate_streams():
    assert derive_bytes(SEED, tag(Domain.SECRET), 64) != derive_bytes(SEED, tag(Domain.ERROR), 64)
    assert derive_bytes(SEED, tag(Domain.SECRET, 0), 64) != derive_bytes(SEED, tag(Domain.SECRET, 1), 64)


@pytest.mark.parametrize("eta", [1, 2, 3, 8])
def test_cbd_range_and_determinism(eta):
    samples = cbd_sample(xof(SEED, 1), eta, 1024)
    assert samples.shape == (1024,)
    assert int(samples.min()) >= -eta and int(samples.max()) <= eta
    assert np.array_equal(samples, cbd_sample(xof(SEED, 1), eta, 1024))


def test_cbd_from_known_bytes():
    # eta=2: each sample consumes 4 bits, a-bits then b-bits
    # 0b0011 -> a=2, b=0 -> 2 ; 0b1100 -> a=0, b=2 -> -2
    assert list(cbd_sample(bytes([0b11000011]), 2, 2)) == [2, -2]


def test_cbd_underflow():
    with pytest.raises(SamplingError):
        cbd_sample(b"\x00" * 3, 2, 256)


def test_cbd_is_centred():
    samples = cbd_sample(xof(SEED, 9), 3, 20000)
    assert abs(float(samples.mean())) < 0.1
    assert abs(float(samples.var()) - 1.5) < 0.1


@pytest.mark.parametrize("q", [3329, 12289, 1 << 15, 1 << 16])
def test_uniform_values_are_in_range(q):
    values = sample_uniform(xof(SEED, 2), 4096, q)
    assert values.shape == (4096,)
    assert int(values.min()) >= 0 and int(values.max()) < q
    # a uniform sample of this size reaches into the top tenth of the range
    assert int(values.max()) > q * 9 // 10


def test_expand_matrix_is_deterministic():
    params = get_params("kyber512")
    a = expand_matrix(SEED, params)
    assert a.data.shape == (2, 2, 256)
    assert a == expand_matrix(SEED, params)
    assert a != expand_matrix(b"\x08" * 32, params)


def test_expand_matrix_for_plain_lwe():
    params = get_params("lwe640")
    a = expand_matrix(SEED, params)
    assert not a.structured
    assert a.data.shape == (640, 640)
    assert int(a.data.max()) < params.q


def test_noise_vector_shape_and_offset():
    params = get_params("kyber768")
    v = sample_noise_vector(SEED, Domain.SECRET, params.eta1, params)
    assert v.coeffs.shape == (3, 256)
    shifted = sample_noise_vector(SEED, Domain.SECRET, params.eta1, params, offset=1)
    assert np.array_equal(shifted.coeffs[0], v.coeffs[1])


def test_domain_tags_are_distinct():
    values = [v for name, v in vars(Domain).items() if name.isupper()]
    assert len(values) == len(set(values))
    assert Domain.SELFTEST != Domain.BENCH


def test_rejection_reads_two_candidates_per_missing_value():
    stream = xof(SEED, 3)
    sample_uniform(stream, 256, 3329)
    # 65 groups of eight 12-bit candidates cover 256 values at the 81% acceptance rate
    assert stream.position == 65 * 12


@pytest.mark.parametrize("eta", [2, 3])
def test_cbd_mean_within_three_sigma(eta):
    count = 100_000
    samples = cbd_sample(xof(SEED, tag(Domain.NOISE_V, eta)), eta, count)
    sigma = (eta / 2 / count) ** 0.5
    assert abs(float(samples.mean())) <= 3 * sigma


@pytest.mark.parametrize("q", [3329, 12289, 1 << 15, 1 << 16])
def test_uniform_histogram_passes_chi_squared(q):
    rejected = sum(
        chi_squared_uniform(sample_uniform(xof(SEED, tag(Domain.MATRIX, run)), HISTOGRAM_DRAWS, q), q)
        > CHI2_CRITICAL
        for run in range(HISTOGRAM_RUNS)
    )
    # each run fails at 0.01 by chance; three or more failures out of ten is not chance
    assert rejected <= 2


def test_expanded_matrix_coefficients_pass_chi_squared():
    params = get_params("kyber1024")
    per_matrix = params.k * params.k * params.n
    matrices = -(-HISTOGRAM_DRAWS // per_matrix)
    rejected = 0
    for run in range(HISTOGRAM_RUNS):
        values = np.concatenate([
            expand_matrix(derive_bytes(SEED, tag(Domain.MATRIX, run, j)), params).data.reshape(-1)
            for j in range(matrices)
        ])
        rejected += chi_squared_uniform(values, params.q) > CHI2_CRITICAL
    assert rejected <= 2
