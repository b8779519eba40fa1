import pytest

from pqstealth.core.errors import ParameterError
from pqstealth.lattice.params import PARAM_SETS, ParamSet, Variant, get_params, param_names


def test_registry_of_sets():
    assert param_names() == ["kyber512", "kyber768", "kyber1024", "rlwe512", "rlwe1024",
                             "lwe640", "lwe976", "lwe1344"]


def test_lookup_is_case_insensitive():
    assert get_params("Kyber768") is PARAM_SETS["kyber768"]


def test_unknown_set():
    with pytest.raises(ParameterError, match="Unknown parameter set"):
        get_params("kyber9000")


@pytest.mark.parametrize("name, pk, sk, ct", [
    ("kyber512", 672, 1504, 768),
    ("kyber768", 992, 2208, 1088),
    ("kyber1024", 1440, 3040, 1568),
])
def test_module_sizes(name, pk, sk, ct):
    sizes = get_params(name).sizes()
    assert (sizes["pk_bytes"], sizes["sk_bytes"], sizes["ct_bytes"], sizes["ss_bytes"]) == (pk, sk, ct, 32)


def test_kyber512_ciphertext_layout():
    p = get_params("kyber512")
    assert p.u_bytes == 2 * 256 * 10 // 8
    assert p.v_bytes == 256 * 4 // 8


def test_lwe_sets_carry_four_bits_per_slot():
    for name in ("lwe640", "lwe976", "lwe1344"):
        p = get_params(name)
        assert not p.structured
        assert p.v_slots == 64
        assert p.v_slots * p.msg_bits == 256
        assert not p.compresses(p.d_u)


def test_variant_flags():
    assert get_params("kyber512").uses_ntt
    assert not get_params("rlwe512").uses_ntt
    assert not get_params("kyber512").sap_noise
    assert get_params("rlwe1024").sap_noise and get_params("lwe640").sap_noise


@pytest.mark.parametrize("kwargs", [
    dict(variant=Variant.MLWE, n=256, k=2, q=3329, d_t=12, d_u=10, d_v=4),
    dict(variant=Variant.RLWE, n=512, k=2, q=12289, d_t=14, d_u=14, d_v=4),
    dict(variant=Variant.RLWE, n=128, k=1, q=12289, d_t=14, d_u=14, d_v=4),
    dict(variant=Variant.MLWE, n=256, k=2, q=3329, d_t=0, d_u=10, d_v=4),
])
def test_inconsistent_sets_are_rejected(kwargs):
    with pytest.raises(ParameterError):
        ParamSet("broken", eta1=2, eta2=2, **kwargs)
