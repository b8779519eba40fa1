import csv
import io
import json

import pytest

from pqstealth.core.errors import ParameterError
from pqstealth.lattice.params import get_params
from pqstealth.pipeline.bench import REPORT_FIELDS, BenchReport, BenchRunner, format_reports

SEED = b"\x0b" * 32
ORDERING_ANNOUNCEMENTS = 2000
ORDERING_REPEATS = 3
VIEW_TAG_ANNOUNCEMENTS = 10_000


@pytest.fixture(scope="module")
def report():
    return BenchRunner(warmup=2).run(get_params("kyber512"), 5, "1byte", repeats=2, seed=SEED)


def test_report_shape(report):
    assert report.paramset == "kyber512"
    assert report.n_announcements == 5
    assert report.vt_mode == "1byte"
    assert report.repeats == 2
    assert all(t > 0 for t in report.times_ms)
    assert report.mean_ms == pytest.approx(sum(report.times_ms) / 2)


def test_single_sample_has_zero_spread():
    assert BenchReport("kyber512", 10, "none", [3.0]).std_ms == 0.0
    assert BenchReport("kyber512", 10, "none", [1.0, 3.0]).std_ms == pytest.approx(2 ** 0.5)


def test_reseed_rebuilds_each_repeat(tmp_path):
    runner = BenchRunner(warmup=0, keep_dir=tmp_path)
    report = runner.run(get_params("kyber512"), 3, "none", repeats=2, seed=SEED, reseed=True)
    assert report.repeats == 2
    kept = sorted(p.name for p in tmp_path.iterdir())
    assert kept == ["kyber512-3-none-r0.registry", "kyber512-3-none-r1.registry"]
    assert (tmp_path / kept[0]).read_bytes() != (tmp_path / kept[1]).read_bytes()


def test_kept_registry_is_deterministic(tmp_path):
    params = get_params("kyber512")
    for sub in ("a", "b"):
        BenchRunner(warmup=0, keep_dir=tmp_path / sub).run(params, 4, "fullhash", repeats=1, seed=SEED)
    name = "kyber512-4-fullhash.registry"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_rejects_bad_arguments():
    runner = BenchRunner()
    with pytest.raises(ParameterError):
        runner.run(get_params("kyber512"), 0, "1byte", repeats=1, seed=SEED)
    with pytest.raises(ParameterError):
        runner.run(get_params("kyber512"), 2, "1byte", repeats=0, seed=SEED)


def test_csv_report():
    reports = [BenchReport("kyber512", 5, "1byte", [1.0, 2.5]), BenchReport("lwe640", 5, "none", [4.0])]
    rows = list(csv.DictReader(io.StringIO(format_reports(reports, "csv"))))
    assert list(rows[0]) == REPORT_FIELDS
    assert rows[0]["times_ms"] == "1.000;2.500"
    assert rows[0]["mean_ms"] == "1.75"
    assert rows[1]["repeats"] == "1"


def test_json_report():
    reports = [BenchReport("rlwe512", 10, "fullhash", [2.0, 4.0])]
    parsed = json.loads(format_reports(reports, "json"))
    assert parsed == [{
        "paramset": "rlwe512", "n_announcements": 10, "vt_mode": "fullhash", "repeats": 2,
        "times_ms": [2.0, 4.0], "mean_ms": 3.0, "std_ms": 1.414,
    }]


def test_unknown_format():
    with pytest.raises(ParameterError):
        format_reports([], "xml")


@pytest.mark.slow
def test_scan_time_ordering_across_lattice_families():
    runner = BenchRunner(warmup=20)
    means = {}
    for name in ("kyber512", "rlwe512", "lwe640"):
        report = runner.run(get_params(name), ORDERING_ANNOUNCEMENTS, "1byte",
                            repeats=ORDERING_REPEATS, seed=SEED)
        means[name] = report.mean_ms
    assert means["kyber512"] < means["rlwe512"] < means["lwe640"]
    assert means["lwe640"] >= 10 * means["kyber512"]


@pytest.mark.slow
def test_view_tags_speed_up_scanning():
    runner = BenchRunner(warmup=50)
    params = get_params("kyber512")
    means = {
        mode: runner.run(params, VIEW_TAG_ANNOUNCEMENTS, mode, repeats=ORDERING_REPEATS, seed=SEED).mean_ms
        for mode in ("none", "1byte", "fullhash")
    }
    assert means["1byte"] <= 0.9 * means["none"]
    # both skip the same derivations apart from about n / 256; allow for timing noise
    assert means["fullhash"] <= 1.05 * means["1byte"]
