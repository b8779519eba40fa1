import pytest

from pqstealth.pipeline.scanner import CheckStatus, ScanStats, Scanner, scan
from pqstealth.sap.protocol import Announcement, ViewTagMode, send
from pqstealth.storage.registry import RegistryFile, synth_fill

SEED = b"\x0c" * 32
TARGET_ENTROPY = b"\x0d" * 32


@pytest.fixture(scope="module")
def populated(tmp_path_factory, kyber512, recipient):
    """Twelve decoys and one announcement to the recipient, per view tag mode."""
    registries = {}
    for mode in ViewTagMode:
        path = tmp_path_factory.mktemp("scan") / f"{mode.value}.registry"
        registry = RegistryFile.create(path, kyber512, mode)
        synth_fill(registry, 12, [(recipient[1], TARGET_ENTROPY)], SEED, decoy_recipients=4)
        registries[mode] = registry.read_since(0)
    return registries


@pytest.mark.parametrize("mode", list(ViewTagMode))
def test_finds_exactly_the_target(populated, recipient, viewing_key, mode):
    result = scan(viewing_key, populated[mode], mode)
    assert result.stats.scanned == 13
    assert result.stats.matches == 1
    assert result.matches[0].stealth.address == send(recipient[1], TARGET_ENTROPY, mode)[1].address
    assert result.cursor_after == 13


def test_tag_pass_counts_follow_the_mode(populated, viewing_key):
    assert scan(viewing_key, populated[ViewTagMode.NONE], "none").stats.tag_passes == 13
    assert scan(viewing_key, populated[ViewTagMode.FULL_HASH], "fullhash").stats.tag_passes == 1
    one_byte = scan(viewing_key, populated[ViewTagMode.ONE_BYTE], "1byte").stats
    assert 1 <= one_byte.tag_passes <= 13


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_threads_give_identical_results(populated, viewing_key, threads):
    announcements = populated[ViewTagMode.ONE_BYTE]
    serial = scan(viewing_key, announcements, "1byte")
    parallel = scan(viewing_key, announcements, "1byte", threads=threads)
    assert [m.index for m in parallel.matches] == [m.index for m in serial.matches]
    assert parallel.stats == serial.stats
    assert parallel.last_index == serial.last_index == 12


def test_scan_from_cursor_keeps_registry_indices(populated, viewing_key):
    tail = populated[ViewTagMode.ONE_BYTE][5:]
    result = scan(viewing_key, tail, "1byte")
    assert result.stats.scanned == 8
    assert result.cursor_after == 13
    assert all(m.index >= 5 for m in result.matches)


def test_malformed_announcement_is_skipped(populated, recipient, viewing_key):
    good = populated[ViewTagMode.ONE_BYTE]
    bad = Announcement(b"\x00" * 5, good[0].view_tag, good[0].address, index=13)
    result = scan(viewing_key, good + [bad], "1byte")
    assert result.stats.malformed == [13]
    assert result.stats.matches == 1
    assert result.cursor_after == 14


def test_progress_callback_sees_every_announcement(populated, viewing_key):
    seen = []
    scanner = Scanner(viewing_key, "fullhash", progress_callback=lambda i, status: seen.append((i, status)))
    scanner.scan(populated[ViewTagMode.FULL_HASH])
    assert sorted(i for i, _ in seen) == list(range(13))
    statuses = [s for _, s in seen]
    assert statuses.count(CheckStatus.MATCHED) == 1
    assert statuses.count(CheckStatus.TAG_MISMATCH) == 12


def test_empty_scan(viewing_key):
    result = scan(viewing_key, [])
    assert result.matches == []
    assert result.stats == ScanStats()
    assert result.cursor_after is None


def test_thread_count_must_be_positive(viewing_key):
    with pytest.raises(ValueError):
        Scanner(viewing_key, threads=0)


def test_stats_merge():
    a = ScanStats(scanned=2, tag_passes=1, matches=1, malformed=[3])
    a.merge(ScanStats(scanned=3, tag_passes=2, matches=0, malformed=[7]))
    assert a == ScanStats(scanned=5, tag_passes=3, matches=1, malformed=[3, 7])


@pytest.mark.slow
def test_one_byte_tag_false_positive_rate(tmp_path, kyber512, recipient, viewing_key):
    decoys, real = 10_000, 10
    targets = [(recipient[1], bytes([0xA0 + i]) * 32) for i in range(real)]
    registry = RegistryFile.create(tmp_path / "large.registry", kyber512, "1byte")
    synth_fill(registry, decoys, targets, SEED, decoy_recipients=8)
    announcements = registry.read_since(0)
    result = scan(viewing_key, announcements, "1byte", threads=4)

    expected_addresses = {send(meta, entropy, "1byte")[1].address for meta, entropy in targets}
    assert result.stats.matches == real
    assert {m.stealth.address for m in result.matches} == expected_addresses
    false_positives = result.stats.tag_passes - result.stats.matches
    sigma = (decoys * (1 / 256) * (255 / 256)) ** 0.5
    assert abs(false_positives - decoys / 256) <= 3 * sigma
