import time

import pytest
from watchdog.events import FileModifiedEvent

from pqstealth.sap.protocol import send
from pqstealth.storage.registry import RegistryFile
from pqstealth.watchers.watchers import ChangeBuffer, RegistryWatcher


@pytest.fixture
def registry(tmp_path, kyber512):
    return RegistryFile.create(tmp_path / "watched.registry", kyber512, "1byte")


@pytest.fixture
def watcher(registry, viewing_key):
    found = []
    w = RegistryWatcher(registry, viewing_key, on_match=found.append, debounce_seconds=0)
    w.found = found
    return w


def test_change_buffer_debounces():
    buffer = ChangeBuffer(debounce_seconds=60)
    assert not buffer.take()
    buffer.touch()
    assert not buffer.take()

    buffer = ChangeBuffer(debounce_seconds=0)
    buffer.touch()
    time.sleep(0.01)
    assert buffer.take()
    assert not buffer.take()


def test_rescan_advances_the_cursor(watcher, registry, recipient, other_recipient):
    registry.publish(send(other_recipient[1], b"\x01" * 32)[0])
    registry.publish(send(recipient[1], b"\x02" * 32)[0])

    result = watcher.rescan()
    assert [m.index for m in result.matches] == [1]
    assert watcher.cursor == 2
    assert [m.index for m in watcher.found] == [1]

    assert watcher.rescan().matches == []
    assert watcher.cursor == 2

    registry.publish(send(recipient[1], b"\x03" * 32)[0])
    assert [m.index for m in watcher.rescan().matches] == [2]
    assert watcher.cursor == 3


def test_registry_events_trigger_a_rescan(watcher, registry, recipient):
    assert watcher.process_pending() is None
    registry.publish(send(recipient[1], b"\x04" * 32)[0])
    watcher.on_modified(FileModifiedEvent(str(registry.path)))
    time.sleep(0.01)
    result = watcher.process_pending()
    assert result is not None and result.stats.matches == 1
    assert watcher.process_pending() is None


def test_other_files_are_ignored(watcher, registry):
    watcher.on_modified(FileModifiedEvent(str(registry.path.parent / "unrelated.txt")))
    time.sleep(0.01)
    assert watcher.process_pending() is None
