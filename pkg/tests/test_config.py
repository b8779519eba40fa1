import json
import logging
from pathlib import Path

import pytest

from pqstealth.core.config import DEFAULT_CONFIG, ConfigManager
from pqstealth.core.errors import ConfigError


def test_defaults(tmp_path):
    cm = ConfigManager()
    assert cm.get("default_paramset") == "kyber512"
    assert cm.get("default_view_tag") == "1byte"
    assert cm.get("bench.sizes") == [5000, 10000, 20000, 40000, 80000]
    assert cm.get("bench.repeats") == 10
    assert cm.get("missing.key", "fallback") == "fallback"
    assert cm.get("data_dir") == str(tmp_path / "data")
    assert cm.validate()


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PQSTEALTH_THREADS", "4")
    monkeypatch.setenv("PQSTEALTH_SHOW_PROGRESS", "yes")
    monkeypatch.setenv("PQSTEALTH_DEFAULT_PARAMSET", "rlwe512")
    cm = ConfigManager()
    assert cm.get("threads") == 4
    assert cm.get("show_progress") is True
    assert cm.get("default_paramset") == "rlwe512"


def test_bad_environment_value(monkeypatch):
    monkeypatch.setenv("PQSTEALTH_THREADS", "many")
    with pytest.raises(ConfigError, match="PQSTEALTH_THREADS"):
        ConfigManager()


def test_file_overrides_nested_settings(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"threads": 2, "bench": {"repeats": 3}, "watch": {"debounce_delay": 0.1}}))
    cm = ConfigManager(path)
    assert cm.get("threads") == 2
    assert cm.get("bench.repeats") == 3
    assert cm.get("bench.warmup_announcements") == 100
    assert cm.get("watch.debounce_delay") == 0.1
    # defaults are not shared between managers
    assert DEFAULT_CONFIG["bench"]["repeats"] == 10


def test_environment_beats_file(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"threads": 2}))
    monkeypatch.setenv("PQSTEALTH_THREADS", "6")
    assert ConfigManager(path).get("threads") == 6


@pytest.mark.parametrize("document", [{"nope": 1}, {"bench": {"nope": 1}}, {"bench": 5}])
def test_unknown_keys_in_file(tmp_path, document):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document))
    with pytest.raises(ConfigError):
        ConfigManager(path)


def test_unreadable_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        ConfigManager(path)


def test_set_rejects_unknown_keys():
    cm = ConfigManager()
    cm.set("bench.repeats", 4)
    assert cm.get("bench.repeats") == 4
    with pytest.raises(ConfigError):
        cm.set("bench.unknown", 1)
    with pytest.raises(ConfigError):
        cm.set("logging.file", {})


@pytest.mark.parametrize("key, value", [
    ("default_paramset", "kyber9000"), ("default_view_tag", "2byte"), ("threads", 0),
    ("bench.sizes", [100, -1]), ("bench.repeats", 0), ("registry.decoy_recipients", 0),
])
def test_validate(key, value):
    cm = ConfigManager()
    cm.set(key, value)
    with pytest.raises(ConfigError, match="validation failed"):
        cm.validate()


def test_export_and_reload(tmp_path):
    cm = ConfigManager()
    cm.set("bench.repeats", 7)
    out = tmp_path / "exported" / "config.json"
    cm.export_config(out)
    reloaded = ConfigManager(out)
    assert reloaded.get("bench.repeats") == 7
    assert reloaded.to_dict() == cm.to_dict()


def test_setup_logging_writes_under_data_dir(tmp_path):
    cm = ConfigManager()
    cm.setup_logging(verbose=True)
    logging.info("hello from the config test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    log_file = Path(cm.get("data_dir")) / "logs" / "pqstealth.log"
    assert log_file == cm.log_path()
    assert "hello from the config test" in log_file.read_text()


def test_setup_logging_replaces_handlers():
    cm = ConfigManager()
    cm.setup_logging()
    cm.setup_logging()
    assert len(logging.getLogger().handlers) == 2
