import logging
import os

import pytest
from click.testing import CliRunner

from pqstealth.lattice.params import get_params
from pqstealth.sap.keys import export_viewing_key, generate_meta

RECIPIENT_SEED = bytes(range(32))
OTHER_SEED = bytes(range(32, 64))


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Keep config, logs and CLI env overrides out of the developer's environment."""
    for name in list(os.environ):
        if name.startswith("PQSTEALTH_"):
            monkeypatch.delenv(name)
    monkeypatch.setenv("PQSTEALTH_DATA_DIR", str(tmp_path / "data"))
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)


@pytest.fixture(scope="session")
def kyber512():
    return get_params("kyber512")


@pytest.fixture(scope="session")
def recipient(kyber512):
    keys, meta = generate_meta(RECIPIENT_SEED, kyber512)
    return keys, meta


@pytest.fixture(scope="session")
def viewing_key(recipient):
    return export_viewing_key(recipient[0])


@pytest.fixture(scope="session")
def other_recipient(kyber512):
    return generate_meta(OTHER_SEED, kyber512)


@pytest.fixture
def runner():
    # stdout must be readable on its own; click < 8.2 needs mix_stderr=False for that
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()
