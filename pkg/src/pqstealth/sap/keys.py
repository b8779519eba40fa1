"""Recipient key material and the JSON files that carry it.

A recipient owns two KEM key pairs: the spend pair (k, K) and the view pair
(v, V). The public meta-address (K, V) is what senders pay to; the viewing
key (v, z_v, V, K) lets a delegate scan without being able to spend.
"""
import base64
import json
import logging
import os
import secrets
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from pqstealth.core.errors import EncodingError, KeyFileError, ParameterError, StealthError
from pqstealth.kem.kem import KEYGEN_SEED_BYTES, KemSecretKey, cca_keygen
from pqstealth.kem.pke import PkePublicKey
from pqstealth.lattice.params import SEED_BYTES, ParamSet, get_params
from pqstealth.lattice.sampling import Domain, derive_bytes, tag

FILE_VERSION = 1
META_FORMAT = "pqstealth-meta"
KEYS_FORMAT = "pqstealth-keys"
VIEW_FORMAT = "pqstealth-viewing-key"

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class StealthMetaAddress:
    spend: PkePublicKey
    view: PkePublicKey
    params: ParamSet

    def __eq__(self, other) -> bool:
        if not isinstance(other, StealthMetaAddress):
            return NotImplemented
        return self.params == other.params and self.spend == other.spend and self.view == other.view

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ViewingKey:
    view_sk: KemSecretKey
    spend_pk: PkePublicKey
    params: ParamSet

    @property
    def view_pk(self) -> PkePublicKey:
        return self.view_sk.pk

    def __repr__(self) -> str:
        return f"ViewingKey(params={self.params.name})"


@dataclass(frozen=True, eq=False)
class RecipientKeys:
    spend_sk: KemSecretKey
    view_sk: KemSecretKey
    params: ParamSet

    @property
    def spend_pk(self) -> PkePublicKey:
        return self.spend_sk.pk

    @property
    def view_pk(self) -> PkePublicKey:
        return self.view_sk.pk

    @property
    def meta(self) -> StealthMetaAddress:
        return StealthMetaAddress(self.spend_pk, self.view_pk, self.params)

    def __repr__(self) -> str:
        return f"RecipientKeys(params={self.params.name})"


def generate_meta(seed: Optional[bytes], params: ParamSet) -> Tuple[RecipientKeys, StealthMetaAddress]:
    """Two independent KEM key pairs, domain-separated from one seed."""
    if seed is None:
        seed = secrets.token_bytes(SEED_BYTES)
    spend_pk, spend_sk = cca_keygen(derive_bytes(seed, tag(Domain.META_SPEND), KEYGEN_SEED_BYTES), params)
    view_pk, view_sk = cca_keygen(derive_bytes(seed, tag(Domain.META_VIEW), KEYGEN_SEED_BYTES), params)
    if spend_pk == view_pk:
        raise StealthError("spend and view keys collided")
    keys = RecipientKeys(spend_sk, view_sk, params)
    return keys, keys.meta


def export_viewing_key(keys: RecipientKeys) -> ViewingKey:
    return ViewingKey(keys.view_sk, keys.spend_pk, keys.params)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(value: Any, field: str) -> bytes:
    try:
        return base64.b64decode(value, validate=True)
    except (TypeError, ValueError) as e:
        raise KeyFileError(f"field '{field}' is not valid base64: {e}") from e


def _write_json(path: PathLike, document: Dict[str, Any], private: bool):
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if private:
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        # O_CREAT does not change the mode of an existing file
        os.chmod(path, 0o600)
    else:
        path.write_text(text, encoding="utf-8")
    logging.info(f"Wrote {document['format']} file {path}")


def _read_json(path: PathLike, expected_format: str) -> Tuple[Dict[str, Any], ParamSet]:
    path = Path(path).expanduser()
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise KeyFileError(f"key file not found: {path}") from None
    except (OSError, ValueError) as e:
        raise KeyFileError(f"cannot read {path}: {e}") from e
    if not isinstance(document, dict) or document.get("format") != expected_format:
        raise KeyFileError(f"{path} is not a {expected_format} file")
    if document.get("version") != FILE_VERSION:
        raise KeyFileError(f"{path} has unsupported version {document.get('version')}")
    try:
        params = get_params(str(document.get("params")))
    except ParameterError as e:
        raise KeyFileError(f"{path}: {e}") from e
    return document, params


def _field(document: Dict[str, Any], name: str, path: PathLike) -> bytes:
    if name not in document:
        raise KeyFileError(f"{path} is missing field '{name}'")
    return _unb64(document[name], name)


def save_meta(meta: StealthMetaAddress, path: PathLike):
    _write_json(path, {
        "format": META_FORMAT,
        "version": FILE_VERSION,
        "params": meta.params.name,
        "spend_pk": _b64(meta.spend.to_bytes()),
        "view_pk": _b64(meta.view.to_bytes()),
    }, private=False)


def load_meta(path: PathLike) -> StealthMetaAddress:
    document, params = _read_json(path, META_FORMAT)
    try:
        spend = PkePublicKey.from_bytes(_field(document, "spend_pk", path), params)
        view = PkePublicKey.from_bytes(_field(document, "view_pk", path), params)
    except EncodingError as e:
        raise KeyFileError(f"{path}: {e}") from e
    return StealthMetaAddress(spend, view, params)


def save_recipient_keys(keys: RecipientKeys, path: PathLike):
    _write_json(path, {
        "format": KEYS_FORMAT,
        "version": FILE_VERSION,
        "params": keys.params.name,
        "spend_sk": _b64(keys.spend_sk.to_bytes()),
        "view_sk": _b64(keys.view_sk.to_bytes()),
    }, private=True)


def load_recipient_keys(path: PathLike) -> RecipientKeys:
    document, params = _read_json(path, KEYS_FORMAT)
    try:
        spend_sk = KemSecretKey.from_bytes(_field(document, "spend_sk", path), params)
        view_sk = KemSecretKey.from_bytes(_field(document, "view_sk", path), params)
    except EncodingError as e:
        raise KeyFileError(f"{path}: {e}") from e
    return RecipientKeys(spend_sk, view_sk, params)


def save_viewing_key(view_key: ViewingKey, path: PathLike):
    _write_json(path, {
        "format": VIEW_FORMAT,
        "version": FILE_VERSION,
        "params": view_key.params.name,
        "view_sk": _b64(view_key.view_sk.to_bytes()),
        "spend_pk": _b64(view_key.spend_pk.to_bytes()),
    }, private=True)


def load_viewing_key(path: PathLike) -> ViewingKey:
    document, params = _read_json(path, VIEW_FORMAT)
    try:
        view_sk = KemSecretKey.from_bytes(_field(document, "view_sk", path), params)
        spend_pk = PkePublicKey.from_bytes(_field(document, "spend_pk", path), params)
    except EncodingError as e:
        raise KeyFileError(f"{path}: {e}") from e
    return ViewingKey(view_sk, spend_pk, params)
