"""Append-only announcement registry backed by a line-delimited text file.

Layout::

    # pqstealth-registry 1 params=<id> view_tag=<bytes>
    <index>\t<base64(R)>\t<hex(view tag)>\t<hex(address)>
    ...

Indices are dense from 0. A final line without a newline is an append in
flight and is invisible to readers; the next append truncates it.
"""
import base64
import binascii
import logging
import os
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from pqstealth.core.errors import ParamsMismatchError, RegistryError, RegistryFormatError
from pqstealth.lattice.params import ParamSet, get_params
from pqstealth.lattice.sampling import Domain, derive_bytes, tag
from pqstealth.sap.keys import StealthMetaAddress, generate_meta
from pqstealth.sap.protocol import ADDRESS_BYTES, Announcement, ViewTagMode, send

HEADER_MAGIC = "# pqstealth-registry"
FORMAT_VERSION = 1
DEFAULT_DECOY_RECIPIENTS = 8
TAIL_CHUNK = 4096

PathLike = Union[str, Path]


def format_header(params: ParamSet, vt_mode: ViewTagMode) -> str:
    return f"{HEADER_MAGIC} {FORMAT_VERSION} params={params.name} view_tag={vt_mode.width}\n"


def parse_header(line: str) -> Tuple[ParamSet, ViewTagMode]:
    parts = line.rstrip("\n").split(" ")
    if len(parts) != 5 or " ".join(parts[:2]) != HEADER_MAGIC:
        raise RegistryFormatError("missing registry header", line_number=1)
    if parts[2] != str(FORMAT_VERSION):
        raise RegistryFormatError(f"unsupported registry version {parts[2]}", line_number=1)
    fields = dict(p.split("=", 1) for p in parts[3:] if "=" in p)
    try:
        return get_params(fields["params"]), ViewTagMode.parse(int(fields["view_tag"]))
    except (KeyError, ValueError) as e:
        raise RegistryFormatError(f"bad registry header: {e}", line_number=1) from e


class RegistryFile:
    """One registry file. Single writer, any number of readers."""

    def __init__(self, path: PathLike, params: ParamSet, vt_mode: ViewTagMode):
        self.path = Path(path).expanduser()
        self.params = params
        self.vt_mode = vt_mode

    @classmethod
    def create(cls, path: PathLike, params: ParamSet, vt_mode=ViewTagMode.ONE_BYTE,
               exist_ok: bool = False) -> "RegistryFile":
        vt_mode = ViewTagMode.parse(vt_mode)
        path = Path(path).expanduser()
        if path.exists():
            if not exist_ok:
                raise RegistryError(f"registry already exists: {path}")
            registry = cls.open(path, params)
            if registry.vt_mode is not vt_mode:
                raise RegistryError(
                    f"registry {path} uses view tag mode {registry.vt_mode.value}, not {vt_mode.value}")
            return registry
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "x", encoding="ascii") as f:
            f.write(format_header(params, vt_mode))
            f.flush()
            os.fsync(f.fileno())
        logging.info(f"Created registry {path} (params={params.name}, view_tag={vt_mode.value})")
        return cls(path, params, vt_mode)

    @classmethod
    def open(cls, path: PathLike, params: Optional[ParamSet] = None) -> "RegistryFile":
        """Open an existing registry; ``params`` rejects a registry built for another set."""
        path = Path(path).expanduser()
        try:
            with open(path, "r", encoding="ascii") as f:
                header = f.readline()
        except FileNotFoundError:
            raise RegistryError(f"registry not found: {path}") from None
        except (OSError, UnicodeDecodeError) as e:
            raise RegistryError(f"cannot read registry {path}: {e}") from e
        found, vt_mode = parse_header(header)
        if params is not None and found != params:
            raise ParamsMismatchError(params.name, found.name)
        logging.debug(f"Opened registry {path} (params={found.name})")
        return cls(path, found, vt_mode)

    def _records(self) -> Iterator[Tuple[int, str]]:
        with open(self.path, "r", encoding="ascii") as f:
            f.readline()
            for line_number, line in enumerate(f, start=2):
                if not line.endswith("\n"):
                    return
                yield line_number, line

    def __len__(self) -> int:
        return sum(1 for _ in self._records())

    def _parse(self, expected_index: int, line_number: int, line: str) -> Announcement:
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 4:
            raise RegistryFormatError(f"expected 4 fields, found {len(fields)}", expected_index, line_number)
        raw_index, r_b64, tag_hex, addr_hex = fields
        if raw_index != str(expected_index):
            raise RegistryFormatError(f"index field is '{raw_index}'", expected_index, line_number)
        try:
            ephemeral = base64.b64decode(r_b64, validate=True)
            view_tag = bytes.fromhex(tag_hex)
            address = bytes.fromhex(addr_hex)
        except (binascii.Error, ValueError) as e:
            raise RegistryFormatError(f"undecodable field: {e}", expected_index, line_number) from e
        if len(ephemeral) != self.params.ct_bytes:
            raise RegistryFormatError(
                f"ephemeral key is {len(ephemeral)} bytes, {self.params.name} uses {self.params.ct_bytes}",
                expected_index, line_number)
        if len(view_tag) != self.vt_mode.width or len(address) != ADDRESS_BYTES:
            raise RegistryFormatError("view tag or address has the wrong width", expected_index, line_number)
        return Announcement(ephemeral, view_tag, address, expected_index)

    def iterate_since(self, cursor: int = 0) -> Iterator[Announcement]:
        """Announcements [cursor, N) in index order."""
        if cursor < 0:
            raise RegistryError(f"cursor must be non-negative, got {cursor}")
        count = 0
        for index, (line_number, line) in enumerate(self._records()):
            count = index + 1
            if index >= cursor:
                yield self._parse(index, line_number, line)
        if cursor > count:
            raise RegistryError(f"cursor {cursor} is past the end of the registry ({count} entries)")

    def read_since(self, cursor: int = 0) -> List[Announcement]:
        return list(self.iterate_since(cursor))

    def _check(self, a: Announcement):
        if len(a.ephemeral) != self.params.ct_bytes:
            raise RegistryError(
                f"ephemeral key is {len(a.ephemeral)} bytes, {self.params.name} uses {self.params.ct_bytes}")
        if len(a.view_tag) != self.vt_mode.width:
            raise RegistryError(f"view tag is {len(a.view_tag)} bytes, registry uses {self.vt_mode.width}")
        if len(a.address) != ADDRESS_BYTES:
            raise RegistryError(f"address must be {ADDRESS_BYTES} bytes")

    @staticmethod
    def _format(index: int, a: Announcement) -> str:
        r_b64 = base64.b64encode(a.ephemeral).decode("ascii")
        return f"{index}\t{r_b64}\t{a.view_tag.hex()}\t{a.address.hex()}\n"

    def _drop_torn_tail(self, f) -> int:
        """Truncate an unterminated last line left by an interrupted append; returns the new size."""
        size = f.seek(0, os.SEEK_END)
        end = size
        while end > 0:
            step = min(TAIL_CHUNK, end)
            f.seek(end - step)
            cut = f.read(step).rfind(b"\n")
            if cut >= 0:
                end = end - step + cut + 1
                break
            end -= step
        if end != size:
            logging.warning(f"Dropping {size - end} byte(s) of unterminated record at the end of {self.path}")
            f.truncate(end)
        return end

    def publish_many(self, announcements: Iterable[Announcement]) -> List[int]:
        """Append announcements in order; durable once this returns."""
        pending = list(announcements)
        for a in pending:
            self._check(a)
        start = len(self)
        with open(self.path, "r+b") as f:
            f.seek(self._drop_torn_tail(f))
            for offset, a in enumerate(pending):
                f.write(self._format(start + offset, a).encode("ascii"))
            f.flush()
            os.fsync(f.fileno())
        logging.debug(f"Published {len(pending)} announcement(s) to {self.path} at index {start}")
        return list(range(start, start + len(pending)))

    def publish(self, announcement: Announcement) -> int:
        return self.publish_many([announcement])[0]


def synth_fill(registry: RegistryFile, n_decoys: int,
               targets: Sequence[Tuple[StealthMetaAddress, bytes]], seed: bytes,
               decoy_recipients: int = DEFAULT_DECOY_RECIPIENTS,
               show_progress: bool = False) -> RegistryFile:
    """Append n_decoys real announcements to throwaway recipients plus the targets.

    Targets land at positions drawn from a generator seeded by ``seed``;
    everything written is a function of (seed, n_decoys, targets).
    """
    if n_decoys < 0:
        raise ValueError(f"n_decoys must be >= 0, got {n_decoys}")
    params, vt_mode = registry.params, registry.vt_mode
    for meta, _ in targets:
        if meta.params != params:
            raise ParamsMismatchError(params.name, meta.params.name, what="target meta-address")

    total = n_decoys + len(targets)
    rng = np.random.default_rng(int.from_bytes(derive_bytes(seed, tag(Domain.SYNTH_LAYOUT), 8), "little"))
    positions = np.sort(rng.choice(total, size=len(targets), replace=False)) if targets else np.array([], int)
    slot_to_target = {int(pos): i for i, pos in enumerate(positions)}

    pool = [generate_meta(derive_bytes(seed, tag(Domain.DECOY_META, j)), params)[1]
            for j in range(min(decoy_recipients, n_decoys))]

    announcements = []
    decoy = 0
    for slot in tqdm(range(total), desc="Synthesizing registry", disable=not show_progress):
        if slot in slot_to_target:
            meta, entropy = targets[slot_to_target[slot]]
        else:
            meta, entropy = pool[decoy % len(pool)], derive_bytes(seed, tag(Domain.DECOY_SEND, decoy))
            decoy += 1
        announcements.append(send(meta, entropy, vt_mode)[0])
    registry.publish_many(announcements)
    logging.info(f"Synthesized {n_decoys} decoys and {len(targets)} target(s) into {registry.path}")
    return registry
