"""Scan-time benchmark over synthetic announcement registries.

Only the scan is timed. Key generation, registry synthesis and reading the
registry back happen outside the clock, and a warm-up scan over a prefix of
the registry runs before the first sample.
"""
import csv
import io
import json
import logging
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, TextIO, Tuple

import numpy as np

from pqstealth.core.errors import ParameterError, StealthError
from pqstealth.lattice.params import ParamSet
from pqstealth.lattice.sampling import Domain, derive_bytes, tag
from pqstealth.pipeline.scanner import Scanner
from pqstealth.sap.keys import ViewingKey, export_viewing_key, generate_meta
from pqstealth.sap.protocol import Announcement, ViewTagMode
from pqstealth.storage.registry import DEFAULT_DECOY_RECIPIENTS, RegistryFile, synth_fill

REPORT_FIELDS = ["paramset", "n_announcements", "vt_mode", "repeats", "times_ms", "mean_ms", "std_ms"]
DEFAULT_SIZES = [5000, 10000, 20000, 40000, 80000]


@dataclass
class BenchReport:
    paramset: str
    n_announcements: int
    vt_mode: str
    times_ms: List[float] = field(default_factory=list)

    @property
    def repeats(self) -> int:
        return len(self.times_ms)

    @property
    def mean_ms(self) -> float:
        return float(np.mean(self.times_ms))

    @property
    def std_ms(self) -> float:
        return float(np.std(self.times_ms, ddof=1)) if len(self.times_ms) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "paramset": self.paramset,
            "n_announcements": self.n_announcements,
            "vt_mode": self.vt_mode,
            "repeats": self.repeats,
            "times_ms": [round(t, 3) for t in self.times_ms],
            "mean_ms": round(self.mean_ms, 3),
            "std_ms": round(self.std_ms, 3),
        }


def write_json(reports: Iterable[BenchReport], stream: TextIO):
    json.dump([r.to_dict() for r in reports], stream, indent=2)
    stream.write("\n")


def write_csv(reports: Iterable[BenchReport], stream: TextIO):
    writer = csv.DictWriter(stream, fieldnames=REPORT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        row = report.to_dict()
        row["times_ms"] = ";".join(f"{t:.3f}" for t in row["times_ms"])
        writer.writerow(row)


def format_reports(reports: Iterable[BenchReport], fmt: str = "csv") -> str:
    buffer = io.StringIO()
    if fmt == "csv":
        write_csv(reports, buffer)
    elif fmt == "json":
        write_json(reports, buffer)
    else:
        raise ParameterError(f"unknown report format '{fmt}' (use csv or json)")
    return buffer.getvalue()


class BenchRunner:
    """Builds registries with ``synth_fill`` and times full scans over them."""

    def __init__(self,
                 threads: int = 1,
                 warmup: int = 100,
                 decoy_recipients: int = DEFAULT_DECOY_RECIPIENTS,
                 keep_dir: Optional[Path] = None,
                 show_progress: bool = False):
        self.threads = threads
        self.warmup = warmup
        self.decoy_recipients = decoy_recipients
        self.keep_dir = Path(keep_dir).expanduser() if keep_dir else None
        self.show_progress = show_progress

    def _registry_path(self, workdir: Path, params: ParamSet, n: int, mode: ViewTagMode, tag_: str) -> Path:
        base = self.keep_dir or workdir
        base.mkdir(parents=True, exist_ok=True)
        return base / f"{params.name}-{n}-{mode.value}{tag_}.registry"

    def build(self, params: ParamSet, n: int, mode: ViewTagMode, seed: bytes,
              path: Path) -> Tuple[ViewingKey, List[Announcement]]:
        """One recipient, one announcement to them among n - 1 decoys."""
        keys, meta = generate_meta(derive_bytes(seed, tag(Domain.BENCH, 0)), params)
        if path.exists():
            path.unlink()
        registry = RegistryFile.create(path, params, mode)
        synth_fill(registry, n - 1, [(meta, derive_bytes(seed, tag(Domain.BENCH, 1)))], seed,
                   decoy_recipients=self.decoy_recipients, show_progress=self.show_progress)
        return export_viewing_key(keys), registry.read_since(0)

    def run(self, params: ParamSet, n: int, vt_mode, repeats: int, seed: bytes,
            reseed: bool = False) -> BenchReport:
        if n < 1:
            raise ParameterError(f"announcement count must be >= 1, got {n}")
        if repeats < 1:
            raise ParameterError(f"repeats must be >= 1, got {repeats}")
        mode = ViewTagMode.parse(vt_mode)
        report = BenchReport(params.name, n, mode.value)
        logging.info(f"Benchmark {params.name}: n={n}, view_tag={mode.value}, repeats={repeats}, reseed={reseed}")

        with tempfile.TemporaryDirectory(prefix="pqstealth-bench-") as tmp:
            workdir = Path(tmp)
            fixture = None
            for r in range(repeats):
                if fixture is None or reseed:
                    run_seed = derive_bytes(seed, tag(Domain.BENCH, 2 + r)) if reseed else seed
                    path = self._registry_path(workdir, params, n, mode, f"-r{r}" if reseed else "")
                    fixture = self.build(params, n, mode, run_seed, path)
                    view_key, announcements = fixture
                    scanner = Scanner(view_key, mode, threads=self.threads)
                    if self.warmup:
                        scanner.scan(announcements[:self.warmup])

                start = time.perf_counter()
                result = scanner.scan(announcements)
                elapsed_ms = (time.perf_counter() - start) * 1000.0

                if result.stats.matches != 1:
                    raise StealthError(
                        f"benchmark scan found {result.stats.matches} matches, expected exactly 1")
                report.times_ms.append(elapsed_ms)
                logging.info(f"Sample {r + 1}/{repeats} for {params.name}: {elapsed_ms:.1f} ms "
                             f"({result.stats.tag_passes} tag passes)")
        return report
