from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence
import logging

from tqdm import tqdm

from pqstealth.core.errors import EncodingError
from pqstealth.kem.kem import SharedSecret
from pqstealth.sap.keys import ViewingKey
from pqstealth.sap.protocol import Announcement, StealthAddress, ViewTagMode, check_announcement


class CheckStatus(Enum):
    """Outcome of checking one announcement."""
    TAG_MISMATCH = "tag_mismatch"
    ADDRESS_MISMATCH = "address_mismatch"
    MATCHED = "matched"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class ScanMatch:
    index: int
    S: SharedSecret
    stealth: StealthAddress


@dataclass
class ScanStats:
    scanned: int = 0
    tag_passes: int = 0
    matches: int = 0
    malformed: List[int] = field(default_factory=list)

    def merge(self, other: "ScanStats"):
        self.scanned += other.scanned
        self.tag_passes += other.tag_passes
        self.matches += other.matches
        self.malformed.extend(other.malformed)


@dataclass
class ScanResult:
    matches: List[ScanMatch]
    stats: ScanStats
    last_index: Optional[int] = None

    @property
    def cursor_after(self) -> Optional[int]:
        """One past the highest index scanned, for incremental rescans."""
        return self.last_index + 1 if self.last_index is not None else None


class Scanner:
    """Checks announcements against a viewing key, optionally on a worker pool."""

    def __init__(self,
                 view_key: ViewingKey,
                 vt_mode=ViewTagMode.ONE_BYTE,
                 threads: int = 1,
                 show_progress: bool = False,
                 progress_callback: Optional[Callable[[int, CheckStatus], None]] = None):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.view_key = view_key
        self.vt_mode = ViewTagMode.parse(vt_mode)
        self.threads = threads
        self.show_progress = show_progress
        self.progress_callback = progress_callback

    def _scan_chunk(self, announcements: Sequence[Announcement], offset: int, bar) -> ScanResult:
        matches: List[ScanMatch] = []
        stats = ScanStats()
        for i, a in enumerate(announcements):
            index = a.index if a.index is not None else offset + i
            stats.scanned += 1
            try:
                tag_passed, matched, found = check_announcement(self.view_key, a, self.vt_mode)
            except EncodingError as e:
                logging.warning(f"Skipping malformed announcement {index}: {e}")
                stats.malformed.append(index)
                status = CheckStatus.MALFORMED
            else:
                stats.tag_passes += int(tag_passed)
                if matched:
                    S, stealth = found
                    matches.append(ScanMatch(index, S, stealth))
                    stats.matches += 1
                    status = CheckStatus.MATCHED
                else:
                    status = CheckStatus.ADDRESS_MISMATCH if tag_passed else CheckStatus.TAG_MISMATCH
            if self.progress_callback:
                self.progress_callback(index, status)
            if bar is not None:
                bar.update(1)
        return ScanResult(matches, stats)

    def scan(self, announcements: Sequence[Announcement]) -> ScanResult:
        announcements = list(announcements)
        bar = tqdm(total=len(announcements), desc="Scanning announcements", disable=not self.show_progress)
        try:
            if self.threads == 1 or len(announcements) < 2:
                result = self._scan_chunk(announcements, 0, bar)
            else:
                size = -(-len(announcements) // self.threads)
                bounds = range(0, len(announcements), size)
                with ThreadPoolExecutor(max_workers=self.threads) as executor:
                    futures = [executor.submit(self._scan_chunk, announcements[lo:lo + size], lo, bar)
                               for lo in bounds]
                    # chunks are contiguous, so concatenating in submission order keeps index order
                    parts = [f.result() for f in futures]
                result = ScanResult([], ScanStats())
                for part in parts:
                    result.matches.extend(part.matches)
                    result.stats.merge(part.stats)
        finally:
            bar.close()
        if announcements:
            last = announcements[-1].index
            result.last_index = last if last is not None else len(announcements) - 1
        logging.info(f"Scanned {result.stats.scanned} announcements: {result.stats.tag_passes} passed the "
                     f"view tag, {result.stats.matches} matched, {len(result.stats.malformed)} malformed")
        return result


def scan(view_key: ViewingKey, announcements: Sequence[Announcement], vt_mode=ViewTagMode.ONE_BYTE,
         threads: int = 1, show_progress: bool = False) -> ScanResult:
    return Scanner(view_key, vt_mode, threads=threads, show_progress=show_progress).scan(announcements)
