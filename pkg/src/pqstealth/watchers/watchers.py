from typing import Callable, List, Optional
from pathlib import Path
from threading import Lock
import time
import logging

from watchdog.events import FileSystemEvent, FileSystemEventHandler
from watchdog.observers import Observer

from pqstealth.pipeline.scanner import ScanMatch, ScanResult, Scanner
from pqstealth.sap.keys import ViewingKey
from pqstealth.storage.registry import RegistryFile


class ChangeBuffer:
    """Collapses bursts of change events into one pending rescan."""

    def __init__(self, debounce_seconds: float = 0.5):
        self.lock = Lock()
        self.debounce_seconds = debounce_seconds
        self.last_event: Optional[float] = None

    def touch(self):
        with self.lock:
            self.last_event = time.monotonic()

    def take(self) -> bool:
        """True once the last event is older than the debounce window; clears it."""
        with self.lock:
            if self.last_event is None:
                return False
            if time.monotonic() - self.last_event < self.debounce_seconds:
                return False
            self.last_event = None
            return True


class RegistryWatcher(FileSystemEventHandler):
    """Rescans a registry from the last cursor whenever the file grows."""

    def __init__(self,
                 registry: RegistryFile,
                 view_key: ViewingKey,
                 on_match: Callable[[ScanMatch], None],
                 cursor: int = 0,
                 threads: int = 1,
                 debounce_seconds: float = 0.5):
        super().__init__()
        self.registry = registry
        self.cursor = cursor
        self.on_match = on_match
        self.scanner = Scanner(view_key, registry.vt_mode, threads=threads)
        self.buffer = ChangeBuffer(debounce_seconds)
        self.observer = None
        self._path = registry.path.resolve()

    def _is_registry(self, event: FileSystemEvent) -> bool:
        if event.is_directory:
            return False
        paths = [event.src_path, getattr(event, "dest_path", "") or ""]
        return any(p and Path(p).resolve() == self._path for p in paths)

    def on_modified(self, event: FileSystemEvent):
        if self._is_registry(event):
            self.buffer.touch()

    on_created = on_modified
    on_moved = on_modified

    def rescan(self) -> ScanResult:
        """Scan announcements published since the cursor and advance it."""
        announcements = self.registry.read_since(self.cursor)
        result = self.scanner.scan(announcements)
        for match in result.matches:
            self.on_match(match)
        if result.cursor_after is not None:
            self.cursor = result.cursor_after
        logging.info(f"Rescanned {self.registry.path}: {len(result.matches)} new match(es), cursor {self.cursor}")
        return result

    def process_pending(self) -> Optional[ScanResult]:
        if self.buffer.take():
            return self.rescan()
        return None

    def start(self):
        self.observer = Observer()
        self.observer.schedule(self, str(self._path.parent), recursive=False)
        self.observer.start()
        logging.info(f"Watching registry {self._path}")

    def stop(self):
        if self.observer is not None:
            self.observer.stop()
            self.observer.join()
            self.observer = None
            logging.info("Registry watcher stopped")

    def run(self, poll_seconds: float = 0.1, stop_after: Optional[float] = None) -> List[ScanMatch]:
        """Block, rescanning on change, until interrupted or ``stop_after`` seconds pass."""
        found: List[ScanMatch] = []
        self.start()
        deadline = time.monotonic() + stop_after if stop_after is not None else None
        try:
            found.extend(self.rescan().matches)
            while deadline is None or time.monotonic() < deadline:
                result = self.process_pending()
                if result is not None:
                    found.extend(result.matches)
                time.sleep(poll_seconds)
        finally:
            self.stop()
        return found
