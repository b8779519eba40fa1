from pathlib import Path
from typing import Any, Dict, Optional, Union
import copy
import json
import os
from dataclasses import dataclass, asdict
import logging
import logging.handlers

from pqstealth.core.errors import ConfigError

ENV_PREFIX = "PQSTEALTH_"
VIEW_TAG_MODES = ("none", "1byte", "fullhash")


@dataclass
class StealthConfig:
    """Configuration settings for pqstealth."""
    data_dir: str = "~/.pqstealth"

    # Protocol defaults
    default_paramset: str = "kyber512"
    default_view_tag: str = "1byte"

    # Scanning
    threads: int = 1
    show_progress: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_CONFIG = {
    "bench": {
        "sizes": [5000, 10000, 20000, 40000, 80000],
        "repeats": 10,
        "warmup_announcements": 100,
        "seed": "pqstealth-bench",
    },
    "registry": {
        "decoy_recipients": 8,
    },
    "selftest": {
        "kem_trials": 20,
        "lwe_trials": 3,
        "compress_widths": [1, 4, 5, 10, 11],
    },
    "watch": {
        "debounce_delay": 0.5,  # seconds
    },
    "logging": {
        "level": "INFO",
        "file": {
            "enabled": True,
            "path": None,  # <data_dir>/logs/pqstealth.log when unset
            "max_size": 1024 * 1024,  # 1MB
            "backup_count": 5,
            "level": "DEBUG"
        },
        "console": {
            "enabled": True,
            "level": "WARNING"
        },
        "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    }
}


def _merge(base: Dict[str, Any], overrides: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    for key, value in overrides.items():
        if key not in base:
            raise ConfigError(f"Unknown configuration key: {prefix}{key}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"Configuration key {prefix}{key} must be a section")
            _merge(base[key], value, f"{prefix}{key}.")
        else:
            base[key] = value
    return base


class ConfigManager:
    """Manages pqstealth configuration.

    Sources, later ones winning: built-in defaults, an optional JSON file,
    then ``PQSTEALTH_<FIELD>`` environment variables for the top-level fields.
    """

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.config = StealthConfig()
        self.settings = copy.deepcopy(DEFAULT_CONFIG)
        self.config_path = Path(config_path).expanduser() if config_path else None
        self._load_config()

    def _load_config(self):
        if self.config_path:
            self._load_from_file(self.config_path)
        self._load_from_env()
        self._expand_paths()
        logging.debug(f"Loaded config: data_dir={self.config.data_dir}, "
                      f"paramset={self.config.default_paramset}")

    def _load_from_file(self, path: Path):
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e
        if not isinstance(document, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object")
        for key, value in document.items():
            if isinstance(value, dict):
                _merge(self.settings, {key: value})
            else:
                self.set(key, value)

    def _load_from_env(self):
        """Load configuration from environment variables."""
        for name in self.config.__dataclass_fields__:
            env_var = f"{ENV_PREFIX}{name.upper()}"
            if env_var in os.environ:
                value = os.environ[env_var]
                field_type = type(getattr(self.config, name))
                try:
                    if field_type == bool:
                        value = value.lower() in ('true', '1', 'yes')
                    elif field_type == int:
                        value = int(value)
                    elif field_type == float:
                        value = float(value)
                except ValueError as e:
                    raise ConfigError(f"{env_var}: {e}") from e
                setattr(self.config, name, value)

    def _expand_paths(self):
        self.config.data_dir = str(Path(self.config.data_dir).expanduser().absolute())

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value using dot notation."""
        parts = key.split('.')
        if len(parts) == 1 and hasattr(self.config, key):
            return getattr(self.config, key)
        value = self.settings
        try:
            for part in parts:
                value = value[part]
            return value
        except (KeyError, TypeError):
            logging.debug(f"Config key '{key}' not found, using default: {default}")
            return default

    def set(self, key: str, value: Any):
        """Set a top-level field or a dotted setting; unknown keys raise ConfigError."""
        parts = key.split('.')
        if len(parts) == 1:
            if not hasattr(self.config, key):
                raise ConfigError(f"Unknown configuration key: {key}")
            setattr(self.config, key, value)
            if key == "data_dir":
                self._expand_paths()
            return
        section = self.settings
        for part in parts[:-1]:
            if not isinstance(section.get(part), dict):
                raise ConfigError(f"Unknown configuration key: {key}")
            section = section[part]
        if parts[-1] not in section or isinstance(section[parts[-1]], dict):
            raise ConfigError(f"Unknown configuration key: {key}")
        section[parts[-1]] = value

    def validate(self) -> bool:
        """Check the current configuration, raising ConfigError on the first problem."""
        from pqstealth.lattice.params import PARAM_SETS

        checks = [
            (self.config.default_paramset.lower() in PARAM_SETS,
             f"unknown default_paramset '{self.config.default_paramset}'"),
            (self.config.default_view_tag in VIEW_TAG_MODES,
             f"default_view_tag must be one of {', '.join(VIEW_TAG_MODES)}"),
            (isinstance(self.config.threads, int) and self.config.threads >= 1, "threads must be >= 1"),
            (all(isinstance(n, int) and n > 0 for n in self.get("bench.sizes", [])),
             "bench.sizes must be positive integers"),
            (int(self.get("bench.repeats", 0)) >= 1, "bench.repeats must be >= 1"),
            (int(self.get("bench.warmup_announcements", 0)) >= 0, "bench.warmup_announcements must be >= 0"),
            (int(self.get("registry.decoy_recipients", 0)) >= 1, "registry.decoy_recipients must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(f"Configuration validation failed: {message}")
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"general": self.config.to_dict(), **copy.deepcopy(self.settings)}

    def export_config(self, path: Union[str, Path]):
        path = Path(path).expanduser()
        path.parent.mkdir(parents=True, exist_ok=True)
        document = {**self.config.to_dict(), **copy.deepcopy(self.settings)}
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def log_path(self) -> Path:
        configured = self.get("logging.file.path")
        if configured:
            return Path(configured).expanduser()
        return Path(self.config.data_dir) / "logs" / "pqstealth.log"

    def setup_logging(self, verbose: bool = False):
        """Configure logging system-wide."""
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG if verbose else self.get("logging.level"))

        # Clear any existing handlers
        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)
            handler.close()

        # File handler
        if self.get("logging.file.enabled"):
            log_path = self.log_path()
            try:
                log_path.parent.mkdir(parents=True, exist_ok=True)
                file_handler = logging.handlers.RotatingFileHandler(
                    log_path,
                    maxBytes=self.get("logging.file.max_size"),
                    backupCount=self.get("logging.file.backup_count")
                )
            except OSError as e:
                logging.warning(f"File logging disabled: {e}")
            else:
                file_handler.setLevel(self.get("logging.file.level"))
                file_handler.setFormatter(logging.Formatter(self.get("logging.format")))
                root_logger.addHandler(file_handler)

        # Console handler (stderr, so stdout stays machine-readable)
        if self.get("logging.console.enabled"):
            console_handler = logging.StreamHandler()
            console_handler.setLevel(
                logging.DEBUG if verbose else self.get("logging.console.level")
            )
            console_handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
            root_logger.addHandler(console_handler)
