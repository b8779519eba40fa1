from typing import Optional


class StealthError(Exception):
    """Base exception for pqstealth errors."""
    pass


class ParameterError(StealthError, ValueError):
    """Raised for unknown parameter sets or out-of-range arguments."""
    pass


class DimensionError(StealthError, ValueError):
    """Raised when ring elements, vectors or matrices do not line up."""
    pass


class EncodingError(StealthError):
    """Raised when bytes cannot be decoded into a lattice value."""
    pass


class SamplingError(StealthError):
    """Raised when an XOF stream underflows or rejection sampling gives up."""
    pass


class KeyFileError(StealthError):
    """Raised for unreadable or inconsistent key files."""
    pass


class ParamsMismatchError(StealthError):
    """Raised when two artifacts were built for different parameter sets."""

    def __init__(self, expected: str, found: str, what: str = "registry"):
        super().__init__(f"{what} uses params '{found}', expected '{expected}'")
        self.expected = expected
        self.found = found


class RegistryError(StealthError):
    """Raised when an announcement cannot be appended or read."""
    pass


class RegistryFormatError(RegistryError):
    """Raised for a corrupt registry record."""

    def __init__(self, message: str, index: Optional[int] = None, line_number: Optional[int] = None):
        location = f"entry {index}" if index is not None else f"line {line_number}"
        super().__init__(f"{location}: {message}")
        self.index = index
        self.line_number = line_number


class ConfigError(StealthError):
    """Raised for unknown or invalid configuration keys."""
    pass
