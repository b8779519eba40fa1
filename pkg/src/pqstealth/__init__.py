"""Post-quantum stealth addresses over Module-LWE, Ring-LWE and LWE."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("pqstealth")
except PackageNotFoundError:
    __version__ = "0.0.0+unknown"
