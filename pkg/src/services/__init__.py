"""Codec stages, the experiment harness and supporting services."""

from src.services.config_manager import ConfigManager
from src.services.container import deserialize, header_size, serialize
from src.services.pipeline import compress, decompress, measured_cr
from src.services.storage import ResultStore, read_bytes, write_atomic

__all__ = [
    "ConfigManager",
    "ResultStore",
    "compress",
    "decompress",
    "deserialize",
    "header_size",
    "measured_cr",
    "read_bytes",
    "serialize",
    "write_atomic",
]
