"""File storage for images, containers and experiment results."""

import json
import logging
import os
import tempfile
from pathlib import Path

from src.exceptions import StorageError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def read_bytes(path: Path | str) -> bytes:
    """
    Read a whole file.

    Args:
        path: File to read

    Returns:
        File contents

    Raises:
        StorageError: If the file is missing or unreadable
    """
    path = Path(path)
    try:
        return path.read_bytes()
    except FileNotFoundError as e:
        logger.error(f"Input file not found: {path}")
        raise StorageError(f"File not found: {path}") from e
    except OSError as e:
        logger.error(f"Error reading {path}: {e}", exc_info=True)
        raise StorageError(f"Failed to read {path}: {e}") from e


def write_atomic(path: Path | str, data: bytes) -> Path:
    """
    Write a file through a temporary sibling and an atomic rename.

    Readers never see a partially written file.

    Args:
        path: Destination
        data: Contents

    Returns:
        The destination path

    Raises:
        StorageError: If the file cannot be written
    """
    path = Path(path)
    tmp_name = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False
        ) as tmp:
            tmp_name = tmp.name
            tmp.write(data)
            tmp.flush()
            os.fsync(tmp.fileno())
        os.replace(tmp_name, path)
        logger.debug(f"Wrote {len(data)} bytes to {path}")
        return path
    except PermissionError as e:
        logger.error(f"Permission denied writing {path}: {e}", exc_info=True)
        raise StorageError(f"Permission denied: {e}") from e
    except OSError as e:
        logger.error(f"Error writing {path}: {e}", exc_info=True)
        raise StorageError(f"Failed to write {path}: {e}") from e
    finally:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)


class ResultStore:
    """
    Output directory of one experiment run.

    Every file goes through write_atomic and is listed in a manifest with
    its size, so a finished directory can be checked at a glance.

    Attributes:
        output_dir: Directory receiving the results
        files: Mapping of file name -> size in bytes
    """

    def __init__(self, output_dir: Path | str) -> None:
        """
        Initialize the store, creating the directory if needed.

        Args:
            output_dir: Directory receiving the results

        Raises:
            StorageError: If the directory cannot be created
        """
        self.output_dir: Path = Path(output_dir)
        self.files: dict[str, int] = {}
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Cannot create output directory {self.output_dir}: {e}", exc_info=True)
            raise StorageError(f"Failed to create {self.output_dir}: {e}") from e

    def path_for(self, name: str) -> Path:
        """Path of a result file inside the store."""
        return self.output_dir / name

    def write(self, name: str, data: bytes) -> Path:
        """Write binary result data."""
        path = write_atomic(self.path_for(name), data)
        self.files[name] = len(data)
        return path

    def write_text(self, name: str, text: str) -> Path:
        """Write a UTF-8 text result."""
        return self.write(name, text.encode("utf-8"))

    def save_manifest(self) -> Path:
        """Write manifest.json listing every stored file and its size."""
        manifest = {"files": dict(sorted(self.files.items()))}
        data = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8")
        path = write_atomic(self.path_for(MANIFEST_NAME), data)
        logger.info(f"Saved manifest of {len(self.files)} files to {path}")
        return path
