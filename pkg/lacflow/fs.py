"""Filesystem adapter used by case I/O, commands and report emission."""

from __future__ import annotations

import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Protocol


class FileSystemAdapter(Protocol):
    """Interface for the filesystem operations lacflow performs.

    Read/write methods may raise OSError and its subclasses; ``exists``/``is_file``/
    ``is_dir`` return False for missing paths.
    """

    def read_text(self, path: Path) -> str:
        ...

    def write_text(self, path: Path, data: str) -> None:
        """Write UTF-8 text, creating parent directories."""
        ...

    def read_file(self, path: Path) -> bytes:
        ...

    def exists(self, path: Path) -> bool:
        ...

    def is_file(self, path: Path) -> bool:
        ...

    def is_dir(self, path: Path) -> bool:
        ...

    def makedirs(self, path: Path) -> None:
        """Create ``path`` and its parents (idempotent)."""
        ...

    def list_dir(self, path: Path) -> List[Path]:
        """Immediate children of ``path``, sorted."""
        ...


@dataclass
class LocalFS:
    """Real filesystem adapter.

    Preserves the specific OSError subclass while adding the offending path to the message.
    """

    def read_text(self, path: Path) -> str:
        try:
            return Path(path).read_text(encoding="utf-8")
        except FileNotFoundError as e:
            raise FileNotFoundError(f"Cannot read file (not found): {path}") from e
        except PermissionError as e:
            raise PermissionError(f"Cannot read file (permission denied): {path}") from e
        except UnicodeDecodeError as e:
            raise UnicodeDecodeError(
                e.encoding, e.object, e.start, e.end, f"File is not valid UTF-8: {path}"
            ) from e
        except OSError as e:
            raise OSError(f"Error reading file {path}: {e}") from e

    def write_text(self, path: Path, data: str) -> None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with atomic_write(path) as tmp:
                tmp.write_text(data, encoding="utf-8")
        except PermissionError as e:
            raise PermissionError(f"Cannot write file (permission denied): {path}") from e
        except OSError as e:
            raise OSError(f"Error writing file {path}: {e}") from e

    def read_file(self, path: Path) -> bytes:
        try:
            return Path(path).read_bytes()
        except FileNotFoundError as e:
            raise FileNotFoundError(f"Cannot read file (not found): {path}") from e
        except OSError as e:
            raise OSError(f"Error reading file {path}: {e}") from e

    def exists(self, path: Path) -> bool:
        return Path(path).exists()

    def is_file(self, path: Path) -> bool:
        return Path(path).is_file()

    def is_dir(self, path: Path) -> bool:
        return Path(path).is_dir()

    def makedirs(self, path: Path) -> None:
        try:
            Path(path).mkdir(parents=True, exist_ok=True)
        except PermissionError as e:
            raise PermissionError(f"Cannot create directory (permission denied): {path}") from e
        except OSError as e:
            raise OSError(f"Error creating directory {path}: {e}") from e

    def list_dir(self, path: Path) -> List[Path]:
        try:
            return sorted(Path(path).iterdir())
        except FileNotFoundError as e:
            raise FileNotFoundError(f"Cannot list directory (not found): {path}") from e
        except NotADirectoryError as e:
            raise NotADirectoryError(f"Path is not a directory: {path}") from e


@contextmanager
def atomic_write(target_path: Path) -> Iterator[Path]:
    """Yield a temporary sibling of ``target_path`` that replaces it on success.

    Partially written reports and manifests never become visible under their final name.
    """
    target_path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(
        dir=target_path.parent, prefix=".tmp_", suffix=target_path.suffix
    )
    os.close(fd)
    temp_path = Path(temp_name)
    try:
        yield temp_path
        temp_path.replace(target_path)
    finally:
        temp_path.unlink(missing_ok=True)
