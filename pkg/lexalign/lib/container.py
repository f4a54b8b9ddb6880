"""Versioned ``.npz`` containers for tables and model checkpoints.

Layout: one ``header`` entry holding a JSON object with at least
``{"magic", "version", "kind"}`` plus kind-specific fields, and one entry per
named array. Everything is loaded with ``allow_pickle=False``.
"""

import json
import zipfile
from pathlib import Path
from typing import Any

import numpy as np

from lexalign.lib.errors import PersistenceError

MAGIC = "LEXALIGN"
VERSION = 1


def write_container(
    path: str | Path,
    kind: str,
    header: dict[str, Any],
    arrays: dict[str, np.ndarray],
) -> None:
    full_header = {"magic": MAGIC, "version": VERSION, "kind": kind, **header}
    payload = {"header": np.array(json.dumps(full_header, sort_keys=True))}
    payload.update(arrays)
    # Writing through a handle stops numpy from appending ".npz" to the path.
    with open(path, "wb") as handle:
        np.savez(handle, **payload)


def read_container(
    path: str | Path, kind: str
) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    try:
        with np.load(path, allow_pickle=False) as archive:
            entries = {name: archive[name] for name in archive.files}
    except FileNotFoundError:
        raise PersistenceError(f"no such file: {path}") from None
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise PersistenceError(f"{path} is not a readable container: {exc}") from None

    if "header" not in entries:
        raise PersistenceError(f"{path} has no header entry")
    try:
        header = json.loads(str(entries.pop("header")))
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"{path} has a corrupt header: {exc}") from None

    if header.get("magic") != MAGIC:
        raise PersistenceError(f"{path} is not a {MAGIC} container")
    if header.get("version") != VERSION:
        raise PersistenceError(
            f"{path} has container version {header.get('version')}, "
            f"expected {VERSION}"
        )
    if header.get("kind") != kind:
        raise PersistenceError(f"{path} holds a {header.get('kind')!r}, not a {kind!r}")
    return header, entries
