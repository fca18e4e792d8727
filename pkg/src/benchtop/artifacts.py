"""Atomic artifact writes, checksummed manifests, and stage dependencies.

Every pipeline stage writes outputs to a temp file in the destination
directory and renames on success, so a crash never leaves a half-written
artifact that a later stage could consume. Manifests record byte sizes and
sha256 digests; consumers verify both before reading.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .errors import ChecksumError, MissingArtifactError


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_bytes(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, obj):
    atomic_write_bytes(path, json.dumps(obj, indent=2, sort_keys=True).encode())


def file_entry(path):
    path = Path(path)
    return {
        "file": path.name,
        "bytes": path.stat().st_size,
        "sha256": sha256_file(path),
    }


def require_artifact(path, producer):
    """Fail with the producing command's name when an input is missing."""
    if not Path(path).exists():
        raise MissingArtifactError(
            f"missing artifact '{path}'; run '{producer}' first", producer=producer
        )
    return Path(path)


def verify_entry(directory, entry):
    path = Path(directory) / entry["file"]
    if not path.exists():
        raise ChecksumError(f"manifest references missing file '{path}'")
    size = path.stat().st_size
    if size != entry["bytes"]:
        raise ChecksumError(
            f"size mismatch for '{path}': manifest {entry['bytes']}, found {size}"
        )
    digest = sha256_file(path)
    if digest != entry["sha256"]:
        raise ChecksumError(f"sha256 mismatch for '{path}'")
    return path


def load_manifest(directory, producer):
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingArtifactError(
            f"no manifest at '{manifest_path}'; run '{producer}' first",
            producer=producer,
        )
    with open(manifest_path) as f:
        return json.load(f)


def load_and_verify_manifest(directory, producer):
    manifest = load_manifest(directory, producer)
    for entry in manifest.get("episodes", manifest.get("files", [])):
        verify_entry(directory, entry)
    return manifest
