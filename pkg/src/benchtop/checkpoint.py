"""Parameter checkpoint files.

Layout (single file, little-endian):

    bytes 0..3    magic b"BTCK"
    bytes 4..7    format version, uint32
    bytes 8..15   header length in bytes, uint64
    header        UTF-8 JSON: {"meta": {...}, "entries": [{name, shape,
                  offset}, ...]} where offset counts float64 elements into
                  the blob
    blob          all parameters concatenated, float64 little-endian

Round-trips are bit-exact; ``load`` verifies magic, version, and blob size.
"""

import json
import struct

import numpy as np

from .artifacts import atomic_write_bytes
from .errors import ChecksumError

MAGIC = b"BTCK"
VERSION = 1


def save(path, named_arrays, meta=None):
    entries = []
    offset = 0
    blobs = []
    for name in sorted(named_arrays):
        arr = np.ascontiguousarray(named_arrays[name], dtype="<f8")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        blobs.append(arr.tobytes())
    header = json.dumps(
        {"meta": meta or {}, "entries": entries}, sort_keys=True
    ).encode()
    payload = b"".join(
        [MAGIC, struct.pack("<I", VERSION), struct.pack("<Q", len(header)), header]
        + blobs
    )
    atomic_write_bytes(path, payload)


def load(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ChecksumError(f"'{path}' is not a checkpoint (bad magic)")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != VERSION:
        raise ChecksumError(f"unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16 : 16 + header_len].decode())
    blob = np.frombuffer(raw[16 + header_len :], dtype="<f8")
    arrays = {}
    total = 0
    for entry in header["entries"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        arrays[entry["name"]] = (
            blob[entry["offset"] : entry["offset"] + size].reshape(shape).copy()
        )
        total += size
    if total != blob.size:
        raise ChecksumError(f"checkpoint blob size mismatch in '{path}'")
    return arrays, header["meta"]
