"""Binary cache for r_3 tables.

Layout (little-endian): b"R3CB", one version byte, u64 x_max, x_max u32 counts
for n = 1..x_max, then a u64 FNV-1a hash of every preceding byte.
"""
from __future__ import annotations

import logging
import os
import struct
from pathlib import Path

import numpy as np

from .cube_reps import CubeRepTable

log = logging.getLogger(__name__)

MAGIC = b"R3CB"
VERSION = 1
_HEADER = struct.Struct("<4sBQ")
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


class CacheError(OSError):
    """Missing, malformed or corrupt cache file."""


def fnv1a64(data: bytes, h: int = _FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def write_cache(path: str | os.PathLike, table: CubeRepTable) -> None:
    body = _HEADER.pack(MAGIC, VERSION, table.x_max) + table.counts[1:].astype("<u4").tobytes()
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<Q", fnv1a64(body)))
    os.replace(tmp, path)


def read_header(path: str | os.PathLike) -> int:
    """x_max recorded in the header (no checksum verification)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise CacheError(f"{path}: truncated header")
    magic, version, x_max = _HEADER.unpack(head)
    if magic != MAGIC or version != VERSION:
        raise CacheError(f"{path}: not an r3 cache (magic {magic!r}, version {version})")
    return x_max


def read_cache(path: str | os.PathLike) -> CubeRepTable:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise CacheError(f"{path}: no such cache") from exc
    if len(data) < _HEADER.size + 8:
        raise CacheError(f"{path}: truncated file")
    magic, version, x_max = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise CacheError(f"{path}: not an r3 cache (magic {magic!r}, version {version})")
    expected = _HEADER.size + 4 * x_max + 8
    if len(data) != expected:
        raise CacheError(f"{path}: checksum failure (size {len(data)}, expected {expected})")
    body, (stored,) = data[:-8], struct.unpack("<Q", data[-8:])
    if fnv1a64(body) != stored:
        raise CacheError(f"{path}: checksum failure")
    counts = np.zeros(x_max + 1, dtype=np.uint32)
    counts[1:] = np.frombuffer(body, dtype="<u4", offset=_HEADER.size)
    return CubeRepTable(x_max, counts)
