"""On-disk format for Mobius tables.

Layout: ``b"RQMU"``, version byte ``0x01``, ``limit`` as an 8-byte little-endian
unsigned integer, then ceil(limit/4) bytes of 2-bit codes in increasing n.
n=1 sits in the least significant pair of the first byte.
Codes: 00 -> 0, 01 -> +1, 10 -> -1, 11 is invalid.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from rankone.errors import IntegrityError
from rankone.mobius import MobiusTable

MAGIC = b"RQMU"
VERSION = 1
HEADER = struct.Struct("<4sBQ")


def encode_codes(values: np.ndarray) -> bytes:
    """Pack mu values (n = 1, 2, ...) into 2-bit codes, four per byte."""
    codes = np.zeros(-(-values.size // 4) * 4, dtype=np.uint8)
    codes[: values.size][values == 1] = 1
    codes[: values.size][values == -1] = 2
    quads = codes.reshape(-1, 4)
    packed = quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def decode_codes(payload: bytes, limit: int) -> np.ndarray:
    raw = np.frombuffer(payload, dtype=np.uint8)
    codes = np.empty((raw.size, 4), dtype=np.uint8)
    for j in range(4):
        codes[:, j] = (raw >> (2 * j)) & 3
    codes = codes.ravel()
    if np.any(codes == 3):
        raise IntegrityError("cache payload contains the reserved code 11")
    if np.any(codes[limit:]):
        raise IntegrityError("cache padding bits are not zero")
    out = np.zeros(limit, dtype=np.int8)
    out[codes[:limit] == 1] = 1
    out[codes[:limit] == 2] = -1
    return out


def dumps(table: MobiusTable) -> bytes:
    return HEADER.pack(MAGIC, VERSION, table.limit) + encode_codes(table.values[1:])


def loads(blob: bytes, segment_size: int | None = None) -> MobiusTable:
    if len(blob) < HEADER.size:
        raise IntegrityError(f"cache is truncated: {len(blob)} bytes, header needs {HEADER.size}")
    magic, version, limit = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise IntegrityError(f"bad cache magic {magic!r}")
    if version != VERSION:
        raise IntegrityError(f"unsupported cache version {version}")
    if limit < 1:
        raise IntegrityError("cache declares limit 0")
    expected = HEADER.size + -(-limit // 4)
    if len(blob) != expected:
        raise IntegrityError(f"cache length {len(blob)} does not match limit {limit} (expected {expected})")
    values = np.zeros(limit + 1, dtype=np.int8)
    values[1:] = decode_codes(blob[HEADER.size :], limit)
    kwargs = {} if segment_size is None else {"segment_size": segment_size}
    return MobiusTable(limit=limit, values=values, **kwargs)


def write_cache(table: MobiusTable, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(dumps(table))
    os.replace(tmp, path)
    return path


def read_cache(path: str | os.PathLike) -> MobiusTable:
    return loads(Path(path).read_bytes())


def read_header(path: str | os.PathLike) -> tuple[bytes, int, int]:
    """(magic, version, limit) without decoding the payload."""
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
    if len(head) < HEADER.size:
        raise IntegrityError("cache is truncated")
    return HEADER.unpack(head)
