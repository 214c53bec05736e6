"""Binary trial log: record (orientation, axis) pairs now, score them later.

Layout, all little-endian::

    header   4s  magic  b"SPNC"
             H   format version (1)
             Q   record count n
             Q   seed
    records  n x (b orientation, 3d axis)      25 bytes each
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SPNC"
VERSION = 1
HEADER = struct.Struct("<4sHQQ")
RECORD_DTYPE = np.dtype([("lam", "i1"), ("s", "<f8", (3,))])
UNIT_TOL = 1e-9

assert RECORD_DTYPE.itemsize == 25


class LogFormatError(ValueError):
    """Malformed trial log; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class TrialLog:
    seed: int
    lam: np.ndarray
    s: np.ndarray

    @property
    def count(self) -> int:
        return int(self.lam.shape[0])


def encode(seed: int, lam: np.ndarray, s: np.ndarray) -> bytes:
    lam = np.asarray(lam)
    s = np.asarray(s, dtype=float)
    if lam.shape[0] != s.shape[0]:
        raise ValueError("orientation and axis arrays differ in length")
    rec = np.empty(lam.shape[0], dtype=RECORD_DTYPE)
    rec["lam"] = lam
    rec["s"] = s
    return HEADER.pack(MAGIC, VERSION, lam.shape[0], seed) + rec.tobytes()


def decode(data: bytes) -> TrialLog:
    if len(data) < HEADER.size:
        raise LogFormatError(f"header needs {HEADER.size} bytes, found {len(data)}", len(data))
    magic, version, n, seed = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise LogFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise LogFormatError(f"unsupported format version {version}", 4)
    body = len(data) - HEADER.size
    found, extra = divmod(body, RECORD_DTYPE.itemsize)
    if found != n or extra:
        raise LogFormatError(
            f"expected {n} records, found {found}"
            + (f" plus {extra} trailing bytes" if extra else ""),
            HEADER.size + found * RECORD_DTYPE.itemsize,
        )
    rec = np.frombuffer(data, dtype=RECORD_DTYPE, offset=HEADER.size, count=n)
    lam = rec["lam"].copy()
    s = rec["s"].copy()
    bad = np.flatnonzero((lam != 1) & (lam != -1))
    if bad.size:
        k = int(bad[0])
        raise LogFormatError(f"record {k} has orientation {int(lam[k])}",
                             HEADER.size + k * RECORD_DTYPE.itemsize)
    norms = np.sqrt(np.sum(s * s, axis=1))
    bad = np.flatnonzero(~(np.abs(norms - 1.0) <= UNIT_TOL))
    if bad.size:
        k = int(bad[0])
        raise LogFormatError(f"record {k} axis has norm {float(norms[k])!r}",
                             HEADER.size + k * RECORD_DTYPE.itemsize + 1)
    return TrialLog(seed=seed, lam=lam, s=s)


def write_log(path, seed: int, lam: np.ndarray, s: np.ndarray):
    Path(path).write_bytes(encode(seed, lam, s))


def read_log(path) -> TrialLog:
    return decode(Path(path).read_bytes())
