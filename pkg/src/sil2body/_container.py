"""Little-endian binary container helpers.

Every container starts with an 8-byte magic (shorter tags are NUL padded)
followed by a uint32 format version.
"""
from __future__ import annotations

import hashlib
import io
import struct

import numpy as np

from .errors import FormatError


def _magic_bytes(magic: str) -> bytes:
    raw = magic.encode("ascii")
    if len(raw) > 8:
        raise ValueError(magic)
    return raw.ljust(8, b"\0")


class Writer:
    def __init__(self, magic: str, version: int):
        self.buf = io.BytesIO()
        self.buf.write(_magic_bytes(magic))
        self.u32(version)

    def u32(self, *values: int) -> None:
        self.buf.write(struct.pack(f"<{len(values)}I", *values))

    def u8(self, value: int) -> None:
        self.buf.write(struct.pack("<B", value))

    def blob(self, data: bytes) -> None:
        self.u32(len(data))
        self.buf.write(data)

    def array(self, arr, dtype: str) -> None:
        self.buf.write(np.ascontiguousarray(arr, dtype=np.dtype(dtype).newbyteorder("<")).tobytes())

    def getvalue(self) -> bytes:
        return self.buf.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.getvalue())


class Reader:
    def __init__(self, data: bytes, magic: str, versions=(1,)):
        self.data = data
        self.pos = 0
        head = self._take(8)
        if head != _magic_bytes(magic):
            raise FormatError(f"bad magic {head!r}, expected {magic!r}")
        self.version = self.u32()
        if self.version not in versions:
            raise FormatError(f"unsupported {magic} version {self.version}")

    @classmethod
    def open(cls, path, magic: str, versions=(1,)) -> "Reader":
        with open(path, "rb") as fh:
            return cls(fh.read(), magic, versions)

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated container")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def blob(self) -> bytes:
        return self._take(self.u32())

    def array(self, shape, dtype: str) -> np.ndarray:
        dt = np.dtype(dtype).newbyteorder("<")
        count = int(np.prod(shape))
        raw = self._take(count * dt.itemsize)
        return np.frombuffer(raw, dtype=dt).astype(np.dtype(dtype)).reshape(shape)

    def at_end(self) -> bool:
        return self.pos == len(self.data)


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_arrays(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()
