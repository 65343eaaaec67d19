"""Canonical byte encodings.

Every on-chain structure is serialized with these helpers so that digests are
reproducible bit-for-bit across implementations: fixed field order, big-endian
integers, and u32 length prefixes for variable-size fields.
"""
from __future__ import annotations

import struct


def enc_u8(value: int) -> bytes:
    if not 0 <= value <= 0xFF:
        raise ValueError(f"u8 out of range: {value}")
    return struct.pack(">B", value)


def enc_u32(value: int) -> bytes:
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(f"u32 out of range: {value}")
    return struct.pack(">I", value)


def enc_u64(value: int) -> bytes:
    if not 0 <= value <= 0xFFFFFFFFFFFFFFFF:
        raise ValueError(f"u64 out of range: {value}")
    return struct.pack(">Q", value)


def enc_bool(value: bool) -> bytes:
    return b"\x01" if value else b"\x00"


def enc_bytes(value: bytes) -> bytes:
    return enc_u32(len(value)) + value


def enc_str(value: str) -> bytes:
    return enc_bytes(value.encode("utf-8"))


def enc_list(items) -> bytes:
    """Concatenate pre-encoded items behind a u32 count."""
    items = list(items)
    return enc_u32(len(items)) + b"".join(items)


class Reader:
    """Sequential decoder matching the enc_* helpers; over/underruns raise."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError("truncated encoding")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def boolean(self) -> bool:
        raw = self.u8()
        if raw not in (0, 1):
            raise ValueError(f"invalid bool byte: {raw}")
        return raw == 1

    def bytes_(self) -> bytes:
        return self.take(self.u32())

    def str_(self) -> str:
        return self.bytes_().decode("utf-8")

    def count(self) -> int:
        return self.u32()

    @property
    def exhausted(self) -> bool:
        return self._pos == len(self._data)

    def expect_end(self) -> None:
        if not self.exhausted:
            raise ValueError("trailing bytes after encoding")
