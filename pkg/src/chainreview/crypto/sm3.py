# SM3 hash function (GB/T 32907 family; GM/T 0004-2012). 32-byte digests.
# Pure-Python compression is the reference; when the interpreter's OpenSSL
# exposes sm3 we dispatch to it for throughput and keep the pure path for
# cross-checking in tests.
from __future__ import annotations

import hashlib
import struct

_IV = (
    0x7380166F, 0x4914B2B9, 0x172442D7, 0xDA8A0600,
    0xA96F30BC, 0x163138AA, 0xE38DEE4D, 0xB0FB0E4E,
)


def _rotl(x: int, n: int) -> int:
    n &= 31
    return ((x << n) | (x >> (32 - n))) & 0xFFFFFFFF


def _p0(x: int) -> int:
    return x ^ _rotl(x, 9) ^ _rotl(x, 17)


def _p1(x: int) -> int:
    return x ^ _rotl(x, 15) ^ _rotl(x, 23)


def _compress(v, block):
    w = list(struct.unpack(">16I", block))
    for j in range(16, 68):
        w.append(
            _p1(w[j - 16] ^ w[j - 9] ^ _rotl(w[j - 3], 15))
            ^ _rotl(w[j - 13], 7)
            ^ w[j - 6]
        )
    a, b, c, d, e, f, g, h = v
    for j in range(64):
        if j < 16:
            tj = 0x79CC4519
            ff = a ^ b ^ c
            gg = e ^ f ^ g
        else:
            tj = 0x7A879D8A
            ff = (a & b) | (a & c) | (b & c)
            gg = (e & f) | (~e & g)
        a12 = _rotl(a, 12)
        ss1 = _rotl((a12 + e + _rotl(tj, j % 32)) & 0xFFFFFFFF, 7)
        ss2 = ss1 ^ a12
        tt1 = (ff + d + ss2 + (w[j] ^ w[j + 4])) & 0xFFFFFFFF
        tt2 = (gg + h + ss1 + w[j]) & 0xFFFFFFFF
        d = c
        c = _rotl(b, 9)
        b = a
        a = tt1
        h = g
        g = _rotl(f, 19)
        f = e
        e = _p0(tt2)
    return [(x ^ y) & 0xFFFFFFFF for x, y in zip(v, (a, b, c, d, e, f, g, h))]


def sm3_pure(data: bytes) -> bytes:
    bit_len = len(data) * 8
    padded = data + b"\x80"
    padded += b"\x00" * ((56 - len(padded) % 64) % 64)
    padded += struct.pack(">Q", bit_len)
    v = list(_IV)
    for i in range(0, len(padded), 64):
        v = _compress(v, padded[i : i + 64])
    return b"".join(struct.pack(">I", x) for x in v)


try:
    hashlib.new("sm3")
    _HAVE_OPENSSL_SM3 = True
except (ValueError, TypeError):  # pragma: no cover - depends on OpenSSL build
    _HAVE_OPENSSL_SM3 = False

if _HAVE_OPENSSL_SM3:

    def sm3(data: bytes = b"") -> bytes:
        return hashlib.new("sm3", data).digest()

else:  # pragma: no cover - exercised only on builds without OpenSSL sm3
    sm3 = sm3_pure


def hmac_sm3(key: bytes, msg: bytes) -> bytes:
    block = 64
    if len(key) > block:
        key = sm3(key)
    key = key.ljust(block, b"\x00")
    outer = bytes(b ^ 0x5C for b in key)
    inner = bytes(b ^ 0x36 for b in key)
    return sm3(outer + sm3(inner + msg))
