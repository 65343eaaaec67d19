# SM4 block cipher (GB/T 32907-2016) with a GCM mode of operation.
# The round function is table-driven: the S-box composed with the linear
# transform L is precomputed per byte position, which keeps bulk encryption
# usable from pure Python.
from __future__ import annotations

import hmac
import struct

from ..errors import CryptoError, DecryptionError

_SBOX = [
    0xD6, 0x90, 0xE9, 0xFE, 0xCC, 0xE1, 0x3D, 0xB7, 0x16, 0xB6, 0x14, 0xC2, 0x28, 0xFB, 0x2C, 0x05,
    0x2B, 0x67, 0x9A, 0x76, 0x2A, 0xBE, 0x04, 0xC3, 0xAA, 0x44, 0x13, 0x26, 0x49, 0x86, 0x06, 0x99,
    0x9C, 0x42, 0x50, 0xF4, 0x91, 0xEF, 0x98, 0x7A, 0x33, 0x54, 0x0B, 0x43, 0xED, 0xCF, 0xAC, 0x62,
    0xE4, 0xB3, 0x1C, 0xA9, 0xC9, 0x08, 0xE8, 0x95, 0x80, 0xDF, 0x94, 0xFA, 0x75, 0x8F, 0x3F, 0xA6,
    0x47, 0x07, 0xA7, 0xFC, 0xF3, 0x73, 0x17, 0xBA, 0x83, 0x59, 0x3C, 0x19, 0xE6, 0x85, 0x4F, 0xA8,
    0x68, 0x6B, 0x81, 0xB2, 0x71, 0x64, 0xDA, 0x8B, 0xF8, 0xEB, 0x0F, 0x4B, 0x70, 0x56, 0x9D, 0x35,
    0x1E, 0x24, 0x0E, 0x5E, 0x63, 0x58, 0xD1, 0xA2, 0x25, 0x22, 0x7C, 0x3B, 0x01, 0x21, 0x78, 0x87,
    0xD4, 0x00, 0x46, 0x57, 0x9F, 0xD3, 0x27, 0x52, 0x4C, 0x36, 0x02, 0xE7, 0xA0, 0xC4, 0xC8, 0x9E,
    0xEA, 0xBF, 0x8A, 0xD2, 0x40, 0xC7, 0x38, 0xB5, 0xA3, 0xF7, 0xF2, 0xCE, 0xF9, 0x61, 0x15, 0xA1,
    0xE0, 0xAE, 0x5D, 0xA4, 0x9B, 0x34, 0x1A, 0x55, 0xAD, 0x93, 0x32, 0x30, 0xF5, 0x8C, 0xB1, 0xE3,
    0x1D, 0xF6, 0xE2, 0x2E, 0x82, 0x66, 0xCA, 0x60, 0xC0, 0x29, 0x23, 0xAB, 0x0D, 0x53, 0x4E, 0x6F,
    0xD5, 0xDB, 0x37, 0x45, 0xDE, 0xFD, 0x8E, 0x2F, 0x03, 0xFF, 0x6A, 0x72, 0x6D, 0x6C, 0x5B, 0x51,
    0x8D, 0x1B, 0xAF, 0x92, 0xBB, 0xDD, 0xBC, 0x7F, 0x11, 0xD9, 0x5C, 0x41, 0x1F, 0x10, 0x5A, 0xD8,
    0x0A, 0xC1, 0x31, 0x88, 0xA5, 0xCD, 0x7B, 0xBD, 0x2D, 0x74, 0xD0, 0x12, 0xB8, 0xE5, 0xB4, 0xB0,
    0x89, 0x69, 0x97, 0x4A, 0x0C, 0x96, 0x77, 0x7E, 0x65, 0xB9, 0xF1, 0x09, 0xC5, 0x6E, 0xC6, 0x84,
    0x18, 0xF0, 0x7D, 0xEC, 0x3A, 0xDC, 0x4D, 0x20, 0x79, 0xEE, 0x5F, 0x3E, 0xD7, 0xCB, 0x39, 0x48,
]

_FK = (0xA3B1BAC6, 0x56AA3350, 0x677D9197, 0xB27022DC)

_CK = (
    0x00070E15, 0x1C232A31, 0x383F464D, 0x545B6269,
    0x70777E85, 0x8C939AA1, 0xA8AFB6BD, 0xC4CBD2D9,
    0xE0E7EEF5, 0xFC030A11, 0x181F262D, 0x343B4249,
    0x50575E65, 0x6C737A81, 0x888F969D, 0xA4ABB2B9,
    0xC0C7CED5, 0xDCE3EAF1, 0xF8FF060D, 0x141B2229,
    0x30373E45, 0x4C535A61, 0x686F767D, 0x848B9299,
    0xA0A7AEB5, 0xBCC3CAD1, 0xD8DFE6ED, 0xF4FB0209,
    0x10171E25, 0x2C333A41, 0x484F565D, 0x646B7279,
)


def _rotl(x: int, n: int) -> int:
    return ((x << n) | (x >> (32 - n))) & 0xFFFFFFFF


def _l_cipher(b: int) -> int:
    return b ^ _rotl(b, 2) ^ _rotl(b, 10) ^ _rotl(b, 18) ^ _rotl(b, 24)


def _l_key(b: int) -> int:
    return b ^ _rotl(b, 13) ^ _rotl(b, 23)


# t_i[b] = L(sbox(b) << (24 - 8i)); the round transform T(x) is then four
# lookups XORed together because L is linear over XOR.
_T0 = [_l_cipher(_SBOX[b] << 24) for b in range(256)]
_T1 = [_l_cipher(_SBOX[b] << 16) for b in range(256)]
_T2 = [_l_cipher(_SBOX[b] << 8) for b in range(256)]
_T3 = [_l_cipher(_SBOX[b]) for b in range(256)]


def _tau(x: int) -> int:
    return (
        (_SBOX[(x >> 24) & 0xFF] << 24)
        | (_SBOX[(x >> 16) & 0xFF] << 16)
        | (_SBOX[(x >> 8) & 0xFF] << 8)
        | _SBOX[x & 0xFF]
    )


def expand_key(key: bytes) -> list[int]:
    if len(key) != 16:
        raise CryptoError("SM4 key must be 16 bytes")
    k = [mk ^ fk for mk, fk in zip(struct.unpack(">4I", key), _FK)]
    rks = []
    for i in range(32):
        t = k[1] ^ k[2] ^ k[3] ^ _CK[i]
        rk = k[0] ^ _l_key(_tau(t))
        rks.append(rk)
        k = [k[1], k[2], k[3], rk]
    return rks


class SM4:
    def __init__(self, key: bytes):
        self._rk = expand_key(key)

    def _crypt_block(self, block: bytes, rks) -> bytes:
        x0, x1, x2, x3 = struct.unpack(">4I", block)
        for rk in rks:
            t = x1 ^ x2 ^ x3 ^ rk
            x0, x1, x2, x3 = (
                x1,
                x2,
                x3,
                x0 ^ _T0[(t >> 24) & 0xFF] ^ _T1[(t >> 16) & 0xFF] ^ _T2[(t >> 8) & 0xFF] ^ _T3[t & 0xFF],
            )
        return struct.pack(">4I", x3, x2, x1, x0)

    def encrypt_block(self, block: bytes) -> bytes:
        if len(block) != 16:
            raise CryptoError("SM4 block must be 16 bytes")
        return self._crypt_block(block, self._rk)

    def decrypt_block(self, block: bytes) -> bytes:
        if len(block) != 16:
            raise CryptoError("SM4 block must be 16 bytes")
        return self._crypt_block(block, self._rk[::-1])


# --- GCM (SP 800-38D construction over the SM4 block) ---

_R_POLY = 0xE1 << 120

# Reduction of the 8 bits shifted out by one byte-sized multiply-by-x**8 step;
# independent of the hash subkey.
_RED8 = []
for _b in range(256):
    _v = _b
    for _ in range(8):
        _v = (_v >> 1) ^ (_R_POLY if _v & 1 else 0)
    _RED8.append(_v)
del _b, _v


def gf_mult(x: int, y: int) -> int:
    """Bit-serial multiply in GF(2^128); reference for the table path."""
    z = 0
    v = x
    for i in range(127, -1, -1):
        if (y >> i) & 1:
            z ^= v
        v = (v >> 1) ^ (_R_POLY if v & 1 else 0)
    return z


class _GHash:
    def __init__(self, h: int):
        hx = [h]
        for _ in range(7):
            prev = hx[-1]
            hx.append((prev >> 1) ^ (_R_POLY if prev & 1 else 0))
        table = []
        for b in range(256):
            acc = 0
            for i in range(8):
                if b & (0x80 >> i):
                    acc ^= hx[i]
            table.append(acc)
        self._table = table

    def mult(self, z: int) -> int:
        table = self._table
        red8 = _RED8
        acc = 0
        for shift in range(0, 128, 8):
            acc = (acc >> 8) ^ red8[acc & 0xFF] ^ table[(z >> shift) & 0xFF]
        return acc

    def digest(self, aad: bytes, data: bytes) -> int:
        y = 0
        for chunk in (aad, data):
            for i in range(0, len(chunk), 16):
                block = chunk[i : i + 16]
                if len(block) < 16:
                    block = block + b"\x00" * (16 - len(block))
                y = self.mult(y ^ int.from_bytes(block, "big"))
        lengths = (len(aad) * 8) << 64 | (len(data) * 8)
        return self.mult(y ^ lengths)


NONCE_SIZE = 12
TAG_SIZE = 16


def _keystream(cipher: SM4, j0: int, n_bytes: int) -> bytes:
    out = []
    counter = j0
    for _ in range((n_bytes + 15) // 16):
        counter = (counter & ~0xFFFFFFFF) | ((counter + 1) & 0xFFFFFFFF)
        out.append(cipher.encrypt_block(counter.to_bytes(16, "big")))
    return b"".join(out)[:n_bytes]


def gcm_encrypt(key: bytes, nonce: bytes, plaintext: bytes, aad: bytes = b"") -> bytes:
    """Authenticated encryption; returns ciphertext with the 16-byte tag appended."""
    if len(nonce) != NONCE_SIZE:
        raise CryptoError("GCM nonce must be 12 bytes")
    cipher = SM4(key)
    h = int.from_bytes(cipher.encrypt_block(b"\x00" * 16), "big")
    ghash = _GHash(h)
    j0 = int.from_bytes(nonce + b"\x00\x00\x00\x01", "big")
    stream = _keystream(cipher, j0, len(plaintext))
    ciphertext = bytes(p ^ s for p, s in zip(plaintext, stream))
    s = ghash.digest(aad, ciphertext)
    tag = (s ^ int.from_bytes(cipher.encrypt_block(j0.to_bytes(16, "big")), "big")).to_bytes(16, "big")
    return ciphertext + tag


def gcm_decrypt(key: bytes, nonce: bytes, data: bytes, aad: bytes = b"") -> bytes:
    """Verify the tag, then decrypt; raises DecryptionError on any mismatch."""
    if len(nonce) != NONCE_SIZE:
        raise CryptoError("GCM nonce must be 12 bytes")
    if len(data) < TAG_SIZE:
        raise DecryptionError("ciphertext shorter than authentication tag")
    ciphertext, tag = data[:-TAG_SIZE], data[-TAG_SIZE:]
    cipher = SM4(key)
    h = int.from_bytes(cipher.encrypt_block(b"\x00" * 16), "big")
    ghash = _GHash(h)
    j0 = int.from_bytes(nonce + b"\x00\x00\x00\x01", "big")
    s = ghash.digest(aad, ciphertext)
    expected = (s ^ int.from_bytes(cipher.encrypt_block(j0.to_bytes(16, "big")), "big")).to_bytes(16, "big")
    if not hmac.compare_digest(expected, tag):
        raise DecryptionError("authentication tag mismatch")
    stream = _keystream(cipher, j0, len(ciphertext))
    return bytes(c ^ k for c, k in zip(ciphertext, stream))
