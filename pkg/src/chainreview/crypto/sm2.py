# SM2 elliptic-curve public key cryptography (GB/T 32918) over the
# recommended 256-bit prime curve: key generation, signatures with the ZA
# identity-binding digest, and public-key encryption in C1 || C3 || C2 layout.
#
# Scalar multiplication uses Jacobian coordinates with width-5 wNAF and a
# precomputed odd-multiples table for the base point. Not constant-time;
# acceptable for a reference platform, not for hostile-host deployments.
from __future__ import annotations

import secrets

from ..errors import CryptoError, DecryptionError
from .sm3 import hmac_sm3, sm3

P = 0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFF
A = 0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFC
B = 0x28E9FA9E9D9F5E344D5A9E4BCF6509A7F39789F515AB8F92DDBCBD414D940E93
N = 0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFF7203DF6B21C6052B53BBF40939D54123
GX = 0x32C4AE2C1F1981195F9904466A39C9948FE30BBFF2660BE1715A4589334C74C7
GY = 0xBC3736A2F4F6779C59BDCEE36B692153D0A9877CC62A474002DF32E52139F0A0

assert (GY * GY - (GX * GX * GX + A * GX + B)) % P == 0, "curve constants corrupt"

# ENTL-prefixed distinguishing identifier hashed into every signature; the
# conventional default value, fixed platform-wide.
DEFAULT_USER_ID = b"1234567812345678"

POINT_SIZE = 65  # uncompressed: 0x04 || x || y
SIGNATURE_SIZE = 64  # r || s, 32-byte big-endian each

_JAC_INF = (0, 1, 0)


def _inv_mod(x: int, m: int) -> int:
    return pow(x, m - 2, m)


def _j_double(pt):
    x1, y1, z1 = pt
    if z1 == 0 or y1 == 0:
        return _JAC_INF
    a_ = (x1 * x1) % P
    b_ = (y1 * y1) % P
    c_ = (b_ * b_) % P
    d_ = (2 * ((x1 + b_) * (x1 + b_) - a_ - c_)) % P
    z1z1 = (z1 * z1) % P
    e_ = (3 * a_ + A * z1z1 % P * z1z1) % P
    x3 = (e_ * e_ - 2 * d_) % P
    y3 = (e_ * (d_ - x3) - 8 * c_) % P
    z3 = (2 * y1 * z1) % P
    return (x3, y3, z3)


def _j_add(pt, qt):
    if pt[2] == 0:
        return qt
    if qt[2] == 0:
        return pt
    x1, y1, z1 = pt
    x2, y2, z2 = qt
    z1z1 = (z1 * z1) % P
    z2z2 = (z2 * z2) % P
    u1 = (x1 * z2z2) % P
    u2 = (x2 * z1z1) % P
    s1 = (y1 * z2 * z2z2) % P
    s2 = (y2 * z1 * z1z1) % P
    if u1 == u2:
        if s1 != s2:
            return _JAC_INF
        return _j_double(pt)
    h = (u2 - u1) % P
    i = (4 * h * h) % P
    j = (h * i) % P
    r = (2 * (s2 - s1)) % P
    v = (u1 * i) % P
    x3 = (r * r - j - 2 * v) % P
    y3 = (r * (v - x3) - 2 * s1 * j) % P
    z3 = ((z1 + z2) * (z1 + z2) - z1z1 - z2z2) % P
    z3 = (z3 * h) % P
    return (x3, y3, z3)


def _j_neg(pt):
    return (pt[0], (-pt[1]) % P, pt[2])


def _from_jac(pt):
    x, y, z = pt
    if z == 0:
        return None
    zi = _inv_mod(z, P)
    zi2 = (zi * zi) % P
    return ((x * zi2) % P, (y * zi2 * zi) % P)


def _wnaf(k: int, w: int = 5):
    digits = []
    while k > 0:
        if k & 1:
            d = k & ((1 << w) - 1)
            if d >= 1 << (w - 1):
                d -= 1 << w
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


def _odd_multiples(pt_jac, w: int = 5):
    table = [pt_jac]
    twice = _j_double(pt_jac)
    for _ in range(1, 1 << (w - 2)):
        table.append(_j_add(table[-1], twice))
    return table


_G_TABLE = _odd_multiples((GX, GY, 1))


def _mul(table, k: int):
    acc = _JAC_INF
    for d in reversed(_wnaf(k)):
        acc = _j_double(acc)
        if d:
            entry = table[abs(d) >> 1]
            acc = _j_add(acc, entry if d > 0 else _j_neg(entry))
    return acc


def scalar_mult_base(k: int):
    """k*G in affine coordinates, None for the point at infinity."""
    return _from_jac(_mul(_G_TABLE, k % N))


def scalar_mult(point, k: int):
    """k*point in affine coordinates, None for the point at infinity."""
    k %= N
    if k == 0 or point is None:
        return None
    return _from_jac(_mul(_odd_multiples((point[0], point[1], 1)), k))


def is_on_curve(point) -> bool:
    if point is None:
        return False
    x, y = point
    if not (0 <= x < P and 0 <= y < P):
        return False
    return (y * y - (x * x * x + A * x + B)) % P == 0


def encode_point(point) -> bytes:
    x, y = point
    return b"\x04" + x.to_bytes(32, "big") + y.to_bytes(32, "big")


def decode_point(data: bytes):
    if len(data) != POINT_SIZE or data[0] != 0x04:
        raise CryptoError("public key must be a 65-byte uncompressed point")
    point = (int.from_bytes(data[1:33], "big"), int.from_bytes(data[33:], "big"))
    if not is_on_curve(point):
        raise CryptoError("point is not on the curve")
    return point


def derive_private_key(seed: bytes) -> int:
    """Map a 32-byte seed to a scalar in [1, n-2], deterministically.
    n-1 is excluded: signing needs (1 + d) invertible mod n."""
    if len(seed) != 32:
        raise CryptoError("seed must be exactly 32 bytes")
    counter = 0
    while True:
        candidate = int.from_bytes(sm3(seed + counter.to_bytes(4, "big")), "big")
        if 1 <= candidate <= N - 2:
            return candidate
        counter += 1


def generate_private_key() -> int:
    while True:
        d = secrets.randbits(256)
        if 1 <= d <= N - 2:
            return d


def public_from_private(d: int):
    if not 1 <= d <= N - 2:
        raise CryptoError("private key out of range")
    return scalar_mult_base(d)


def za(user_id: bytes, pub) -> bytes:
    entl = (len(user_id) * 8).to_bytes(2, "big")
    return sm3(
        entl
        + user_id
        + A.to_bytes(32, "big")
        + B.to_bytes(32, "big")
        + GX.to_bytes(32, "big")
        + GY.to_bytes(32, "big")
        + pub[0].to_bytes(32, "big")
        + pub[1].to_bytes(32, "big")
    )


def _derive_k(d: int, e_bytes: bytes, retry: int = 0, entropy: bytes = b"") -> int:
    # HMAC-based derivation in the style of RFC 6979, instantiated with SM3.
    # With empty entropy the nonce is a pure function of (key, message),
    # which keeps transaction encodings replayable; callers that may sign
    # identical bytes twice mix in fresh entropy instead.
    x = d.to_bytes(32, "big")
    v = b"\x01" * 32
    key = b"\x00" * 32
    suffix = (retry.to_bytes(2, "big") if retry else b"") + entropy
    key = hmac_sm3(key, v + b"\x00" + x + e_bytes + suffix)
    v = hmac_sm3(key, v)
    key = hmac_sm3(key, v + b"\x01" + x + e_bytes + suffix)
    v = hmac_sm3(key, v)
    while True:
        v = hmac_sm3(key, v)
        k = int.from_bytes(v, "big")
        if 1 <= k <= N - 1:
            return k
        key = hmac_sm3(key, v + b"\x00")
        v = hmac_sm3(key, v)


def sign(message: bytes, d: int, pub=None, user_id: bytes = DEFAULT_USER_ID,
         k: int | None = None, entropy: bytes = b"") -> bytes:
    """Sign a message, returning the 64-byte r || s encoding."""
    if not 1 <= d <= N - 2:
        raise CryptoError("private key out of range")
    if pub is None:
        pub = public_from_private(d)
    e_bytes = sm3(za(user_id, pub) + message)
    e = int.from_bytes(e_bytes, "big")
    retry = 0
    while retry < 64:
        k_val = k if k is not None else _derive_k(d, e_bytes, retry, entropy)
        x1, _ = scalar_mult_base(k_val)
        r = (e + x1) % N
        if r == 0 or r + k_val == N:
            if k is not None:
                raise CryptoError("unsuitable explicit nonce")
            retry += 1
            continue
        s = (_inv_mod(1 + d, N) * (k_val - r * d)) % N
        if s == 0:
            if k is not None:
                raise CryptoError("unsuitable explicit nonce")
            retry += 1
            continue
        return r.to_bytes(32, "big") + s.to_bytes(32, "big")
    raise CryptoError("nonce derivation failed to produce a usable signature")


def verify(signature: bytes, message: bytes, pub, user_id: bytes = DEFAULT_USER_ID) -> bool:
    """True iff the signature was produced over exactly this message by the
    matching private key. Malformed inputs yield False, never an exception."""
    if not isinstance(signature, (bytes, bytearray)) or len(signature) != SIGNATURE_SIZE:
        return False
    if not is_on_curve(pub):
        return False
    r = int.from_bytes(signature[:32], "big")
    s = int.from_bytes(signature[32:], "big")
    if not (1 <= r <= N - 1 and 1 <= s <= N - 1):
        return False
    t = (r + s) % N
    if t == 0:
        return False
    e = int.from_bytes(sm3(za(user_id, pub) + message), "big")
    point = _from_jac(
        _j_add(
            _mul(_G_TABLE, s),
            _mul(_odd_multiples((pub[0], pub[1], 1)), t),
        )
    )
    if point is None:
        return False
    return (e + point[0]) % N == r


# --- public key encryption (C1 || C3 || C2) ---


def _kdf(z: bytes, klen: int) -> bytes:
    out = bytearray()
    ct = 1
    while len(out) < klen:
        out.extend(sm3(z + ct.to_bytes(4, "big")))
        ct += 1
    return bytes(out[:klen])


def encrypt(pub, plaintext: bytes, k: int | None = None) -> bytes:
    """Encrypt to a public key point. An explicit ephemeral scalar k may be
    supplied for reproducible runs; the default is fresh randomness."""
    if not is_on_curve(pub):
        raise CryptoError("invalid recipient public key")
    attempt = 0
    while True:
        if k is not None:
            k_val = (k + attempt - 1) % (N - 1) + 1 if attempt else k
        else:
            k_val = generate_private_key()
        c1 = scalar_mult_base(k_val)
        x2, y2 = scalar_mult(pub, k_val)
        x2b = x2.to_bytes(32, "big")
        y2b = y2.to_bytes(32, "big")
        t = _kdf(x2b + y2b, len(plaintext))
        if plaintext and not any(t):
            attempt += 1
            continue
        c2 = bytes(m ^ ti for m, ti in zip(plaintext, t))
        c3 = sm3(x2b + plaintext + y2b)
        return encode_point(c1) + c3 + c2


def decrypt(d: int, data: bytes) -> bytes:
    if len(data) < POINT_SIZE + 32:
        raise DecryptionError("ciphertext too short")
    try:
        c1 = decode_point(data[:POINT_SIZE])
    except CryptoError as exc:
        raise DecryptionError(f"invalid C1 component: {exc}") from exc
    c3 = data[POINT_SIZE : POINT_SIZE + 32]
    c2 = data[POINT_SIZE + 32 :]
    shared = scalar_mult(c1, d)
    if shared is None:
        raise DecryptionError("degenerate shared point")
    x2b = shared[0].to_bytes(32, "big")
    y2b = shared[1].to_bytes(32, "big")
    t = _kdf(x2b + y2b, len(c2))
    plaintext = bytes(c ^ ti for c, ti in zip(c2, t))
    if sm3(x2b + plaintext + y2b) != c3:
        raise DecryptionError("C3 digest mismatch: wrong key or corrupted bytes")
    return plaintext
