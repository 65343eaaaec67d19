"""Curve-level checks. The oracle here is a naive affine double-and-add
implementation written below, entirely independent of the production path's
Jacobian coordinates and wNAF windowing."""
import secrets

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chainreview.crypto import sm2
from chainreview.errors import CryptoError, DecryptionError


def _affine_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2 and (y1 + y2) % sm2.P == 0:
        return None
    if p1 == p2:
        lam = (3 * x1 * x1 + sm2.A) * pow(2 * y1, sm2.P - 2, sm2.P) % sm2.P
    else:
        lam = (y2 - y1) * pow((x2 - x1) % sm2.P, sm2.P - 2, sm2.P) % sm2.P
    x3 = (lam * lam - x1 - x2) % sm2.P
    return (x3, (lam * (x1 - x3) - y1) % sm2.P)


def _affine_mul(point, k):
    acc = None
    addend = point
    while k:
        if k & 1:
            acc = _affine_add(acc, addend)
        addend = _affine_add(addend, addend)
        k >>= 1
    return acc


def test_curve_constants_self_consistent():
    assert sm2.is_on_curve((sm2.GX, sm2.GY))
    assert sm2.scalar_mult_base(sm2.N) is None  # group order annihilates G


@settings(max_examples=10)
@given(st.integers(min_value=1, max_value=sm2.N - 1))
def test_base_scalar_mult_matches_affine_oracle(k):
    assert sm2.scalar_mult_base(k) == _affine_mul((sm2.GX, sm2.GY), k)


@settings(max_examples=10)
@given(st.integers(min_value=2, max_value=2**64), st.integers(min_value=2, max_value=2**64))
def test_arbitrary_point_mult_matches_affine_oracle(d, k):
    point = sm2.scalar_mult_base(d)
    assert sm2.scalar_mult(point, k) == _affine_mul(point, k)


def test_point_encoding_roundtrip_and_rejection():
    d = sm2.generate_private_key()
    point = sm2.public_from_private(d)
    encoded = sm2.encode_point(point)
    assert len(encoded) == 65 and encoded[0] == 0x04
    assert sm2.decode_point(encoded) == point
    with pytest.raises(CryptoError):
        sm2.decode_point(b"\x02" + encoded[1:])
    off_curve = bytearray(encoded)
    off_curve[-1] ^= 0x01
    with pytest.raises(CryptoError):
        sm2.decode_point(bytes(off_curve))


def test_seeded_private_key_is_deterministic_and_validated():
    seed = bytes(range(32))
    assert sm2.derive_private_key(seed) == sm2.derive_private_key(seed)
    with pytest.raises(CryptoError):
        sm2.derive_private_key(b"short seed")


def test_sign_verify_roundtrip_over_100_random_messages():
    d = sm2.derive_private_key(secrets.token_bytes(32))
    pub = sm2.public_from_private(d)
    for _ in range(100):
        message = secrets.token_bytes(secrets.randbelow(120) + 1)
        signature = sm2.sign(message, d, pub=pub)
        assert len(signature) == 64
        assert sm2.verify(signature, message, pub)
        assert not sm2.verify(signature, message + b"x", pub)


@settings(max_examples=10)
@given(st.binary(min_size=1, max_size=80), st.integers(min_value=1, max_value=sm2.N - 2),
       st.integers(min_value=1, max_value=sm2.N - 2))
def test_verify_fails_under_a_different_key(message, d1, d2):
    if d1 == d2:
        d2 = (d2 % (sm2.N - 2)) + 1
        if d1 == d2:
            return
    pub1 = sm2.public_from_private(d1)
    pub2 = sm2.public_from_private(d2)
    signature = sm2.sign(message, d1, pub=pub1)
    assert sm2.verify(signature, message, pub1)
    assert not sm2.verify(signature, message, pub2)


def test_deterministic_signatures_are_stable():
    d = sm2.derive_private_key(bytes(32))
    pub = sm2.public_from_private(d)
    assert sm2.sign(b"stable", d, pub=pub) == sm2.sign(b"stable", d, pub=pub)


def test_boundary_scalars_rejected_not_looped():
    # d = n-1 makes (1 + d) non-invertible, so s would be 0 for every nonce;
    # the key range excludes it and sign must reject rather than spin.
    for bad in (0, sm2.N - 1, sm2.N):
        with pytest.raises(CryptoError):
            sm2.sign(b"m", bad, pub=(sm2.GX, sm2.GY))
        with pytest.raises(CryptoError):
            sm2.public_from_private(bad)


def test_malformed_signatures_return_false_not_crash():
    d = sm2.derive_private_key(bytes(32))
    pub = sm2.public_from_private(d)
    assert not sm2.verify(b"", b"m", pub)
    assert not sm2.verify(b"\x00" * 64, b"m", pub)  # r = s = 0 out of range
    assert not sm2.verify(b"\xff" * 64, b"m", pub)
    assert not sm2.verify(b"\x01" * 63, b"m", pub)
    assert not sm2.verify(sm2.sign(b"m", d, pub=pub), b"m", (1, 2))  # bogus point


def test_user_id_binding_changes_signature_domain():
    d = sm2.derive_private_key(bytes(32))
    pub = sm2.public_from_private(d)
    signature = sm2.sign(b"msg", d, pub=pub, user_id=b"alice@example")
    assert sm2.verify(signature, b"msg", pub, user_id=b"alice@example")
    assert not sm2.verify(signature, b"msg", pub)


@settings(max_examples=15)
@given(st.binary(max_size=200))
def test_encrypt_decrypt_roundtrip(plaintext):
    d = sm2.derive_private_key(bytes(range(32)))
    pub = sm2.public_from_private(d)
    sealed = sm2.encrypt(pub, plaintext)
    assert len(sealed) == 65 + 32 + len(plaintext)
    assert sm2.decrypt(d, sealed) == plaintext


def test_encrypt_is_randomized_but_seedable():
    d = sm2.derive_private_key(bytes(range(32)))
    pub = sm2.public_from_private(d)
    assert sm2.encrypt(pub, b"m") != sm2.encrypt(pub, b"m")
    assert sm2.encrypt(pub, b"m", k=12345) == sm2.encrypt(pub, b"m", k=12345)


def test_decrypt_failure_modes():
    d1 = sm2.derive_private_key(bytes(range(32)))
    d2 = sm2.derive_private_key(bytes(range(1, 33)))
    pub1 = sm2.public_from_private(d1)
    sealed = sm2.encrypt(pub1, b"secret article key")
    with pytest.raises(DecryptionError):
        sm2.decrypt(d2, sealed)
    corrupted = bytearray(sealed)
    corrupted[-1] ^= 0x40
    with pytest.raises(DecryptionError):
        sm2.decrypt(d1, bytes(corrupted))
    with pytest.raises(DecryptionError):
        sm2.decrypt(d1, sealed[:60])
