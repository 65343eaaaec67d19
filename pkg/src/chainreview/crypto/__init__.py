"""Cryptographic spine of the platform.

Byte encodings are bit-exact contracts shared with the ledger and gateway:

* public key: 65-byte uncompressed point ``0x04 || x || y``
* digest: 32-byte SM3 output
* address: first 20 bytes of ``sm3(public key encoding)``
* signature: 64 bytes, ``r || s`` big-endian
* wrapped key / asymmetric ciphertext: ``C1(65) || C3(32) || C2``
* symmetric ciphertext: SM4-GCM, 12-byte nonce, 16-byte tag appended

Signatures bind a fixed distinguishing identifier (``DEFAULT_USER_ID``) into
the hashed message, per the signature scheme's ID parameter.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass

from ..errors import CryptoError
from . import sm2
from .sm3 import hmac_sm3, sm3
from .sm4 import gcm_decrypt, gcm_encrypt

__all__ = [
    "KeyPair",
    "WrappedKey",
    "ADDRESS_SIZE",
    "DIGEST_SIZE",
    "SYM_KEY_SIZE",
    "NONCE_SIZE",
    "generate_keypair",
    "sm3_digest",
    "hmac_sm3",
    "new_symmetric_key",
    "sym_encrypt",
    "sym_decrypt",
    "wrap_key",
    "unwrap_key",
    "asym_encrypt",
    "asym_decrypt",
    "sign",
    "verify",
    "derive_address",
]

ADDRESS_SIZE = 20
DIGEST_SIZE = 32
SYM_KEY_SIZE = 16
NONCE_SIZE = 12


@dataclass(frozen=True)
class KeyPair:
    """An asymmetric pair; ``public_key`` is the 65-byte encoded point and
    ``private_key`` the 32-byte big-endian scalar."""

    public_key: bytes
    private_key: bytes

    @property
    def address(self) -> bytes:
        return derive_address(self.public_key)

    def public_point(self):
        return sm2.decode_point(self.public_key)

    def private_scalar(self) -> int:
        return int.from_bytes(self.private_key, "big")


@dataclass(frozen=True)
class WrappedKey:
    """A symmetric key encrypted under a recipient's public key."""

    ciphertext: bytes
    recipient: bytes  # 20-byte address of the wrapping public key


def generate_keypair(seed: bytes | None = None) -> KeyPair:
    """Generate a key pair; a 32-byte seed yields the same pair every time,
    no seed draws from OS randomness."""
    if seed is not None:
        d = sm2.derive_private_key(seed)
    else:
        d = sm2.generate_private_key()
    pub = sm2.public_from_private(d)
    return KeyPair(public_key=sm2.encode_point(pub), private_key=d.to_bytes(32, "big"))


def sm3_digest(data: bytes) -> bytes:
    return sm3(data)


def derive_address(public_key: bytes) -> bytes:
    if len(public_key) != sm2.POINT_SIZE or public_key[0] != 0x04:
        raise CryptoError("public key must be a 65-byte uncompressed point")
    return sm3(public_key)[:ADDRESS_SIZE]


def new_symmetric_key() -> bytes:
    return secrets.token_bytes(SYM_KEY_SIZE)


def sym_encrypt(key: bytes, plaintext: bytes, nonce: bytes) -> bytes:
    if len(key) != SYM_KEY_SIZE:
        raise CryptoError("symmetric key must be 16 bytes")
    return gcm_encrypt(key, nonce, plaintext)


def sym_decrypt(key: bytes, ciphertext: bytes, nonce: bytes) -> bytes:
    if len(key) != SYM_KEY_SIZE:
        raise CryptoError("symmetric key must be 16 bytes")
    return gcm_decrypt(key, nonce, ciphertext)


def asym_encrypt(recipient_public: bytes, plaintext: bytes, k: int | None = None) -> bytes:
    return sm2.encrypt(sm2.decode_point(recipient_public), plaintext, k=k)


def asym_decrypt(recipient_private: bytes, ciphertext: bytes) -> bytes:
    return sm2.decrypt(int.from_bytes(recipient_private, "big"), ciphertext)


def wrap_key(recipient_public: bytes, key: bytes, k: int | None = None) -> WrappedKey:
    if len(key) != SYM_KEY_SIZE:
        raise CryptoError("symmetric key must be 16 bytes")
    return WrappedKey(
        ciphertext=asym_encrypt(recipient_public, key, k=k),
        recipient=derive_address(recipient_public),
    )


def unwrap_key(recipient_private: bytes, wrapped: WrappedKey) -> bytes:
    key = asym_decrypt(recipient_private, wrapped.ciphertext)
    if len(key) != SYM_KEY_SIZE:
        raise CryptoError("unwrapped payload is not a symmetric key")
    return key


def sign(message: bytes, key_pair: KeyPair, entropy: bytes = b"") -> bytes:
    """Sign with a deterministic nonce by default; pass fresh entropy when
    identical messages must still yield distinct signatures."""
    return sm2.sign(
        message,
        key_pair.private_scalar(),
        pub=key_pair.public_point(),
        entropy=entropy,
    )


def verify(signature: bytes, message: bytes, public_key: bytes) -> bool:
    try:
        pub = sm2.decode_point(public_key)
    except CryptoError:
        return False
    return sm2.verify(signature, message, pub)
