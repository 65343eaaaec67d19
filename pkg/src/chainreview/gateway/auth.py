"""Signed-request authentication for the HTTP API.

Every mutating request carries three headers:

    X-BR-Identity:   caller address, 40 hex chars
    X-BR-Timestamp:  unix seconds, decimal
    X-BR-Signature:  128 hex chars, signature over the request digest

The signed digest is ``sm3(METHOD \\n path \\n timestamp \\n body)`` with
literal newline separators (query strings excluded). Verification is
fail-closed: any ambiguity rejects. A replay cache remembers signatures for
twice the freshness window, so an identical resubmission is rejected even
inside the window.
"""
from __future__ import annotations

import threading
import time
from typing import Callable, Mapping

from ..crypto import sm3_digest, verify
from ..errors import (
    InvalidRequestSignature,
    MissingAuthHeaders,
    ReplayedRequest,
    StaleTimestamp,
    UnknownIdentity,
)

HEADER_IDENTITY = "X-BR-Identity"
HEADER_TIMESTAMP = "X-BR-Timestamp"
HEADER_SIGNATURE = "X-BR-Signature"

DEFAULT_WINDOW_SECONDS = 300


def signing_message(method: str, path: str, timestamp: str, body: bytes) -> bytes:
    return sm3_digest(
        method.upper().encode() + b"\n" + path.encode() + b"\n" + timestamp.encode() + b"\n" + body
    )


def sign_headers(key_pair, address: bytes, method: str, path: str, body: bytes,
                 timestamp: int | None = None) -> dict[str, str]:
    """Client-side helper: produce the three auth headers for a request.
    Nonce entropy keeps repeated identical requests distinct on the wire, so
    only true byte-replays trip the replay cache."""
    import secrets

    from ..crypto import sign

    ts = str(int(time.time()) if timestamp is None else timestamp)
    message = signing_message(method, path, ts, body)
    return {
        HEADER_IDENTITY: address.hex(),
        HEADER_TIMESTAMP: ts,
        HEADER_SIGNATURE: sign(message, key_pair, entropy=secrets.token_bytes(32)).hex(),
    }


class RateLimiter:
    """Fixed-window per-identity limiter for the server-side decrypt
    convenience path."""

    def __init__(self, limit_per_minute: int, now: Callable[[], float] = time.time):
        self.limit = limit_per_minute
        self._now = now
        self._windows: dict[bytes, tuple[int, int]] = {}
        self._lock = threading.Lock()

    def allow(self, identity: bytes) -> bool:
        if self.limit <= 0:
            return True
        window = int(self._now() // 60)
        with self._lock:
            seen_window, count = self._windows.get(identity, (window, 0))
            if seen_window != window:
                count = 0
            if count >= self.limit:
                self._windows[identity] = (window, count)
                return False
            self._windows[identity] = (window, count + 1)
            return True


class Authenticator:
    """Resolves a request to a verified caller address or raises one of the
    distinct authentication errors."""

    def __init__(
        self,
        public_key_for: Callable[[bytes], bytes | None],
        window_seconds: int = DEFAULT_WINDOW_SECONDS,
        now: Callable[[], float] = time.time,
    ):
        self._public_key_for = public_key_for
        self.window_seconds = window_seconds
        self._now = now
        self._seen: dict[bytes, float] = {}
        self._lock = threading.Lock()

    def _check_replay(self, signature: bytes) -> None:
        now = self._now()
        with self._lock:
            expired = [sig for sig, expiry in self._seen.items() if expiry < now]
            for sig in expired:
                del self._seen[sig]
            if signature in self._seen:
                raise ReplayedRequest("request signature was already used")
            self._seen[signature] = now + 2 * self.window_seconds

    def authenticate(self, method: str, path: str, headers: Mapping[str, str], body: bytes) -> bytes:
        identity_hex = headers.get(HEADER_IDENTITY) or headers.get(HEADER_IDENTITY.lower())
        timestamp = headers.get(HEADER_TIMESTAMP) or headers.get(HEADER_TIMESTAMP.lower())
        signature_hex = headers.get(HEADER_SIGNATURE) or headers.get(HEADER_SIGNATURE.lower())
        if not identity_hex or not timestamp or not signature_hex:
            raise MissingAuthHeaders(
                f"requests must carry {HEADER_IDENTITY}, {HEADER_TIMESTAMP}, {HEADER_SIGNATURE}"
            )
        try:
            identity = bytes.fromhex(identity_hex)
            signature = bytes.fromhex(signature_hex)
            ts_value = int(timestamp)
        except ValueError as exc:
            raise InvalidRequestSignature(f"malformed auth header: {exc}") from exc
        if len(identity) != 20:
            raise InvalidRequestSignature("identity must be a 20-byte address")
        skew = abs(self._now() - ts_value)
        if skew > self.window_seconds:
            raise StaleTimestamp(
                f"timestamp outside the +/-{self.window_seconds}s freshness window"
            )
        public_key = self._public_key_for(identity)
        if not public_key:
            raise UnknownIdentity(f"no registered key for {identity.hex()}")
        message = signing_message(method, path, timestamp, body)
        if not verify(signature, message, public_key):
            raise InvalidRequestSignature("signature does not verify for this request")
        self._check_replay(signature)
        return identity
