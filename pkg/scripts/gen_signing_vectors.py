#!/usr/bin/env python3
"""Generate the shared signing test vectors that pin cross-language
compatibility between this package and the browser client.

Writes frontend/test/vectors/signing_vectors.json: deterministic key pairs,
digest vectors, address derivations, and signed-request examples (including
the exact request-digest preimage), so the TypeScript implementation can
assert byte equality rather than mere verifiability.
"""
import json
import sys
from pathlib import Path

from chainreview.crypto import derive_address, generate_keypair, sm3_digest
from chainreview.crypto import sm2
from chainreview.gateway.auth import signing_message

OUT = Path(__file__).resolve().parent.parent / "frontend" / "test" / "vectors" / "signing_vectors.json"

REQUESTS = [
    ("POST", "/api/v1/articles", "1754900000", b'{"text":"hello","group":"g1"}'),
    ("GET", "/api/v1/articles", "1754900060", b""),
    ("POST", "/api/v1/articles/art-1/endorsements", "1754900120", b'{"verdict":"favorable"}'),
]


def main() -> int:
    vectors = {
        "sm3": [
            {"message_utf8": "abc", "digest": sm3_digest(b"abc").hex()},
            {"message_utf8": "", "digest": sm3_digest(b"").hex()},
            {"message_utf8": "abcd" * 16, "digest": sm3_digest(b"abcd" * 16).hex()},
        ],
        "keys": [],
        "signed_requests": [],
    }
    for i in range(3):
        seed = bytes(31) + bytes([i + 1])
        pair = generate_keypair(seed=seed)
        vectors["keys"].append(
            {
                "seed": seed.hex(),
                "private_key": pair.private_key.hex(),
                "public_key": pair.public_key.hex(),
                "address": derive_address(pair.public_key).hex(),
            }
        )
    pair = generate_keypair(seed=bytes(31) + b"\x01")
    d = pair.private_scalar()
    pub = pair.public_point()
    for method, path, timestamp, body in REQUESTS:
        message = signing_message(method, path, timestamp, body)
        signature = sm2.sign(message, d, pub=pub)
        vectors["signed_requests"].append(
            {
                "private_key": pair.private_key.hex(),
                "public_key": pair.public_key.hex(),
                "address": derive_address(pair.public_key).hex(),
                "method": method,
                "path": path,
                "timestamp": timestamp,
                "body_utf8": body.decode(),
                "request_digest": message.hex(),
                "signature": signature.hex(),
            }
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(vectors, indent=2) + "\n")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
