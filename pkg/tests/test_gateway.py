"""HTTP surface: signed-request authentication with distinct failure codes,
replay protection through the API layer, policy mirroring, and startup
refusal over a corrupt chain."""
import json
import time

import pytest
from fastapi.testclient import TestClient

from chainreview.config import NodeConfig
from chainreview.crypto import KeyPair
from chainreview.engine import ReviewEngine
from chainreview.errors import ChainCorruption
from chainreview.gateway import create_app, sign_headers
from chainreview.workload import synth_text

from conftest import TEST_GENESIS_SEED

ARTICLE_TEXT = synth_text(3, "gateway-article", 260)


class Client:
    """Minimal signing client wrapper around the test transport."""

    def __init__(self, http: TestClient, creds: dict):
        self.http = http
        self.address = bytes.fromhex(creds["address"])
        self.keys = KeyPair(
            public_key=bytes.fromhex(creds["public_key"]),
            private_key=bytes.fromhex(creds["private_key"]),
        )

    def get(self, path: str):
        return self.http.get(path, headers=sign_headers(self.keys, self.address, "GET", path, b""))

    def post(self, path: str, payload: dict):
        body = json.dumps(payload).encode()
        headers = sign_headers(self.keys, self.address, "POST", path, body)
        return self.http.post(path, content=body, headers=headers)


@pytest.fixture
def gateway(tmp_path):
    config = NodeConfig(data_dir=str(tmp_path / "node"), genesis_seed=TEST_GENESIS_SEED)
    engine = ReviewEngine(config)
    engine.ensure_group("g1")
    http = TestClient(create_app(engine), raise_server_exceptions=False)
    return engine, http


def register(http, name, role="scholar", groups=("g1",)) -> Client:
    response = http.post(
        "/api/v1/users", json={"name": name, "role": role, "groups": list(groups)}
    )
    assert response.status_code == 201, response.text
    return Client(http, response.json())


def test_health_reports_height_and_root(gateway):
    engine, http = gateway
    body = http.get("/api/v1/healthz").json()
    assert body["status"] == "ok"
    assert body["height"] == engine.ledger.height
    assert body["state_root"] == engine.ledger.state_root().hex()


def test_registration_returns_credentials_once(gateway):
    _, http = gateway
    response = http.post(
        "/api/v1/users", json={"name": "alice", "role": "scholar", "groups": ["g1"]}
    )
    body = response.json()
    assert response.status_code == 201
    assert set(body) >= {"address", "public_key", "private_key", "name", "balance"}
    assert body["balance"] > 0
    info = http.get(f"/api/v1/users/{body['address']}").json()
    assert info["name"] == "alice"
    assert "private_key" not in info and "public_key" not in json.dumps(info)


def test_full_review_flow_over_http(gateway):
    _, http = gateway
    alice = register(http, "alice")
    bob = register(http, "bob", role="expert")
    carol = register(http, "carol", role="expert")

    created = alice.post(
        "/api/v1/articles", {"text": ARTICLE_TEXT, "group": "g1", "article_id": "art-h1"}
    )
    assert created.status_code == 201
    assert created.json()["state_flag"] == 0

    listed = bob.get("/api/v1/articles").json()["articles"]
    assert [a["article_id"] for a in listed] == ["art-h1"]

    started = alice.post(
        "/api/v1/articles/art-h1/review",
        {"expert_quorum": 2, "participation_ratio": "1/2"},
    )
    assert started.json()["state_flag"] == 1

    assert bob.post("/api/v1/articles/art-h1/endorsements", {"verdict": "favorable"}).json()[
        "state_flag"
    ] == 1
    final = carol.post("/api/v1/articles/art-h1/endorsements", {"verdict": "favorable"}).json()
    assert final["state_flag"] == 2

    detail = bob.get("/api/v1/articles/art-h1").json()
    assert detail["access"] == "full"
    assert detail["text"] == ARTICLE_TEXT

    comment = bob.post(
        "/api/v1/articles/art-h1/comments", {"kind": "comment", "body": "Replicates cleanly."}
    )
    assert comment.status_code == 201
    assert alice.get("/api/v1/articles/art-h1").json()["comments"][0]["body"] == "Replicates cleanly."

    modified = alice.post(
        "/api/v1/articles/art-h1/versions",
        {"text": ARTICLE_TEXT + " A new closing remark appears in this revision."},
    )
    assert modified.json()["version"] == 2
    assert len(modified.json()["modification_log"]) == 1


def test_policy_denial_mirrored_as_403(gateway):
    _, http = gateway
    alice = register(http, "alice")
    outsider = register(http, "mallory", groups=())
    alice.post("/api/v1/articles", {"text": ARTICLE_TEXT, "group": "g1", "article_id": "art-p"})
    denied = outsider.get("/api/v1/articles/art-p")
    assert denied.status_code == 403
    assert denied.json()["code"] == "not_authorized"
    assert outsider.get("/api/v1/articles").json()["articles"] == []


def test_auth_failure_codes_are_distinct(gateway):
    _, http = gateway
    alice = register(http, "alice")

    none = http.get("/api/v1/articles")
    assert (none.status_code, none.json()["code"]) == (401, "missing_auth_headers")

    headers = sign_headers(alice.keys, alice.address, "GET", "/api/v1/articles", b"")
    headers["X-BR-Identity"] = "00" * 20
    unknown = http.get("/api/v1/articles", headers=headers)
    assert (unknown.status_code, unknown.json()["code"]) == (401, "unknown_identity")

    stale = sign_headers(
        alice.keys, alice.address, "GET", "/api/v1/articles", b"",
        timestamp=int(time.time()) - 600,
    )
    stale_resp = http.get("/api/v1/articles", headers=stale)
    assert (stale_resp.status_code, stale_resp.json()["code"]) == (401, "stale_timestamp")

    body = json.dumps({"text": "x", "group": "g1"}).encode()
    headers = sign_headers(alice.keys, alice.address, "POST", "/api/v1/articles", b"other-bytes")
    forged = http.post("/api/v1/articles", content=body, headers=headers)
    assert (forged.status_code, forged.json()["code"]) == (401, "invalid_request_signature")


def test_replayed_mutation_rejected(gateway):
    _, http = gateway
    alice = register(http, "alice")
    body = json.dumps({"text": ARTICLE_TEXT, "group": "g1", "article_id": "art-r"}).encode()
    headers = sign_headers(alice.keys, alice.address, "POST", "/api/v1/articles", body)
    first = http.post("/api/v1/articles", content=body, headers=headers)
    replay = http.post("/api/v1/articles", content=body, headers=headers)
    assert first.status_code == 201
    assert (replay.status_code, replay.json()["code"]) == (401, "replayed_request")


def test_chain_endpoints_expose_blocks_and_verification(gateway):
    engine, http = gateway
    alice = register(http, "alice")
    alice.post("/api/v1/articles", {"text": ARTICLE_TEXT, "group": "g1", "article_id": "art-c"})
    height = http.get("/api/v1/chain/height").json()["height"]
    assert height == engine.ledger.height
    genesis = http.get("/api/v1/chain/blocks/0").json()
    assert genesis["prev_hash"] == "00" * 32
    last = http.get(f"/api/v1/chain/blocks/{height - 1}").json()
    assert last["transactions"] and last["receipts"][0]["status"] == "success"
    assert http.get("/api/v1/chain/blocks/99").status_code == 404
    verify = http.get("/api/v1/chain/verify").json()
    assert verify["ok"] and verify["height"] == height


def test_every_api_mutation_is_one_ledger_transaction(gateway):
    engine, http = gateway
    height0 = engine.ledger.height
    alice = register(http, "alice")  # register + grant + set_name + add_member
    assert engine.ledger.height == height0 + 4
    h1 = engine.ledger.height
    alice.post("/api/v1/articles", {"text": ARTICLE_TEXT, "group": "g1", "article_id": "a"})
    assert engine.ledger.height == h1 + 2  # upload_file + record_summary
    h2 = engine.ledger.height
    alice.post("/api/v1/articles/a/review", {"expert_quorum": 1, "participation_ratio": "1/1"})
    assert engine.ledger.height == h2 + 1


def test_decrypt_endpoint_rate_limited(tmp_path):
    config = NodeConfig(
        data_dir=str(tmp_path / "node"),
        genesis_seed=TEST_GENESIS_SEED,
        decrypt_reads_per_minute=3,
    )
    engine = ReviewEngine(config)
    engine.ensure_group("g1")
    http = TestClient(create_app(engine), raise_server_exceptions=False)
    alice = register(http, "alice")
    alice.post("/api/v1/articles", {"text": ARTICLE_TEXT, "group": "g1", "article_id": "art-rl"})
    for _ in range(3):
        assert alice.get("/api/v1/articles/art-rl").status_code == 200
    throttled = alice.get("/api/v1/articles/art-rl")
    assert throttled.status_code == 429
    assert throttled.json()["code"] == "rate_limited"
    # Other routes keep working: the budget only covers server-side decrypts.
    assert alice.get("/api/v1/articles").status_code == 200


def test_startup_refused_over_tampered_chain(tmp_path):
    config = NodeConfig(data_dir=str(tmp_path / "node"), genesis_seed=TEST_GENESIS_SEED)
    engine = ReviewEngine(config)
    engine.register_user("alice", seed=bytes(31) + b"\x09")
    chain_path = tmp_path / "node" / "chain.log"
    raw = bytearray(chain_path.read_bytes())
    raw[-25] ^= 0xFF
    chain_path.write_bytes(bytes(raw))
    with pytest.raises(ChainCorruption) as exc:
        ReviewEngine(config)
    assert exc.value.block_index is not None
