"""HTTP JSON API over the review engine.

Resource-oriented endpoints under ``/api/v1``. Every mutating endpoint and
every per-identity read requires the signed-request headers; chain inspection
and health are public reads. Error bodies are ``{code, message, detail}``.

Registration is the single unsigned mutation: it generates the caller's key
pair, registers it on chain, and returns the credentials exactly once so the
client can sign all subsequent requests. No other response ever carries
private key material.
"""
from __future__ import annotations

import json
import time

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import contract as ct
from ..engine import ArticleView, ReviewEngine
from ..errors import (
    AuthenticationError,
    AuthorizationError,
    ChainReviewError,
    ContractError,
    DuplicateAccount,
    NotFoundError,
    RateLimited,
    TamperAlarm,
)
from .auth import Authenticator, RateLimiter

API_PREFIX = "/api/v1"

_STATUS_FOR = (
    (AuthenticationError, 401),
    (AuthorizationError, 403),
    (NotFoundError, 404),
    (DuplicateAccount, 409),
    (RateLimited, 429),
    (TamperAlarm, 500),
    (ContractError, 400),
    (ChainReviewError, 400),
)


def _status_for(exc: ChainReviewError) -> int:
    for cls, status in _STATUS_FOR:
        if isinstance(exc, cls):
            return status
    return 400


def _error_response(exc: ChainReviewError) -> JSONResponse:
    return JSONResponse(
        status_code=_status_for(exc),
        content={"code": exc.code, "message": str(exc), "detail": type(exc).__name__},
    )


def _endorsement_rows(view: ArticleView) -> list[dict]:
    return [
        {"expert": addr.hex(), "verdict": "favorable" if fav else "unfavorable"}
        for addr, fav in sorted(view.endorsements.items())
    ]


def _view_json(view: ArticleView) -> dict:
    return {
        "article_id": view.article_id,
        "group": view.group_id,
        "uploader": view.uploader.hex(),
        "state_flag": view.state_flag,
        "version": view.version,
        "access": view.access,
        "plaintext_digest": view.plaintext_digest.hex(),
        "abstract_digest": view.abstract_digest.hex(),
        "abstract": view.abstract_text,
        "text": view.text,
        "thresholds": (
            None
            if view.thresholds is None
            else {
                "expert_quorum": view.thresholds.expert_quorum,
                "participation_ratio": f"{view.thresholds.ratio_num}/{view.thresholds.ratio_den}",
            }
        ),
        "endorsements": _endorsement_rows(view),
        "eligible_experts": view.eligible_experts,
        "modification_log": [
            {
                "modifier": entry.modifier.hex(),
                "time": entry.time,
                "article_id": entry.article_id,
                "new_digest": entry.new_digest.hex(),
                "new_abstract_digest": entry.new_abstract_digest.hex(),
            }
            for entry in view.modification_log
        ],
        "summary_records": [
            {
                "digest": record.digest.hex(),
                "generator": record.generator_id,
                "validators": list(record.validator_ids),
                "time": record.time,
            }
            for record in view.summary_records
        ],
        "interaction_count": len(view.interactions),
    }


def _block_json(engine: ReviewEngine, index: int) -> dict:
    block = engine.ledger.read_block(index)
    receipts = engine.ledger.block_receipts(index)
    return {
        "index": block.index,
        "block_hash": block.block_hash.hex(),
        "prev_hash": block.prev_hash.hex(),
        "state_root": block.state_root.hex(),
        "transactions": [
            {
                "tx_hash": tx.tx_hash.hex(),
                "sender": tx.sender.hex(),
                "nonce": tx.nonce,
                "kind": tx.payload.KIND,
                "gas_fee": tx.gas_fee,
                "timestamp": tx.timestamp,
            }
            for tx in block.tx_list
        ],
        "receipts": [
            {"status": r.status, "gas_charged": r.gas_charged, "error": r.error}
            for r in receipts
        ],
    }


def _parse_ratio(raw: str) -> tuple[int, int]:
    try:
        num, den = raw.split("/")
        return int(num), int(den)
    except (ValueError, AttributeError) as exc:
        raise ChainReviewError(f"participation_ratio must look like 1/2, got {raw!r}") from exc


async def _json_body(request: Request) -> tuple[dict, bytes]:
    body = await request.body()
    if not body:
        return {}, body
    try:
        return json.loads(body), body
    except json.JSONDecodeError as exc:
        raise ChainReviewError(f"request body is not valid JSON: {exc}") from exc


def create_app(engine: ReviewEngine, now=time.time) -> FastAPI:
    app = FastAPI(title="chainreview gateway", docs_url=None, redoc_url=None)

    authenticator = Authenticator(
        public_key_for=lambda addr: (
            engine.ledger.accounts[addr].public_key if addr in engine.ledger.accounts else None
        ),
        window_seconds=engine.config.auth_window_seconds,
        now=now,
    )
    # The article-detail route decrypts server-side as a UI convenience, so
    # it gets a per-identity budget on top of authentication.
    decrypt_limiter = RateLimiter(engine.config.decrypt_reads_per_minute, now=now)
    app.state.engine = engine
    app.state.authenticator = authenticator
    app.state.decrypt_limiter = decrypt_limiter

    @app.exception_handler(ChainReviewError)
    async def _handle_domain_error(_request, exc: ChainReviewError):
        return _error_response(exc)

    async def _authenticated(request: Request) -> tuple[bytes, dict, bytes]:
        payload, body = await _json_body(request)
        caller = authenticator.authenticate(
            request.method, request.url.path, request.headers, body
        )
        return caller, payload, body

    def _creds(caller: bytes):
        return engine.credentials_for(caller)

    # -- public reads --

    @app.get(API_PREFIX + "/healthz")
    async def healthz():
        return {
            "status": "ok",
            "height": engine.ledger.height,
            "state_root": engine.ledger.state_root().hex(),
        }

    @app.get(API_PREFIX + "/chain/height")
    async def chain_height():
        return {"height": engine.ledger.height}

    @app.get(API_PREFIX + "/chain/blocks/{index}")
    async def chain_block(index: int):
        return _block_json(engine, index)

    @app.get(API_PREFIX + "/chain/verify")
    async def chain_verify():
        result = engine.ledger.verify_chain()
        return {
            "ok": result.ok,
            "height": result.height,
            "broken_at": result.broken_at,
            "reason": result.reason,
        }

    @app.get(API_PREFIX + "/users/{address}")
    async def user_info(address: str):
        try:
            addr = bytes.fromhex(address)
        except ValueError as exc:
            raise ChainReviewError(f"malformed address: {address!r}") from exc
        account = engine.ledger.read_account(addr)
        entry = engine.contract.users.get(addr)
        if entry is None:
            raise NotFoundError(f"no user registered at {address}")
        return {
            "address": address,
            "name": entry.display_name,
            "role": entry.role,
            "groups": sorted(entry.groups),
            "balance": account.balance,
            "granted": addr in engine.ledger.granted,
        }

    # -- registration (the only unsigned mutation) --

    @app.post(API_PREFIX + "/users", status_code=201)
    async def register(request: Request):
        payload, _ = await _json_body(request)
        name = payload.get("name", "")
        role = payload.get("role", ct.ROLE_SCHOLAR)
        groups = tuple(payload.get("groups", ()))
        creds = engine.register_user(name, role=role, groups=groups)
        return {
            "address": creds.address.hex(),
            "public_key": creds.key_pair.public_key.hex(),
            "private_key": creds.key_pair.private_key.hex(),
            "name": creds.name,
            "role": creds.role,
            "groups": sorted(groups),
            "balance": engine.ledger.read_account(creds.address).balance,
        }

    # -- signed article routes --

    @app.get(API_PREFIX + "/articles")
    async def list_articles(request: Request):
        caller, _, _ = await _authenticated(request)
        views = engine.list_visible(_creds(caller))
        return {
            "articles": [
                {
                    "article_id": v.article_id,
                    "group": v.group_id,
                    "state_flag": v.state_flag,
                    "version": v.version,
                    "access": v.access,
                    "uploader": v.uploader.hex(),
                }
                for v in views
            ]
        }

    @app.post(API_PREFIX + "/articles", status_code=201)
    async def submit_article(request: Request):
        caller, payload, _ = await _authenticated(request)
        creds = _creds(caller)
        text = payload.get("text", "")
        group = payload.get("group", "")
        article_id = payload.get("article_id") or "art-" + engine.ledger.state_root().hex()[:12]
        engine.submit_article(creds, text, group, article_id)
        return _view_json(engine.read_article(creds, article_id))

    @app.get(API_PREFIX + "/articles/{article_id}")
    async def article_detail(article_id: str, request: Request):
        caller, _, _ = await _authenticated(request)
        if not decrypt_limiter.allow(caller):
            raise RateLimited(
                f"server-side decrypt budget exhausted "
                f"({engine.config.decrypt_reads_per_minute}/min); retry later"
            )
        creds = _creds(caller)
        view = engine.read_article(creds, article_id)
        body = _view_json(view)
        if view.access in (ct.ACCESS_FULL, ct.ACCESS_ABSTRACT):
            body["comments"] = [
                {
                    "comment_id": c.comment_id,
                    "author": c.author.hex(),
                    "author_name": c.author_name,
                    "kind": c.kind,
                    "body": c.body,
                    "digest": c.chain_digest.hex(),
                }
                for c in engine.list_comments(creds, article_id)
            ]
        else:
            body["comments"] = []
        return body

    @app.post(API_PREFIX + "/articles/{article_id}/review")
    async def start_review(article_id: str, request: Request):
        caller, payload, _ = await _authenticated(request)
        num, den = _parse_ratio(payload.get("participation_ratio", "1/2"))
        thresholds = ct.ThresholdConfig(
            expert_quorum=int(payload.get("expert_quorum", 2)),
            ratio_num=num,
            ratio_den=den,
        )
        view = engine.run_review(_creds(caller), article_id, thresholds)
        return _view_json(view)

    @app.post(API_PREFIX + "/articles/{article_id}/endorsements")
    async def endorse(article_id: str, request: Request):
        caller, payload, _ = await _authenticated(request)
        view = engine.cast_endorsement(_creds(caller), article_id, payload.get("verdict", ""))
        return _view_json(view)

    @app.post(API_PREFIX + "/articles/{article_id}/comments", status_code=201)
    async def comment(article_id: str, request: Request):
        caller, payload, _ = await _authenticated(request)
        creds = _creds(caller)
        comment_id = engine.post_comment(
            creds, article_id, payload.get("kind", ct.KIND_COMMENT), payload.get("body", "")
        )
        return {
            "comment_id": comment_id,
            "article_id": article_id,
            "digest": engine.contract.file(article_id).interactions[-1].digest.hex(),
        }

    @app.post(API_PREFIX + "/articles/{article_id}/versions", status_code=201)
    async def modify(article_id: str, request: Request):
        caller, payload, _ = await _authenticated(request)
        creds = _creds(caller)
        engine.modify_article(creds, article_id, payload.get("text", ""))
        return _view_json(engine.read_article(creds, article_id))

    return app


def serve(config, host: str | None = None, port: int | None = None) -> None:
    """Start a node: load or initialize the chain (refusing to start over a
    corrupt one), then serve the API."""
    import uvicorn

    engine = ReviewEngine(config)
    app = create_app(engine)
    uvicorn.run(app, host=host or config.listen_host, port=port or config.listen_port)
