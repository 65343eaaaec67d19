"""Pipeline orchestration: registration, submission, review, reading,
modification, and comments, binding the crypto suite, ledger, contract,
filestore, and summary consensus behind one policy gate.

Ordering discipline for multi-step pipelines: everything fallible runs first
(consensus, encryption, policy prechecks), blobs are staged next, and chain
records land last. The ledger cannot roll back, so a failure mid-pipeline
discards staged blobs and leaves the chain untouched.

Key custody: this node generates and holds user key pairs (credentials are
returned once at registration so clients can sign requests); article keys are
derived per article from the node secret, wrapped to the uploader and to the
authority group key on chain, and recovered by unwrapping, never stored raw.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import contract as ct
from .config import NodeConfig
from .crypto import (
    KeyPair,
    WrappedKey,
    asym_decrypt,
    asym_encrypt,
    generate_keypair,
    hmac_sm3,
    sm3_digest,
    sym_decrypt,
    sym_encrypt,
    unwrap_key,
)
from .crypto import sm2
from .errors import (
    AuthorizationError,
    ChainReviewError,
    DecryptionError,
    DuplicateAccount,
    NotFoundError,
    TamperAlarm,
)
from .filestore import FileStore, make_comment_record
from .ledger import Ledger, Receipt
from .summary import ModelPool, consensus_summarize, default_pool

CHAIN_FILE = "chain.log"
CREDENTIALS_FILE = "credentials.json"
FILESTORE_DIR = "filestore"


@dataclass(frozen=True)
class Credentials:
    address: bytes
    key_pair: KeyPair
    name: str
    role: str
    granted: bool = True


@dataclass(frozen=True)
class ArticleView:
    article_id: str
    group_id: str
    uploader: bytes
    state_flag: int
    version: int
    access: str
    plaintext_digest: bytes
    abstract_digest: bytes
    abstract_text: str | None = None
    text: str | None = None
    thresholds: ct.ThresholdConfig | None = None
    endorsements: dict[bytes, bool] = field(default_factory=dict)
    eligible_experts: int = 0
    modification_log: tuple[ct.ModificationEntry, ...] = ()
    summary_records: tuple[ct.SummaryRecord, ...] = ()
    interactions: tuple[ct.InteractionRecord, ...] = ()


@dataclass(frozen=True)
class CommentView:
    comment_id: str
    author: bytes
    author_name: str
    kind: str
    body: str
    chain_digest: bytes


class ReviewEngine:
    """A single platform node. All chain mutation goes through the ledger's
    serialized writer; per-article pipelines are ordered by per-article locks
    so versions never race."""

    def __init__(self, config: NodeConfig, ledger: Ledger | None = None):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        chain_path = self.data_dir / CHAIN_FILE
        if ledger is not None:
            self.ledger = ledger
        elif chain_path.exists():
            self.ledger = Ledger.load(chain_path, config.ledger_config())
        else:
            self.ledger = Ledger(config.ledger_config(), persist_path=chain_path)
        self.filestore = FileStore(self.data_dir / FILESTORE_DIR)
        self.pool: ModelPool = default_pool(config.pool_seed, config.verifier)
        self.credentials: dict[bytes, Credentials] = {}
        self._names: dict[str, bytes] = {}
        self._node_secret = sm3_digest(config.genesis_seed + b"node-secret")
        self._article_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._admin_lock = threading.Lock()
        self._load_credentials()

    # -- plumbing --

    @property
    def contract(self) -> ct.ContractState:
        return self.ledger.contract

    @property
    def admin_address(self) -> bytes:
        return self.ledger.distributor_address

    def _article_lock(self, article_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._article_locks.get(article_id)
            if lock is None:
                lock = self._article_locks[article_id] = threading.Lock()
            return lock

    def _submit_strict(self, keys: KeyPair, payload) -> Receipt:
        receipt = self.ledger.submit_payload(keys, payload)
        if not receipt.ok:
            raise ChainReviewError(receipt.error or f"{payload.KIND} rejected")
        return receipt

    def _derive_scalar(self, context: bytes) -> int:
        return sm2.derive_private_key(hmac_sm3(self._node_secret, context))

    def _article_key(self, article_id: str) -> bytes:
        # Stable across versions so earlier blobs stay readable; update
        # transactions re-wrap the same key.
        return hmac_sm3(self._node_secret, b"article-key/" + article_id.encode())[:16]

    @staticmethod
    def _nonce(domain: str, article_id: str, version: int) -> bytes:
        return sm3_digest(f"cr/{domain}/{article_id}/{version}".encode())[:12]

    def _wrap_for(self, public_key: bytes, key: bytes, context: bytes) -> bytes:
        k = self._derive_scalar(b"wrap/" + context)
        return asym_encrypt(public_key, key, k=k)

    def _consensus_seed(self, article_id: str, version: int) -> int:
        raw = hmac_sm3(self._node_secret, f"pool/{article_id}/{version}".encode())
        return int.from_bytes(raw[:8], "big")

    # -- credentials persistence --

    def _credentials_path(self) -> Path:
        return self.data_dir / CREDENTIALS_FILE

    def _load_credentials(self) -> None:
        path = self._credentials_path()
        if not path.exists():
            return
        for raw in json.loads(path.read_text(encoding="utf-8")):
            creds = Credentials(
                address=bytes.fromhex(raw["address"]),
                key_pair=KeyPair(
                    public_key=bytes.fromhex(raw["public_key"]),
                    private_key=bytes.fromhex(raw["private_key"]),
                ),
                name=raw["name"],
                role=raw["role"],
                granted=raw.get("granted", True),
            )
            self.credentials[creds.address] = creds
            self._names[creds.name] = creds.address

    def _save_credentials(self) -> None:
        rows = [
            {
                "address": creds.address.hex(),
                "public_key": creds.key_pair.public_key.hex(),
                "private_key": creds.key_pair.private_key.hex(),
                "name": creds.name,
                "role": creds.role,
                "granted": creds.granted,
            }
            for creds in self.credentials.values()
        ]
        self._credentials_path().write_text(json.dumps(rows, indent=1), encoding="utf-8")

    def credentials_for(self, address: bytes) -> Credentials:
        creds = self.credentials.get(address)
        if creds is None:
            raise NotFoundError(f"no credentials for {address.hex()}")
        return creds

    def credentials_by_name(self, name: str) -> Credentials:
        address = self._names.get(name)
        if address is None:
            raise NotFoundError(f"no user named {name!r}")
        return self.credentials[address]

    # -- group administration --

    def group_keypair(self, group_id: str) -> KeyPair:
        return generate_keypair(
            seed=sm3_digest(self.config.genesis_seed + b"group/" + group_id.encode())
        )

    def ensure_group(self, group_id: str) -> None:
        # Serialized so concurrent registrations into a fresh group cannot
        # race a second creation onto the chain as a failed transaction.
        with self._admin_lock:
            if group_id in self.contract.groups:
                return
            group_keys = self.group_keypair(group_id)
            self._submit_strict(
                self.ledger.distributor_keys,
                ct.CreateGroup(group_id=group_id, public_key=group_keys.public_key),
            )

    def add_member(self, group_id: str, creds: Credentials, expert: bool) -> None:
        self.ensure_group(group_id)
        group_priv = self.group_keypair(group_id).private_key
        wrapped = self._wrap_for(
            creds.key_pair.public_key,
            group_priv,
            b"group-key/" + group_id.encode() + b"/" + creds.address,
        )
        self._submit_strict(
            self.ledger.distributor_keys,
            ct.AddMember(
                group_id=group_id,
                member=creds.address,
                expert=expert,
                wrapped_group_key=wrapped,
            ),
        )

    # -- user pipeline --

    def register_user(
        self,
        name: str,
        role: str = ct.ROLE_SCHOLAR,
        groups: tuple[str, ...] = (),
        seed: bytes | None = None,
    ) -> Credentials:
        """Key generation, account registration, the ether grant, the alias
        transaction, and group memberships, in that order."""
        if name in self._names:
            raise DuplicateAccount(f"user name already registered: {name!r}")
        keys = generate_keypair(seed=seed)
        self.ledger.register_account(keys, role=role)
        self.ledger.grant_ether(keys.address)
        self._submit_strict(keys, ct.SetName(name=name))
        creds = Credentials(address=keys.address, key_pair=keys, name=name, role=role)
        self.credentials[creds.address] = creds
        self._names[name] = creds.address
        for group_id in groups:
            self.add_member(group_id, creds, expert=(role == ct.ROLE_EXPERT))
        self._save_credentials()
        return creds

    # -- article pipelines --

    def submit_article(
        self,
        creds: Credentials,
        plaintext: str,
        group_id: str,
        article_id: str,
    ) -> str:
        """Abstract consensus, digest recording, envelope encryption, blob
        storage, and the upload + summary provenance transactions. A failed
        step leaves no chain records and no blobs."""
        if not plaintext:
            raise ChainReviewError("cannot submit an empty article")

        with self._article_lock(article_id):
            # Prechecks run under the article lock so a same-id race cannot
            # reach the chain as a failed transaction.
            group = self.contract.group(group_id)
            if creds.address not in group.members:
                raise AuthorizationError(f"{creds.name} is not a member of {group_id}")
            if article_id in self.contract.files:
                raise ChainReviewError(f"duplicate article id: {article_id}")
            trusted = consensus_summarize(
                self.pool,
                plaintext,
                max_attempts=self.config.max_summary_attempts,
                seed=self._consensus_seed(article_id, 1),
            )
            plaintext_bytes = plaintext.encode("utf-8")
            plaintext_digest = sm3_digest(plaintext_bytes)
            key = self._article_key(article_id)
            nonce = self._nonce("article", article_id, 1)
            abstract_nonce = self._nonce("abstract", article_id, 1)
            ciphertext = sym_encrypt(key, plaintext_bytes, nonce)
            abstract_ct = sym_encrypt(key, trusted.summary.encode("utf-8"), abstract_nonce)
            wrapped_keys = (
                (creds.address, self._wrap_for(
                    creds.key_pair.public_key, key,
                    f"article/{article_id}/1/uploader".encode())),
                (group.key_address, self._wrap_for(
                    group.public_key, key,
                    f"article/{article_id}/1/group".encode())),
            )

            self.filestore.put_blob(article_id, 1, nonce, ciphertext)
            self.filestore.put_abstract(article_id, 1, abstract_nonce, abstract_ct)
            try:
                self._submit_strict(
                    creds.key_pair,
                    ct.UploadFile(
                        article_id=article_id,
                        plaintext_digest=plaintext_digest,
                        abstract_digest=trusted.digest,
                        group_id=group_id,
                        wrapped_keys=wrapped_keys,
                    ),
                )
                self._submit_strict(
                    creds.key_pair,
                    ct.RecordSummary(
                        article_id=article_id,
                        summary_digest=trusted.digest,
                        generator_id=trusted.provenance.generator_id,
                        validator_ids=trusted.provenance.validator_ids,
                    ),
                )
            except ChainReviewError:
                self.filestore.discard_version(article_id, 1)
                raise
        return article_id

    def run_review(
        self, creds: Credentials, article_id: str, thresholds: ct.ThresholdConfig
    ) -> ArticleView:
        self._submit_strict(
            creds.key_pair, ct.StartReview(article_id=article_id, thresholds=thresholds)
        )
        return self.read_article(creds, article_id)

    def cast_endorsement(self, creds: Credentials, article_id: str, verdict: str) -> ArticleView:
        if verdict not in (ct.VERDICT_FAVORABLE, ct.VERDICT_UNFAVORABLE):
            raise ChainReviewError(f"unknown verdict: {verdict!r}")
        self._submit_strict(
            creds.key_pair,
            ct.Endorse(article_id=article_id, favorable=verdict == ct.VERDICT_FAVORABLE),
        )
        return self.read_article(creds, article_id)

    # -- key recovery --

    def _recover_article_key(self, creds: Credentials, entry: ct.FileEntry) -> bytes:
        own = entry.wrapped_keys.get(creds.address)
        if own is not None:
            return unwrap_key(
                creds.key_pair.private_key, WrappedKey(ciphertext=own, recipient=creds.address)
            )
        group = self.contract.group(entry.group_id)
        member_copy = group.member_wrapped_keys.get(creds.address)
        if member_copy is None:
            raise AuthorizationError(
                f"{creds.name} holds no key path to article {entry.article_id}"
            )
        group_priv = asym_decrypt(creds.key_pair.private_key, member_copy)
        group_wrap = entry.wrapped_keys.get(group.key_address)
        if group_wrap is None:
            raise NotFoundError("article is missing its group-wrapped key")
        return asym_decrypt(group_priv, group_wrap)

    def _decrypt_abstract(self, creds: Credentials, entry: ct.FileEntry) -> str:
        key = self._recover_article_key(creds, entry)
        blob = self.filestore.get_abstract(entry.article_id, entry.version)
        try:
            raw = sym_decrypt(key, blob.ciphertext, blob.nonce)
        except DecryptionError as exc:
            raise TamperAlarm(
                f"abstract blob for {entry.article_id} v{entry.version} fails decryption: {exc}"
            ) from exc
        if sm3_digest(raw) != entry.abstract_digest:
            raise TamperAlarm(
                f"abstract for {entry.article_id} v{entry.version} does not match its on-chain digest"
            )
        return raw.decode("utf-8")

    # -- reading --

    def read_article(self, creds: Credentials, article_id: str) -> ArticleView:
        """Policy-gated view: full text for entitled callers (decrypted and
        digest-checked against the chain), abstract-only during review,
        metadata otherwise. Integrity failures raise TamperAlarm, never
        return silently wrong content."""
        view = self.contract.get_file(creds.address, article_id)
        entry = self.contract.file(article_id)
        abstract_text = None
        text = None
        if view.access in (ct.ACCESS_FULL, ct.ACCESS_ABSTRACT):
            abstract_text = self._decrypt_abstract(creds, entry)
        if view.access == ct.ACCESS_FULL:
            key = self._recover_article_key(creds, entry)
            blob = self.filestore.get_blob(article_id, entry.version)
            try:
                raw = sym_decrypt(key, blob.ciphertext, blob.nonce)
            except DecryptionError as exc:
                raise TamperAlarm(
                    f"stored blob for {article_id} v{entry.version} fails decryption: {exc}"
                ) from exc
            if sm3_digest(raw) != entry.plaintext_digest:
                raise TamperAlarm(
                    f"{article_id} v{entry.version} does not match its on-chain digest"
                )
            text = raw.decode("utf-8")
        return ArticleView(
            article_id=view.article_id,
            group_id=view.group_id,
            uploader=view.uploader,
            state_flag=view.state_flag,
            version=view.version,
            access=view.access,
            plaintext_digest=view.plaintext_digest,
            abstract_digest=view.abstract_digest,
            abstract_text=abstract_text,
            text=text,
            thresholds=view.thresholds,
            endorsements=view.endorsements,
            eligible_experts=len(view.eligible_experts or ()),
            modification_log=view.modification_log,
            summary_records=view.summary_records,
            interactions=view.interactions,
        )

    def list_visible(self, creds: Credentials) -> list[ArticleView]:
        views = []
        for article_id in sorted(self.contract.files):
            entry = self.contract.files[article_id]
            access = self.contract.access_level(creds.address, entry)
            if access == ct.ACCESS_NONE:
                continue
            views.append(
                ArticleView(
                    article_id=entry.article_id,
                    group_id=entry.group_id,
                    uploader=entry.uploader,
                    state_flag=entry.state_flag,
                    version=entry.version,
                    access=access,
                    plaintext_digest=entry.plaintext_digest,
                    abstract_digest=entry.abstract_digest,
                    endorsements=dict(entry.endorsements),
                    eligible_experts=len(entry.eligible_experts or ()),
                )
            )
        return views

    # -- modification pipeline --

    def modify_article(self, creds: Credentials, article_id: str, new_plaintext: str) -> int:
        """New blob under a fresh nonce, regenerated abstract via consensus,
        then the modification record (modifier, time, article, new digests)
        and summary provenance on chain. Same atomicity contract as submit."""
        if not new_plaintext:
            raise ChainReviewError("cannot store an empty modification")
        entry = self.contract.file(article_id)
        if self.contract.access_level(creds.address, entry) != ct.ACCESS_FULL:
            raise AuthorizationError(f"{creds.name} lacks full-text access to {article_id}")

        with self._article_lock(article_id):
            entry = self.contract.file(article_id)
            key = self._recover_article_key(creds, entry)
            new_version = entry.version + 1
            trusted = consensus_summarize(
                self.pool,
                new_plaintext,
                max_attempts=self.config.max_summary_attempts,
                seed=self._consensus_seed(article_id, new_version),
            )
            plaintext_bytes = new_plaintext.encode("utf-8")
            new_digest = sm3_digest(plaintext_bytes)
            nonce = self._nonce("article", article_id, new_version)
            abstract_nonce = self._nonce("abstract", article_id, new_version)
            ciphertext = sym_encrypt(key, plaintext_bytes, nonce)
            abstract_ct = sym_encrypt(key, trusted.summary.encode("utf-8"), abstract_nonce)
            group = self.contract.group(entry.group_id)
            uploader_creds = self.credentials.get(entry.uploader)
            uploader_pub = (
                uploader_creds.key_pair.public_key
                if uploader_creds
                else self.ledger.read_account(entry.uploader).public_key
            )
            wrapped_keys = (
                (entry.uploader, self._wrap_for(
                    uploader_pub, key,
                    f"article/{article_id}/{new_version}/uploader".encode())),
                (group.key_address, self._wrap_for(
                    group.public_key, key,
                    f"article/{article_id}/{new_version}/group".encode())),
            )

            self.filestore.put_blob(article_id, new_version, nonce, ciphertext)
            self.filestore.put_abstract(article_id, new_version, abstract_nonce, abstract_ct)
            try:
                self._submit_strict(
                    creds.key_pair,
                    ct.UpdateFile(
                        article_id=article_id,
                        new_digest=new_digest,
                        new_abstract_digest=trusted.digest,
                        new_wrapped_keys=wrapped_keys,
                    ),
                )
                self._submit_strict(
                    creds.key_pair,
                    ct.RecordSummary(
                        article_id=article_id,
                        summary_digest=trusted.digest,
                        generator_id=trusted.provenance.generator_id,
                        validator_ids=trusted.provenance.validator_ids,
                    ),
                )
            except ChainReviewError:
                self.filestore.discard_version(article_id, new_version)
                raise
        return new_version

    # -- comments --

    def post_comment(self, creds: Credentials, article_id: str, kind: str, body: str) -> str:
        """Encrypted comment in the filestore plus an interaction-log
        transaction carrying the body's digest."""
        if kind not in ct.INTERACTION_KINDS:
            raise ChainReviewError(f"unknown interaction kind: {kind!r}")
        if not body:
            raise ChainReviewError("comment body must be non-empty")
        entry = self.contract.file(article_id)
        if self.contract.access_level(creds.address, entry) not in (
            ct.ACCESS_FULL,
            ct.ACCESS_ABSTRACT,
        ):
            raise AuthorizationError(
                f"{creds.name} may not comment on {article_id} in its current state"
            )
        with self._article_lock(article_id):
            entry = self.contract.file(article_id)
            comment_id = f"{article_id}-c{len(entry.interactions) + 1:05d}"
            digest = sm3_digest(body.encode("utf-8"))
            key = self._recover_article_key(creds, entry)
            # The digest in the nonce derivation keeps nonces distinct even
            # if a discarded comment id is ever reissued for different text.
            nonce = sm3_digest(b"cr/comment/" + comment_id.encode() + digest)[:12]
            record = make_comment_record(
                comment_id=comment_id,
                article_id=article_id,
                author=creds.address,
                kind=kind,
                body_ciphertext=sym_encrypt(key, body.encode("utf-8"), nonce),
                nonce=nonce,
                chain_digest=digest,
            )
            self.filestore.put_comment(record)
            try:
                self._submit_strict(
                    creds.key_pair,
                    ct.LogInteraction(
                        article_id=article_id, kind=kind, ref_id=comment_id, digest=digest
                    ),
                )
            except ChainReviewError:
                self.filestore.discard_comment(article_id, comment_id)
                raise
        return comment_id

    def list_comments(self, creds: Credentials, article_id: str) -> list[CommentView]:
        entry = self.contract.file(article_id)
        if self.contract.access_level(creds.address, entry) not in (
            ct.ACCESS_FULL,
            ct.ACCESS_ABSTRACT,
        ):
            raise AuthorizationError(f"{creds.name} may not read comments on {article_id}")
        key = self._recover_article_key(creds, entry)
        views = []
        for record in self.filestore.list_comments(article_id):
            try:
                body = sym_decrypt(key, record.body_ciphertext, record.nonce).decode("utf-8")
            except DecryptionError as exc:
                raise TamperAlarm(f"comment {record.comment_id} fails decryption: {exc}") from exc
            if sm3_digest(body.encode("utf-8")) != record.chain_digest:
                raise TamperAlarm(f"comment {record.comment_id} digest mismatch")
            author = self.contract.users.get(record.author)
            views.append(
                CommentView(
                    comment_id=record.comment_id,
                    author=record.author,
                    author_name=author.display_name if author else record.author.hex()[:12],
                    kind=record.kind,
                    body=body,
                    chain_digest=record.chain_digest,
                )
            )
        return views

    # -- replay --

    def replay_workload(self, spec, seed: int | None = None):
        from .workload import run_workload

        return run_workload(self, spec, seed=seed)
