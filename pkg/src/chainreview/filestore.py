"""Encrypted blob storage for article versions, abstracts, and comments.

Layout, one directory per article::

    <root>/<article_id>/
        v1.blob            article ciphertext, one file per version
        a1.blob            abstract ciphertext for the same version
        manifest.tsv       version <tab> nonce-hex <tab> length <tab> sm3-of-ciphertext
        abstracts.tsv      same columns for abstract blobs
        comments.jsonl     append-only comment records, one JSON object per line

Blobs are write-once; the manifest rows give offline audit tooling enough to
check ciphertext integrity without any key material. Wall-clock timestamps
here are advisory; authoritative ordering lives on the ledger.
"""
from __future__ import annotations

import base64
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .crypto import sm3_digest, sym_decrypt
from .errors import ChainReviewError, DecryptionError, NotFoundError

MANIFEST_NAME = "manifest.tsv"
ABSTRACTS_NAME = "abstracts.tsv"
COMMENTS_NAME = "comments.jsonl"


@dataclass(frozen=True)
class CiphertextBlob:
    article_id: str
    version: int
    nonce: bytes
    ciphertext: bytes
    stored_at: float


@dataclass(frozen=True)
class CommentRecord:
    comment_id: str
    article_id: str
    author: bytes
    kind: str
    body_ciphertext: bytes
    nonce: bytes
    chain_digest: bytes
    stored_at: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "comment_id": self.comment_id,
                "article_id": self.article_id,
                "author": self.author.hex(),
                "kind": self.kind,
                "body_ciphertext": base64.b64encode(self.body_ciphertext).decode(),
                "nonce": self.nonce.hex(),
                "chain_digest": self.chain_digest.hex(),
                "stored_at": self.stored_at,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "CommentRecord":
        raw = json.loads(line)
        return cls(
            comment_id=raw["comment_id"],
            article_id=raw["article_id"],
            author=bytes.fromhex(raw["author"]),
            kind=raw["kind"],
            body_ciphertext=base64.b64decode(raw["body_ciphertext"]),
            nonce=bytes.fromhex(raw["nonce"]),
            chain_digest=bytes.fromhex(raw["chain_digest"]),
            stored_at=raw["stored_at"],
        )


class DuplicateBlob(ChainReviewError):
    code = "duplicate_blob"


@dataclass(frozen=True)
class IntegrityReport:
    ok: bool
    failure: str | None = None  # "decryption" or "digest_mismatch"
    detail: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class FileStore:
    """Write-once blob and comment storage rooted at one directory.

    Reads are unrestricted; writes are serialized per article so version
    sequences never interleave. Re-reading returns bit-identical bytes."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, article_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(article_id)
            if lock is None:
                lock = self._locks[article_id] = threading.Lock()
            return lock

    def _article_dir(self, article_id: str) -> Path:
        return self.root / article_id

    # -- blobs --

    def _put(self, article_id: str, version: int, nonce: bytes, ciphertext: bytes,
             prefix: str, manifest: str) -> None:
        directory = self._article_dir(article_id)
        blob_path = directory / f"{prefix}{version}.blob"
        with self._lock_for(article_id):
            if blob_path.exists():
                raise DuplicateBlob(f"{article_id} {prefix}{version} already stored")
            directory.mkdir(parents=True, exist_ok=True)
            blob_path.write_bytes(ciphertext)
            row = f"{version}\t{nonce.hex()}\t{len(ciphertext)}\t{sm3_digest(ciphertext).hex()}\n"
            with open(directory / manifest, "a", encoding="ascii") as fh:
                fh.write(row)

    def _get(self, article_id: str, version: int, prefix: str, manifest: str) -> CiphertextBlob:
        directory = self._article_dir(article_id)
        blob_path = directory / f"{prefix}{version}.blob"
        manifest_path = directory / manifest
        if not blob_path.exists() or not manifest_path.exists():
            raise NotFoundError(f"no stored blob for {article_id} {prefix}{version}")
        nonce = None
        stored_at = blob_path.stat().st_mtime
        for line in manifest_path.read_text(encoding="ascii").splitlines():
            fields = line.split("\t")
            if fields and fields[0] == str(version):
                nonce = bytes.fromhex(fields[1])
        if nonce is None:
            raise NotFoundError(f"manifest row missing for {article_id} {prefix}{version}")
        return CiphertextBlob(
            article_id=article_id,
            version=version,
            nonce=nonce,
            ciphertext=blob_path.read_bytes(),
            stored_at=stored_at,
        )

    def put_blob(self, article_id: str, version: int, nonce: bytes, ciphertext: bytes) -> None:
        self._put(article_id, version, nonce, ciphertext, "v", MANIFEST_NAME)

    def get_blob(self, article_id: str, version: int) -> CiphertextBlob:
        return self._get(article_id, version, "v", MANIFEST_NAME)

    def put_abstract(self, article_id: str, version: int, nonce: bytes, ciphertext: bytes) -> None:
        self._put(article_id, version, nonce, ciphertext, "a", ABSTRACTS_NAME)

    def get_abstract(self, article_id: str, version: int) -> CiphertextBlob:
        return self._get(article_id, version, "a", ABSTRACTS_NAME)

    def has_blob(self, article_id: str, version: int) -> bool:
        return (self._article_dir(article_id) / f"v{version}.blob").exists()

    def latest_version(self, article_id: str) -> int:
        directory = self._article_dir(article_id)
        versions = [
            int(p.stem[1:]) for p in directory.glob("v*.blob")
        ] if directory.exists() else []
        if not versions:
            raise NotFoundError(f"no stored versions for {article_id}")
        return max(versions)

    def list_articles(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def discard_version(self, article_id: str, version: int) -> None:
        """Remove a staged version that never made it on chain; rewrites the
        manifest without the discarded row. Compensation for aborted
        pipelines only, never for committed data."""
        directory = self._article_dir(article_id)
        with self._lock_for(article_id):
            for prefix, manifest in (("v", MANIFEST_NAME), ("a", ABSTRACTS_NAME)):
                blob_path = directory / f"{prefix}{version}.blob"
                if blob_path.exists():
                    blob_path.unlink()
                manifest_path = directory / manifest
                if manifest_path.exists():
                    rows = [
                        line
                        for line in manifest_path.read_text(encoding="ascii").splitlines()
                        if line.split("\t")[0] != str(version)
                    ]
                    manifest_path.write_text(
                        "".join(row + "\n" for row in rows), encoding="ascii"
                    )

    # -- comments --

    def put_comment(self, record: CommentRecord) -> None:
        directory = self._article_dir(record.article_id)
        if not directory.exists():
            raise NotFoundError(f"unknown article: {record.article_id}")
        with self._lock_for(record.article_id):
            with open(directory / COMMENTS_NAME, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")

    def list_comments(self, article_id: str) -> list[CommentRecord]:
        directory = self._article_dir(article_id)
        if not directory.exists():
            raise NotFoundError(f"unknown article: {article_id}")
        path = directory / COMMENTS_NAME
        if not path.exists():
            return []
        return [
            CommentRecord.from_json(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def discard_comment(self, article_id: str, comment_id: str) -> None:
        """Remove a staged comment whose chain record was never sealed."""
        directory = self._article_dir(article_id)
        path = directory / COMMENTS_NAME
        if not path.exists():
            return
        with self._lock_for(article_id):
            rows = [
                line
                for line in path.read_text(encoding="utf-8").splitlines()
                if line.strip() and CommentRecord.from_json(line).comment_id != comment_id
            ]
            path.write_text("".join(row + "\n" for row in rows), encoding="utf-8")

    # -- integrity --

    def verify_integrity(self, article_id: str, version: int, key: bytes, expected: bytes) -> IntegrityReport:
        """Decrypt a stored version and compare against the digest recorded on
        chain. Decryption failure and digest mismatch are reported distinctly:
        the former means the ciphertext (or key) is bad, the latter means a
        validly encrypted but different document was substituted."""
        blob = self.get_blob(article_id, version)
        try:
            plaintext = sym_decrypt(key, blob.ciphertext, blob.nonce)
        except DecryptionError as exc:
            return IntegrityReport(False, failure="decryption", detail=str(exc))
        if sm3_digest(plaintext) != expected:
            return IntegrityReport(
                False,
                failure="digest_mismatch",
                detail="decrypted content does not hash to the on-chain digest",
            )
        return IntegrityReport(True)


def make_comment_record(
    comment_id: str,
    article_id: str,
    author: bytes,
    kind: str,
    body_ciphertext: bytes,
    nonce: bytes,
    chain_digest: bytes,
) -> CommentRecord:
    return CommentRecord(
        comment_id=comment_id,
        article_id=article_id,
        author=author,
        kind=kind,
        body_ciphertext=body_ciphertext,
        nonce=nonce,
        chain_digest=chain_digest,
        stored_at=time.time(),
    )
