"""Smart-contract semantics executed as deterministic transaction payloads.

Two stores, Users and Files, plus authority groups. Articles move through a
three-state review flag: 0 (not in review) -> 1 (in review) -> 2 (review
finished); the only path to 2 is the endorsement threshold predicate. Every
edit appends to a tamper-evident modification log.

Payloads are dataclasses with a canonical byte encoding (kind tag + fields);
the encoding sits inside signed transactions, so it is a bit-exact contract.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .crypto import DIGEST_SIZE, derive_address, sm3_digest
from .encoding import Reader, enc_bool, enc_bytes, enc_list, enc_str, enc_u8, enc_u32, enc_u64
from .errors import AuthorizationError, ContractError, NotFoundError

ROLE_SCHOLAR = "scholar"
ROLE_EXPERT = "expert"
ROLES = (ROLE_SCHOLAR, ROLE_EXPERT)

FLAG_IDLE = 0
FLAG_IN_REVIEW = 1
FLAG_ACCEPTED = 2

VERDICT_FAVORABLE = "favorable"
VERDICT_UNFAVORABLE = "unfavorable"

KIND_COMMENT = "comment"
KIND_ANNOTATION = "annotation"
INTERACTION_KINDS = (KIND_COMMENT, KIND_ANNOTATION)

ACCESS_FULL = "full"
ACCESS_ABSTRACT = "abstract"
ACCESS_METADATA = "metadata"
ACCESS_NONE = "none"

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,127}$")

MAX_NAME_LEN = 64


def _check_id(value: str, label: str) -> str:
    if not _ID_RE.match(value):
        raise ContractError(f"invalid {label}: {value!r}")
    return value


def _check_digest(value: bytes, label: str) -> bytes:
    if len(value) != DIGEST_SIZE:
        raise ContractError(f"{label} must be a 32-byte digest")
    return value


# --- domain records ---


@dataclass
class UserEntry:
    address: bytes
    display_name: str
    role: str
    groups: set[str] = field(default_factory=set)

    def encode(self) -> bytes:
        return (
            self.address
            + enc_str(self.display_name)
            + enc_str(self.role)
            + enc_list(enc_str(g) for g in sorted(self.groups))
        )


@dataclass
class AuthorityGroup:
    group_id: str
    public_key: bytes
    members: set[bytes] = field(default_factory=set)
    expert_members: set[bytes] = field(default_factory=set)
    # Per-member copy of the group private key, wrapped to the member's
    # public key at membership grant; the chain never holds it unwrapped.
    member_wrapped_keys: dict[bytes, bytes] = field(default_factory=dict)

    @property
    def key_address(self) -> bytes:
        return derive_address(self.public_key)

    def encode(self) -> bytes:
        return (
            enc_str(self.group_id)
            + enc_bytes(self.public_key)
            + enc_list(m for m in sorted(self.members))
            + enc_list(m for m in sorted(self.expert_members))
            + enc_list(a + enc_bytes(w) for a, w in sorted(self.member_wrapped_keys.items()))
        )


@dataclass(frozen=True)
class ThresholdConfig:
    """Pass rule for a review round: a favorable-expert quorum plus a
    participation floor expressed as an exact rational."""

    expert_quorum: int
    ratio_num: int
    ratio_den: int

    def validate(self) -> None:
        if self.expert_quorum < 1:
            raise ContractError("expert_quorum must be >= 1")
        if not (1 <= self.ratio_num <= self.ratio_den):
            raise ContractError("participation_ratio must be in (0, 1]")

    def satisfied(self, favorable: int, total: int, eligible: int) -> bool:
        # Integer cross-multiplication: no floating-point ties at the preset
        # percentage; "reaching" the threshold reads as >=.
        return favorable >= self.expert_quorum and total * self.ratio_den >= self.ratio_num * eligible

    def encode(self) -> bytes:
        return enc_u32(self.expert_quorum) + enc_u32(self.ratio_num) + enc_u32(self.ratio_den)

    def as_text(self) -> str:
        return f"quorum={self.expert_quorum} ratio={self.ratio_num}/{self.ratio_den}"


@dataclass(frozen=True)
class ModificationEntry:
    modifier: bytes
    time: int
    article_id: str
    new_digest: bytes
    new_abstract_digest: bytes

    def encode(self) -> bytes:
        return (
            self.modifier
            + enc_u64(self.time)
            + enc_str(self.article_id)
            + self.new_digest
            + self.new_abstract_digest
        )


@dataclass(frozen=True)
class SummaryRecord:
    digest: bytes
    generator_id: str
    validator_ids: tuple[str, str]
    time: int

    def encode(self) -> bytes:
        return (
            self.digest
            + enc_str(self.generator_id)
            + enc_list(enc_str(v) for v in self.validator_ids)
            + enc_u64(self.time)
        )


@dataclass(frozen=True)
class InteractionRecord:
    author: bytes
    kind: str
    ref_id: str
    digest: bytes
    time: int

    def encode(self) -> bytes:
        return self.author + enc_str(self.kind) + enc_str(self.ref_id) + self.digest + enc_u64(self.time)


@dataclass
class FileEntry:
    article_id: str
    uploader: bytes
    group_id: str
    state_flag: int
    version: int
    plaintext_digest: bytes
    abstract_digest: bytes
    wrapped_keys: dict[bytes, bytes]
    endorsements: dict[bytes, bool] = field(default_factory=dict)
    thresholds: ThresholdConfig | None = None
    eligible_experts: frozenset[bytes] | None = None
    modification_log: list[ModificationEntry] = field(default_factory=list)
    summary_records: list[SummaryRecord] = field(default_factory=list)
    interactions: list[InteractionRecord] = field(default_factory=list)

    def favorable_count(self) -> int:
        return sum(1 for v in self.endorsements.values() if v)

    def comment_count(self) -> int:
        return sum(1 for i in self.interactions if i.kind == KIND_COMMENT)

    def encode(self) -> bytes:
        thresholds = b"\x00" if self.thresholds is None else b"\x01" + self.thresholds.encode()
        eligible = (
            b"\x00"
            if self.eligible_experts is None
            else b"\x01" + enc_list(sorted(self.eligible_experts))
        )
        return (
            enc_str(self.article_id)
            + self.uploader
            + enc_str(self.group_id)
            + enc_u8(self.state_flag)
            + enc_u32(self.version)
            + self.plaintext_digest
            + self.abstract_digest
            + enc_list(a + enc_bytes(w) for a, w in sorted(self.wrapped_keys.items()))
            + enc_list(a + enc_bool(v) for a, v in sorted(self.endorsements.items()))
            + thresholds
            + eligible
            + enc_list(m.encode() for m in self.modification_log)
            + enc_list(s.encode() for s in self.summary_records)
            + enc_list(i.encode() for i in self.interactions)
        )


# --- payloads ---

_PAYLOAD_REGISTRY: dict[int, type] = {}


def _payload(kind_tag: int, kind_name: str):
    def wrap(cls):
        cls.KIND_TAG = kind_tag
        cls.KIND = kind_name
        _PAYLOAD_REGISTRY[kind_tag] = cls
        return cls

    return wrap


@_payload(0x01, "register_account")
@dataclass(frozen=True)
class RegisterAccount:
    public_key: bytes
    role: str

    def encode_fields(self) -> bytes:
        return enc_bytes(self.public_key) + enc_str(self.role)

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(public_key=r.bytes_(), role=r.str_())


@_payload(0x02, "grant_ether")
@dataclass(frozen=True)
class GrantEther:
    to: bytes

    def encode_fields(self) -> bytes:
        return self.to

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(to=r.take(20))


@_payload(0x03, "set_name")
@dataclass(frozen=True)
class SetName:
    name: str

    def encode_fields(self) -> bytes:
        return enc_str(self.name)

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(name=r.str_())


@_payload(0x04, "create_group")
@dataclass(frozen=True)
class CreateGroup:
    group_id: str
    public_key: bytes

    def encode_fields(self) -> bytes:
        return enc_str(self.group_id) + enc_bytes(self.public_key)

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(group_id=r.str_(), public_key=r.bytes_())


@_payload(0x05, "add_member")
@dataclass(frozen=True)
class AddMember:
    group_id: str
    member: bytes
    expert: bool
    wrapped_group_key: bytes

    def encode_fields(self) -> bytes:
        return (
            enc_str(self.group_id)
            + self.member
            + enc_bool(self.expert)
            + enc_bytes(self.wrapped_group_key)
        )

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(
            group_id=r.str_(),
            member=r.take(20),
            expert=r.boolean(),
            wrapped_group_key=r.bytes_(),
        )


@_payload(0x06, "upload_file")
@dataclass(frozen=True)
class UploadFile:
    article_id: str
    plaintext_digest: bytes
    abstract_digest: bytes
    group_id: str
    wrapped_keys: tuple[tuple[bytes, bytes], ...]  # (recipient address, ciphertext)

    def encode_fields(self) -> bytes:
        return (
            enc_str(self.article_id)
            + self.plaintext_digest
            + self.abstract_digest
            + enc_str(self.group_id)
            + enc_list(a + enc_bytes(w) for a, w in sorted(self.wrapped_keys))
        )

    @classmethod
    def decode_fields(cls, r: Reader):
        article_id = r.str_()
        pd = r.take(32)
        ad = r.take(32)
        group_id = r.str_()
        wrapped = tuple((r.take(20), r.bytes_()) for _ in range(r.count()))
        return cls(article_id, pd, ad, group_id, wrapped)


@_payload(0x07, "start_review")
@dataclass(frozen=True)
class StartReview:
    article_id: str
    thresholds: ThresholdConfig

    def encode_fields(self) -> bytes:
        return enc_str(self.article_id) + self.thresholds.encode()

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(
            article_id=r.str_(),
            thresholds=ThresholdConfig(r.u32(), r.u32(), r.u32()),
        )


@_payload(0x08, "endorse")
@dataclass(frozen=True)
class Endorse:
    article_id: str
    favorable: bool

    def encode_fields(self) -> bytes:
        return enc_str(self.article_id) + enc_bool(self.favorable)

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(article_id=r.str_(), favorable=r.boolean())


@_payload(0x09, "update_file")
@dataclass(frozen=True)
class UpdateFile:
    article_id: str
    new_digest: bytes
    new_abstract_digest: bytes
    new_wrapped_keys: tuple[tuple[bytes, bytes], ...]

    def encode_fields(self) -> bytes:
        return (
            enc_str(self.article_id)
            + self.new_digest
            + self.new_abstract_digest
            + enc_list(a + enc_bytes(w) for a, w in sorted(self.new_wrapped_keys))
        )

    @classmethod
    def decode_fields(cls, r: Reader):
        article_id = r.str_()
        nd = r.take(32)
        nad = r.take(32)
        wrapped = tuple((r.take(20), r.bytes_()) for _ in range(r.count()))
        return cls(article_id, nd, nad, wrapped)


@_payload(0x0A, "record_summary")
@dataclass(frozen=True)
class RecordSummary:
    article_id: str
    summary_digest: bytes
    generator_id: str
    validator_ids: tuple[str, ...]

    def encode_fields(self) -> bytes:
        return (
            enc_str(self.article_id)
            + self.summary_digest
            + enc_str(self.generator_id)
            + enc_list(enc_str(v) for v in self.validator_ids)
        )

    @classmethod
    def decode_fields(cls, r: Reader):
        article_id = r.str_()
        digest = r.take(32)
        generator = r.str_()
        validators = tuple(r.str_() for _ in range(r.count()))
        return cls(article_id, digest, generator, validators)


@_payload(0x0B, "log_interaction")
@dataclass(frozen=True)
class LogInteraction:
    article_id: str
    kind: str
    ref_id: str
    digest: bytes

    def encode_fields(self) -> bytes:
        return enc_str(self.article_id) + enc_str(self.kind) + enc_str(self.ref_id) + self.digest

    @classmethod
    def decode_fields(cls, r: Reader):
        return cls(article_id=r.str_(), kind=r.str_(), ref_id=r.str_(), digest=r.take(32))


ContractCall = (
    RegisterAccount
    | GrantEther
    | SetName
    | CreateGroup
    | AddMember
    | UploadFile
    | StartReview
    | Endorse
    | UpdateFile
    | RecordSummary
    | LogInteraction
)


def encode_call(call: ContractCall) -> bytes:
    return enc_u8(call.KIND_TAG) + call.encode_fields()


def decode_call(data: bytes) -> ContractCall:
    r = Reader(data)
    tag = r.u8()
    cls = _PAYLOAD_REGISTRY.get(tag)
    if cls is None:
        raise ValueError(f"unknown payload kind tag: {tag:#x}")
    call = cls.decode_fields(r)
    r.expect_end()
    return call


# --- contract state and execution ---


@dataclass(frozen=True)
class ExecutionContext:
    sender: bytes
    timestamp: int
    admin_address: bytes


@dataclass(frozen=True)
class FileView:
    """Policy-filtered snapshot of a file entry for one caller."""

    article_id: str
    group_id: str
    uploader: bytes
    state_flag: int
    version: int
    access: str
    plaintext_digest: bytes
    abstract_digest: bytes
    wrapped_key: bytes | None  # reachable by this caller, per policy
    wrapped_key_recipient: bytes | None
    thresholds: ThresholdConfig | None
    endorsements: dict[bytes, bool]
    eligible_experts: frozenset[bytes] | None
    modification_log: tuple[ModificationEntry, ...]
    summary_records: tuple[SummaryRecord, ...]
    interactions: tuple[InteractionRecord, ...]


class ContractState:
    """The Users and Files stores plus authority groups.

    Handlers validate fully before mutating, so a rejected payload leaves the
    state untouched. Per-entry digest caches make the state root cheap to
    recompute after each transaction.
    """

    def __init__(self):
        self.users: dict[bytes, UserEntry] = {}
        self.files: dict[str, FileEntry] = {}
        self.groups: dict[str, AuthorityGroup] = {}
        self._digest_cache: dict[tuple[str, object], bytes] = {}

    # -- cache upkeep --

    def _touch(self, store: str, key) -> None:
        self._digest_cache.pop((store, key), None)

    def _entry_digest(self, store: str, key, entry) -> bytes:
        cached = self._digest_cache.get((store, key))
        if cached is None:
            cached = sm3_digest(entry.encode())
            self._digest_cache[(store, key)] = cached
        return cached

    def root(self) -> bytes:
        users = b"".join(
            addr + self._entry_digest("users", addr, entry)
            for addr, entry in sorted(self.users.items())
        )
        files = b"".join(
            file_id.encode() + self._entry_digest("files", file_id, entry)
            for file_id, entry in sorted(self.files.items())
        )
        groups = b"".join(
            group_id.encode() + self._entry_digest("groups", group_id, entry)
            for group_id, entry in sorted(self.groups.items())
        )
        return sm3_digest(
            b"contract-state" + sm3_digest(users) + sm3_digest(files) + sm3_digest(groups)
        )

    # -- lookups --

    def user(self, address: bytes) -> UserEntry:
        entry = self.users.get(address)
        if entry is None:
            raise NotFoundError(f"unknown user: {address.hex()}")
        return entry

    def file(self, article_id: str) -> FileEntry:
        entry = self.files.get(article_id)
        if entry is None:
            raise NotFoundError(f"unknown article: {article_id}")
        return entry

    def group(self, group_id: str) -> AuthorityGroup:
        entry = self.groups.get(group_id)
        if entry is None:
            raise NotFoundError(f"unknown group: {group_id}")
        return entry

    # -- policy --

    def access_level(self, caller: bytes, entry: FileEntry) -> str:
        """Policy table, (role x state_flag):

        =========  ========  ========  ====
        role       flag 0    flag 1    flag 2
        =========  ========  ========  ====
        uploader   full      full      full
        expert     metadata  abstract  full
        scholar    metadata  abstract  full
        outsider   none      none      none
        =========  ========  ========  ====

        Full-text key release to group members requires flag 2; during review
        members see the abstract only, keeping the blinding intact.
        """
        if caller == entry.uploader:
            return ACCESS_FULL
        group = self.groups.get(entry.group_id)
        if group is None or caller not in group.members:
            return ACCESS_NONE
        if entry.state_flag == FLAG_ACCEPTED:
            return ACCESS_FULL
        if entry.state_flag == FLAG_IN_REVIEW:
            return ACCESS_ABSTRACT
        return ACCESS_METADATA

    def get_file(self, caller: bytes, article_id: str) -> FileView:
        entry = self.file(article_id)
        access = self.access_level(caller, entry)
        if access == ACCESS_NONE:
            raise AuthorizationError(
                f"{caller.hex()} is not a member of group {entry.group_id}"
            )
        wrapped_key = None
        recipient = None
        if access == ACCESS_FULL:
            if caller in entry.wrapped_keys:
                wrapped_key, recipient = entry.wrapped_keys[caller], caller
            else:
                group_addr = self.group(entry.group_id).key_address
                if group_addr in entry.wrapped_keys:
                    wrapped_key, recipient = entry.wrapped_keys[group_addr], group_addr
        return FileView(
            article_id=entry.article_id,
            group_id=entry.group_id,
            uploader=entry.uploader,
            state_flag=entry.state_flag,
            version=entry.version,
            access=access,
            plaintext_digest=entry.plaintext_digest,
            abstract_digest=entry.abstract_digest,
            wrapped_key=wrapped_key,
            wrapped_key_recipient=recipient,
            thresholds=entry.thresholds,
            endorsements=dict(entry.endorsements),
            eligible_experts=entry.eligible_experts,
            modification_log=tuple(entry.modification_log),
            summary_records=tuple(entry.summary_records),
            interactions=tuple(entry.interactions),
        )

    # -- execution --

    def execute(self, call: ContractCall, ctx: ExecutionContext) -> dict:
        handler = getattr(self, f"_do_{call.KIND}", None)
        if handler is None:
            raise ContractError(f"payload kind {call.KIND} has no contract handler")
        return handler(call, ctx)

    def _do_register_account(self, call: RegisterAccount, ctx: ExecutionContext) -> dict:
        # Account-level checks live in the ledger; here we just mirror the
        # identity into the Users store.
        if call.role not in ROLES:
            raise ContractError(f"unknown role: {call.role!r}")
        address = derive_address(call.public_key)
        if address in self.users:
            raise ContractError(f"user already registered: {address.hex()}")
        self.users[address] = UserEntry(address=address, display_name="", role=call.role)
        self._touch("users", address)
        return {"address": address.hex(), "role": call.role}

    def _do_set_name(self, call: SetName, ctx: ExecutionContext) -> dict:
        entry = self.users.get(ctx.sender)
        if entry is None:
            raise ContractError(f"caller not registered: {ctx.sender.hex()}")
        if not (1 <= len(call.name) <= MAX_NAME_LEN):
            raise ContractError("display name must be 1..64 characters")
        entry.display_name = call.name
        self._touch("users", ctx.sender)
        return {"address": ctx.sender.hex(), "display_name": call.name}

    def _do_create_group(self, call: CreateGroup, ctx: ExecutionContext) -> dict:
        if ctx.sender != ctx.admin_address:
            raise ContractError("only the administrator may create groups")
        _check_id(call.group_id, "group id")
        if call.group_id in self.groups:
            raise ContractError(f"group already exists: {call.group_id}")
        if len(call.public_key) != 65 or call.public_key[0] != 0x04:
            raise ContractError("group public key must be a 65-byte uncompressed point")
        self.groups[call.group_id] = AuthorityGroup(
            group_id=call.group_id, public_key=call.public_key
        )
        self._touch("groups", call.group_id)
        return {"group_id": call.group_id}

    def _do_add_member(self, call: AddMember, ctx: ExecutionContext) -> dict:
        if ctx.sender != ctx.admin_address:
            raise ContractError("only the administrator may manage membership")
        group = self.groups.get(call.group_id)
        if group is None:
            raise ContractError(f"unknown group: {call.group_id}")
        user = self.users.get(call.member)
        if user is None:
            raise ContractError(f"member is not a registered user: {call.member.hex()}")
        if call.member in group.members:
            raise ContractError(f"already a member of {call.group_id}")
        if not call.wrapped_group_key:
            raise ContractError("membership requires a wrapped group key copy")
        group.members.add(call.member)
        if call.expert:
            group.expert_members.add(call.member)
        group.member_wrapped_keys[call.member] = call.wrapped_group_key
        user.groups.add(call.group_id)
        self._touch("groups", call.group_id)
        self._touch("users", call.member)
        return {"group_id": call.group_id, "member": call.member.hex(), "expert": call.expert}

    def _do_upload_file(self, call: UploadFile, ctx: ExecutionContext) -> dict:
        _check_id(call.article_id, "article id")
        _check_digest(call.plaintext_digest, "plaintext digest")
        _check_digest(call.abstract_digest, "abstract digest")
        if call.article_id in self.files:
            raise ContractError(f"duplicate article id: {call.article_id}")
        group = self.groups.get(call.group_id)
        if group is None:
            raise ContractError(f"unknown group: {call.group_id}")
        if ctx.sender not in group.members:
            raise ContractError("uploader is not a member of the target group")
        wrapped = dict(call.wrapped_keys)
        if ctx.sender not in wrapped:
            raise ContractError("wrapped keys must cover the uploader")
        if group.key_address not in wrapped:
            raise ContractError("wrapped keys must cover the authority group key")
        self.files[call.article_id] = FileEntry(
            article_id=call.article_id,
            uploader=ctx.sender,
            group_id=call.group_id,
            state_flag=FLAG_IDLE,
            version=1,
            plaintext_digest=call.plaintext_digest,
            abstract_digest=call.abstract_digest,
            wrapped_keys=wrapped,
        )
        self._touch("files", call.article_id)
        return {"article_id": call.article_id, "state_flag": FLAG_IDLE, "version": 1}

    def _do_start_review(self, call: StartReview, ctx: ExecutionContext) -> dict:
        entry = self.files.get(call.article_id)
        if entry is None:
            raise ContractError(f"unknown article: {call.article_id}")
        if ctx.sender != entry.uploader:
            raise ContractError("only the uploader may start the review")
        if entry.state_flag != FLAG_IDLE:
            raise ContractError(
                f"review can only start from flag 0, current flag is {entry.state_flag}"
            )
        call.thresholds.validate()
        group = self.group(entry.group_id)
        entry.thresholds = call.thresholds
        # Participation denominator is snapshotted here so later membership
        # churn cannot move a running review's goalposts.
        entry.eligible_experts = frozenset(group.expert_members - {entry.uploader})
        entry.state_flag = FLAG_IN_REVIEW
        self._touch("files", call.article_id)
        return {
            "article_id": call.article_id,
            "state_flag": FLAG_IN_REVIEW,
            "eligible_experts": len(entry.eligible_experts),
        }

    def _do_endorse(self, call: Endorse, ctx: ExecutionContext) -> dict:
        entry = self.files.get(call.article_id)
        if entry is None:
            raise ContractError(f"unknown article: {call.article_id}")
        if entry.state_flag != FLAG_IN_REVIEW:
            raise ContractError(
                f"endorsements require flag 1, current flag is {entry.state_flag}"
            )
        if ctx.sender == entry.uploader:
            raise ContractError("uploader may not endorse their own article")
        if ctx.sender not in (entry.eligible_experts or frozenset()):
            raise ContractError("caller is not an eligible expert for this review")
        if ctx.sender in entry.endorsements:
            raise ContractError("verdict already cast; endorsements are immutable")
        entry.endorsements[ctx.sender] = call.favorable
        favorable = entry.favorable_count()
        total = len(entry.endorsements)
        eligible = len(entry.eligible_experts)
        if entry.thresholds.satisfied(favorable, total, eligible):
            entry.state_flag = FLAG_ACCEPTED
        self._touch("files", call.article_id)
        return {
            "article_id": call.article_id,
            "state_flag": entry.state_flag,
            "favorable": favorable,
            "total": total,
            "eligible": eligible,
        }

    def _do_update_file(self, call: UpdateFile, ctx: ExecutionContext) -> dict:
        entry = self.files.get(call.article_id)
        if entry is None:
            raise ContractError(f"unknown article: {call.article_id}")
        _check_digest(call.new_digest, "new digest")
        _check_digest(call.new_abstract_digest, "new abstract digest")
        if self.access_level(ctx.sender, entry) != ACCESS_FULL:
            raise ContractError("caller lacks full-text access to this article")
        wrapped = dict(call.new_wrapped_keys)
        if entry.uploader not in wrapped:
            raise ContractError("wrapped keys must cover the uploader")
        group = self.group(entry.group_id)
        if group.key_address not in wrapped:
            raise ContractError("wrapped keys must cover the authority group key")
        entry.modification_log.append(
            ModificationEntry(
                modifier=ctx.sender,
                time=ctx.timestamp,
                article_id=call.article_id,
                new_digest=call.new_digest,
                new_abstract_digest=call.new_abstract_digest,
            )
        )
        entry.version += 1
        entry.plaintext_digest = call.new_digest
        entry.abstract_digest = call.new_abstract_digest
        entry.wrapped_keys = wrapped
        self._touch("files", call.article_id)
        return {
            "article_id": call.article_id,
            "version": entry.version,
            "modification_count": len(entry.modification_log),
        }

    def _do_record_summary(self, call: RecordSummary, ctx: ExecutionContext) -> dict:
        entry = self.files.get(call.article_id)
        if entry is None:
            raise ContractError(f"unknown article: {call.article_id}")
        _check_digest(call.summary_digest, "summary digest")
        if len(call.validator_ids) != 2:
            raise ContractError("exactly 2 validators must attest a summary")
        if len(set(call.validator_ids)) != 2:
            raise ContractError("validators must be distinct")
        if call.generator_id in call.validator_ids:
            raise ContractError("generator may not validate its own summary")
        entry.summary_records.append(
            SummaryRecord(
                digest=call.summary_digest,
                generator_id=call.generator_id,
                validator_ids=tuple(call.validator_ids),
                time=ctx.timestamp,
            )
        )
        entry.abstract_digest = call.summary_digest
        self._touch("files", call.article_id)
        return {"article_id": call.article_id, "summaries": len(entry.summary_records)}

    def _do_log_interaction(self, call: LogInteraction, ctx: ExecutionContext) -> dict:
        entry = self.files.get(call.article_id)
        if entry is None:
            raise ContractError(f"unknown article: {call.article_id}")
        if call.kind not in INTERACTION_KINDS:
            raise ContractError(f"unknown interaction kind: {call.kind!r}")
        _check_id(call.ref_id, "interaction ref id")
        _check_digest(call.digest, "interaction digest")
        if self.access_level(ctx.sender, entry) not in (ACCESS_FULL, ACCESS_ABSTRACT):
            raise ContractError("caller may not interact with this article")
        entry.interactions.append(
            InteractionRecord(
                author=ctx.sender,
                kind=call.kind,
                ref_id=call.ref_id,
                digest=call.digest,
                time=ctx.timestamp,
            )
        )
        self._touch("files", call.article_id)
        return {"article_id": call.article_id, "kind": call.kind, "ref_id": call.ref_id}
