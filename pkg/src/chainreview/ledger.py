"""Deterministic, in-process, hash-chained transaction ledger.

Single-writer semantics: every submitted transaction is sealed into its own
block immediately (batch size 1), so the chain's state is a pure function of
the transaction sequence. Gas flows to a fee-sink account rather than being
destroyed, which makes supply conservation exactly testable. Timestamps inside
consensus-relevant encodings are logical clock ticks; wall-clock time is kept
on receipts for display only.

Persistence is an append-only record file: one u32 length prefix followed by
the canonical block encoding per record.
"""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, replace

from . import contract as ct
from .crypto import (
    ADDRESS_SIZE,
    DIGEST_SIZE,
    KeyPair,
    derive_address,
    generate_keypair,
    sign,
    sm3_digest,
    verify,
)
from .encoding import Reader, enc_bytes, enc_list, enc_u32, enc_u64
from .errors import (
    BadSignature,
    ChainCorruption,
    DuplicateAccount,
    InsufficientBalance,
    LedgerError,
    NonceMismatch,
    NotFoundError,
    UnknownAccount,
)

GENESIS_PREV_HASH = b"\x00" * DIGEST_SIZE

STATUS_SUCCESS = "success"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class Transaction:
    nonce: int
    sender: bytes
    payload: ct.ContractCall
    gas_fee: int
    timestamp: int
    signature: bytes

    def signing_bytes(self) -> bytes:
        return (
            enc_u64(self.nonce)
            + self.sender
            + enc_bytes(ct.encode_call(self.payload))
            + enc_u64(self.gas_fee)
            + enc_u64(self.timestamp)
        )

    def encode(self) -> bytes:
        return self.signing_bytes() + self.signature

    @classmethod
    def decode(cls, data: bytes) -> "Transaction":
        r = Reader(data)
        nonce = r.u64()
        sender = r.take(ADDRESS_SIZE)
        payload = ct.decode_call(r.bytes_())
        gas_fee = r.u64()
        timestamp = r.u64()
        signature = r.take(64)
        r.expect_end()
        return cls(nonce, sender, payload, gas_fee, timestamp, signature)

    @property
    def tx_hash(self) -> bytes:
        return sm3_digest(self.encode())


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    tx_list: tuple[Transaction, ...]
    state_root: bytes

    def encode(self) -> bytes:
        return (
            enc_u64(self.index)
            + self.prev_hash
            + enc_list(enc_bytes(tx.encode()) for tx in self.tx_list)
            + self.state_root
        )

    @classmethod
    def decode(cls, data: bytes) -> "Block":
        r = Reader(data)
        index = r.u64()
        prev_hash = r.take(DIGEST_SIZE)
        txs = tuple(Transaction.decode(r.bytes_()) for _ in range(r.count()))
        state_root = r.take(DIGEST_SIZE)
        r.expect_end()
        return cls(index, prev_hash, txs, state_root)

    @property
    def block_hash(self) -> bytes:
        return sm3_digest(self.encode())


@dataclass
class AccountState:
    address: bytes
    public_key: bytes
    balance: int
    nonce: int

    def encode(self) -> bytes:
        return self.address + enc_bytes(self.public_key) + enc_u64(self.balance) + enc_u64(self.nonce)

    def snapshot(self) -> "AccountState":
        return replace(self)


@dataclass(frozen=True)
class Receipt:
    status: str
    block_index: int
    tx_hash: bytes
    gas_charged: int
    error: str | None = None
    output: dict | None = None
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_SUCCESS


@dataclass(frozen=True)
class GasSchedule:
    """Flat fee per payload kind; registration is free because the account
    cannot hold ether before its grant."""

    default_fee: int = 21
    register_fee: int = 0
    overrides: tuple[tuple[str, int], ...] = ()

    def fee_for(self, call: ct.ContractCall) -> int:
        if isinstance(call, ct.RegisterAccount):
            return self.register_fee
        for kind, fee in self.overrides:
            if kind == call.KIND:
                return fee
        return self.default_fee


@dataclass(frozen=True)
class LedgerConfig:
    distributor_balance: int = 10**12
    grant_amount: int = 10**6
    gas: GasSchedule = field(default_factory=GasSchedule)
    genesis_seed: bytes = b"\x00" * 32


@dataclass(frozen=True)
class ChainVerification:
    ok: bool
    height: int
    broken_at: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class Ledger:
    """Single-node chain: accounts, the contract state machine, and sealed
    blocks. All mutation funnels through :meth:`submit_transaction` under one
    writer lock; reads return immutable snapshots."""

    FEE_SINK = sm3_digest(b"chainreview/fee-sink")[:ADDRESS_SIZE]

    def __init__(self, config: LedgerConfig, persist_path=None):
        if config.distributor_balance <= 0:
            raise LedgerError("distributor balance must be positive")
        if config.grant_amount < 0:
            raise LedgerError("grant amount must be non-negative")
        if config.gas.register_fee != 0:
            raise LedgerError("registration gas must be 0: fresh accounts hold no ether")
        self.config = config
        self._lock = threading.RLock()
        self._distributor = generate_keypair(seed=sm3_digest(config.genesis_seed + b"distributor"))
        self.accounts: dict[bytes, AccountState] = {}
        self.contract = ct.ContractState()
        self.granted: set[bytes] = set()
        self.blocks: list[Block] = []
        self.receipts: list[tuple[Receipt, ...]] = []
        self._clock = 0
        self._acct_digests: dict[bytes, bytes] = {}
        self.persist_path = persist_path
        self._init_genesis_state()
        genesis = Block(
            index=0,
            prev_hash=GENESIS_PREV_HASH,
            tx_list=(),
            state_root=self.state_root(),
        )
        self.blocks.append(genesis)
        self.receipts.append(())
        if persist_path is not None:
            self.save(persist_path)

    # -- genesis --

    def _init_genesis_state(self) -> None:
        dist_addr = self._distributor.address
        self.accounts[dist_addr] = AccountState(
            address=dist_addr,
            public_key=self._distributor.public_key,
            balance=self.config.distributor_balance,
            nonce=0,
        )
        self.accounts[self.FEE_SINK] = AccountState(
            address=self.FEE_SINK, public_key=b"", balance=0, nonce=0
        )

    @property
    def distributor_address(self) -> bytes:
        return self._distributor.address

    @property
    def distributor_keys(self) -> KeyPair:
        return self._distributor

    @property
    def height(self) -> int:
        return len(self.blocks)

    # -- state root --

    def _account_digest(self, addr: bytes) -> bytes:
        cached = self._acct_digests.get(addr)
        if cached is None:
            cached = sm3_digest(self.accounts[addr].encode())
            self._acct_digests[addr] = cached
        return cached

    def state_root(self) -> bytes:
        accounts = b"".join(
            addr + self._account_digest(addr) for addr in sorted(self.accounts)
        )
        granted = b"".join(sorted(self.granted))
        return sm3_digest(
            b"ledger-state"
            + sm3_digest(accounts)
            + sm3_digest(granted)
            + self.contract.root()
        )

    def total_supply(self) -> int:
        return sum(acct.balance for acct in self.accounts.values())

    # -- transaction building --

    def next_timestamp(self) -> int:
        return self._clock + 1

    def build_transaction(self, keys: KeyPair, payload: ct.ContractCall) -> Transaction:
        """Assemble and sign a transaction for the current account nonce and
        the next logical tick. Callers serialize build+submit."""
        with self._lock:
            sender = keys.address
            account = self.accounts.get(sender)
            if isinstance(payload, ct.RegisterAccount):
                nonce = 0
            elif account is None:
                raise UnknownAccount(f"unknown sender: {sender.hex()}")
            else:
                nonce = account.nonce
            unsigned = Transaction(
                nonce=nonce,
                sender=sender,
                payload=payload,
                gas_fee=self.config.gas.fee_for(payload),
                timestamp=self.next_timestamp(),
                signature=b"\x00" * 64,
            )
            return replace(unsigned, signature=sign(unsigned.signing_bytes(), keys))

    # -- submission --

    def _validate(self, tx: Transaction) -> AccountState | None:
        if tx.timestamp != self._clock + 1:
            raise LedgerError(
                f"timestamp {tx.timestamp} out of order, expected {self._clock + 1}"
            )
        if tx.gas_fee != self.config.gas.fee_for(tx.payload):
            raise LedgerError("gas fee does not match the schedule")
        if isinstance(tx.payload, ct.RegisterAccount):
            address = derive_address(tx.payload.public_key)
            if tx.sender != address:
                raise BadSignature("registration must be sent from the derived address")
            if address in self.accounts:
                raise DuplicateAccount(f"account already registered: {address.hex()}")
            if tx.nonce != 0:
                raise NonceMismatch("registration nonce must be 0")
            if not verify(tx.signature, tx.signing_bytes(), tx.payload.public_key):
                raise BadSignature("registration signature does not prove key possession")
            return None
        account = self.accounts.get(tx.sender)
        if account is None:
            raise UnknownAccount(f"unknown sender: {tx.sender.hex()}")
        if not verify(tx.signature, tx.signing_bytes(), account.public_key):
            raise BadSignature(f"signature invalid for sender {tx.sender.hex()}")
        if tx.nonce != account.nonce:
            raise NonceMismatch(
                f"nonce {tx.nonce} does not match account nonce {account.nonce}"
            )
        if account.balance < tx.gas_fee:
            raise InsufficientBalance(
                f"balance {account.balance} cannot cover gas fee {tx.gas_fee}"
            )
        return account

    def _apply_effects(self, tx: Transaction) -> dict:
        """Payload side effects; raises ContractError for semantic rejections."""
        payload = tx.payload
        ctx = ct.ExecutionContext(
            sender=tx.sender,
            timestamp=tx.timestamp,
            admin_address=self.distributor_address,
        )
        if isinstance(payload, ct.RegisterAccount):
            output = self.contract.execute(payload, ctx)
            address = derive_address(payload.public_key)
            # The registration transaction itself consumed nonce 0.
            self.accounts[address] = AccountState(
                address=address, public_key=payload.public_key, balance=0, nonce=1
            )
            self._acct_digests.pop(address, None)
            return output
        if isinstance(payload, ct.GrantEther):
            if tx.sender != self.distributor_address:
                raise ct.ContractError("only the distributor may grant ether")
            recipient = self.accounts.get(payload.to)
            if recipient is None:
                raise ct.ContractError(f"grant recipient not registered: {payload.to.hex()}")
            if payload.to in self.granted:
                raise ct.ContractError(f"grant already issued to {payload.to.hex()}")
            distributor = self.accounts[self.distributor_address]
            if distributor.balance < self.config.grant_amount + tx.gas_fee:
                raise ct.ContractError("distributor balance exhausted")
            distributor.balance -= self.config.grant_amount
            recipient.balance += self.config.grant_amount
            self.granted.add(payload.to)
            self._acct_digests.pop(self.distributor_address, None)
            self._acct_digests.pop(payload.to, None)
            return {"to": payload.to.hex(), "amount": self.config.grant_amount}
        return self.contract.execute(payload, ctx)

    def submit_transaction(self, tx: Transaction) -> Receipt:
        """Validate, execute, and seal one transaction into a new block.

        Sender-level faults (signature, nonce, balance, timestamp) raise and
        leave no trace. Payload-level rejections are sealed as failed receipts:
        gas is still charged and the nonce advances, preserving the audit
        trail of rejected actions.
        """
        with self._lock:
            account = self._validate(tx)
            error = None
            output = None
            try:
                output = self._apply_effects(tx)
            except ct.ContractError as exc:
                error = str(exc)
            if account is not None:
                account.nonce += 1
                account.balance -= tx.gas_fee
                sink = self.accounts[self.FEE_SINK]
                sink.balance += tx.gas_fee
                self._acct_digests.pop(account.address, None)
                self._acct_digests.pop(self.FEE_SINK, None)
            self._clock = tx.timestamp
            block = Block(
                index=len(self.blocks),
                prev_hash=self.blocks[-1].block_hash,
                tx_list=(tx,),
                state_root=self.state_root(),
            )
            self.blocks.append(block)
            if self.persist_path is not None:
                self.append_block_record(self.persist_path, block)
            receipt = Receipt(
                status=STATUS_FAILED if error else STATUS_SUCCESS,
                block_index=block.index,
                tx_hash=tx.tx_hash,
                gas_charged=tx.gas_fee if account is not None else 0,
                error=error,
                output=output,
                wall_time=time.time(),
            )
            self.receipts.append((receipt,))
            return receipt

    def submit_payload(self, keys: KeyPair, payload: ct.ContractCall) -> Receipt:
        """Build, sign, and submit under one lock acquisition so nonce and
        timestamp assignment cannot interleave across callers."""
        with self._lock:
            return self.submit_transaction(self.build_transaction(keys, payload))

    # -- convenience operations --

    def register_account(self, keys: KeyPair, role: str = ct.ROLE_SCHOLAR) -> bytes:
        """Register a fresh account; the registration transaction is signed by
        the new key itself, proving possession."""
        payload = ct.RegisterAccount(public_key=keys.public_key, role=role)
        with self._lock:
            receipt = self.submit_transaction(self.build_transaction(keys, payload))
        if not receipt.ok:
            raise DuplicateAccount(receipt.error or "registration rejected")
        return keys.address

    def grant_ether(self, to: bytes) -> Receipt:
        payload = ct.GrantEther(to=to)
        with self._lock:
            receipt = self.submit_transaction(
                self.build_transaction(self._distributor, payload)
            )
        if not receipt.ok:
            raise LedgerError(receipt.error or "grant rejected")
        return receipt

    # -- reads --

    def read_block(self, index: int) -> Block:
        if not 0 <= index < len(self.blocks):
            raise NotFoundError(f"no block at height {index}")
        return self.blocks[index]

    def read_account(self, address: bytes) -> AccountState:
        account = self.accounts.get(address)
        if account is None:
            raise NotFoundError(f"unknown account: {address.hex()}")
        return account.snapshot()

    def block_receipts(self, index: int) -> tuple[Receipt, ...]:
        if not 0 <= index < len(self.receipts):
            raise NotFoundError(f"no block at height {index}")
        return self.receipts[index]

    # -- verification --

    def verify_chain(self, check_signatures: bool = True) -> ChainVerification:
        """Recompute every hash and link, then replay every payload from
        genesis and compare the state root at each height."""
        with self._lock:
            blocks = list(self.blocks)
            live_root = self.state_root()

        if not blocks:
            return ChainVerification(False, 0, None, "empty chain")
        genesis = blocks[0]
        if genesis.index != 0 or genesis.prev_hash != GENESIS_PREV_HASH or genesis.tx_list:
            return ChainVerification(False, len(blocks), 0, "malformed genesis block")

        shadow = Ledger(self.config)
        if shadow.blocks[0].state_root != genesis.state_root:
            return ChainVerification(
                False, len(blocks), 0, "genesis state root does not match configuration"
            )
        prev_hash = genesis.block_hash
        for block in blocks[1:]:
            if block.index != shadow.height:
                return ChainVerification(False, len(blocks), block.index, "index out of sequence")
            if block.prev_hash != prev_hash:
                return ChainVerification(
                    False, len(blocks), block.index, "previous-hash link broken"
                )
            for tx in block.tx_list:
                if check_signatures:
                    pub = (
                        tx.payload.public_key
                        if isinstance(tx.payload, ct.RegisterAccount)
                        else shadow.accounts[tx.sender].public_key
                        if tx.sender in shadow.accounts
                        else b""
                    )
                    if not verify(tx.signature, tx.signing_bytes(), pub):
                        return ChainVerification(
                            False, len(blocks), block.index, "transaction signature invalid"
                        )
                try:
                    shadow.submit_transaction(tx)
                except LedgerError as exc:
                    return ChainVerification(
                        False, len(blocks), block.index, f"replay rejected: {exc}"
                    )
            if shadow.blocks[-1].state_root != block.state_root:
                return ChainVerification(
                    False, len(blocks), block.index, "state root mismatch on replay"
                )
            if shadow.blocks[-1].block_hash != block.block_hash:
                return ChainVerification(
                    False, len(blocks), block.index, "block hash does not recompute"
                )
            prev_hash = block.block_hash
        if shadow.state_root() != live_root:
            return ChainVerification(
                False, len(blocks), len(blocks) - 1, "live state diverges from replay"
            )
        return ChainVerification(True, len(blocks))

    # -- persistence --

    def save(self, path) -> None:
        with self._lock, open(path, "wb") as fh:
            for block in self.blocks:
                encoded = block.encode()
                fh.write(enc_u32(len(encoded)))
                fh.write(encoded)

    def append_block_record(self, path, block: Block) -> None:
        encoded = block.encode()
        with open(path, "ab") as fh:
            fh.write(enc_u32(len(encoded)))
            fh.write(encoded)

    @classmethod
    def load(cls, path, config: LedgerConfig, persist: bool = True) -> "Ledger":
        """Rebuild a ledger by replaying a persisted chain file; any hash,
        link, or state divergence aborts with the failing block identified.
        Replay runs detached from the file, which is only re-attached for
        appends once it has fully verified."""
        records: list[Block] = []
        with open(path, "rb") as fh:
            raw = fh.read()
        pos = 0
        while pos < len(raw):
            if pos + 4 > len(raw):
                raise ChainCorruption("truncated record length", block_index=len(records))
            length = int.from_bytes(raw[pos : pos + 4], "big")
            pos += 4
            if pos + length > len(raw):
                raise ChainCorruption("truncated block record", block_index=len(records))
            try:
                records.append(Block.decode(raw[pos : pos + length]))
            except ValueError as exc:
                raise ChainCorruption(
                    f"undecodable block record: {exc}", block_index=len(records)
                ) from exc
            pos += length
        if not records:
            raise ChainCorruption("chain file holds no blocks", block_index=0)

        ledger = cls(config)
        if records[0].encode() != ledger.blocks[0].encode():
            raise ChainCorruption(
                "genesis block does not match node configuration", block_index=0
            )
        for block in records[1:]:
            # Report the record position, not block.index: a desynced record
            # stream decodes garbage indices.
            if block.prev_hash != ledger.blocks[-1].block_hash:
                raise ChainCorruption("previous-hash link broken", block_index=ledger.height)
            if block.index != ledger.height:
                raise ChainCorruption(
                    f"index out of sequence (decoded {block.index})", block_index=ledger.height
                )
            for tx in block.tx_list:
                try:
                    ledger.submit_transaction(tx)
                except LedgerError as exc:
                    raise ChainCorruption(
                        f"replay rejected: {exc}", block_index=block.index
                    ) from exc
            sealed = ledger.blocks[-1]
            if sealed.state_root != block.state_root or sealed.block_hash != block.block_hash:
                raise ChainCorruption(
                    "block does not recompute from its transactions", block_index=block.index
                )
        if persist:
            ledger.persist_path = path
        return ledger
