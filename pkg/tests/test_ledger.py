"""Chain mechanics: genesis, grants, submission guards, hash linkage,
replay determinism, and the append-only persistence format."""
import dataclasses
import random

import pytest

from chainreview import contract as ct
from chainreview.crypto import generate_keypair
from chainreview.errors import (
    BadSignature,
    ChainCorruption,
    DuplicateAccount,
    InsufficientBalance,
    LedgerError,
    NonceMismatch,
    NotFoundError,
)
from chainreview.ledger import GENESIS_PREV_HASH, GasSchedule, Ledger, LedgerConfig

from conftest import seeded

CONFIG = LedgerConfig(genesis_seed=bytes(range(32)))


def fresh_ledger(**overrides) -> Ledger:
    return Ledger(dataclasses.replace(CONFIG, **overrides))


def registered_user(ledger: Ledger, n: int, role: str = "scholar"):
    keys = generate_keypair(seed=seeded(n))
    ledger.register_account(keys, role=role)
    ledger.grant_ether(keys.address)
    return keys


# -- genesis --


def test_genesis_shape_and_config_echo():
    ledger = fresh_ledger()
    genesis = ledger.read_block(0)
    assert genesis.index == 0
    assert genesis.prev_hash == GENESIS_PREV_HASH
    assert not genesis.tx_list
    assert ledger.read_account(ledger.distributor_address).balance == 10**12
    assert ledger.read_account(Ledger.FEE_SINK).balance == 0


def test_genesis_verifies_and_conserves_supply():
    ledger = fresh_ledger()
    assert ledger.verify_chain().ok
    assert ledger.total_supply() == CONFIG.distributor_balance


def test_nonpositive_distributor_balance_rejected():
    with pytest.raises(LedgerError):
        fresh_ledger(distributor_balance=0)


# -- registration --


def test_register_fresh_account_has_zero_balance():
    ledger = fresh_ledger()
    keys = generate_keypair(seed=seeded(1))
    address = ledger.register_account(keys)
    account = ledger.read_account(address)
    assert account.balance == 0 and account.nonce == 1  # registration consumed nonce 0


def test_duplicate_registration_rejected():
    ledger = fresh_ledger()
    keys = generate_keypair(seed=seeded(1))
    ledger.register_account(keys)
    with pytest.raises(DuplicateAccount):
        ledger.register_account(keys)


def test_23_registrations_yield_23_distinct_addresses():
    ledger = fresh_ledger()
    addresses = {ledger.register_account(generate_keypair(seed=seeded(i))) for i in range(23)}
    assert len(addresses) == 23


# -- grants --


def test_grant_credits_configured_amount():
    ledger = fresh_ledger()
    keys = generate_keypair(seed=seeded(1))
    ledger.register_account(keys)
    ledger.grant_ether(keys.address)
    assert ledger.read_account(keys.address).balance == CONFIG.grant_amount


def test_second_grant_to_same_address_rejected():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    with pytest.raises(LedgerError):
        ledger.grant_ether(keys.address)


def test_distributor_balance_after_23_grants_matches_arithmetic():
    ledger = fresh_ledger()
    gas_grant = ledger.config.gas.fee_for(ct.GrantEther(to=b"\x00" * 20))
    for i in range(23):
        registered_user(ledger, i)
    expected = CONFIG.distributor_balance - 23 * (CONFIG.grant_amount + gas_grant)
    assert ledger.read_account(ledger.distributor_address).balance == expected
    assert ledger.total_supply() == CONFIG.distributor_balance


def test_grant_to_unregistered_address_fails():
    ledger = fresh_ledger()
    with pytest.raises(LedgerError):
        ledger.grant_ether(b"\x99" * 20)


# -- submission guards --


def test_valid_set_name_receipt():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    height_before = ledger.height
    receipt = ledger.submit_payload(keys, ct.SetName(name="Reviewer-7"))
    assert receipt.ok
    assert receipt.block_index == height_before
    assert ledger.read_block(receipt.block_index).tx_list[0].payload.name == "Reviewer-7"


def test_nonce_replay_rejected_before_sealing():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    tx = ledger.build_transaction(keys, ct.SetName(name="once"))
    ledger.submit_transaction(tx)
    height = ledger.height
    with pytest.raises(LedgerError):
        ledger.submit_transaction(tx)
    assert ledger.height == height  # nothing sealed


def test_stale_nonce_rejected():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    tx = ledger.build_transaction(keys, ct.SetName(name="first"))
    ledger.submit_transaction(tx)
    stale = dataclasses.replace(tx, timestamp=ledger.next_timestamp())
    from chainreview.crypto import sign

    stale = dataclasses.replace(stale, signature=sign(stale.signing_bytes(), keys))
    with pytest.raises(NonceMismatch):
        ledger.submit_transaction(stale)


def test_bad_signature_rejected():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    other = generate_keypair(seed=seeded(2))
    tx = ledger.build_transaction(keys, ct.SetName(name="spoof"))
    from chainreview.crypto import sign

    forged = dataclasses.replace(tx, signature=sign(tx.signing_bytes(), other))
    with pytest.raises(BadSignature):
        ledger.submit_transaction(forged)


def test_gas_exceeding_balance_rejected_with_balances_unchanged():
    ledger = fresh_ledger()
    keys = generate_keypair(seed=seeded(1))
    ledger.register_account(keys)  # no grant: balance 0, gas 21 unaffordable
    supply_before = ledger.total_supply()
    balances_before = {a: acct.balance for a, acct in ledger.accounts.items()}
    with pytest.raises(InsufficientBalance):
        ledger.submit_payload(keys, ct.SetName(name="broke"))
    assert ledger.total_supply() == supply_before
    assert {a: acct.balance for a, acct in ledger.accounts.items()} == balances_before


def test_failed_payload_still_charges_gas_and_seals():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    balance_before = ledger.read_account(keys.address).balance
    receipt = ledger.submit_payload(keys, ct.SetName(name=""))  # contract-level rejection
    assert not receipt.ok and receipt.error
    assert ledger.read_account(keys.address).balance == balance_before - receipt.gas_charged
    assert ledger.read_block(receipt.block_index).tx_list  # audit trail kept
    assert ledger.verify_chain().ok


# -- reads --


def test_read_block_out_of_range():
    ledger = fresh_ledger()
    with pytest.raises(NotFoundError):
        ledger.read_block(99)
    with pytest.raises(NotFoundError):
        ledger.read_account(b"\x01" * 20)


def test_read_account_returns_snapshot():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    snapshot = ledger.read_account(keys.address)
    snapshot.balance = 0
    assert ledger.read_account(keys.address).balance == CONFIG.grant_amount


# -- chain verification and invariants --


def _random_workload(ledger: Ledger, txs: int, seed: int = 7):
    rng = random.Random(seed)
    users = [registered_user(ledger, i) for i in range(6)]
    for i in range(txs):
        keys = rng.choice(users)
        ledger.submit_payload(keys, ct.SetName(name=f"name-{i}-{rng.randrange(100)}"))


def test_replay_from_genesis_reproduces_state_after_100_txs():
    ledger = fresh_ledger()
    _random_workload(ledger, 100)
    result = ledger.verify_chain()
    assert result.ok and result.height == ledger.height
    assert ledger.total_supply() == CONFIG.distributor_balance


def test_tampered_transaction_detected_at_its_block():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    ledger.submit_payload(keys, ct.SetName(name="genuine"))
    target = 3
    block = ledger.blocks[target]
    tampered_tx = dataclasses.replace(block.tx_list[0], gas_fee=block.tx_list[0].gas_fee + 1)
    ledger.blocks[target] = dataclasses.replace(block, tx_list=(tampered_tx,))
    result = ledger.verify_chain()
    assert not result.ok
    assert result.broken_at == target


def test_hash_linkage_and_append_only():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    hashes_before = [b.block_hash for b in ledger.blocks]
    ledger.submit_payload(keys, ct.SetName(name="append"))
    assert [b.block_hash for b in ledger.blocks[: len(hashes_before)]] == hashes_before
    for i in range(1, ledger.height):
        assert ledger.blocks[i].prev_hash == ledger.blocks[i - 1].block_hash


def test_nonce_monotonicity_per_sender():
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    for i in range(5):
        ledger.submit_payload(keys, ct.SetName(name=f"n{i}"))
    nonces = [
        tx.nonce
        for block in ledger.blocks
        for tx in block.tx_list
        if tx.sender == keys.address
    ]
    assert nonces == sorted(nonces)
    assert len(set(nonces)) == len(nonces)


def test_gas_schedule_override():
    schedule = GasSchedule(default_fee=21, overrides=(("set_name", 5),))
    assert schedule.fee_for(ct.SetName(name="x")) == 5
    assert schedule.fee_for(ct.GrantEther(to=b"\x00" * 20)) == 21
    assert schedule.fee_for(ct.RegisterAccount(public_key=b"", role="scholar")) == 0


# -- persistence --


def test_save_load_roundtrip(tmp_path):
    ledger = fresh_ledger()
    _random_workload(ledger, 10)
    path = tmp_path / "chain.log"
    ledger.save(path)
    loaded = Ledger.load(path, CONFIG)
    assert loaded.height == ledger.height
    assert loaded.state_root() == ledger.state_root()
    assert [b.block_hash for b in loaded.blocks] == [b.block_hash for b in ledger.blocks]


def test_load_detects_corrupted_record(tmp_path):
    ledger = fresh_ledger()
    keys = registered_user(ledger, 1)
    ledger.submit_payload(keys, ct.SetName(name="will-be-corrupted"))
    path = tmp_path / "chain.log"
    ledger.save(path)
    raw = bytearray(path.read_bytes())
    raw[-40] ^= 0xFF  # inside the last block's record
    path.write_bytes(bytes(raw))
    with pytest.raises(ChainCorruption):
        Ledger.load(path, CONFIG)


def test_load_rejects_mismatched_genesis_config(tmp_path):
    ledger = fresh_ledger()
    path = tmp_path / "chain.log"
    ledger.save(path)
    with pytest.raises(ChainCorruption):
        Ledger.load(path, dataclasses.replace(CONFIG, distributor_balance=5))
