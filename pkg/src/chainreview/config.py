"""Node configuration.

One JSON file configures a node end to end; the ``BR_CONFIG`` environment
variable points at it. The genesis seed determines the distributor account,
group key material, and all derived per-article entropy, which is what makes
workload replays reproduce state roots exactly.
"""
from __future__ import annotations

import json
import os
import secrets
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ChainReviewError
from .ledger import GasSchedule, LedgerConfig
from .summary import VerifierConfig

ENV_CONFIG = "BR_CONFIG"
DEFAULT_CONFIG_NAME = "chainreview.json"


@dataclass(frozen=True)
class NodeConfig:
    data_dir: str = "data"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8545
    distributor_balance: int = 10**12
    grant_amount: int = 10**6
    gas_default_fee: int = 21
    gas_register_fee: int = 0
    pool_seed: int = 0
    max_summary_attempts: int = 16
    verifier: VerifierConfig = field(default_factory=VerifierConfig)
    auth_window_seconds: int = 300
    decrypt_reads_per_minute: int = 120
    genesis_seed: bytes = b"\x00" * 32

    def ledger_config(self) -> LedgerConfig:
        return LedgerConfig(
            distributor_balance=self.distributor_balance,
            grant_amount=self.grant_amount,
            gas=GasSchedule(default_fee=self.gas_default_fee, register_fee=self.gas_register_fee),
            genesis_seed=self.genesis_seed,
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "data_dir": self.data_dir,
                "listen_host": self.listen_host,
                "listen_port": self.listen_port,
                "distributor_balance": self.distributor_balance,
                "grant_amount": self.grant_amount,
                "gas_default_fee": self.gas_default_fee,
                "gas_register_fee": self.gas_register_fee,
                "pool_seed": self.pool_seed,
                "max_summary_attempts": self.max_summary_attempts,
                "verifier": {
                    "top_n": self.verifier.top_n,
                    "coverage_threshold": self.verifier.coverage_threshold,
                    "min_length_fraction": self.verifier.min_length_fraction,
                    "max_length_fraction": self.verifier.max_length_fraction,
                },
                "auth_window_seconds": self.auth_window_seconds,
                "decrypt_reads_per_minute": self.decrypt_reads_per_minute,
                "genesis_seed": self.genesis_seed.hex(),
            },
            indent=2,
        )

    @classmethod
    def from_dict(cls, raw: dict) -> "NodeConfig":
        verifier_raw = raw.get("verifier", {})
        verifier = VerifierConfig(
            top_n=verifier_raw.get("top_n", 10),
            coverage_threshold=verifier_raw.get("coverage_threshold", 0.5),
            min_length_fraction=verifier_raw.get("min_length_fraction", 0.02),
            max_length_fraction=verifier_raw.get("max_length_fraction", 0.3),
        )
        seed_hex = raw.get("genesis_seed")
        genesis_seed = bytes.fromhex(seed_hex) if seed_hex else b"\x00" * 32
        if len(genesis_seed) != 32:
            raise ChainReviewError("genesis_seed must be 32 bytes of hex")
        defaults = cls()
        return cls(
            data_dir=raw.get("data_dir", defaults.data_dir),
            listen_host=raw.get("listen_host", defaults.listen_host),
            listen_port=raw.get("listen_port", defaults.listen_port),
            distributor_balance=raw.get("distributor_balance", defaults.distributor_balance),
            grant_amount=raw.get("grant_amount", defaults.grant_amount),
            gas_default_fee=raw.get("gas_default_fee", defaults.gas_default_fee),
            gas_register_fee=raw.get("gas_register_fee", defaults.gas_register_fee),
            pool_seed=raw.get("pool_seed", defaults.pool_seed),
            max_summary_attempts=raw.get("max_summary_attempts", defaults.max_summary_attempts),
            verifier=verifier,
            auth_window_seconds=raw.get("auth_window_seconds", defaults.auth_window_seconds),
            decrypt_reads_per_minute=raw.get(
                "decrypt_reads_per_minute", defaults.decrypt_reads_per_minute
            ),
            genesis_seed=genesis_seed,
        )

    @classmethod
    def from_file(cls, path) -> "NodeConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def fresh_config(data_dir: str, **overrides) -> NodeConfig:
    """Config for a new node: a random genesis seed unless one is supplied."""
    overrides.setdefault("genesis_seed", secrets.token_bytes(32))
    return NodeConfig(data_dir=data_dir, **overrides)


def resolve_config_path(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_CONFIG)
    if env:
        return Path(env)
    return Path(DEFAULT_CONFIG_NAME)
