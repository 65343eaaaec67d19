"""Administrative command line: node initialization, serving, chain
inspection and verification, account lookup, and workload replay.

The config file is found via --config, then the BR_CONFIG environment
variable, then ./chainreview.json. Subcommands support --json for
machine-readable output.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import NodeConfig, fresh_config, resolve_config_path
from .engine import ReviewEngine
from .errors import ChainCorruption, ChainReviewError
from .workload import parse_workload


def _load_config(args) -> NodeConfig:
    path = resolve_config_path(args.config)
    if not path.exists():
        raise ChainReviewError(
            f"no config file at {path}; run `chainreview init` or set BR_CONFIG"
        )
    return NodeConfig.from_file(path)


def _emit(args, payload: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2))
    else:
        print(human)


def _cmd_init(args) -> int:
    path = resolve_config_path(args.config)
    if path.exists() and not args.force:
        print(f"refusing to overwrite existing config at {path} (use --force)", file=sys.stderr)
        return 1
    config = fresh_config(data_dir=args.data_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    config.write(path)
    engine = ReviewEngine(config)
    _emit(
        args,
        {
            "config": str(path),
            "data_dir": config.data_dir,
            "height": engine.ledger.height,
            "distributor": engine.ledger.distributor_address.hex(),
        },
        f"initialized node at {config.data_dir} (config {path}), "
        f"height={engine.ledger.height}, "
        f"distributor={engine.ledger.distributor_address.hex()}",
    )
    return 0


def _cmd_serve(args) -> int:
    from .gateway import serve

    config = _load_config(args)
    try:
        serve(config, host=args.host, port=args.port)
    except ChainCorruption as exc:
        print(f"refusing to start: {exc} (block {exc.block_index})", file=sys.stderr)
        return 1
    return 0


def _cmd_chain_verify(args) -> int:
    engine = ReviewEngine(_load_config(args))
    result = engine.ledger.verify_chain()
    _emit(
        args,
        {
            "ok": result.ok,
            "height": result.height,
            "broken_at": result.broken_at,
            "reason": result.reason,
        },
        f"OK, height={result.height}"
        if result.ok
        else f"BROKEN at block {result.broken_at}: {result.reason}",
    )
    return 0 if result.ok else 1


def _cmd_chain_show(args) -> int:
    engine = ReviewEngine(_load_config(args))
    block = engine.ledger.read_block(args.index)
    payload = {
        "index": block.index,
        "block_hash": block.block_hash.hex(),
        "prev_hash": block.prev_hash.hex(),
        "state_root": block.state_root.hex(),
        "transactions": [
            {
                "tx_hash": tx.tx_hash.hex(),
                "sender": tx.sender.hex(),
                "kind": tx.payload.KIND,
                "nonce": tx.nonce,
                "gas_fee": tx.gas_fee,
                "timestamp": tx.timestamp,
            }
            for tx in block.tx_list
        ],
    }
    lines = [
        f"block {block.index}",
        f"  hash       {block.block_hash.hex()}",
        f"  prev_hash  {block.prev_hash.hex()}",
        f"  state_root {block.state_root.hex()}",
    ]
    for tx in block.tx_list:
        lines.append(f"  tx {tx.payload.KIND} from {tx.sender.hex()} nonce={tx.nonce}")
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_account_show(args) -> int:
    engine = ReviewEngine(_load_config(args))
    try:
        address = bytes.fromhex(args.address)
    except ValueError:
        raise ChainReviewError(f"not a hex address: {args.address!r}") from None
    if len(address) != 20:
        raise ChainReviewError("addresses are 20 bytes (40 hex characters)")
    account = engine.ledger.read_account(address)
    user = engine.contract.users.get(address)
    payload = {
        "address": args.address,
        "balance": account.balance,
        "nonce": account.nonce,
        "name": user.display_name if user else None,
        "role": user.role if user else None,
        "groups": sorted(user.groups) if user else [],
        "granted": address in engine.ledger.granted,
    }
    _emit(
        args,
        payload,
        f"account {args.address}\n"
        f"  balance {account.balance}\n"
        f"  nonce   {account.nonce}\n"
        f"  name    {payload['name'] or '(unset)'}",
    )
    return 0


def _cmd_replay(args) -> int:
    config = _load_config(args)
    spec_path = Path(args.specfile)
    if not spec_path.exists():
        raise ChainReviewError(f"no workload file at {spec_path}")
    spec = parse_workload(spec_path.read_text(encoding="utf-8"))
    engine = ReviewEngine(config)
    report = engine.replay_workload(spec, seed=args.seed)
    payload = {
        "counts": report.counts,
        "duration_seconds": round(report.duration_seconds, 3),
        "chain_height": report.chain_height,
        "state_root": report.state_root,
        "chain_ok": report.chain_ok,
        "failures": report.failures,
    }
    counts = " ".join(f"{k}={v}" for k, v in sorted(report.counts.items()))
    verdict = "ok" if report.ok else "FAILED"
    _emit(
        args,
        payload,
        f"replay {verdict}: {counts}\n"
        f"  duration {report.duration_seconds:.2f}s, height {report.chain_height}, "
        f"chain verified: {report.chain_ok}"
        + ("".join(f"\n  failure: {f}" for f in report.failures)),
    )
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainreview")
    parser.add_argument("-c", "--config", help="path to the node config file")
    sub = parser.add_subparsers(dest="command")

    p_init = sub.add_parser("init", help="create a config file and genesis chain")
    p_init.add_argument("--data-dir", default="data")
    p_init.add_argument("--force", action="store_true")
    p_init.add_argument("--json", action="store_true")
    p_init.set_defaults(func=_cmd_init)

    p_serve = sub.add_parser("serve", help="start the HTTP gateway")
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.set_defaults(func=_cmd_serve)

    p_chain = sub.add_parser("chain", help="chain inspection")
    chain_sub = p_chain.add_subparsers(dest="chain_command")
    p_verify = chain_sub.add_parser("verify", help="verify hashes, links, and replay")
    p_verify.add_argument("--json", action="store_true")
    p_verify.set_defaults(func=_cmd_chain_verify)
    p_show = chain_sub.add_parser("show", help="print one block")
    p_show.add_argument("index", type=int)
    p_show.add_argument("--json", action="store_true")
    p_show.set_defaults(func=_cmd_chain_show)

    p_account = sub.add_parser("account", help="account inspection")
    account_sub = p_account.add_subparsers(dest="account_command")
    p_acct_show = account_sub.add_parser("show")
    p_acct_show.add_argument("address")
    p_acct_show.add_argument("--json", action="store_true")
    p_acct_show.set_defaults(func=_cmd_account_show)

    p_replay = sub.add_parser("replay", help="run a workload spec file")
    p_replay.add_argument("specfile")
    p_replay.add_argument("--seed", type=int)
    p_replay.add_argument("--json", action="store_true")
    p_replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func = getattr(args, "func", None)
    if func is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return func(args)
    except ChainCorruption as exc:
        print(f"chain corrupt: {exc} (block {exc.block_index})", file=sys.stderr)
        return 1
    except ChainReviewError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
