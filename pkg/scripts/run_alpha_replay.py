#!/usr/bin/env python3
"""Run the alpha-scale workload (23 users, 19 articles, 31 comments, 49
annotations) against a throwaway node and print the replay report.

    python scripts/run_alpha_replay.py [--seed N] [--write-spec PATH]
"""
import argparse
import sys
import tempfile
from pathlib import Path

from chainreview.config import NodeConfig
from chainreview.engine import ReviewEngine
from chainreview.workload import build_alpha_workload, format_workload


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--users", type=int, default=23)
    parser.add_argument("--articles", type=int, default=19)
    parser.add_argument("--comments", type=int, default=31)
    parser.add_argument("--annotations", type=int, default=49)
    parser.add_argument("--write-spec", metavar="PATH",
                        help="write the generated workload file and exit")
    args = parser.parse_args()

    spec = build_alpha_workload(
        users=args.users,
        articles=args.articles,
        comments=args.comments,
        annotations=args.annotations,
        seed=args.seed,
    )
    if args.write_spec:
        Path(args.write_spec).write_text(format_workload(spec))
        print(f"wrote {len(spec.actions)} actions to {args.write_spec}")
        return 0

    with tempfile.TemporaryDirectory() as tmp:
        engine = ReviewEngine(NodeConfig(data_dir=tmp, genesis_seed=bytes(32)))
        report = engine.replay_workload(spec)
    counts = " ".join(f"{k}={v}" for k, v in sorted(report.counts.items()))
    print(f"counts:      {counts}")
    print(f"duration:    {report.duration_seconds:.2f}s")
    print(f"height:      {report.chain_height}")
    print(f"state root:  {report.state_root}")
    print(f"chain ok:    {report.chain_ok}")
    for failure in report.failures:
        print(f"FAILURE: {failure}")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
