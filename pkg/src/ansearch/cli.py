"""Command-line front-end.

Exit codes: 0 on success, 1 when any run failed, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import harness
from .harness import ConfigError


def _parse_values(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _parse_gens(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _print_summaries(algorithm: str, summaries) -> None:
    print(f"algorithm: {algorithm}")
    print(f"{'function':10s} {'mean':>14s} {'std':>14s} {'nfe':>12s} {'sr':>8s}")
    for fid, s in summaries.items():
        nfe = "---" if s.mean_nfe_to_success is None else f"{s.mean_nfe_to_success:.1f}"
        print(f"{fid:10s} {s.mean:14.6E} {s.std:14.6E} {nfe:>12s} {s.success_rate * 100:7.6g}%")


def cmd_run(args) -> int:
    config = harness.load_config(args.config)
    batch = harness.run_batch(config, workers=args.workers)
    _print_summaries(batch.algorithm, batch.summaries)
    if batch.failures:
        for fid, idx, msg in batch.failures:
            print(f"FAILED {fid} run {idx}: {msg}", file=sys.stderr)
        return 1
    print(f"reports written to {config.output_dir}")
    return 0


def cmd_sweep(args) -> int:
    config = harness.load_config(args.config)
    rows = harness.sweep(config, args.param, _parse_values(args.values), workers=args.workers)
    print(f"{'function':10s} {args.param:>8s} {'mean':>14s} {'sr':>8s}  best")
    for row in rows:
        s = row.summary
        marker = "*" if row.best else ""
        print(f"{row.function_id:10s} {row.value:8g} {s.mean:14.6E} "
              f"{s.success_rate * 100:7.6g}%  {marker}")
    print(f"sweep table written to {config.output_dir}")
    return 0


def cmd_trace(args) -> int:
    config = harness.load_config(args.config)
    gens = _parse_gens(args.gens) if args.gens else None
    result, warnings = harness.trace(config, gens)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    captured = [snap.generation for snap in (result.snapshots or [])]
    print(f"captured generations {captured}; best fitness {result.best_fitness!r}; "
          f"snapshots in {config.output_dir}")
    return 0


def cmd_compare(args) -> int:
    configs = [harness.load_config(path) for path in args.configs]
    report = harness.compare(configs, reference=args.reference, workers=args.workers,
                             output_dir=args.output_dir)
    peers = [lab for lab in report.labels if lab != report.reference]
    print(f"reference: {report.reference}")
    header = "function  " + "  ".join(f"{p:>8s}" for p in peers)
    print(header)
    symbol_text = {"minus": "-", "plus": "+", "approx": "~"}
    for fid in report.function_ids:
        row = "  ".join(f"{symbol_text[report.verdicts[p][fid].symbol]:>8s}" for p in peers)
        print(f"{fid:8s}  {row}")
    for sym in ("minus", "plus", "approx"):
        row = "  ".join(f"{report.tallies[p][sym]:>8d}" for p in peers)
        print(f"{symbol_text[sym]:8s}  {row}")
    print("signed-rank p / adjusted p:")
    for peer in peers:
        print(f"  {report.reference} vs {peer}: {report.signed_rank_p[peer]:.4E} / "
              f"{report.adjusted_p[peer]:.4E}")
    for lab in report.labels:
        print(f"  {lab}: mean rank {report.mean_rank[lab]:.4f}, "
              f"overall rank {report.overall_rank[lab]}")
    return 0


def cmd_stats(args) -> int:
    found = harness.recompute_summaries(args.results_dir)
    if not found:
        print(f"no raw results files in {args.results_dir}", file=sys.stderr)
        return 1
    for alg, by_fid in sorted(found.items()):
        _print_summaries(alg, by_fid)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ansearch",
        description="Across-neighbourhood search benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a batch of seeded runs")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one tunable parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=sorted(harness.SWEEPABLE))
    p.add_argument("--values", required=True, help="comma-separated candidate values")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="capture position/superior snapshots of one run")
    p.add_argument("config")
    p.add_argument("--gens", help="comma-separated snapshot generations")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("compare", help="run several algorithms under one protocol")
    p.add_argument("configs", nargs="+")
    p.add_argument("--reference", default="ans")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="recompute summaries from raw results")
    p.add_argument("results_dir")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
