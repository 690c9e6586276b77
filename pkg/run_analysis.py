#!/usr/bin/env python3
"""
DOI comparison suite
Runs column generation on synthetic instances under every DOI setting and
pricing strategy, writes the iteration-count table and, on request, scores
the clusters against a hierarchical-clustering baseline
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent))

from config.config import LOG_LEVEL, OUTPUT_DIR
from main import setup_logging
from src.doi_comparison import DEFAULT_K_VALUES, compare_baseline, compare_doi_modes
from src.exceptions import ResolutionError

# flexible DOIs must never need more than this many times the none-mode iterations
ITERATION_GUARD = 1.5


def main(argv=None) -> bool:
    parser = argparse.ArgumentParser(description='Compare CG iteration counts across DOI modes')
    parser.add_argument('--out', type=Path, default=OUTPUT_DIR / 'doi_comparison.csv')
    parser.add_argument('--k', type=int, nargs='+', default=list(DEFAULT_K_VALUES))
    parser.add_argument('--strategies', nargs='+', choices=['exact', 'heuristic', 'hybrid'],
                        help='pricing strategies to compare (default: the configured one)')
    parser.add_argument('--timings', action='store_true', help='add wall-clock seconds per run')
    parser.add_argument('--baseline', type=Path, help='also write the hierarchical-clustering comparison here')
    parser.add_argument('--log-level', default=LOG_LEVEL)
    args = parser.parse_args(argv)

    setup_logging(args.log_level)
    logger = logging.getLogger(__name__)
    logger.info("Running the DOI comparison suite...")

    try:
        table = compare_doi_modes(k_values=args.k, strategies=args.strategies, timings=args.timings)
        baseline = compare_baseline() if args.baseline else None
    except ResolutionError as e:
        logger.error(f"DOI comparison failed: {e}")
        logger.exception("Full error details:")
        return False

    args.out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(args.out, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(table)} rows to {args.out}")

    print(table.to_string(index=False))
    measures = ["iterations", "iteration_ratio"] + (["seconds"] if args.timings else [])
    summary = table.groupby(["pricing", "doi"], sort=False)[measures].mean()
    print("\nMean per pricing strategy and DOI setting:")
    print(summary.to_string())

    if baseline is not None:
        args.baseline.parent.mkdir(parents=True, exist_ok=True)
        baseline.to_csv(args.baseline, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(baseline)} rows to {args.baseline}")
        print("\nClustering quality against the planted partition:")
        print(baseline.groupby("method", sort=False).mean(numeric_only=True).to_string())

    flexible = table[table["doi"].str.startswith("flexible")]
    slow = flexible[flexible["iteration_ratio"] > ITERATION_GUARD]
    if not slow.empty:
        logger.warning(f"{len(slow)} flexible runs needed more than {ITERATION_GUARD}x the none-mode iterations")
        return False
    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
