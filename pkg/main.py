#!/usr/bin/env python3
"""
Set-Packing Entity Resolution
Command-line entry point: solve, synth, ccrelax-compare and metrics
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable

sys.path.append(str(Path(__file__).parent))

from config.config import (
    DOI_EPSILON,
    DOI_MODE,
    DOI_PATIENCE,
    LOG_FILE_NAME,
    LOG_LEVEL,
    MAX_NEW_COLUMNS,
    OUTPUT_DIR,
    PRICING_STRATEGY,
    PRICING_THREADS,
    PROBABILITY_BIAS,
    RANDOM_SEED,
)
from src.pipeline import EXIT_INPUT, EXIT_SOLVER, RunConfig, run, run_ccrelax_compare, run_metrics, run_synth
from src.synthetic import check_parameters


def setup_logging(level: str = LOG_LEVEL, output_dir: Path = OUTPUT_DIR):
    """Setup logging configuration"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=log_format,
        handlers=[
            logging.FileHandler(output_dir / LOG_FILE_NAME),
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )


def add_input_arguments(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--pairs', type=Path, help='scored pairs file: id1,id2,p')
    source.add_argument('--theta', type=Path, help='raw cost file: id1,id2,theta')
    parser.add_argument('--bias', type=float, default=PROBABILITY_BIAS, help='theta = bias - p (default 0.5)')
    parser.add_argument('--stats', type=Path, help='JSON-lines statistics output')


def add_solver_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--doi', choices=['none', 'varying', 'flexible'], default=DOI_MODE)
    parser.add_argument('--k', type=int, help='threshold count for flexible DOIs')
    parser.add_argument('--epsilon', type=float, default=DOI_EPSILON)
    parser.add_argument('--doi-patience', type=int, default=DOI_PATIENCE,
                        help='RMP solves without progress before pricing falls back to plain duals (0 = never)')
    parser.add_argument('--pricing', choices=['exact', 'heuristic', 'hybrid'], default=PRICING_STRATEGY)
    parser.add_argument('--max-cols', type=int, default=MAX_NEW_COLUMNS, help='columns added per iteration')
    parser.add_argument('--threads', type=int, default=PRICING_THREADS)
    parser.add_argument('--seed', type=int, default=RANDOM_SEED)
    parser.add_argument('--timings', action='store_true', help='include wall-clock timings in the stats')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Entity resolution by set packing and column generation')
    parser.add_argument('--log-level', default=LOG_LEVEL)
    parser.add_argument('--log-dir', type=Path, default=OUTPUT_DIR)
    commands = parser.add_subparsers(dest='command', required=True)

    solve = commands.add_parser('solve', help='cluster a scored-pairs or theta file')
    add_input_arguments(solve)
    add_solver_arguments(solve)
    solve.add_argument('--truth', type=Path, help='reference partition: id,cluster_label')
    solve.add_argument('--out', type=Path, default=OUTPUT_DIR / 'clusters.csv')

    synth = commands.add_parser('synth', help='write a planted-partition instance')
    synth.add_argument('--n', type=int, required=True)
    synth.add_argument('--clusters', type=int, required=True)
    synth.add_argument('--noise', type=float, default=0.0)
    synth.add_argument('--seed', type=int, default=RANDOM_SEED)
    synth.add_argument('--out', type=Path, default=OUTPUT_DIR / 'synthetic', help='output directory')
    synth.add_argument('--solve', action='store_true', help='solve the instance right away')
    synth.add_argument('--doi', choices=['none', 'varying', 'flexible'], default=DOI_MODE)

    compare = commands.add_parser('ccrelax-compare', help='set-packing LP vs cycle/odd-wheel LP (n <= 10)')
    add_input_arguments(compare)

    metrics = commands.add_parser('metrics', help='compare two id,cluster_label files')
    metrics.add_argument('--pred', type=Path, required=True)
    metrics.add_argument('--truth', type=Path, required=True)
    return parser


def prepare(args: argparse.Namespace) -> Callable[[], int]:
    """Validate the command's settings; the returned callable runs it"""
    if args.command == 'synth':
        check_parameters(args.n, args.clusters, args.noise)
        return lambda: run_synth(args.n, args.clusters, args.noise, args.seed, args.out, args.solve, args.doi)
    if args.command == 'metrics':
        return lambda: run_metrics(args.pred, args.truth)

    options = dict(pairs_path=args.pairs, theta_path=args.theta, stats_path=args.stats, bias=args.bias)
    if args.command == 'ccrelax-compare':
        config = RunConfig(**options)
        return lambda: run_ccrelax_compare(config)

    config = RunConfig(truth_path=args.truth, out_path=args.out, doi_mode=args.doi, k=args.k,
                       epsilon=args.epsilon, doi_patience=args.doi_patience, pricing=args.pricing,
                       max_new_columns=args.max_cols, threads=args.threads, seed=args.seed,
                       timings=args.timings, **options)
    return lambda: run(config)


def main(argv=None) -> int:
    """Main pipeline execution; returns the process exit code"""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_dir)
    logger = logging.getLogger(__name__)

    logger.info("=" * 60)
    logger.info(f"Set-packing entity resolution: {args.command}")
    logger.info("=" * 60)

    try:
        command = prepare(args)
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_INPUT

    try:
        code = command()
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return EXIT_SOLVER

    if code == 0:
        logger.info("Completed successfully")
    return code


if __name__ == "__main__":
    sys.exit(main())
