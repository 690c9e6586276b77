# src/pipeline.py
"""
End-to-end entity resolution: ingest scored pairs, run column generation,
integerize, evaluate against a reference partition and write the outputs.

Every ``run_*`` entry point returns a process exit code: 0 on success, 1 when
an optimization step fails, 2 on input or I/O problems.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

from config.config import (
    DOI_EPSILON,
    DOI_MODE,
    DOI_PATIENCE,
    DOI_THRESHOLDS,
    MAX_BNB_NODES,
    MAX_NEW_COLUMNS,
    OUTPUT_DIR,
    PRICING_STRATEGY,
    PRICING_THREADS,
    PROBABILITY_BIAS,
    RANDOM_SEED,
)
from src.ccrelax import compare_tightness
from src.colgen import CgConfig, CgResult, Clustering, integerize, run_cg
from src.core import Instance
from src.data_loader import IdTable, PairFileLoader
from src.exceptions import InputError, ResolutionError, UniverseMismatch
from src.master import DoiConfig, DoiMode
from src.metrics import LabeledPartition, evaluate
from src.pricing import PricingConfig, PricingStrategy
from src.result_writer import ResultWriter, format_summary, iteration_records, summary_record
from src.synthetic import check_parameters, generate_synthetic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INPUT = 2


@dataclass
class RunConfig:
    pairs_path: Optional[Path] = None
    theta_path: Optional[Path] = None
    truth_path: Optional[Path] = None
    out_path: Path = OUTPUT_DIR / "clusters.csv"
    stats_path: Optional[Path] = None
    doi_mode: str = DOI_MODE
    k: Optional[int] = None            # None = configured default
    epsilon: float = DOI_EPSILON
    doi_patience: int = DOI_PATIENCE
    pricing: str = PRICING_STRATEGY
    max_new_columns: int = MAX_NEW_COLUMNS
    bias: float = PROBABILITY_BIAS
    threads: int = PRICING_THREADS
    seed: int = RANDOM_SEED
    max_bnb_nodes: int = MAX_BNB_NODES
    timings: bool = False

    def __post_init__(self):
        if (self.pairs_path is None) == (self.theta_path is None):
            raise ValueError("Exactly one of the scored-pairs file and the theta file is required")
        self.doi_mode = DoiMode(self.doi_mode).value
        self.pricing = PricingStrategy(self.pricing).value
        if self.k is not None and self.doi_mode != DoiMode.FLEXIBLE.value:
            raise ValueError(f"K only applies to flexible DOIs, not to mode '{self.doi_mode}'")
        for name in ("pairs_path", "theta_path", "truth_path", "out_path", "stats_path"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))
        # solver settings fail here, before any file is touched
        self.cg_config()

    def cg_config(self) -> CgConfig:
        doi = DoiConfig(mode=self.doi_mode, k=DOI_THRESHOLDS if self.k is None else self.k,
                        epsilon=self.epsilon)
        pricing = PricingConfig(strategy=self.pricing, max_new_columns=self.max_new_columns,
                                seed=self.seed, threads=self.threads)
        return CgConfig(doi=doi, pricing=pricing, doi_patience=self.doi_patience,
                        max_bnb_nodes=self.max_bnb_nodes)


def guarded(action: Callable[[], int], what: str) -> int:
    """Run ``action`` and turn the package's errors into exit codes"""
    try:
        return action()
    except (InputError, UniverseMismatch, OSError) as e:
        logger.error(f"{what} failed on its input: {e}")
        logger.exception("Full error details:")
        return EXIT_INPUT
    except ResolutionError as e:
        logger.error(f"{what} failed: {e}")
        logger.exception("Full error details:")
        return EXIT_SOLVER
    except ValueError as e:
        # internal faults, e.g. a dual-sign violation
        logger.error(f"{what} failed: {e}")
        logger.exception("Full error details:")
        return EXIT_SOLVER


def resolve_entities(instance: Instance, cg_config: CgConfig = None) -> Tuple[CgResult, Clustering]:
    """Column generation followed by integerization over the generated pool"""
    cg_config = cg_config or CgConfig()
    result = run_cg(instance, cg_config)
    clustering = integerize(instance, result.pool, result.doi, cg_config.max_bnb_nodes)
    return result, clustering


def predicted_partition(clustering: Clustering, ids: IdTable) -> LabeledPartition:
    labels = clustering.labels()
    return LabeledPartition({ids.id_of(d): int(labels[d]) for d in range(len(ids))})


def load_instance(config: RunConfig) -> Tuple[Instance, IdTable]:
    loader = PairFileLoader(config.bias)
    if config.pairs_path is not None:
        return loader.ingest_pairs(config.pairs_path)
    return loader.ingest_theta(config.theta_path)


def _run(config: RunConfig) -> int:
    started = time.perf_counter()

    logger.info("Step 1: Loading scored pairs...")
    instance, ids = load_instance(config)
    truth = None
    if config.truth_path is not None:
        truth = PairFileLoader(config.bias).ingest_truth(config.truth_path, ids)

    logger.info("Step 2: Column generation...")
    cg_config = config.cg_config()
    result = run_cg(instance, cg_config)

    logger.info("Step 3: Integerizing...")
    clustering = integerize(instance, result.pool, result.doi, cg_config.max_bnb_nodes)

    metrics: Optional[Dict[str, float]] = None
    if truth is not None:
        logger.info("Step 4: Evaluating against the reference partition...")
        metrics = evaluate(predicted_partition(clustering, ids), truth)

    logger.info("Step 5: Writing outputs...")
    writer = ResultWriter()
    writer.write_clusters(clustering, ids, config.out_path)
    seconds = time.perf_counter() - started if config.timings else None
    summary = summary_record(instance, result, clustering, metrics, seconds)
    if config.stats_path is not None:
        writer.write_stats(iteration_records(result, config.timings) + [summary], config.stats_path)

    print(format_summary(summary))
    return EXIT_OK


def run(config: RunConfig) -> int:
    return guarded(lambda: _run(config), "Entity resolution")


def run_synth(n: int, clusters: int, noise: float, seed: int, out_dir: Path,
              solve: bool = False, doi_mode: str = DOI_MODE) -> int:
    """Write a planted instance (theta + truth files), optionally solving it right away"""
    check_parameters(n, clusters, noise)

    def action() -> int:
        instance, ids, truth = generate_synthetic(n, clusters, noise, seed)
        writer = ResultWriter(out_dir)
        theta_path = writer.write_theta(instance, ids, "theta.csv")
        truth_path = writer.write_truth(truth, "truth.csv")
        if not solve:
            return EXIT_OK
        return _run(RunConfig(theta_path=theta_path, truth_path=truth_path, doi_mode=doi_mode,
                              out_path=Path(out_dir) / "clusters.csv", stats_path=Path(out_dir) / "stats.jsonl",
                              seed=seed))

    return guarded(action, "Synthetic generation")


def run_ccrelax_compare(config: RunConfig) -> int:
    """Tightness report of the set-packing LP against the cycle/odd-wheel LP"""
    def action() -> int:
        instance, _ = load_instance(config)
        report = compare_tightness(instance)
        record = {
            "record": "tightness",
            "n_observations": instance.n_observations,
            "cg_lp_value": report.cg_lp_value,
            "cc_lp_value": report.cc_lp_value,
            "gap": report.gap,
            "separation_rounds": report.separation_rounds,
        }
        if config.stats_path is not None:
            ResultWriter().write_stats([record], config.stats_path)
        print(f"Set-packing LP:      {report.cg_lp_value:.9f}")
        print(f"Cycle/odd-wheel LP:  {report.cc_lp_value:.9f}")
        print(f"Gap:                 {report.gap:.3e}")
        return EXIT_OK

    return guarded(action, "Tightness comparison")


def run_metrics(pred_path: Path, truth_path: Path) -> int:
    """Compare two ``id,cluster_label`` files"""

    def action() -> int:
        loader = PairFileLoader()
        pred = loader.ingest_truth(pred_path)
        truth = loader.ingest_truth(truth_path)
        for name, value in evaluate(pred, truth).items():
            print(f"{name:<16} {value:.6f}")
        return EXIT_OK

    return guarded(action, "Metrics")
