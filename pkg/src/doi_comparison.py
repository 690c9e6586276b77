# src/doi_comparison.py
"""
Experiments on a synthetic suite.

``compare_doi_modes`` counts column-generation iterations across DOI modes
and pricing strategies. Every run of one instance must reach the same
terminal LP value; the table records how many RMP solves each needed, with
none-mode under the same pricing strategy as the reference.

``compare_baseline`` scores set-packing clusters and a hierarchical-clustering
baseline against the planted partition.
"""

import logging
import time
from dataclasses import replace
from typing import Iterable, List, Sequence, Tuple

import pandas as pd

from config.config import DUALITY_GAP_TOL, HIERARCHY_METHOD
from src.baseline import hierarchical_partition
from src.colgen import CgConfig, run_cg
from src.exceptions import SolverError
from src.master import DoiConfig, DoiMode
from src.metrics import evaluate
from src.pipeline import predicted_partition, resolve_entities
from src.pricing import PricingConfig, PricingStrategy
from src.synthetic import generate_synthetic

logger = logging.getLogger(__name__)

DEFAULT_SUITE = ((200, 20, 0.3, 0), (200, 20, 0.3, 1), (200, 40, 0.5, 2))
DEFAULT_K_VALUES = (1, 3, 5)


def doi_settings(k_values: Iterable[int] = DEFAULT_K_VALUES) -> List[Tuple[str, DoiConfig]]:
    settings = [("none", DoiConfig(mode=DoiMode.NONE)), ("varying", DoiConfig(mode=DoiMode.VARYING))]
    settings.extend((f"flexible_k{k}", DoiConfig(mode=DoiMode.FLEXIBLE, k=k)) for k in k_values)
    return settings


def instance_label(n: int, clusters: int, noise: float, seed: int) -> str:
    return f"n{n}_c{clusters}_noise{noise}_seed{seed}"


def compare_doi_modes(suite: Sequence[Tuple[int, int, float, int]] = DEFAULT_SUITE,
                      k_values: Iterable[int] = DEFAULT_K_VALUES,
                      pricing: PricingConfig = None,
                      strategies: Iterable[str] = None,
                      timings: bool = False) -> pd.DataFrame:
    """
    One row per (instance, pricing strategy, DOI setting).

    ``suite`` entries are (n, clusters, noise, seed) for generate_synthetic.
    ``strategies`` defaults to the strategy of ``pricing``; ``timings`` adds
    wall-clock ``seconds`` and ``pricing_seconds`` columns.
    Raises SolverError when the LP values of one instance disagree.
    """
    pricing = pricing or PricingConfig()
    strategies = [PricingStrategy(s) for s in (strategies or [pricing.strategy])]
    settings = doi_settings(k_values)
    rows = []
    for n, clusters, noise, seed in suite:
        instance, _, _ = generate_synthetic(n, clusters, noise, seed)
        label = instance_label(n, clusters, noise, seed)
        for strategy in strategies:
            for name, doi in settings:
                started = time.perf_counter()
                result = run_cg(instance, CgConfig(doi=doi, pricing=replace(pricing, strategy=strategy)))
                row = {
                    "instance": label,
                    "pricing": strategy.value,
                    "doi": name,
                    "iterations": result.iterations,
                    "columns": result.columns_generated,
                    "fallback_iteration": result.fallback_iteration,
                    "lp_objective": result.lp_objective,
                }
                if timings:
                    row["seconds"] = time.perf_counter() - started
                    row["pricing_seconds"] = sum(stats.pricing_seconds for stats in result.history)
                rows.append(row)
                logger.info(f"{label} {strategy.value} {name}: {result.iterations} iterations, "
                            f"{result.lp_objective:.6f}")

    table = pd.DataFrame(rows)
    if table.empty:
        return table

    for label, group in table.groupby("instance", sort=False):
        spread = group["lp_objective"].max() - group["lp_objective"].min()
        scale = max(1.0, group["lp_objective"].abs().max())
        if spread > DUALITY_GAP_TOL * scale:
            raise SolverError(f"{label}: LP values differ by {spread:.3g} across DOI modes")

    reference = table[table["doi"] == "none"].set_index(["instance", "pricing"])["iterations"]
    keys = pd.MultiIndex.from_frame(table[["instance", "pricing"]])
    table["iteration_ratio"] = table["iterations"].to_numpy() / reference.reindex(keys).to_numpy()
    return table


def compare_baseline(suite: Sequence[Tuple[int, int, float, int]] = DEFAULT_SUITE,
                     cg_config: CgConfig = None, method: str = HIERARCHY_METHOD) -> pd.DataFrame:
    """One row per (instance, clustering method) with every metric against the planted partition"""
    rows = []
    for n, clusters, noise, seed in suite:
        instance, ids, truth = generate_synthetic(n, clusters, noise, seed)
        label = instance_label(n, clusters, noise, seed)
        _, clustering = resolve_entities(instance, cg_config)
        predictions = [("set_packing", predicted_partition(clustering, ids)),
                       (f"hierarchical_{method}", hierarchical_partition(instance, ids, method))]
        for name, partition in predictions:
            rows.append({"instance": label, "method": name, **evaluate(partition, truth)})
        logger.info(f"{label}: set-packing f1 {rows[-2]['f1']:.4f}, hierarchical f1 {rows[-1]['f1']:.4f}")
    return pd.DataFrame(rows)
