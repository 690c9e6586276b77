# src/result_writer.py
"""
Output files of a run: clusters table, JSON-lines statistics stream,
round-trip writers for the input formats and the console summary.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
import psutil

from config.config import PROBABILITY_BIAS
from src.colgen import CgResult, Clustering
from src.core import Instance
from src.data_loader import IdTable
from src.metrics import LabeledPartition

logger = logging.getLogger(__name__)


class ResultWriter:
    """Writes run artifacts as UTF-8, comma-separated, LF-terminated files"""

    def __init__(self, output_dir: Path = None):
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.logger = logging.getLogger(__name__)
        if self.output_dir is not None:
            self.output_dir.mkdir(parents=True, exist_ok=True)

    def _resolve(self, path) -> Path:
        path = Path(path)
        if not path.is_absolute() and self.output_dir is not None and path.parent == Path("."):
            path = self.output_dir / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _write_frame(self, frame: pd.DataFrame, path, header: bool = True) -> Path:
        path = self._resolve(path)
        frame.to_csv(path, index=False, header=header, lineterminator="\n", encoding="utf-8")
        self.logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_clusters(self, clustering: Clustering, ids: IdTable, path) -> Path:
        """One ``id,cluster_label`` row per observation, in observation order"""
        labels = clustering.labels()
        frame = pd.DataFrame({"id": ids.ids, "cluster_label": labels[:len(ids)]})
        return self._write_frame(frame, path)

    def write_pairs(self, instance: Instance, ids: IdTable, path, bias: float = PROBABILITY_BIAS) -> Path:
        """Scored pairs with p = bias - theta"""
        rows = [(ids.id_of(d1), ids.id_of(d2), bias - value) for d1, d2, value in instance.pairs()]
        frame = pd.DataFrame(rows, columns=["id1", "id2", "p"])
        return self._write_frame(frame, path)

    def write_theta(self, instance: Instance, ids: IdTable, path) -> Path:
        rows = [(ids.id_of(d1), ids.id_of(d2), value) for d1, d2, value in instance.pairs()]
        frame = pd.DataFrame(rows, columns=["id1", "id2", "theta"])
        return self._write_frame(frame, path)

    def write_truth(self, truth: LabeledPartition, path) -> Path:
        frame = pd.DataFrame(list(truth.assignment.items()), columns=["id", "cluster_label"])
        return self._write_frame(frame, path)

    def write_stats(self, records: List[Dict], path) -> Path:
        path = self._resolve(path)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for record in records:
                handle.write(json.dumps(record) + "\n")
        self.logger.info(f"Wrote {len(records)} statistics records to {path}")
        return path


def iteration_records(result: CgResult, timings: bool = False) -> List[Dict]:
    records = []
    for stats in result.history:
        record = {
            "record": "iteration",
            "iteration": stats.iteration,
            "objective": stats.objective,
            "pool_size": stats.pool_size,
            "columns_added": stats.columns_added,
            "rmp_mode": stats.rmp_mode,
            "pricing_phase": stats.pricing_phase,
        }
        if timings:
            record["pricing_seconds"] = stats.pricing_seconds
        records.append(record)
    return records


def summary_record(instance: Instance, result: CgResult, clustering: Clustering,
                   metrics: Optional[Dict[str, float]] = None, seconds: float = None) -> Dict:
    record = {
        "record": "summary",
        "n_observations": instance.n_observations,
        "n_pairs": instance.n_pairs,
        "doi": result.doi.mode.value,
        "k": result.doi.k,
        "lp_objective": result.lp_objective,
        "lp_bound": result.bound_label,
        "ilp_objective": clustering.total_cost,
        "lp_integral": clustering.lp_integral,
        "bnb_nodes": clustering.bnb_nodes,
        "iterations": result.iterations,
        "columns": result.columns_generated,
        "doi_fallback_iteration": result.fallback_iteration,
        "clusters": len(clustering.clusters),
    }
    if metrics:
        record["metrics"] = metrics
    if seconds is not None:
        record["seconds"] = seconds
        record["peak_rss_mb"] = peak_rss_mb()
    return record


def write_stats(result: CgResult, summary: Dict, path, timings: bool = False) -> Path:
    return ResultWriter().write_stats(iteration_records(result, timings) + [summary], path)


def write_clusters(clustering: Clustering, ids: IdTable, path) -> Path:
    return ResultWriter().write_clusters(clustering, ids, path)


def write_pairs(instance: Instance, ids: IdTable, path, bias: float = PROBABILITY_BIAS) -> Path:
    return ResultWriter().write_pairs(instance, ids, path, bias)


def write_theta(instance: Instance, ids: IdTable, path) -> Path:
    return ResultWriter().write_theta(instance, ids, path)


def peak_rss_mb() -> float:
    return psutil.Process().memory_info().rss / (1024 * 1024)


def format_summary(summary: Dict) -> str:
    """Human-readable run summary"""
    lines = [
        "=" * 60,
        f"Observations: {summary['n_observations']}   pairs: {summary['n_pairs']}",
        f"DOI mode: {summary['doi']} (K={summary['k']})",
        f"LP objective:  {summary['lp_objective']:.6f} ({summary['lp_bound']})",
        f"ILP objective: {summary['ilp_objective']:.6f}"
        + ("" if summary["lp_integral"] else f"  (fractional LP, {summary['bnb_nodes']} B&B nodes)"),
        f"Iterations: {summary['iterations']}   columns generated: {summary['columns']}",
        f"Clusters: {summary['clusters']}",
    ]
    metrics = summary.get("metrics")
    if metrics:
        lines.append("Metrics vs truth:")
        lines.extend(f"  {name:<16} {value:.4f}" for name, value in metrics.items())
    if "seconds" in summary:
        lines.append(f"Wall time: {summary['seconds']:.2f}s   RSS: {summary['peak_rss_mb']:.1f} MB")
    lines.append("=" * 60)
    return "\n".join(lines)
