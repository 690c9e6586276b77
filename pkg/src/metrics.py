# src/metrics.py
"""Clustering evaluation against a reference partition."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Mapping, Tuple

import numpy as np
from sklearn.metrics import adjusted_rand_score, homogeneity_completeness_v_measure
from sklearn.metrics.cluster import contingency_matrix

from src.exceptions import UniverseMismatch

logger = logging.getLogger(__name__)


@dataclass
class LabeledPartition:
    """Total assignment observation -> cluster label"""

    assignment: Dict[Hashable, Hashable]

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[Hashable]]) -> "LabeledPartition":
        assignment = {}
        for label, members in enumerate(clusters):
            for key in members:
                if key in assignment:
                    raise ValueError(f"Observation {key!r} appears in two clusters")
                assignment[key] = label
        return cls(assignment)

    @classmethod
    def from_labels(cls, keys: Iterable[Hashable], labels: Iterable[Hashable]) -> "LabeledPartition":
        return cls(dict(zip(keys, labels)))

    def __len__(self):
        return len(self.assignment)

    def clusters(self) -> List[Tuple[Hashable, ...]]:
        grouped: Dict[Hashable, List[Hashable]] = {}
        for key, label in self.assignment.items():
            grouped.setdefault(label, []).append(key)
        return [tuple(members) for members in grouped.values()]


def _codes(values: Iterable[Hashable]) -> np.ndarray:
    """Dense integer codes in first-appearance order"""
    table: Dict[Hashable, int] = {}
    return np.asarray([table.setdefault(v, len(table)) for v in values], dtype=int)


def _aligned(pred, truth) -> Tuple[np.ndarray, np.ndarray]:
    pred_map: Mapping = pred.assignment if isinstance(pred, LabeledPartition) else pred
    truth_map: Mapping = truth.assignment if isinstance(truth, LabeledPartition) else truth
    if pred_map.keys() != truth_map.keys():
        missing = len(set(truth_map) - set(pred_map))
        extra = len(set(pred_map) - set(truth_map))
        raise UniverseMismatch(f"Partitions disagree on their observations "
                               f"({missing} only in truth, {extra} only in prediction)")
    keys = list(truth_map)
    return _codes(pred_map[k] for k in keys), _codes(truth_map[k] for k in keys)


def _pairs(counts: np.ndarray) -> int:
    counts = np.asarray(counts, dtype=np.int64)
    return int((counts * (counts - 1) // 2).sum())


def pair_counts(pred, truth) -> Tuple[int, int, int]:
    """(pairs together in both, pairs together in pred, pairs together in truth)"""
    pred_codes, truth_codes = _aligned(pred, truth)
    if pred_codes.size == 0:
        return 0, 0, 0
    table = contingency_matrix(truth_codes, pred_codes, sparse=True)
    both = _pairs(table.data)
    in_pred = _pairs(np.bincount(pred_codes))
    in_truth = _pairs(np.bincount(truth_codes))
    return both, in_pred, in_truth


def pairwise_prf(pred, truth) -> Tuple[float, float, float]:
    both, in_pred, in_truth = pair_counts(pred, truth)

    if in_pred == 0 and in_truth == 0:
        return 1.0, 1.0, 1.0
    precision = both / in_pred if in_pred else 0.0
    recall = both / in_truth if in_truth else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def v_measure(pred, truth) -> Tuple[float, float, float]:
    pred_codes, truth_codes = _aligned(pred, truth)
    if pred_codes.size == 0:
        return 1.0, 1.0, 1.0
    h, c, v = homogeneity_completeness_v_measure(truth_codes, pred_codes)
    return float(h), float(c), float(v)


def adjusted_rand(pred, truth) -> float:
    pred_codes, truth_codes = _aligned(pred, truth)
    if pred_codes.size == 0:
        return 1.0
    return float(adjusted_rand_score(truth_codes, pred_codes))


def fowlkes_mallows(pred, truth) -> float:
    precision, recall, _ = pairwise_prf(pred, truth)
    return math.sqrt(precision * recall)


def evaluate(pred, truth) -> Dict[str, float]:
    """Every metric in one flat record"""
    precision, recall, f1 = pairwise_prf(pred, truth)
    homogeneity, completeness, v = v_measure(pred, truth)
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "homogeneity": homogeneity,
        "completeness": completeness,
        "v_measure": v,
        "adjusted_rand": adjusted_rand(pred, truth),
        "fowlkes_mallows": math.sqrt(precision * recall),
    }
