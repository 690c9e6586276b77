# src/baseline.py
"""
Hierarchical-clustering baseline over the same pair costs.

Pair distances are theta shifted to be non-negative and blocked pairs sit
above every finite distance. The dendrogram is cut just below the shifted
zero, so merges happen only while the linkage cost is negative.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from config.config import HIERARCHY_METHOD
from src.core import Instance
from src.data_loader import IdTable
from src.metrics import LabeledPartition

logger = logging.getLogger(__name__)

LINKAGE_METHODS = ("single", "complete", "average", "weighted")


def theta_distances(instance: Instance) -> Tuple[np.ndarray, float]:
    """Condensed distance vector and the distance that stands for theta = 0"""
    n = instance.n_observations
    values = np.asarray([value for _, _, value in instance.pairs()], dtype=float)
    offset = max(0.0, -float(values.min())) if values.size else 0.0
    blocked = max(offset + float(values.max()) if values.size else 0.0, offset) + 1.0

    matrix = np.full((n, n), blocked)
    np.fill_diagonal(matrix, 0.0)
    for d1, d2, value in instance.pairs():
        matrix[d1, d2] = matrix[d2, d1] = value + offset
    return squareform(matrix, checks=False), offset


def hierarchical_labels(instance: Instance, method: str = HIERARCHY_METHOD) -> np.ndarray:
    """0-based flat cluster label of every observation"""
    if method not in LINKAGE_METHODS:
        raise ValueError(f"Unknown linkage method '{method}', expected one of {LINKAGE_METHODS}")
    n = instance.n_observations
    if n < 2:
        return np.zeros(n, dtype=int)

    condensed, cut = theta_distances(instance)
    tree = linkage(condensed, method=method)
    labels = fcluster(tree, t=np.nextafter(cut, -np.inf), criterion="distance") - 1
    logger.debug(f"{method} linkage on {n} observations: {labels.max() + 1} clusters")
    return labels


def hierarchical_partition(instance: Instance, ids: IdTable, method: str = HIERARCHY_METHOD) -> LabeledPartition:
    labels = hierarchical_labels(instance, method)
    return LabeledPartition({ids.id_of(d): int(labels[d]) for d in range(len(ids))})
