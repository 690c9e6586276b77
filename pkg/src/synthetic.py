# src/synthetic.py
"""Planted-partition instances for tests and benchmarks."""

import logging
from itertools import combinations
from typing import Dict, Tuple

import numpy as np

from config.config import SYNTH_BLOCKING_RADIUS, SYNTH_INTRA_RANGE, SYNTH_NOISE_RANGE
from src.core import Instance, canonical_pair
from src.data_loader import IdTable
from src.metrics import LabeledPartition

logger = logging.getLogger(__name__)


def check_parameters(n: int, clusters: int, noise: float, blocking_radius: int = SYNTH_BLOCKING_RADIUS):
    if n < 1 or clusters < 1:
        raise ValueError(f"n and clusters must be positive, got n={n}, clusters={clusters}")
    if clusters > n:
        raise ValueError(f"Cannot plant {clusters} clusters on {n} observations")
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise must lie in [0, 1], got {noise}")
    if blocking_radius < 0:
        raise ValueError(f"blocking_radius must be non-negative, got {blocking_radius}")


def generate_synthetic(n: int, clusters: int, noise: float, seed: int = 0,
                       blocking_radius: int = SYNTH_BLOCKING_RADIUS) -> Tuple[Instance, IdTable, LabeledPartition]:
    """
    Observations r0..r{n-1} spread over ``clusters`` planted clusters.

    Intra-cluster pairs get theta ~ U(-1, -0.2). Clusters sit on a ring; each
    cross pair between clusters at most ``blocking_radius`` apart survives
    blocking with probability ``noise`` and gets theta ~ U(-0.2, 0.5). Every
    other pair is blocked.
    """
    check_parameters(n, clusters, noise, blocking_radius)

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % clusters)
    groups = [np.flatnonzero(labels == c) for c in range(clusters)]
    costs: Dict[Tuple[int, int], float] = {}

    low, high = SYNTH_INTRA_RANGE
    for members in groups:
        pairs = list(combinations(members.tolist(), 2))
        for pair, value in zip(pairs, rng.uniform(low, high, size=len(pairs))):
            costs[canonical_pair(*pair)] = float(value)

    low, high = SYNTH_NOISE_RANGE
    seen = set()
    for c in range(clusters):
        for offset in range(1, blocking_radius + 1):
            other = (c + offset) % clusters
            key = canonical_pair(c, other)
            if other == c or key in seen:
                continue
            seen.add(key)
            cross = [(a, b) for a in groups[c].tolist() for b in groups[other].tolist()]
            kept = rng.random(len(cross)) < noise
            values = rng.uniform(low, high, size=int(kept.sum()))
            for pair, value in zip((p for p, keep in zip(cross, kept) if keep), values):
                costs[canonical_pair(*pair)] = float(value)

    ids = IdTable([f"r{i}" for i in range(n)])
    truth = LabeledPartition({ids.id_of(d): f"c{labels[d]}" for d in range(n)})
    instance = Instance(n, costs)
    logger.info(f"Synthetic instance: {n} observations, {clusters} clusters, noise {noise}, "
                f"{instance.n_pairs} pairs (seed {seed})")
    return instance, ids, truth
