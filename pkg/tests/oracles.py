"""Brute-force references for small instances."""

from itertools import combinations
from typing import Iterator, List, Tuple

import numpy as np

from src.core import Column, Instance, hypothesis_cost
from src.lp import LinearProgram, solve


def all_feasible_columns(instance: Instance) -> List[Column]:
    """Every nonempty subset with no blocked pair, as columns"""
    columns = []
    n = instance.n_observations
    for size in range(1, n + 1):
        for members in combinations(range(n), size):
            if instance.is_feasible(members):
                columns.append(Column(members, hypothesis_cost(instance, members)))
    return columns


def full_lp_value(instance: Instance) -> float:
    """Set-packing LP over every feasible column"""
    columns = all_feasible_columns(instance)
    rows = [dict() for _ in range(instance.n_observations)]
    for g, column in enumerate(columns):
        for d in column.members:
            rows[d][g] = 1.0
    lp = LinearProgram.from_rows([c.cost for c in columns], rows, np.ones(instance.n_observations))
    return solve(lp).objective


def set_partitions(items: List[int]) -> Iterator[List[Tuple[int, ...]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [(first,)] + partition
        for i, block in enumerate(partition):
            yield partition[:i] + [(first,) + block] + partition[i + 1:]


def best_partition_cost(instance: Instance) -> float:
    """Minimum total cost over all feasible partitions (Bell-number enumeration)"""
    best = 0.0
    for partition in set_partitions(list(range(instance.n_observations))):
        if all(instance.is_feasible(block) for block in partition):
            best = min(best, sum(hypothesis_cost(instance, block) for block in partition))
    return best


def subproblem_minimum(lam: np.ndarray, pair_cost: np.ndarray, compatible: np.ndarray) -> float:
    """Minimum of the pricing objective over all compatible subsets (empty set included)"""
    k = lam.shape[0]
    if k == 0:
        return 0.0
    subsets = ((np.arange(2 ** k)[:, None] >> np.arange(k)) & 1).astype(float)
    conflicts = (~compatible).astype(float)
    np.fill_diagonal(conflicts, 0.0)
    feasible = ((subsets @ conflicts) * subsets).sum(axis=1) == 0
    values = -subsets @ lam + 0.5 * ((subsets @ pair_cost) * subsets).sum(axis=1)
    return float(values[feasible].min())
