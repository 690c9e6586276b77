# src/pricing.py
"""
Pricing: negative reduced-cost columns from neighborhood subproblems.

A subproblem lives on one non-dominated restricted neighborhood. Its
objective for an indicator vector x is

    sum_d -lambda_d x_d + sum_{d1 != d2, compatible} theta_{d1 d2} x_{d1} x_{d2}

subject to blocked pairs never being chosen together. Pair products are
evaluated directly, so no auxiliary pair variables exist.
"""

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.config import (
    EXACT_SIZE_LIMIT,
    HEURISTIC_RESTARTS,
    MAX_NEW_COLUMNS,
    PRICING_STRATEGY,
    PRICING_THREADS,
    RANDOM_SEED,
    REDUCED_COST_TOL,
    SLACKNESS_TOL,
)
from src.core import Column, Instance, nondominated_neighborhoods, rank
from src.exceptions import SizeLimit

logger = logging.getLogger(__name__)


class PricingStrategy(str, Enum):
    EXACT = "exact"
    HEURISTIC = "heuristic"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class PricingConfig:
    strategy: PricingStrategy = PricingStrategy(PRICING_STRATEGY)
    max_new_columns: int = MAX_NEW_COLUMNS
    restarts: int = HEURISTIC_RESTARTS
    seed: int = RANDOM_SEED
    exact_size_limit: int = EXACT_SIZE_LIMIT
    threads: int = PRICING_THREADS

    def __post_init__(self):
        object.__setattr__(self, "strategy", PricingStrategy(self.strategy))
        if self.max_new_columns < 1:
            raise ValueError(f"max_new_columns must be at least 1, got {self.max_new_columns}")
        if self.restarts < 0:
            raise ValueError(f"restarts must be non-negative, got {self.restarts}")
        if self.threads < 1:
            raise ValueError(f"threads must be at least 1, got {self.threads}")


@dataclass
class Subproblem:
    """One neighborhood: nodes, their duals, pair costs and compatibility"""

    nodes: Tuple[int, ...]
    lam: np.ndarray          # aggregate dual per node, <= 0
    pair_cost: np.ndarray    # 2 * theta for compatible pairs, 0 elsewhere (ordered-pair convention)
    compatible: np.ndarray   # True for pairs in E+, False for E- and the diagonal

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def internal_pairs(self) -> Dict[Tuple[int, int], float]:
        """E+: finite theta entries restricted to the nodes"""
        i, j = np.nonzero(np.triu(self.compatible, 1))
        return {(self.nodes[a], self.nodes[b]): float(self.pair_cost[a, b] / 2.0) for a, b in zip(i, j)}

    @property
    def conflicts(self) -> List[Tuple[int, int]]:
        """E-: node pairs that blocking forbids"""
        blocked = ~self.compatible
        np.fill_diagonal(blocked, False)
        i, j = np.nonzero(np.triu(blocked, 1))
        return [(self.nodes[a], self.nodes[b]) for a, b in zip(i, j)]

    def objective(self, chosen: np.ndarray) -> float:
        x = chosen.astype(float)
        return float(-self.lam @ x + 0.5 * x @ self.pair_cost @ x)

    def is_feasible(self, chosen: np.ndarray) -> bool:
        idx = np.flatnonzero(chosen)
        return bool(np.all(self.compatible[np.ix_(idx, idx)] | np.eye(len(idx), dtype=bool)))


@dataclass
class PricedColumn:
    column: Column
    reduced_cost: float


def build_subproblem(instance: Instance, nodes: Sequence[int], duals: np.ndarray) -> Subproblem:
    nodes = tuple(nodes)
    lam = np.asarray([duals[d] for d in nodes], dtype=float)
    if np.any(lam > SLACKNESS_TOL):
        raise ValueError("Set-packing duals must be non-positive")
    k = len(nodes)
    pair_cost = np.zeros((k, k))
    compatible = np.zeros((k, k), dtype=bool)
    for a, d1 in enumerate(nodes):
        row = instance.neighbors(d1)
        for b in range(a + 1, k):
            value = row.get(nodes[b])
            if value is not None:
                pair_cost[a, b] = pair_cost[b, a] = 2.0 * value
                compatible[a, b] = compatible[b, a] = True
    return Subproblem(nodes=nodes, lam=lam, pair_cost=pair_cost, compatible=compatible)


def reduced_cost(column: Column, duals) -> float:
    """Gamma_g minus the duals the column collects (missing duals count as 0)"""
    if duals is None or len(duals) == 0:
        return column.cost
    return column.cost - sum(float(duals[d]) for d in column.members)


def _column_of(instance: Instance, sub: Subproblem, chosen: np.ndarray) -> Column:
    return Column.from_members(instance, (sub.nodes[i] for i in np.flatnonzero(chosen)))


def price_exact(sub: Subproblem, size_limit: int = EXACT_SIZE_LIMIT,
                incumbent: float = 0.0) -> Tuple[Optional[np.ndarray], float]:
    """
    Global minimizer by depth-first branch-and-bound.

    Returns (indicator vector or None, best value). None means nothing beats
    ``incumbent`` (0 = the empty hypothesis).
    """
    k = sub.size
    if k > size_limit:
        raise SizeLimit(f"Subproblem with {k} nodes exceeds the exact limit of {size_limit}")
    if k == 0:
        return None, incumbent

    linear = -sub.lam
    # promising nodes first: most negative attainable contribution
    potential = linear + np.minimum(sub.pair_cost, 0.0).sum(axis=1)
    order = np.argsort(potential, kind="stable")
    linear = linear[order]
    quad = sub.pair_cost[np.ix_(order, order)]
    compat = sub.compatible[np.ix_(order, order)]
    half_negative = np.minimum(quad, 0.0) / 2.0

    best = {"value": incumbent, "chosen": None}
    chosen = np.zeros(k, dtype=bool)

    def bound(pos: int, value: float, marginal: np.ndarray, allowed: np.ndarray) -> float:
        idx = pos + np.flatnonzero(allowed[pos:])
        if idx.size == 0:
            return value
        shared = half_negative[np.ix_(idx, idx)].sum(axis=1)
        return value + float(np.minimum(marginal[idx] + shared, 0.0).sum())

    def search(pos: int, value: float, marginal: np.ndarray, allowed: np.ndarray):
        if value < best["value"]:
            best["value"] = value
            best["chosen"] = chosen.copy()
        if pos == k or bound(pos, value, marginal, allowed) >= best["value"]:
            return
        if allowed[pos]:
            chosen[pos] = True
            search(pos + 1, value + marginal[pos], marginal + quad[pos], allowed & compat[pos])
            chosen[pos] = False
        search(pos + 1, value, marginal, allowed)

    search(0, 0.0, linear.copy(), np.ones(k, dtype=bool))

    if best["chosen"] is None:
        return None, best["value"]
    result = np.zeros(k, dtype=bool)
    result[order[best["chosen"]]] = True
    return result, best["value"]


def _local_search(sub: Subproblem, chosen: np.ndarray) -> Tuple[np.ndarray, float]:
    """Best-improvement single flips that keep blocked pairs apart"""
    linear = -sub.lam
    chosen = chosen.copy()
    marginal = linear + sub.pair_cost @ chosen.astype(float)
    value = sub.objective(chosen)
    while True:
        blocked = (~sub.compatible & ~np.eye(sub.size, dtype=bool))[:, chosen].any(axis=1)
        delta = np.where(chosen, -marginal, marginal)
        delta[~chosen & blocked] = np.inf
        move = int(np.argmin(delta))
        if delta[move] >= -1e-12:
            return chosen, value
        step = sub.pair_cost[move] if not chosen[move] else -sub.pair_cost[move]
        chosen[move] = not chosen[move]
        marginal = marginal + step
        value += float(delta[move])


def _greedy_seed(sub: Subproblem) -> np.ndarray:
    chosen = np.zeros(sub.size, dtype=bool)
    allowed = np.ones(sub.size, dtype=bool)
    marginal = -sub.lam.copy()
    while True:
        candidates = np.where(allowed & ~chosen, marginal, np.inf)
        pick = int(np.argmin(candidates))
        if candidates[pick] >= 0:
            return chosen
        chosen[pick] = True
        allowed &= sub.compatible[pick]
        marginal = marginal + sub.pair_cost[pick]


def price_heuristic(sub: Subproblem, config: PricingConfig = None,
                    rng: np.random.Generator = None) -> Tuple[Optional[np.ndarray], float]:
    """
    Improve-style local search from several seeds.

    Seeds: nodes with negative dual in random order (padded with the nodes of
    most negative potential), plus one greedily grown set.
    """
    config = config or PricingConfig()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    if sub.size == 0:
        return None, 0.0

    negative = np.flatnonzero(sub.lam < 0)
    seeds = list(rng.permutation(negative)) if negative.size else []
    if len(seeds) < config.restarts:
        potential = -sub.lam + np.minimum(sub.pair_cost, 0.0).sum(axis=1)
        for node in np.argsort(potential, kind="stable"):
            if len(seeds) >= config.restarts:
                break
            if node not in seeds:
                seeds.append(node)
    starts = []
    for node in seeds[:config.restarts]:
        start = np.zeros(sub.size, dtype=bool)
        start[node] = True
        starts.append(start)
    starts.append(_greedy_seed(sub))

    best_chosen, best_value = None, 0.0
    for start in starts:
        chosen, value = _local_search(sub, start)
        if value < best_value:
            best_chosen, best_value = chosen, value
    if best_value < -REDUCED_COST_TOL:
        return best_chosen, best_value
    return None, best_value


class NeighborhoodPricer:
    """Prices every non-dominated neighborhood of one instance"""

    def __init__(self, instance: Instance, config: PricingConfig = None,
                 tolerance: float = REDUCED_COST_TOL):
        self.instance = instance
        self.config = config or PricingConfig()
        self.tolerance = tolerance
        self.ranking = rank(instance)
        self.neighborhoods = nondominated_neighborhoods(instance, self.ranking)
        self.logger = logging.getLogger(__name__)
        self.last_unverified = 0
        self.last_seconds = 0.0

    def _price_one(self, index: int, nodes: Tuple[int, ...], duals: np.ndarray,
                   iteration: int, exact: bool) -> Tuple[Optional[PricedColumn], bool]:
        sub = build_subproblem(self.instance, nodes, duals)
        verified = True
        if exact and sub.size <= self.config.exact_size_limit:
            chosen, value = price_exact(sub, self.config.exact_size_limit)
        else:
            verified = not exact
            rng = np.random.default_rng([self.config.seed, iteration, index])
            chosen, value = price_heuristic(sub, self.config, rng)
        if chosen is None or value >= -self.tolerance:
            return None, verified
        return PricedColumn(_column_of(self.instance, sub, chosen), value), verified

    def price_all(self, duals: np.ndarray, iteration: int = 0, exact: bool = None) -> List[PricedColumn]:
        """
        Sweep neighborhoods largest first, stopping after M distinct negative columns.

        ``exact`` overrides the configured strategy for this sweep (the driver
        uses it for verification passes).
        """
        if exact is None:
            exact = self.config.strategy == PricingStrategy.EXACT
        started = time.perf_counter()
        found: Dict[Tuple[int, ...], PricedColumn] = {}
        unverified = 0
        lock = threading.Lock()
        cap = self.config.max_new_columns

        def record(result: Optional[PricedColumn], verified: bool) -> bool:
            nonlocal unverified
            with lock:
                if not verified:
                    unverified += 1
                if result is not None and len(found) < cap and result.column.key not in found:
                    found[result.column.key] = result
                return len(found) >= cap

        if self.config.threads == 1:
            for index, nodes in enumerate(self.neighborhoods):
                if record(*self._price_one(index, nodes, duals, iteration, exact)):
                    break
        else:
            stop = threading.Event()

            def task(index, nodes):
                if stop.is_set():
                    return
                if record(*self._price_one(index, nodes, duals, iteration, exact)):
                    stop.set()

            with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
                futures = [pool.submit(task, index, nodes) for index, nodes in enumerate(self.neighborhoods)]
                try:
                    for future in as_completed(futures):
                        future.result()
                except Exception:
                    # a failed neighborhood invalidates the sweep
                    stop.set()
                    raise

        self.last_unverified = unverified
        self.last_seconds = time.perf_counter() - started
        if exact and unverified:
            self.logger.warning(f"{unverified} neighborhoods exceed the exact size limit "
                                f"({self.config.exact_size_limit}) and were priced heuristically")
        return list(found.values())


def price_all(instance: Instance, duals: np.ndarray, pricing_config: PricingConfig = None,
              iteration: int = 0) -> List[Column]:
    """Columns with negative reduced cost under ``duals`` (at most M)"""
    pricer = NeighborhoodPricer(instance, pricing_config)
    return [priced.column for priced in pricer.price_all(np.asarray(duals, dtype=float), iteration)]
