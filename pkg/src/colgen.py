# src/colgen.py
"""
Column generation driver, integerization over the generated pool and
overlap repair.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config.config import (
    DOI_EPSILON,
    DOI_PATIENCE,
    FEASIBILITY_TOL,
    INTEGRALITY_TOL,
    MAX_BNB_NODES,
    MAX_CG_ITERATIONS,
    REDUCED_COST_TOL,
)
from src.core import Column, Instance, hypothesis_cost, remove_members, removal_delta
from src.exceptions import Infeasible, MaxIterations
from src.lp import solve
from src.master import (
    ColumnPool,
    DoiConfig,
    DoiMode,
    RestrictedMaster,
    RmpSolution,
    build_rmp,
    compute_xi_dg,
    read_solution,
    solve_rmp,
)
from src.pricing import NeighborhoodPricer, PricingConfig, PricingStrategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CgConfig:
    doi: DoiConfig = field(default_factory=DoiConfig)
    pricing: PricingConfig = field(default_factory=PricingConfig)
    reduced_cost_tol: float = REDUCED_COST_TOL
    max_iterations: int = MAX_CG_ITERATIONS
    max_bnb_nodes: int = MAX_BNB_NODES
    doi_patience: int = DOI_PATIENCE

    def __post_init__(self):
        if self.doi_patience < 0:
            raise ValueError(f"doi_patience must be non-negative, got {self.doi_patience}")
        if self.reduced_cost_tol <= 0:
            raise ValueError("reduced_cost_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass
class IterationStats:
    iteration: int
    objective: float
    pool_size: int
    columns_added: int
    rmp_mode: str
    pricing_phase: str
    pricing_seconds: float


@dataclass
class CgResult:
    lp_objective: float
    pool: ColumnPool
    iterations: int
    columns_generated: int
    history: List[IterationStats]
    rmp: RmpSolution
    doi: DoiConfig
    verified: bool = True
    fallback_iteration: Optional[int] = None   # first iteration priced with plain duals

    @property
    def bound_label(self) -> str:
        return "exact LP bound" if self.verified else "heuristic LP bound"


@dataclass
class StagnationMonitor:
    """Counts consecutive RMP solves that fail to beat the best value seen so far"""

    patience: int
    best: Optional[float] = None
    stagnant: int = 0

    def update(self, objective: float) -> bool:
        """Record one RMP value; True once ``patience`` solves in a row brought no new best"""
        if self.best is None or objective < self.best - FEASIBILITY_TOL * max(1.0, abs(self.best)):
            self.best = objective
            self.stagnant = 0
        else:
            self.stagnant += 1
        return 0 < self.patience <= self.stagnant


@dataclass
class Clustering:
    """A partition of the observations; unpacked observations are singletons"""

    clusters: List[Tuple[int, ...]]
    total_cost: float
    lp_integral: bool = True
    bnb_nodes: int = 0

    @classmethod
    def from_columns(cls, instance: Instance, columns: Iterable[Column], **kwargs) -> "Clustering":
        clusters = []
        covered = set()
        for column in columns:
            overlap = covered.intersection(column.members)
            if overlap:
                raise ValueError(f"Observations {sorted(overlap)} are packed twice")
            covered.update(column.members)
            clusters.append(tuple(column.members))
        clusters.extend((d,) for d in range(instance.n_observations) if d not in covered)
        clusters.sort()
        total = sum(hypothesis_cost(instance, members) for members in clusters if len(members) > 1)
        return cls(clusters=clusters, total_cost=total, **kwargs)

    @property
    def n_observations(self) -> int:
        return sum(len(members) for members in self.clusters)

    def labels(self) -> np.ndarray:
        """Cluster index of every observation"""
        labels = np.empty(self.n_observations, dtype=int)
        for label, members in enumerate(self.clusters):
            labels[list(members)] = label
        return labels


class ColumnGenerator:
    """Alternates RMP solves and pricing sweeps until no improving column remains"""

    def __init__(self, instance: Instance, config: CgConfig = None):
        self.instance = instance
        self.config = config or CgConfig()
        self.logger = logging.getLogger(__name__)

    def run(self) -> CgResult:
        config = self.config
        strategy = config.pricing.strategy
        pool = ColumnPool(self.instance, config.doi.epsilon)
        pricer = NeighborhoodPricer(self.instance, config.pricing, config.reduced_cost_tol)

        mode = config.doi.mode
        exact_phase = strategy == PricingStrategy.EXACT
        history: List[IterationStats] = []
        generated = 0
        verified = False
        fallback_iteration = None
        monitor = StagnationMonitor(config.doi_patience)

        self.logger.info(f"Column generation on {self.instance}: DOI {mode.value}, "
                         f"pricing {strategy.value}, {len(pricer.neighborhoods)} neighborhoods")

        for iteration in range(config.max_iterations):
            rmp = solve_rmp(pool, config.doi.with_mode(mode))
            duals = rmp.duals.aggregate

            phase = "exact" if exact_phase else "heuristic"
            fresh = self._sweep(pricer, pool, duals, iteration, exact_phase)
            seconds = pricer.last_seconds
            if not fresh and not exact_phase:
                # verification sweep with the same duals
                phase = "exact"
                fresh = self._sweep(pricer, pool, duals, iteration, True)
                seconds += pricer.last_seconds
                if strategy == PricingStrategy.HYBRID:
                    exact_phase = True
                    self.logger.debug(f"Iteration {iteration}: heuristic pricing exhausted, switching to exact")

            added = pool.add_columns(fresh)
            generated += added
            history.append(IterationStats(iteration=iteration, objective=rmp.objective, pool_size=len(pool),
                                          columns_added=added, rmp_mode=mode.value, pricing_phase=phase,
                                          pricing_seconds=seconds))
            self.logger.debug(f"Iteration {iteration}: RMP {rmp.objective:.9g}, +{added} columns ({phase})")

            if added:
                if mode != DoiMode.NONE and monitor.update(rmp.objective):
                    self.logger.info(f"Iteration {iteration}: no new best {mode.value} RMP value in {monitor.stagnant} "
                                     f"solves; pricing with plain RMP duals from now on")
                    mode = DoiMode.NONE
                    fallback_iteration = iteration + 1
                continue

            verified = phase == "exact" and pricer.last_unverified == 0
            break
        else:
            raise MaxIterations(f"Column generation did not converge in {config.max_iterations} iterations")

        final = solve_rmp(pool, config.doi)
        result = CgResult(lp_objective=final.objective, pool=pool, iterations=len(history),
                          columns_generated=generated, history=history, rmp=final, doi=config.doi,
                          verified=verified, fallback_iteration=fallback_iteration)
        self.logger.info(f"Converged after {result.iterations} iterations: {result.lp_objective:.9g} "
                         f"({result.bound_label}), {len(pool)} columns")
        return result

    @staticmethod
    def _sweep(pricer: NeighborhoodPricer, pool: ColumnPool, duals: np.ndarray,
               iteration: int, exact: bool) -> List[Column]:
        """Columns of one sweep that the pool does not hold yet"""
        return [p.column for p in pricer.price_all(duals, iteration, exact=exact) if p.column.key not in pool]


def run_cg(instance: Instance, config: CgConfig = None) -> CgResult:
    return ColumnGenerator(instance, config).run()


def _is_integral(values: np.ndarray) -> bool:
    return values.size == 0 or float(np.abs(values - np.round(values)).max()) <= INTEGRALITY_TOL


def _branch_and_bound(master: RestrictedMaster, max_nodes: int) -> Tuple[List[int], int]:
    """Binary gamma over the pool; depth-first, branching on the most fractional gamma"""
    n = master.n_columns
    lower = master.lp.lower.copy()
    upper = master.lp.upper.copy()
    upper[:n] = 1.0

    best_value = 0.0  # the empty packing
    best_gamma = np.zeros(n)
    stack = [(lower, upper)]
    nodes = 0

    while stack:
        if nodes >= max_nodes:
            logger.warning(f"Integerization stopped at the node limit ({max_nodes}); "
                           f"returning the best packing found ({best_value:.9g})")
            break
        lower, upper = stack.pop()
        nodes += 1
        try:
            solution = solve(master.lp.with_bounds(lower, upper))
        except Infeasible:
            continue
        if solution.objective >= best_value - FEASIBILITY_TOL:
            continue

        gamma = solution.primal[:n]
        fractional = np.abs(gamma - np.round(gamma))
        if fractional.max() <= INTEGRALITY_TOL:
            best_value = solution.objective
            best_gamma = np.round(gamma)
            logger.debug(f"B&B node {nodes}: incumbent {best_value:.9g}")
            continue

        g = int(np.argmax(fractional))
        zero_upper = upper.copy()
        zero_upper[g] = 0.0
        stack.append((lower, zero_upper))
        one_lower = lower.copy()
        one_lower[g] = 1.0
        stack.append((one_lower, upper))

    return [g for g in range(n) if best_gamma[g] > 0.5], nodes


def repair_overlaps(instance: Instance, selected: Sequence[Column],
                    active: Iterable[int] = None, epsilon: float = DOI_EPSILON) -> List[Column]:
    """
    Remove doubly covered observations until the selection is a packing.

    For each doubly covered observation every single removal is evaluated and
    the cheapest is applied; ties go to the column with the larger Xi_dg.
    """
    columns: List[Optional[Column]] = list(selected)
    if active:
        logger.debug(f"Repairing active xi on observations {sorted(active)}")

    while True:
        coverage: Dict[int, List[int]] = {}
        for i, column in enumerate(columns):
            if column is None:
                continue
            for d in column.members:
                coverage.setdefault(d, []).append(i)
        doubled = sorted(d for d, owners in coverage.items() if len(owners) > 1)
        if not doubled:
            break

        d = doubled[0]
        options = []
        for i in coverage[d]:
            column = columns[i]
            xi = column.xi_by_member.get(d)
            if xi is None:
                xi = compute_xi_dg(instance, column, epsilon)[d]
            options.append((removal_delta(instance, column.members, d), -xi, i))
        _, _, i = min(options)
        columns[i] = remove_members(instance, columns[i].members, [d])

    return [column for column in columns if column is not None and len(column) > 1]


def integerize(instance: Instance, pool: ColumnPool, doi_config: DoiConfig = None,
               max_nodes: int = MAX_BNB_NODES) -> Clustering:
    """Best packing over the pool, repaired to a partition"""
    doi_config = doi_config or DoiConfig()
    if doi_config.mode != DoiMode.FLEXIBLE:
        doi_config = doi_config.with_mode(DoiMode.NONE)

    master = build_rmp(pool, doi_config)
    root = read_solution(master, solve(master.lp), instance.n_observations)

    lp_integral = _is_integral(root.gamma)
    nodes = 0
    if lp_integral:
        chosen = [g for g in range(master.n_columns) if root.gamma[g] > 0.5]
    else:
        logger.info("Terminal LP is fractional; solving the packing over the pool by branch-and-bound")
        chosen, nodes = _branch_and_bound(master, max_nodes)

    selected = [pool.columns[g] for g in chosen]
    counts: Dict[int, int] = {}
    for column in selected:
        for d in column.members:
            counts[d] = counts.get(d, 0) + 1
    active = [d for d, count in counts.items() if count > 1]

    repaired = repair_overlaps(instance, selected, active, pool.epsilon)
    clustering = Clustering.from_columns(instance, repaired, lp_integral=lp_integral, bnb_nodes=nodes)
    logger.info(f"Integerized: {len(clustering.clusters)} clusters, cost {clustering.total_cost:.9g}, "
                f"{nodes} B&B nodes")
    return clustering
