# src/master.py
"""
Restricted master problem over the column pool.

Three stabilization modes are supported:

* ``none``      plain set-packing RMP, one ``<= 1`` row per observation
* ``varying``   adds xi_d with penalty Xi_d = eps + max_g (Xi_dg - eps)
* ``flexible``  one row per (observation, selected threshold rung); xi_dz
                 priced at the increment between consecutive selected rungs
"""

import bisect
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from config.config import DOI_EPSILON, DOI_MODE, DOI_THRESHOLDS
from src.core import Column, Instance
from src.exceptions import InfeasibleColumn
from src.lp import LinearProgram, LpSolution, solve

logger = logging.getLogger(__name__)


class DoiMode(str, Enum):
    NONE = "none"
    VARYING = "varying"
    FLEXIBLE = "flexible"


@dataclass(frozen=True)
class DoiConfig:
    mode: DoiMode = DoiMode(DOI_MODE)
    k: int = DOI_THRESHOLDS
    epsilon: float = DOI_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "mode", DoiMode(self.mode))
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.mode == DoiMode.FLEXIBLE and self.k < 1:
            raise ValueError(f"K must be at least 1 in flexible mode, got {self.k}")

    def with_mode(self, mode) -> "DoiConfig":
        return DoiConfig(mode=DoiMode(mode), k=max(self.k, 1), epsilon=self.epsilon)


@dataclass(frozen=True)
class ThresholdLadder:
    """Sorted unique positive Xi values of one observation and the selected rungs"""

    omega: Tuple[float, ...]
    increments: Tuple[float, ...]
    selected: Tuple[int, ...]  # 0-based rung indices, always holds the last one

    @property
    def selected_omega(self) -> Tuple[float, ...]:
        return tuple(self.omega[z] for z in self.selected)

    @property
    def selected_increments(self) -> Tuple[float, ...]:
        values = self.selected_omega
        return tuple(v - (values[i - 1] if i else 0.0) for i, v in enumerate(values))

    def round_up(self, xi: float) -> int:
        """Position (within ``selected``) of the smallest selected rung >= xi"""
        position = bisect.bisect_left(self.selected_omega, xi)
        if position == len(self.selected):
            raise ValueError(f"Xi value {xi} exceeds the top rung {self.omega[-1]}")
        return position

    def rounded(self, xi: float) -> float:
        return self.selected_omega[self.round_up(xi)]


@dataclass
class DualSolution:
    mode: DoiMode
    aggregate: np.ndarray                       # lambda_d for every observation
    by_threshold: Dict[Tuple[int, int], float] = field(default_factory=dict)  # (d, rung) -> lambda_dz


@dataclass
class RestrictedMaster:
    """An RMP instance plus the bookkeeping to read its solution back"""

    lp: LinearProgram
    mode: DoiMode
    n_columns: int
    row_keys: List[Tuple[int, int]]    # (d, rung); rung 0 when not flexible
    xi_keys: List[Tuple[int, int]]     # one per xi variable, same convention


@dataclass
class RmpSolution:
    objective: float
    gamma: np.ndarray
    xi: Dict[Tuple[int, int], float]
    duals: DualSolution
    lp_solution: Optional[LpSolution] = None


def compute_xi_dg(instance: Instance, column: Column, epsilon: float = DOI_EPSILON) -> Dict[int, float]:
    """Per-member removal bound: eps + max(0, -sum theta_dd1 * (1 + [theta_dd1 < 0]))"""
    xi = {}
    for d in column.members:
        row = instance.neighbors(d)
        total = 0.0
        for other in column.members:
            if other == d:
                continue
            value = row[other]
            total += 2.0 * value if value < 0 else value
        xi[d] = epsilon + max(0.0, -total)
    return xi


class ColumnPool:
    """Append-only set of distinct feasible columns with cached Xi_dg"""

    def __init__(self, instance: Instance, epsilon: float = DOI_EPSILON):
        self.instance = instance
        self.epsilon = epsilon
        self.columns: List[Column] = []
        self._index: Dict[Tuple[int, ...], int] = {}
        self._omega_sets: List[set] = [set() for _ in range(instance.n_observations)]
        self._ladder_cache: Dict[int, List[Optional[ThresholdLadder]]] = {}
        self.logger = logging.getLogger(__name__)

    def __len__(self):
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __contains__(self, members) -> bool:
        return tuple(sorted(members)) in self._index

    def index_of(self, members) -> Optional[int]:
        return self._index.get(tuple(sorted(members)))

    @property
    def ladders_stale(self) -> bool:
        return not self._ladder_cache

    def add_columns(self, columns: Iterable[Column]) -> int:
        """Add unseen columns, caching their Xi_dg; returns how many were new"""
        added = 0
        for column in columns:
            if column.key in self._index:
                continue
            if not self.instance.is_feasible(column.members):
                raise InfeasibleColumn(f"Column {column.members} contains a blocked pair")

            column.xi_by_member = compute_xi_dg(self.instance, column, self.epsilon)
            self._index[column.key] = len(self.columns)
            self.columns.append(column)
            added += 1

            for d, value in column.xi_by_member.items():
                if value not in self._omega_sets[d]:
                    self._omega_sets[d].add(value)
                    self._ladder_cache.clear()

        if added:
            self.logger.debug(f"Added {added} columns, pool size {len(self.columns)}")
        return added

    def omega_values(self, d: int) -> List[float]:
        return sorted(self._omega_sets[d])

    def ladders(self, doi_config: DoiConfig) -> List[Optional[ThresholdLadder]]:
        """Ladders for the config's K, rebuilt only after new distinct Xi values appeared"""
        cached = self._ladder_cache.get(doi_config.k)
        if cached is None:
            cached = build_ladders(self, doi_config)
            self._ladder_cache[doi_config.k] = cached
        return cached


def compute_varying_xi(pool: ColumnPool, epsilon: float = None) -> np.ndarray:
    """Xi_d = eps + max over pool columns of (Xi_dg - eps); eps for uncovered observations"""
    epsilon = pool.epsilon if epsilon is None else epsilon
    xi = np.zeros(pool.instance.n_observations)
    for column in pool.columns:
        for d, value in column.xi_by_member.items():
            xi[d] = max(xi[d], value - pool.epsilon)
    return xi + epsilon


def select_rungs(size: int, k: int) -> Tuple[int, ...]:
    """0-based indices {ceil(j * size / (K + 1)) - 1 : 1 <= j <= K + 1}"""
    chosen = {-(-j * size // (k + 1)) - 1 for j in range(1, k + 2)}
    return tuple(sorted(chosen))


def build_ladders(pool: ColumnPool, doi_config: DoiConfig) -> List[Optional[ThresholdLadder]]:
    """One ladder per observation (None when no pool column covers it)"""
    ladders: List[Optional[ThresholdLadder]] = []
    for d in range(pool.instance.n_observations):
        omega = tuple(pool.omega_values(d))
        if not omega:
            ladders.append(None)
            continue
        increments = tuple(v - (omega[i - 1] if i else 0.0) for i, v in enumerate(omega))
        ladders.append(ThresholdLadder(omega=omega, increments=increments,
                                       selected=select_rungs(len(omega), doi_config.k)))
    return ladders


def build_rmp(pool: ColumnPool, doi_config: DoiConfig,
              ladders: Optional[List[Optional[ThresholdLadder]]] = None) -> RestrictedMaster:
    n = pool.instance.n_observations
    n_columns = len(pool.columns)
    objective = [column.cost for column in pool.columns]
    rows: List[Dict[int, float]] = []
    row_keys: List[Tuple[int, int]] = []
    xi_keys: List[Tuple[int, int]] = []

    if doi_config.mode in (DoiMode.NONE, DoiMode.VARYING):
        rows = [dict() for _ in range(n)]
        row_keys = [(d, 0) for d in range(n)]
        for g, column in enumerate(pool.columns):
            for d in column.members:
                rows[d][g] = 1.0
        if doi_config.mode == DoiMode.VARYING:
            penalties = compute_varying_xi(pool, doi_config.epsilon)
            for d in range(n):
                rows[d][n_columns + d] = -1.0
                objective.append(float(penalties[d]))
                xi_keys.append((d, 0))
    else:
        if ladders is None:
            ladders = pool.ladders(doi_config)
        row_of: Dict[Tuple[int, int], int] = {}
        for d, ladder in enumerate(ladders):
            if ladder is None:
                continue
            for position, (rung, increment) in enumerate(zip(ladder.selected, ladder.selected_increments)):
                key = (d, rung + 1)
                row_of[(d, position)] = len(rows)
                rows.append({n_columns + len(xi_keys): -1.0})
                row_keys.append(key)
                xi_keys.append(key)
                objective.append(increment)
        for g, column in enumerate(pool.columns):
            for d in column.members:
                top = ladders[d].round_up(column.xi_by_member[d])
                for position in range(top + 1):
                    rows[row_of[(d, position)]][g] = 1.0

    lp = LinearProgram.from_rows(objective, rows, np.ones(len(rows)))
    return RestrictedMaster(lp=lp, mode=doi_config.mode, n_columns=n_columns,
                            row_keys=row_keys, xi_keys=xi_keys)


def read_solution(master: RestrictedMaster, solution: LpSolution, n_observations: int) -> RmpSolution:
    """Translate an LP solution of ``master`` back to named quantities"""
    gamma = solution.primal[:master.n_columns].copy()
    xi = {key: float(value) for key, value in zip(master.xi_keys, solution.primal[master.n_columns:])}

    aggregate = np.zeros(n_observations)
    by_threshold = {}
    for (d, rung), value in zip(master.row_keys, solution.dual):
        aggregate[d] += value
        if master.mode == DoiMode.FLEXIBLE:
            by_threshold[(d, rung)] = float(value)

    duals = DualSolution(mode=master.mode, aggregate=aggregate, by_threshold=by_threshold)
    return RmpSolution(objective=solution.objective, gamma=gamma, xi=xi, duals=duals, lp_solution=solution)


def solve_rmp(pool: ColumnPool, doi_config: DoiConfig) -> RmpSolution:
    master = build_rmp(pool, doi_config)
    solution = solve(master.lp)
    result = read_solution(master, solution, pool.instance.n_observations)
    logger.debug(f"RMP ({doi_config.mode.value}) over {len(pool)} columns: {result.objective:.9g}")
    return result
