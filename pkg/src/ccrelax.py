# src/ccrelax.py
"""
Correlation-clustering relaxation checks.

A packing maps to edge variables f_{d1 d2} = sum_g G_{d1 g} G_{d2 g} gamma_g,
the fraction of weight that puts the two observations together. The cycle
plus odd-wheel LP over f is a relaxation the set-packing LP must never be
looser than; this module maps packings to f, checks the three families of
constraints and compares the two LP values on small instances.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy import sparse

from config.config import (
    CC_MAX_RIM,
    CC_MAX_SEPARATION_ROUNDS,
    CC_SIZE_LIMIT,
    DUALITY_GAP_TOL,
    FEASIBILITY_TOL,
)
from src.colgen import CgConfig, run_cg
from src.core import Instance
from src.exceptions import SizeLimit, TightnessViolation
from src.lp import LinearProgram, solve
from src.master import ColumnPool, DoiConfig, DoiMode
from src.pricing import PricingConfig, PricingStrategy

logger = logging.getLogger(__name__)


@dataclass
class EdgeVariables:
    """Symmetric n x n matrix of pair values; the diagonal is unused and kept at 0"""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"Edge variables must be square, got shape {self.values.shape}")
        if not np.allclose(self.values, self.values.T):
            raise ValueError("Edge variables must be symmetric")

    @classmethod
    def zeros(cls, n: int) -> "EdgeVariables":
        return cls(np.zeros((n, n)))

    @property
    def n_observations(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, pair: Tuple[int, int]) -> float:
        d1, d2 = pair
        return float(self.values[d1, d2])


@dataclass(frozen=True)
class Wheel:
    hub: int
    rim: Tuple[int, ...]

    def __post_init__(self):
        if len(self.rim) < 3 or len(self.rim) % 2 == 0:
            raise ValueError(f"Rim length must be odd and at least 3, got {len(self.rim)}")
        if self.hub in self.rim:
            raise ValueError(f"Hub {self.hub} lies on the rim")
        if len(set(self.rim)) != len(self.rim):
            raise ValueError(f"Rim {self.rim} repeats an observation")

    @property
    def rhs(self) -> int:
        return len(self.rim) // 2

    def spokes(self) -> List[Tuple[int, int]]:
        return [(d, self.hub) for d in self.rim]

    def rim_edges(self) -> List[Tuple[int, int]]:
        return [(d, self.rim[(m + 1) % len(self.rim)]) for m, d in enumerate(self.rim)]

    def lhs(self, f: EdgeVariables) -> float:
        return sum(f[e] for e in self.spokes()) - sum(f[e] for e in self.rim_edges())


@dataclass
class Violation:
    kind: str                      # "bound", "cycle" or "wheel"
    members: Tuple[int, ...]
    amount: float                  # how far the constraint is exceeded

    def __str__(self):
        return f"{self.kind} {self.members}: violated by {self.amount:.3g}"


@dataclass
class CcRelaxation:
    objective: float
    f: EdgeVariables
    separation_rounds: int = 0
    wheel_rows: int = 0


@dataclass
class TightnessReport:
    cg_lp_value: float
    cc_lp_value: float
    gap: float
    separation_rounds: int = 0
    notes: List[str] = field(default_factory=list)


def gamma_to_f(pool: ColumnPool, gamma: Sequence[float]) -> EdgeVariables:
    n = pool.instance.n_observations
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (len(pool),):
        raise ValueError(f"Expected {len(pool)} gamma values, got {gamma.shape}")
    if np.any(gamma < -FEASIBILITY_TOL):
        raise ValueError("gamma must be non-negative")

    rows, cols = [], []
    for g, column in enumerate(pool.columns):
        rows.extend(column.members)
        cols.extend([g] * len(column))
    incidence = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, len(pool)))
    values = (incidence @ sparse.diags(gamma) @ incidence.T).toarray() if len(pool) else np.zeros((n, n))
    np.fill_diagonal(values, 0.0)
    return EdgeVariables(values)


def check_bounds(f: EdgeVariables, tol: float = FEASIBILITY_TOL) -> List[Violation]:
    i, j = np.triu_indices(f.n_observations, 1)
    values = f.values[i, j]
    violations = []
    for a, b, value in zip(i, j, values):
        if value < -tol:
            violations.append(Violation("bound", (int(a), int(b)), float(-value)))
        elif value > 1.0 + tol:
            violations.append(Violation("bound", (int(a), int(b)), float(value - 1.0)))
    return violations


def check_cycle_inequalities(f: EdgeVariables, tol: float = FEASIBILITY_TOL) -> List[Violation]:
    """
    Triangle form of the cycle inequalities: f_{d1 d3} + f_{d2 d3} - f_{d1 d2} <= 1.

    Reported as (d1, d2, d3) with d1 < d2 and d3 the shared observation.
    """
    n = f.n_observations
    values = f.values
    violations = []
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for shared in range(n):
        lhs = values[:, shared][:, None] + values[shared, :][None, :] - values
        mask = upper.copy()
        mask[shared, :] = False
        mask[:, shared] = False
        excess = np.where(mask, lhs - 1.0, -np.inf)
        for a, b in zip(*np.nonzero(excess > tol)):
            violations.append(Violation("cycle", (int(a), int(b), shared), float(excess[a, b])))
    return violations


def enumerate_wheels(n: int, max_rim: int = CC_MAX_RIM) -> Iterator[Wheel]:
    """
    Every wheel over n observations with an odd rim of length 3..max_rim.

    Rims are canonical cycles: they start at their smallest member and the
    second member is smaller than the last, so each cycle appears once.
    """
    for hub in range(n):
        others = [d for d in range(n) if d != hub]
        for length in range(3, max_rim + 1, 2):
            for subset in combinations(others, length):
                first, rest = subset[0], subset[1:]
                for order in permutations(rest):
                    if order[0] < order[-1]:
                        yield Wheel(hub=hub, rim=(first,) + order)


def check_odd_wheels(f: EdgeVariables, max_rim: int = CC_MAX_RIM,
                     tol: float = FEASIBILITY_TOL) -> List[Violation]:
    violations = []
    for wheel in enumerate_wheels(f.n_observations, max_rim):
        excess = wheel.lhs(f) - wheel.rhs
        if excess > tol:
            violations.append(Violation("wheel", (wheel.hub,) + wheel.rim, float(excess)))
    return violations


def _violated_wheels(f: EdgeVariables, max_rim: int) -> List[Wheel]:
    return [wheel for wheel in enumerate_wheels(f.n_observations, max_rim)
            if wheel.lhs(f) - wheel.rhs > FEASIBILITY_TOL]


def relax_cc(instance: Instance, max_rim: int = CC_MAX_RIM,
             max_rounds: int = CC_MAX_SEPARATION_ROUNDS) -> CcRelaxation:
    """Cycle LP over all pairs, tightened by lazily separated odd wheels"""
    n = instance.n_observations
    if n > CC_SIZE_LIMIT:
        raise SizeLimit(f"The correlation-clustering LP handles at most {CC_SIZE_LIMIT} observations, got {n}")

    pairs = list(combinations(range(n), 2))
    index = {pair: k for k, pair in enumerate(pairs)}

    def var(d1, d2):
        return index[(d1, d2) if d1 < d2 else (d2, d1)]

    objective = np.zeros(len(pairs))
    upper = np.zeros(len(pairs))
    for k, (d1, d2) in enumerate(pairs):
        value = instance.theta(d1, d2)
        if value is not None:
            objective[k] = 2.0 * value
            upper[k] = 1.0

    rows = []
    for a, b, c in combinations(range(n), 3):
        for shared, (d1, d2) in ((c, (a, b)), (b, (a, c)), (a, (b, c))):
            rows.append({var(d1, shared): 1.0, var(d2, shared): 1.0, var(d1, d2): -1.0})

    lp = LinearProgram.from_rows(objective, rows, np.ones(len(rows)), upper=upper)

    def edge_values(primal: np.ndarray) -> EdgeVariables:
        values = np.zeros((n, n))
        for k, (d1, d2) in enumerate(pairs):
            values[d1, d2] = values[d2, d1] = primal[k]
        return EdgeVariables(values)

    solution = solve(lp)
    f = edge_values(solution.primal)
    rounds = 0
    wheel_rows = 0
    while rounds < max_rounds:
        wheels = _violated_wheels(f, max_rim)
        if not wheels:
            break
        rounds += 1
        new_rows = []
        for wheel in wheels:
            row = {}
            for d1, d2 in wheel.spokes():
                row[var(d1, d2)] = row.get(var(d1, d2), 0.0) + 1.0
            for d1, d2 in wheel.rim_edges():
                row[var(d1, d2)] = row.get(var(d1, d2), 0.0) - 1.0
            new_rows.append(row)
        lp = lp.add_rows(new_rows, [wheel.rhs for wheel in wheels])
        wheel_rows += len(new_rows)
        solution = solve(lp)
        f = edge_values(solution.primal)
        logger.debug(f"Separation round {rounds}: {len(wheels)} odd wheels added, LP {solution.objective:.9g}")
    else:
        if _violated_wheels(f, max_rim):
            logger.warning(f"Odd-wheel separation stopped after {max_rounds} rounds with wheels still violated")

    return CcRelaxation(objective=solution.objective, f=f, separation_rounds=rounds, wheel_rows=wheel_rows)


def solve_cc_lp(instance: Instance) -> float:
    return relax_cc(instance).objective


def compare_tightness(instance: Instance, cg_config: CgConfig = None) -> TightnessReport:
    """
    Set-packing LP value against the cycle/odd-wheel LP value.

    The set-packing value may never lie below the relaxation; a strictly
    larger value is logged since such instances are worth keeping.
    """
    n = instance.n_observations
    if n > CC_SIZE_LIMIT:
        raise SizeLimit(f"Tightness comparison handles at most {CC_SIZE_LIMIT} observations, got {n}")

    cg_config = cg_config or CgConfig(doi=DoiConfig(mode=DoiMode.NONE),
                                      pricing=PricingConfig(strategy=PricingStrategy.EXACT))
    cg_value = run_cg(instance, cg_config).lp_objective
    relaxation = relax_cc(instance)
    gap = cg_value - relaxation.objective

    report = TightnessReport(cg_lp_value=cg_value, cc_lp_value=relaxation.objective, gap=gap,
                             separation_rounds=relaxation.separation_rounds)
    if gap < -DUALITY_GAP_TOL:
        raise TightnessViolation(f"Set-packing LP {cg_value:.9g} lies below the cycle/odd-wheel LP "
                                 f"{relaxation.objective:.9g} on {instance}")
    if gap > DUALITY_GAP_TOL:
        report.notes.append("set-packing LP strictly tighter")
        logger.warning(f"Strict gap {gap:.6g} between set-packing and cycle/odd-wheel LP on {instance}")
    logger.info(f"Tightness: set-packing {cg_value:.9g}, cycle/odd-wheel {relaxation.objective:.9g}")
    return report
