# src/lp.py
"""
Linear-program solve contract.

Every LP in the package is a minimization over variables bounded below by
zero with ``<=`` rows. The backend is HiGHS through ``scipy.optimize.linprog``;
callers only see LinearProgram / LpSolution, so the backend can be swapped
without touching them.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from config.config import (
    DUALITY_GAP_TOL,
    FEASIBILITY_TOL,
    LP_ITERATION_LIMIT,
    SLACKNESS_TOL,
)
from src.exceptions import Infeasible, IterationLimit, LpError, Unbounded

logger = logging.getLogger(__name__)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """min c.x  s.t.  A x <= b,  lower <= x <= upper"""

    objective: np.ndarray
    rows: sparse.csr_matrix
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.objective.shape[0]
        if self.rows.shape != (self.rhs.shape[0], n):
            raise ValueError(f"Row matrix shape {self.rows.shape} does not match "
                             f"{self.rhs.shape[0]} rows x {n} variables")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("Bounds must have one entry per variable")
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("Objective coefficients must be finite")
        if np.any(self.lower < 0):
            raise ValueError("Variables must be bounded below by 0")
        if np.any(self.upper < self.lower):
            raise ValueError("Upper bound below lower bound")

    @classmethod
    def from_rows(cls, objective: Sequence[float], rows: Sequence[Mapping[int, float]],
                  rhs: Sequence[float], lower: Sequence[float] = None,
                  upper: Sequence[float] = None) -> "LinearProgram":
        """Build from one ``{variable: coefficient}`` mapping per row"""
        n = len(objective)
        data, row_idx, col_idx = [], [], []
        for i, row in enumerate(rows):
            for j, value in row.items():
                if not 0 <= j < n:
                    raise ValueError(f"Row {i} references unknown variable {j}")
                row_idx.append(i)
                col_idx.append(j)
                data.append(float(value))
        matrix = sparse.csr_matrix((data, (row_idx, col_idx)), shape=(len(rows), n))
        lower = np.zeros(n) if lower is None else lower
        upper = np.full(n, np.inf) if upper is None else upper
        return cls(np.asarray(objective, dtype=float), matrix, np.asarray(rhs, dtype=float), lower, upper)

    @property
    def n_variables(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rhs.shape[0]

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "LinearProgram":
        return replace(self, lower=np.array(lower, dtype=float), upper=np.array(upper, dtype=float))

    def add_rows(self, rows: Sequence[Mapping[int, float]], rhs: Sequence[float]) -> "LinearProgram":
        extra = LinearProgram.from_rows(self.objective, rows, rhs, self.lower, self.upper)
        return replace(self, rows=sparse.vstack([self.rows, extra.rows]).tocsr(),
                       rhs=np.concatenate([self.rhs, extra.rhs]))


@dataclass
class LpSolution:
    primal: np.ndarray
    dual: np.ndarray          # one value per row, <= 0
    objective: float
    status: LpStatus
    lower_dual: np.ndarray    # bound multipliers, >= 0 at an optimum
    upper_dual: np.ndarray    # bound multipliers, <= 0 at an optimum
    iterations: int = 0


def solve(lp: LinearProgram, iteration_limit: int = LP_ITERATION_LIMIT) -> LpSolution:
    """
    Solve to an optimal basic solution with row and bound duals.

    Raises IterationLimit, Infeasible or Unbounded instead of returning a
    non-optimal status.
    """
    n, m = lp.n_variables, lp.n_rows

    if n == 0:
        if np.any(lp.rhs < -FEASIBILITY_TOL):
            raise Infeasible("Empty program with a negative right-hand side")
        return LpSolution(primal=np.zeros(0), dual=np.zeros(m), objective=0.0,
                          status=LpStatus.OPTIMAL, lower_dual=np.zeros(0), upper_dual=np.zeros(0))

    bounds = [(lo, None if np.isinf(hi) else hi) for lo, hi in zip(lp.lower, lp.upper)]
    result = linprog(
        lp.objective,
        A_ub=lp.rows if m else None,
        b_ub=lp.rhs if m else None,
        bounds=bounds,
        method="highs",
        options={
            "maxiter": int(iteration_limit),
            "primal_feasibility_tolerance": FEASIBILITY_TOL,
            "dual_feasibility_tolerance": FEASIBILITY_TOL,
        },
    )

    if result.status == 1:
        raise IterationLimit(f"LP stopped after {result.nit} iterations: {result.message}")
    if result.status == 2:
        raise Infeasible(result.message)
    if result.status == 3:
        raise Unbounded(result.message)
    if result.status != 0:
        raise LpError(f"LP backend failed (status {result.status}): {result.message}")

    dual = np.asarray(result.ineqlin.marginals, dtype=float) if m else np.zeros(0)
    solution = LpSolution(
        primal=np.asarray(result.x, dtype=float),
        dual=dual,
        objective=float(result.fun),
        status=LpStatus.OPTIMAL,
        lower_dual=np.asarray(result.lower.marginals, dtype=float),
        upper_dual=np.asarray(result.upper.marginals, dtype=float),
        iterations=int(result.nit),
    )
    logger.debug(f"LP {m} rows x {n} vars solved in {solution.iterations} iterations, "
                 f"objective {solution.objective:.9g}")
    return solution


def dual_objective(lp: LinearProgram, solution: LpSolution) -> float:
    """b.y plus the bound-multiplier terms of finite bounds"""
    value = float(lp.rhs @ solution.dual) if lp.n_rows else 0.0
    finite_upper = np.isfinite(lp.upper)
    value += float(lp.lower @ solution.lower_dual)
    value += float(lp.upper[finite_upper] @ solution.upper_dual[finite_upper])
    return value


def check_certificate(lp: LinearProgram, solution: LpSolution) -> List[str]:
    """
    Optimality certificate of a solution; returns the failed checks (empty if certified).

    Checks primal feasibility, dual signs, reduced-cost consistency,
    complementary slackness and the duality gap.
    """
    problems = []
    x = solution.primal
    y = solution.dual

    if lp.n_variables == 0:
        return problems

    activity = lp.rows @ x if lp.n_rows else np.zeros(0)
    if np.any(activity - lp.rhs > SLACKNESS_TOL):
        problems.append("row infeasible")
    if np.any(x < lp.lower - SLACKNESS_TOL) or np.any(x > lp.upper + SLACKNESS_TOL):
        problems.append("bound infeasible")

    if np.any(y > SLACKNESS_TOL):
        problems.append("row dual with wrong sign")
    if np.any(solution.lower_dual < -SLACKNESS_TOL) or np.any(solution.upper_dual > SLACKNESS_TOL):
        problems.append("bound dual with wrong sign")

    reduced = lp.objective - (lp.rows.T @ y if lp.n_rows else 0.0)
    residual = reduced - solution.lower_dual - solution.upper_dual
    if np.any(np.abs(residual) > SLACKNESS_TOL * max(1.0, float(np.abs(lp.objective).max()))):
        problems.append("reduced costs inconsistent with bound duals")

    if lp.n_rows and np.any(np.abs(y * (activity - lp.rhs)) > SLACKNESS_TOL):
        problems.append("row complementary slackness")
    at_lower = np.abs(solution.lower_dual * (x - lp.lower))
    finite_upper = np.isfinite(lp.upper)
    at_upper = np.abs(solution.upper_dual[finite_upper] * (x[finite_upper] - lp.upper[finite_upper]))
    if np.any(at_lower > SLACKNESS_TOL) or np.any(at_upper > SLACKNESS_TOL):
        problems.append("bound complementary slackness")

    gap = abs(solution.objective - dual_objective(lp, solution))
    if gap > DUALITY_GAP_TOL * max(1.0, abs(solution.objective)):
        problems.append(f"duality gap {gap:.3g}")

    return problems
