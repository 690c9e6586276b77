import numpy as np
import pytest

from src.exceptions import Infeasible, Unbounded
from src.lp import LinearProgram, LpStatus, check_certificate, dual_objective, solve


def packing_lp():
    # two overlapping columns sharing observation 1
    return LinearProgram.from_rows([-3.0, -2.0], [{0: 1.0}, {0: 1.0, 1: 1.0}, {1: 1.0}], [1.0, 1.0, 1.0])


class TestLinearProgram:
    def test_from_rows_shapes(self):
        lp = packing_lp()
        assert lp.n_variables == 2
        assert lp.n_rows == 3
        assert lp.rows.toarray().tolist() == [[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
        assert np.all(lp.lower == 0.0)
        assert np.all(np.isinf(lp.upper))

    def test_unknown_variable_rejected(self):
        with pytest.raises(ValueError):
            LinearProgram.from_rows([1.0], [{3: 1.0}], [1.0])

    def test_negative_lower_bound_rejected(self):
        with pytest.raises(ValueError):
            LinearProgram.from_rows([1.0], [], [], lower=[-1.0])

    def test_add_rows_keeps_bounds(self):
        lp = packing_lp().with_bounds([0.0, 0.0], [1.0, 1.0])
        extended = lp.add_rows([{0: 1.0, 1: 1.0}], [0.5])
        assert extended.n_rows == 4
        assert extended.upper.tolist() == [1.0, 1.0]


class TestSolve:
    def test_optimal_with_duals(self):
        lp = packing_lp()
        solution = solve(lp)
        assert solution.status == LpStatus.OPTIMAL
        assert solution.objective == pytest.approx(-3.0)
        assert np.all(solution.dual <= 1e-9)
        assert dual_objective(lp, solution) == pytest.approx(-3.0)
        assert check_certificate(lp, solution) == []

    def test_empty_program(self):
        solution = solve(LinearProgram.from_rows([], [], []))
        assert solution.objective == 0.0

    def test_empty_program_with_negative_rhs(self):
        lp = LinearProgram.from_rows([], [{}], [-1.0])
        with pytest.raises(Infeasible):
            solve(lp)

    def test_infeasible(self):
        lp = LinearProgram.from_rows([1.0], [{0: 1.0}], [0.5], lower=[1.0])
        with pytest.raises(Infeasible):
            solve(lp)

    def test_unbounded(self):
        lp = LinearProgram.from_rows([-1.0, 0.0], [{0: 1.0, 1: -1.0}], [1.0])
        # presolve may only know "infeasible or unbounded"
        with pytest.raises((Unbounded, Infeasible)):
            solve(lp)

    def test_upper_bounds_respected(self):
        lp = packing_lp().with_bounds([0.0, 0.0], [0.5, 1.0])
        solution = solve(lp)
        assert solution.primal[0] == pytest.approx(0.5)
        assert solution.objective == pytest.approx(-2.5)
        assert check_certificate(lp, solution) == []


class TestCertificate:
    def test_detects_tampered_primal(self):
        lp = packing_lp()
        solution = solve(lp)
        solution.primal = np.array([1.0, 1.0])
        assert "row infeasible" in check_certificate(lp, solution)

    def test_detects_wrong_dual_sign(self):
        lp = packing_lp()
        solution = solve(lp)
        solution.dual = -solution.dual + 1.0
        problems = check_certificate(lp, solution)
        assert "row dual with wrong sign" in problems

    def test_random_packings_certify(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n_rows, n_cols = 6, 10
            matrix = (rng.random((n_rows, n_cols)) < 0.4).astype(float)
            rows = [{j: 1.0 for j in np.flatnonzero(matrix[i])} for i in range(n_rows)]
            lp = LinearProgram.from_rows(rng.uniform(-5, 1, n_cols), rows, np.ones(n_rows),
                                         upper=np.ones(n_cols))
            solution = solve(lp)
            assert check_certificate(lp, solution) == []
