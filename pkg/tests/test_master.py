import itertools

import numpy as np
import pytest

from src.core import Column, Instance, hypothesis_cost, remove_members
from src.exceptions import InfeasibleColumn
from src.lp import check_certificate
from src.master import (
    ColumnPool,
    DoiConfig,
    DoiMode,
    build_ladders,
    build_rmp,
    compute_varying_xi,
    compute_xi_dg,
    select_rungs,
    solve_rmp,
)
from tests.oracles import all_feasible_columns

EPS = 1e-6


def random_pool_columns(instance, seed, share=0.4):
    """A random share of the multi-member feasible columns, in random order"""
    rng = np.random.default_rng(seed)
    columns = [column for column in all_feasible_columns(instance) if len(column) > 1]
    return [columns[i] for i in rng.permutation(len(columns)) if rng.random() < share]


@pytest.fixture
def worked_pool(worked_instance, worked_columns):
    pool = ColumnPool(worked_instance, EPS)
    pool.add_columns(worked_columns)
    return pool


class TestDoiConfig:
    def test_defaults_validate(self):
        config = DoiConfig(mode="flexible", k=3, epsilon=1e-6)
        assert config.mode is DoiMode.FLEXIBLE

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ValueError):
            DoiConfig(epsilon=0.0)

    def test_rejects_zero_k_in_flexible_mode(self):
        with pytest.raises(ValueError):
            DoiConfig(mode="flexible", k=0)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            DoiConfig(mode="sometimes")


class TestXi:
    def test_worked_removal_bounds(self, worked_instance, worked_columns):
        g1, g2 = worked_columns
        xi1 = compute_xi_dg(worked_instance, g1, EPS)
        xi2 = compute_xi_dg(worked_instance, g2, EPS)
        assert xi1 == {0: pytest.approx(400 + EPS), 1: pytest.approx(400 + EPS), 2: pytest.approx(400 + EPS)}
        assert xi2[2] == pytest.approx(4 + EPS)
        assert xi2[3] == pytest.approx(202 + EPS)
        assert xi2[4] == pytest.approx(202 + EPS)

    def test_positive_costs_count_once(self):
        instance = Instance(3, {(0, 1): 2.0, (0, 2): -1.0, (1, 2): 5.0})
        column = Column.from_members(instance, [0, 1, 2])
        xi = compute_xi_dg(instance, column, EPS)
        # negative costs weigh double: 2 - 2 for observation 0
        assert xi[0] == pytest.approx(EPS)
        assert xi[1] == pytest.approx(EPS)
        assert xi[2] == pytest.approx(EPS + 0.0)

    def test_varying_xi_takes_the_maximum(self, worked_pool):
        xi = compute_varying_xi(worked_pool, EPS)
        assert xi[2] == pytest.approx(400 + EPS)
        assert xi[3] == pytest.approx(202 + EPS)

    def test_removal_bound_covers_every_subset(self, random_instance):
        """sum over S of Xi_dg >= eps + cost(g without S) - cost(g)"""
        violations = 0
        for seed in range(10):
            instance = random_instance(7, 0.7, seed)
            for column in all_feasible_columns(instance):
                if len(column) < 2 or len(column) > 8:
                    continue
                xi = compute_xi_dg(instance, column, EPS)
                for size in range(1, len(column) + 1):
                    for subset in itertools.combinations(column.members, size):
                        reduced = remove_members(instance, column.members, subset)
                        after = reduced.cost if reduced is not None else 0.0
                        if sum(xi[d] for d in subset) < EPS + after - column.cost - 1e-9:
                            violations += 1
        assert violations == 0


class TestColumnPool:
    def test_deduplicates(self, worked_instance, worked_columns):
        pool = ColumnPool(worked_instance, EPS)
        assert pool.add_columns(worked_columns) == 2
        assert pool.add_columns([Column.from_members(worked_instance, [2, 1, 0])]) == 0
        assert len(pool) == 2
        assert (0, 1, 2) in pool
        assert pool.index_of((2, 3, 4)) == 1

    def test_rejects_infeasible_column(self, worked_instance):
        pool = ColumnPool(worked_instance, EPS)
        with pytest.raises(InfeasibleColumn):
            pool.add_columns([Column((0, 3), 0.0)])

    def test_omega_values_sorted_unique(self, worked_pool):
        assert worked_pool.omega_values(2) == [pytest.approx(4 + EPS), pytest.approx(400 + EPS)]
        assert len(worked_pool.omega_values(0)) == 1

    def test_removal_bounds_only_grow(self, random_instance):
        for seed in range(10):
            instance = random_instance(8, 0.6, 200 + seed)
            columns = random_pool_columns(instance, seed)
            batches = [columns[i::4] for i in range(4)]
            pool = ColumnPool(instance, EPS)
            xi = compute_varying_xi(pool, EPS)
            omega = [set() for _ in range(instance.n_observations)]
            for batch in batches:
                pool.add_columns(batch)
                grown = compute_varying_xi(pool, EPS)
                assert np.all(grown >= xi)
                for d in range(instance.n_observations):
                    values = set(pool.omega_values(d))
                    assert omega[d] <= values
                    omega[d] = values
                xi = grown

    def test_ladder_cache_invalidated_on_new_values(self, worked_instance, worked_pool):
        config = DoiConfig(mode="flexible", k=5, epsilon=EPS)
        first = worked_pool.ladders(config)
        assert worked_pool.ladders(config) is first
        worked_pool.add_columns([Column.from_members(worked_instance, [3, 4])])
        assert worked_pool.ladders_stale
        assert worked_pool.ladders(config) is not first


class TestLadders:
    def test_select_rungs_keeps_top(self):
        assert select_rungs(2, 5) == (0, 1)
        assert select_rungs(10, 1) == (4, 9)
        assert select_rungs(1, 3) == (0,)
        for size in range(1, 30):
            for k in range(1, 8):
                chosen = select_rungs(size, k)
                assert chosen[-1] == size - 1
                assert len(chosen) <= min(size, k + 1)

    def test_worked_ladder(self, worked_pool):
        ladders = build_ladders(worked_pool, DoiConfig(mode="flexible", k=5, epsilon=EPS))
        ladder = ladders[2]
        assert ladder.omega == (pytest.approx(4 + EPS), pytest.approx(400 + EPS))
        assert ladder.selected_increments == (pytest.approx(4 + EPS), pytest.approx(396.0))
        assert ladder.round_up(4 + EPS) == 0
        assert ladder.round_up(5.0) == 1
        with pytest.raises(ValueError):
            ladder.round_up(401.0)

    def test_subsampled_increments_sum_to_rounded_value(self, worked_instance):
        pool = ColumnPool(worked_instance, EPS)
        pool.add_columns([Column.from_members(worked_instance, members)
                          for members in [(0, 1, 2), (2, 3, 4), (2, 3), (0, 2), (1, 2, 3)]
                          if worked_instance.is_feasible(members)])
        ladder = build_ladders(pool, DoiConfig(mode="flexible", k=1, epsilon=EPS))[2]
        for value in ladder.omega:
            top = ladder.round_up(value)
            assert sum(ladder.selected_increments[:top + 1]) == pytest.approx(ladder.rounded(value))
            assert ladder.rounded(value) >= value

    def test_uncovered_observation_has_no_ladder(self, worked_instance):
        pool = ColumnPool(worked_instance, EPS)
        pool.add_columns([Column.from_members(worked_instance, [3, 4])])
        ladders = build_ladders(pool, DoiConfig(mode="flexible", k=2, epsilon=EPS))
        assert ladders[0] is None
        assert ladders[3] is not None


class TestRestrictedMaster:
    def test_none_mode(self, worked_pool):
        solution = solve_rmp(worked_pool, DoiConfig(mode="none", epsilon=EPS))
        assert solution.objective == pytest.approx(-600.0, abs=1e-6)
        assert solution.gamma[0] == pytest.approx(1.0)
        assert np.all(solution.duals.aggregate <= 1e-9)

    def test_varying_mode(self, worked_pool):
        solution = solve_rmp(worked_pool, DoiConfig(mode="varying", epsilon=EPS))
        assert solution.objective == pytest.approx(-600.0, abs=1e-6)

    def test_flexible_mode(self, worked_pool):
        solution = solve_rmp(worked_pool, DoiConfig(mode="flexible", k=5, epsilon=EPS))
        assert solution.objective == pytest.approx(-800.0 + EPS, abs=1e-6)
        assert solution.gamma == pytest.approx([1.0, 1.0])
        assert solution.xi[(2, 1)] == pytest.approx(1.0)
        assert solution.xi[(2, 2)] == pytest.approx(0.0, abs=1e-7)

    def test_flexible_rows_per_rung(self, worked_pool):
        master = build_rmp(worked_pool, DoiConfig(mode="flexible", k=5, epsilon=EPS))
        # one rung for 0, 1, 3, 4 and two for the shared observation 2
        assert master.lp.n_rows == 6
        assert master.row_keys.count((2, 1)) == 1
        assert master.row_keys.count((2, 2)) == 1
        assert master.lp.n_variables == 2 + 6

    def test_flexible_duals_aggregate(self, worked_pool):
        solution = solve_rmp(worked_pool, DoiConfig(mode="flexible", k=5, epsilon=EPS))
        total = sum(value for (d, _), value in solution.duals.by_threshold.items() if d == 2)
        assert solution.duals.aggregate[2] == pytest.approx(total)

    @pytest.mark.parametrize("mode", ["none", "varying", "flexible"])
    def test_certificates(self, worked_pool, mode):
        config = DoiConfig(mode=mode, k=3, epsilon=EPS)
        master = build_rmp(worked_pool, config)
        solution = solve_rmp(worked_pool, config)
        assert check_certificate(master.lp, solution.lp_solution) == []

    def test_each_relaxation_is_at_least_as_loose(self, random_instance):
        for seed in range(15):
            instance = random_instance(4 + seed % 7, 0.6, 500 + seed)
            pool = ColumnPool(instance, EPS)
            pool.add_columns(random_pool_columns(instance, seed))
            none = solve_rmp(pool, DoiConfig(mode="none", epsilon=EPS)).objective
            varying = solve_rmp(pool, DoiConfig(mode="varying", epsilon=EPS)).objective
            assert varying <= none + 1e-7, seed
            for k in (1, 3, 5):
                flexible = solve_rmp(pool, DoiConfig(mode="flexible", k=k, epsilon=EPS)).objective
                assert flexible <= varying + 1e-7, (seed, k)

    def test_empty_pool(self, worked_instance):
        pool = ColumnPool(worked_instance, EPS)
        for mode in ("none", "varying", "flexible"):
            solution = solve_rmp(pool, DoiConfig(mode=mode, k=2, epsilon=EPS))
            assert solution.objective == pytest.approx(0.0)
            assert np.all(solution.duals.aggregate == 0.0)

    def test_column_cost_is_cached(self, worked_pool):
        for column in worked_pool:
            assert column.cost == hypothesis_cost(worked_pool.instance, column.members)
