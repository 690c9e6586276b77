import numpy as np
import pytest

from src.core import Column, Instance

# Five observations: a strong triple, a strong pair and two weak links between them
WORKED_THETA = {
    (0, 1): -100.0,
    (0, 2): -100.0,
    (1, 2): -100.0,
    (3, 4): -100.0,
    (2, 3): -1.0,
    (2, 4): -1.0,
}


def make_random_instance(n: int, density: float = 0.5, seed: int = 0,
                         low: float = -1.0, high: float = 1.0) -> Instance:
    rng = np.random.default_rng(seed)
    costs = {}
    for d1 in range(n):
        for d2 in range(d1 + 1, n):
            if rng.random() < density:
                costs[(d1, d2)] = float(rng.uniform(low, high))
    return Instance(n, costs)


@pytest.fixture
def worked_instance():
    return Instance(5, WORKED_THETA)


@pytest.fixture
def worked_columns(worked_instance):
    g1 = Column.from_members(worked_instance, [0, 1, 2])
    g2 = Column.from_members(worked_instance, [2, 3, 4])
    return g1, g2


@pytest.fixture
def random_instance():
    return make_random_instance


@pytest.fixture
def theta_file(tmp_path):
    path = tmp_path / "theta.csv"
    lines = ["d1,d2,-100", "d1,d3,-100", "d2,d3,-100", "d4,d5,-100", "d3,d4,-1", "d3,d5,-1"]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
