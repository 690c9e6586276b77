# src/core.py
"""
Instance data model and hypothesis arithmetic.

Observations are dense integers ``0..n-1``. Pair costs theta are stored once per
unordered pair; an absent pair means theta = inf (blocked), theta_dd = 0.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from src.exceptions import InfeasiblePair

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


def canonical_pair(d1: int, d2: int) -> Pair:
    """Order a pair so it can be used as a dictionary key"""
    return (d1, d2) if d1 < d2 else (d2, d1)


class Instance:
    """Observations plus sparse symmetric finite pair costs"""

    def __init__(self, n_observations: int, pair_costs: Mapping[Pair, float] = None):
        if n_observations < 0:
            raise ValueError(f"n_observations must be non-negative, got {n_observations}")
        self.n_observations = int(n_observations)
        self._theta: Dict[Pair, float] = {}
        self._adjacency: List[Dict[int, float]] = [dict() for _ in range(self.n_observations)]

        for (d1, d2), value in (pair_costs or {}).items():
            self._store(int(d1), int(d2), float(value))

    def _store(self, d1: int, d2: int, value: float):
        if d1 == d2:
            raise ValueError(f"Self pair ({d1}, {d2}) cannot be stored; theta_dd is 0")
        for d in (d1, d2):
            if not 0 <= d < self.n_observations:
                raise ValueError(f"Observation {d} out of range 0..{self.n_observations - 1}")
        if not math.isfinite(value):
            raise ValueError(f"Stored theta must be finite, got {value} for ({d1}, {d2})")

        key = canonical_pair(d1, d2)
        previous = self._theta.get(key)
        if previous is not None and previous != value:
            raise ValueError(f"Asymmetric theta for pair {key}: {previous} vs {value}")
        self._theta[key] = value
        self._adjacency[d1][d2] = value
        self._adjacency[d2][d1] = value

    @property
    def pair_costs(self) -> Mapping[Pair, float]:
        return self._theta

    @property
    def n_pairs(self) -> int:
        return len(self._theta)

    def theta(self, d1: int, d2: int) -> Optional[float]:
        """Finite theta of a pair, 0 for a self pair, None when the pair is blocked"""
        if d1 == d2:
            return 0.0
        return self._adjacency[d1].get(d2)

    def has_pair(self, d1: int, d2: int) -> bool:
        return d1 == d2 or d2 in self._adjacency[d1]

    def neighbors(self, d: int) -> Mapping[int, float]:
        """Finite-cost partners of ``d`` (excluding ``d`` itself)"""
        return self._adjacency[d]

    def pairs(self) -> Iterator[Tuple[int, int, float]]:
        for (d1, d2), value in self._theta.items():
            yield d1, d2, value

    def is_feasible(self, members: Iterable[int]) -> bool:
        members = list(members)
        return all(self.has_pair(a, b) for a, b in combinations(members, 2))

    def __repr__(self):
        return f"Instance(n_observations={self.n_observations}, n_pairs={self.n_pairs})"


@dataclass
class Column:
    """A feasible hypothesis: sorted unique members, cached cost and Xi bounds"""

    members: Tuple[int, ...]
    cost: float
    xi_by_member: Dict[int, float] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_members(cls, instance: Instance, members: Iterable[int]) -> "Column":
        ordered = tuple(sorted(set(int(d) for d in members)))
        if not ordered:
            raise ValueError("A column needs at least one member")
        return cls(ordered, hypothesis_cost(instance, ordered))

    @property
    def key(self) -> Tuple[int, ...]:
        return self.members

    def __len__(self):
        return len(self.members)

    def __contains__(self, d):
        return d in self.members


@dataclass(frozen=True)
class Ranking:
    """Bijective ranks ordered by (|D_d|, d)"""

    order: Tuple[int, ...]  # observations from lowest to highest rank
    r: Tuple[int, ...]      # r[d] = rank of d

    def __len__(self):
        return len(self.order)


def hypothesis_cost(instance: Instance, members: Iterable[int]) -> float:
    """
    Sum of theta over ordered member pairs, i.e. twice the sum over unordered pairs.

    Raises InfeasiblePair when two members are blocked from sharing a hypothesis.
    """
    ordered = sorted(set(members))
    total = 0.0
    for i, d1 in enumerate(ordered):
        row = instance.neighbors(d1)
        for d2 in ordered[i + 1:]:
            value = row.get(d2)
            if value is None:
                raise InfeasiblePair(f"Observations {d1} and {d2} cannot share a hypothesis")
            total += value
    return 2.0 * total


def removal_delta(instance: Instance, members: Iterable[int], d: int) -> float:
    """Cost change of dropping ``d`` from a feasible hypothesis: -2 * sum theta_dd'"""
    row = instance.neighbors(d)
    return -2.0 * sum(row[other] for other in members if other != d)


def remove_members(instance: Instance, members: Iterable[int], removed: Iterable[int]) -> Optional[Column]:
    """The hypothesis with ``removed`` taken out; None when nothing is left"""
    removed = set(removed)
    kept = [d for d in members if d not in removed]
    if not kept:
        return None
    return Column.from_members(instance, kept)


def neighborhood(instance: Instance, d: int) -> frozenset:
    """D_d: every observation pairable with ``d``, ``d`` included"""
    if not 0 <= d < instance.n_observations:
        raise ValueError(f"Observation {d} out of range")
    return frozenset(instance.neighbors(d)) | {d}


def rank(instance: Instance) -> Ranking:
    """Rank observations by neighborhood size, ties broken by ascending id"""
    order = tuple(sorted(range(instance.n_observations),
                         key=lambda d: (len(instance.neighbors(d)) + 1, d)))
    r = [0] * instance.n_observations
    for position, d in enumerate(order):
        r[d] = position
    return Ranking(order=order, r=tuple(r))


def restricted_neighborhood(instance: Instance, ranking: Ranking, d_star: int) -> frozenset:
    """D*_{d*}: neighbors of d* whose rank is not below r_{d*}"""
    floor = ranking.r[d_star]
    return frozenset(d for d in neighborhood(instance, d_star) if ranking.r[d] >= floor)


def nondominated_neighborhoods(instance: Instance, ranking: Ranking) -> List[Tuple[int, ...]]:
    """
    Maximal restricted neighborhoods under strict inclusion, deduplicated.

    D*_a can only sit inside D*_b when a is a neighbor of b with lower rank
    than a, so each candidate is compared against those neighborhoods only.
    Returned sorted by descending size, then by members.
    """
    restricted = [restricted_neighborhood(instance, ranking, d) for d in range(instance.n_observations)]

    kept = {}
    for a in range(instance.n_observations):
        own = restricted[a]
        dominated = False
        for b in instance.neighbors(a):
            if ranking.r[b] >= ranking.r[a]:
                continue
            other = restricted[b]
            # equal sets: keep the lowest-ranked owner only
            if own < other or own == other:
                dominated = True
                break
        if not dominated:
            kept[own] = tuple(sorted(own))

    result = sorted(kept.values(), key=lambda members: (-len(members), members))
    logger.debug(f"{len(result)} non-dominated neighborhoods out of {instance.n_observations}")
    return result
