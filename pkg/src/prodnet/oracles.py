"""Brute-force reference computations.

Nothing here calls the primary solvers: the flow matrix is rebuilt entry by
entry, stationary vectors come from repeated squaring of the lazy chain, trees
and walks are enumerated explicitly. Slow by design.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .economy import EconomySpec
from .errors import CapExceededError


@dataclass(frozen=True)
class OracleConfig:
    tree_node_cap: int = 8
    walk_length_cap: int = 25
    grid_step: float = 0.05
    grid_point_cap: int = 1_000_000
    partition_cap: int = 6

    def __post_init__(self):
        if min(self.tree_node_cap, self.walk_length_cap, self.grid_point_cap, self.partition_cap) <= 0:
            raise ValueError("oracle caps must be positive")
        if not 0 < self.grid_step <= 1:
            raise ValueError("grid step must lie in (0, 1]")


def flow_matrix_oracle(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    m = econ.m
    a0 = econ.consumption_shares
    b = econ.requirements
    F = np.zeros((m + 1, m + 1))
    for i in range(m):
        eps_i = 1.0 - sum(b[i])
        F[0, i + 1] = b[i][0]
        F[i + 1, 0] = a0[i]
        for j in range(m):
            F[j + 1, i + 1] = A[i][j] + eps_i * a0[j]
    return F


def stationary_oracle(F: np.ndarray, max_squarings: int = 200) -> np.ndarray:
    """Stationary vector of a column-stochastic matrix from powers of the lazy chain."""
    n = F.shape[0]
    S = 0.5 * (np.eye(n) + F)
    for _ in range(max_squarings):
        nxt = S @ S
        nxt /= nxt.sum(axis=0, keepdims=True)
        if np.abs(nxt - S).max() < 1e-17:
            S = nxt
            break
        S = nxt
    mu = S.mean(axis=1)
    return mu / mu.sum()


def revenue_oracle(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    mu = stationary_oracle(flow_matrix_oracle(econ, A))
    return mu[1:] / mu[0]


def profit_oracle(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    eps = 1.0 - econ.requirements.sum(axis=1)
    return eps * revenue_oracle(econ, A)


def tree_enumeration_oracle(F: np.ndarray, node_cap: int = 8) -> np.ndarray:
    """Total weight of spanning trees rooted at each node.

    A tree rooted at ``r`` gives every other node ``x`` one outgoing edge
    ``x -> succ(x)`` and has no cycles; its weight multiplies the transition
    probabilities ``F[succ(x), x]``.
    """
    n = F.shape[0]
    if n > node_cap:
        raise CapExceededError("tree enumeration node cap", node_cap, n)
    weights = np.zeros(n)
    for root in range(n):
        others = [x for x in range(n) if x != root]
        choices = [[y for y in range(n) if y != x and F[y, x] > 0] for x in others]
        total = 0.0
        for succ in itertools.product(*choices):
            nxt = dict(zip(others, succ))
            if not _reaches_root(nxt, root):
                continue
            w = 1.0
            for x, y in nxt.items():
                w *= F[y, x]
            total += w
        weights[root] = total
    return weights


def _reaches_root(nxt: dict, root: int) -> bool:
    for start in nxt:
        seen = set()
        x = start
        while x != root:
            if x in seen:
                return False
            seen.add(x)
            x = nxt[x]
    return True


@dataclass
class WalkEnumeration:
    total: np.ndarray
    direct: np.ndarray
    tail_bound: float
    max_steps: int


def walk_enumeration_oracle(T: np.ndarray, max_steps: int = 25, explicit_steps: int = 5) -> WalkEnumeration:
    """Truncated walk sums on the firm set.

    Walks with at most ``explicit_steps`` steps are listed one by one; longer
    ones are accumulated step by step. ``tail_bound`` bounds the neglected mass
    by a geometric series in the largest row sum of ``T``.
    """
    m = T.shape[0]
    total = np.zeros((m, m))
    direct = np.zeros((m, m))
    for steps in range(0, min(explicit_steps, max_steps) + 1):
        for walk in itertools.product(range(m), repeat=steps + 1):
            w = 1.0
            for h, k in zip(walk[:-1], walk[1:]):
                w *= T[h, k]
            j, i = walk[0], walk[-1]
            total[j, i] += w
            if steps >= 1 and i not in walk[1:-1]:
                direct[j, i] += w
    if max_steps > explicit_steps:
        # frontier[j, i]: weight of walks j -> i with exactly `steps` steps
        frontier = np.linalg.matrix_power(T, explicit_steps)
        avoid = []
        for i in range(m):
            Ti = T.copy()
            Ti[:, i] = 0.0  # interior nodes never equal i
            avoid.append((Ti, np.linalg.matrix_power(Ti, explicit_steps - 1) if explicit_steps >= 1 else None))
        for steps in range(explicit_steps + 1, max_steps + 1):
            frontier = frontier @ T
            total += frontier
            for i in range(m):
                Ti, pw = avoid[i]
                pw = pw @ Ti
                avoid[i] = (Ti, pw)
                direct[:, i] += pw @ T[:, i]
    rho = float(T.sum(axis=1).max())
    tail = rho ** (max_steps + 1) / (1.0 - rho) if rho < 1 else math.inf
    return WalkEnumeration(total, direct, tail, max_steps)


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 1 - prev - 1)
        yield tuple(out)


@dataclass
class GridDeviation:
    firm: int
    incumbent_profit: float
    rows: np.ndarray
    profits: np.ndarray

    @property
    def max_gain(self) -> float:
        return float(self.profits.max() - self.incumbent_profit)

    @property
    def best_row(self) -> np.ndarray:
        return self.rows[int(np.argmax(self.profits))]


def grid_deviation_oracle(
    econ: EconomySpec, A: np.ndarray, i: int, step: float = 0.05, point_cap: int = 1_000_000
) -> GridDeviation:
    """Profit of every grid strategy of firm ``i`` (per-category simplex grid).

    Each category requirement is split over that category's firms in multiples
    of ``step``; profit is recomputed from a fresh equilibrium for each row.
    """
    ticks = int(round(1.0 / step))
    b = econ.requirements
    per_category = []
    count = 1
    for cat in range(1, b.shape[1]):
        members = [j for j in range(econ.m) if econ.categories[j] == cat]
        if b[i, cat] <= 0 or not members:
            continue
        per_category.append((cat, members))
        count *= math.comb(ticks + len(members) - 1, len(members) - 1)
    if count > point_cap:
        raise CapExceededError("grid point cap", point_cap, count)
    grids = [list(_compositions(ticks, len(members))) for _, members in per_category]
    rows = []
    profits = []
    eps_i = 1.0 - b[i].sum()
    base = np.array(A, dtype=float)
    for combo in itertools.product(*grids):
        row = np.zeros(econ.m)
        for (cat, members), split in zip(per_category, combo):
            for j, k in zip(members, split):
                row[j] = b[i, cat] * k / ticks
        trial = base.copy()
        trial[i] = row
        rows.append(row)
        profits.append(eps_i * revenue_oracle(econ, trial)[i])
    incumbent = eps_i * revenue_oracle(econ, base)[i]
    return GridDeviation(i, incumbent, np.array(rows), np.array(profits))


def partition_enumerator(n: int, cap: int = 6) -> list[tuple[tuple[int, ...], ...]]:
    """Set partitions by recursive block insertion, returned in restricted-growth order."""
    if n > cap:
        raise CapExceededError("partition cap", cap, n)
    out: list[list[list[int]]] = [[]]
    for element in range(n):
        grown = []
        for blocks in out:
            for k in range(len(blocks)):
                grown.append([blk + [element] if t == k else blk for t, blk in enumerate(blocks)])
            grown.append(blocks + [[element]])
        out = grown

    def label_string(blocks):
        lab = [0] * n
        for k, blk in enumerate(sorted(blocks)):
            for e in blk:
                lab[e] = k
        return lab

    return [tuple(tuple(b) for b in sorted(blocks)) for blocks in sorted(out, key=label_string)]
