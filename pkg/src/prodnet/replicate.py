"""Replicate economies, clustered equilibria and welfare comparisons across partitions.

In the ``n``-fold replicate of a simple game (one firm per category) firm
``(l - 1) * n + c`` produces category ``l`` in country ``c`` (both 0-based here:
firm ``(l - 1) * n + c`` with ``c`` in ``0..n-1``). A partition of the
countries into clusters fixes the network: every firm supplies its own
category internally and sources each other category evenly from its cluster.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .economy import (
    EconomySpec,
    ProductivityModel,
    check_network,
    simplified_welfare,
    with_profit_margin,
)
from .errors import ModelError
from .game import NashReport, best_response_dynamics, is_nash
from .partitions import DEFAULT_PARTITION_CAP, Partition, canonical, set_partitions


@dataclass(frozen=True, eq=False)
class ReplicateGame:
    base: EconomySpec
    n: int
    econ: EconomySpec

    @property
    def num_categories(self) -> int:
        return self.base.num_categories

    def firm(self, category: int, country: int) -> int:
        return (category - 1) * self.n + country

    def country(self, firm: int) -> int:
        return firm % self.n

    def category(self, firm: int) -> int:
        return firm // self.n + 1

    @property
    def intermediate_requirements(self) -> np.ndarray:
        """``B[l - 1, l' - 1] = b_{l, l'}`` for the base firms (labor excluded)."""
        return self.base.requirements[:, 1:]


def is_simple(econ: EconomySpec) -> bool:
    return econ.m == econ.num_categories and np.array_equal(econ.categories, np.arange(1, econ.m + 1))


def replicate_game(base: EconomySpec, n: int) -> ReplicateGame:
    if not is_simple(base):
        raise ModelError("replication needs a simple game: firm l must be the only firm of category l")
    if n < 1:
        raise ModelError("replication count must be >= 1")
    L = base.num_categories
    cats = np.repeat(np.arange(1, L + 1), n)
    base_lam = base.productivity.base_vector(L)
    productivity = ProductivityModel(base.productivity.kind, np.repeat(base_lam, n), base.productivity.theta)
    if base.productivity.kind == "hicks_neutral":
        productivity = ProductivityModel.hicks_neutral()
    econ = EconomySpec(
        consumption_shares=np.repeat(base.consumption_shares / n, n),
        requirements=np.repeat(base.requirements, n, axis=0),
        categories=cats,
        productivity=productivity,
        countries=np.tile(np.arange(n), L),
    )
    return ReplicateGame(base, n, econ)


def with_margin(rep: ReplicateGame, eps: float) -> ReplicateGame:
    """Same replicate with requirements rescaled to leave profit margin ``eps``."""
    return replicate_game(with_profit_margin(rep.base, eps), rep.n)


def with_productivity(rep: ReplicateGame, productivity: ProductivityModel) -> ReplicateGame:
    return replicate_game(rep.base.with_productivity(productivity), rep.n)


@dataclass
class ClusterStructure:
    partition: Partition
    network: np.ndarray

    @property
    def label(self) -> str:
        return "|".join(",".join(str(c + 1) for c in block) for block in self.partition)


def build_clustered_network(rep: ReplicateGame, partition: Sequence[Sequence[int]]) -> ClusterStructure:
    Q = canonical(partition, rep.n)
    L = rep.num_categories
    B = rep.base.requirements
    A = np.zeros((rep.econ.m, rep.econ.m))
    for block in Q:
        size = len(block)
        for cat in range(1, L + 1):
            for c in block:
                i = rep.firm(cat, c)
                A[i, i] = B[cat - 1, cat]
                for other in range(1, L + 1):
                    if other == cat:
                        continue
                    for c2 in block:
                        A[i, rep.firm(other, c2)] = B[cat - 1, other] / size
    check_network(rep.econ, A)
    return ClusterStructure(Q, A)


@dataclass
class ClusterNashReport:
    partition: Partition
    reports: list[tuple[float, NashReport]]

    @property
    def threshold(self) -> Optional[float]:
        """Largest grid margin such that every margin up to it gives a Nash network."""
        best = None
        for eps, rep in sorted(self.reports, key=lambda t: t[0]):
            if not rep.is_nash:
                break
            best = eps
        return best


def verify_cluster_nash(
    rep: ReplicateGame, partition: Sequence[Sequence[int]], epsilon_grid: Sequence[float], tol: float = 1e-9
) -> ClusterNashReport:
    out = []
    Q = canonical(partition, rep.n)
    for eps in epsilon_grid:
        if eps <= 0:
            raise ModelError("Nash verification needs strictly positive profit margins")
        game = with_margin(rep, eps)
        cs = build_clustered_network(game, Q)
        out.append((float(eps), is_nash(game.econ, cs.network, tol)))
    return ClusterNashReport(Q, out)


@dataclass
class ClusterInverseTable:
    table: np.ndarray
    weights: np.ndarray
    direct: dict
    closed_form: dict
    block_sums: dict

    @property
    def closed_form_gap(self) -> float:
        return max(float(np.abs(self.direct[k] - self.closed_form[k]).max()) for k in self.direct)

    @property
    def block_sum_gap(self) -> float:
        return max(float(np.abs(self.block_sums[k] - self.table).max()) for k in self.block_sums)


def cluster_inverse_table(rep: ReplicateGame, partition: Sequence[Sequence[int]]) -> ClusterInverseTable:
    """Inverse ``(I - A^{Q_k})^{-1}`` of every cluster, directly and in closed form.

    ``table`` is ``C = (I - B)^{-1}`` with ``B`` the base intermediate
    requirements; ``weights`` are ``Q_l = sum_l' a0_l' C[l', l]``.
    ``block_sums[k][l, l']`` sums the direct inverse of cluster ``k`` over the
    category-``l'`` columns of a category-``l`` row, which must reproduce ``C``.
    """
    Q = canonical(partition, rep.n)
    L = rep.num_categories
    B = rep.intermediate_requirements
    C = np.linalg.inv(np.eye(L) - B)
    weights = rep.base.consumption_shares @ C
    cs = build_clustered_network(rep, Q)
    direct, closed, sums = {}, {}, {}
    for block in Q:
        size = len(block)
        firms = [rep.firm(cat, c) for cat in range(1, L + 1) for c in block]
        sub = cs.network[np.ix_(firms, firms)]
        inv = np.linalg.inv(np.eye(len(firms)) - sub)
        form = np.empty_like(inv)
        for a, i in enumerate(firms):
            li = rep.category(i)
            for b_, j in enumerate(firms):
                lj = rep.category(j)
                own = 1.0 / (1.0 - B[li - 1, li - 1])
                if li != lj:
                    form[a, b_] = C[li - 1, lj - 1] / size
                elif i == j:
                    form[a, b_] = C[li - 1, li - 1] / size + (size - 1) / size * own
                else:
                    form[a, b_] = C[li - 1, li - 1] / size - own / size
        block_sum = np.zeros((L, L))
        for cat in range(1, L + 1):
            row = firms.index(rep.firm(cat, block[0]))
            for other in range(1, L + 1):
                cols = [firms.index(rep.firm(other, c)) for c in block]
                block_sum[cat - 1, other - 1] = inv[row, cols].sum()
        direct[block] = inv
        closed[block] = form
        sums[block] = block_sum
    return ClusterInverseTable(C, weights, direct, closed, sums)


def anarchy_constant(rep: ReplicateGame) -> float:
    """``K = sum_l Q_l * (cross-category requirement of l)``.

    Under constant returns the cross-category requirement is ``1 - b_ll - b_l0``.
    """
    B = rep.intermediate_requirements
    weights = rep.base.consumption_shares @ np.linalg.inv(np.eye(rep.num_categories) - B)
    cross = B.sum(axis=1) - np.diag(B)
    return float(weights @ cross)


@dataclass
class PoAReport:
    partitions: list[Partition]
    welfare: list[float]
    nash: list[Optional[bool]]
    dynamics_welfare: list[float] = field(default_factory=list)
    anarchy_constant: Optional[float] = None

    def _eq_values(self) -> list[float]:
        vals = [w for w, ok in zip(self.welfare, self.nash) if ok is None or ok]
        return vals + list(self.dynamics_welfare)

    @property
    def max_equilibrium(self) -> float:
        return max(self._eq_values())

    @property
    def min_equilibrium(self) -> float:
        return min(self._eq_values())

    @property
    def max_configuration(self) -> float:
        return max(self.welfare + list(self.dynamics_welfare))

    @staticmethod
    def _ratio(top: float, bottom: float) -> Optional[float]:
        if bottom == 0 or (top > 0) != (bottom > 0):
            return None
        return top / bottom

    @property
    def poa_ratio(self) -> Optional[float]:
        return self._ratio(self.max_equilibrium, self.min_equilibrium)

    @property
    def poa_difference(self) -> float:
        return self.max_equilibrium - self.min_equilibrium

    @property
    def poa_ratio_all_configurations(self) -> Optional[float]:
        return self._ratio(self.max_configuration, self.min_equilibrium)

    def welfare_of(self, partition: Partition) -> float:
        return self.welfare[self.partitions.index(partition)]

    @property
    def islands_minus_full(self) -> float:
        isl = max(self.partitions, key=len)
        full = min(self.partitions, key=len)
        return self.welfare_of(isl) - self.welfare_of(full)


def partition_welfare_scan(
    rep: ReplicateGame,
    productivity: Optional[ProductivityModel] = None,
    *,
    n_cap: int = DEFAULT_PARTITION_CAP,
    check_nash: bool = True,
    epsilon: float = 1e-3,
    random_starts: int = 0,
    seed: int = 0,
    tol: float = 1e-9,
) -> PoAReport:
    """Welfare ``W`` of every clustered network, plus price-of-anarchy summaries.

    Welfare is evaluated on the economy as given; Nash checks (and the optional
    best-response runs from random starts) use the game rescaled to profit
    margin ``epsilon``, whose terminal networks are mapped back by undoing the
    row scaling before their welfare is recorded.
    """
    if productivity is not None:
        rep = with_productivity(rep, productivity)
    parts = set_partitions(rep.n, cap=n_cap)
    game = with_margin(rep, epsilon) if (check_nash or random_starts) else None
    welfare, nash = [], []
    for Q in parts:
        cs = build_clustered_network(rep, Q)
        welfare.append(simplified_welfare(rep.econ, cs.network))
        if check_nash:
            nash.append(is_nash(game.econ, build_clustered_network(game, Q).network, tol).is_nash)
        else:
            nash.append(None)
    dyn = []
    if random_starts:
        from .sampling import random_network

        rng = np.random.default_rng(seed)
        back = rep.econ.requirements.sum(axis=1) / game.econ.requirements.sum(axis=1)
        for k in range(random_starts):
            start = random_network(game.econ, rng)
            res = best_response_dynamics(game.econ, start, "random", seed=seed + k)
            if res.converged and is_nash(game.econ, res.network, tol).is_nash:
                dyn.append(simplified_welfare(rep.econ, res.network * back[:, None]))
    K = anarchy_constant(rep) if rep.econ.productivity.kind == "constant" else None
    return PoAReport(parts, welfare, nash, dyn, K)


RETURNS_LABELS = ("increasing", "decreasing", "neutral", "neither")


def classify_returns_to_diversification(
    productivity: ProductivityModel, sample_count: int = 256, seed: int = 0, support: int = 6, firm: int = 0
) -> str:
    """Label a productivity model by comparing its ratios with the Hicks-neutral ones.

    Rows are sampled as random non-negative vectors over ``support`` suppliers
    with random totals in ``(0, 1]``. ``neutral`` means both inequalities hold
    (up to rounding) on every sample.
    """
    rng = np.random.default_rng(seed)
    inc = dec = True
    rel = 1e-12
    for _ in range(sample_count):
        rows = np.zeros((2, support))
        for r in range(2):
            k = rng.integers(1, support + 1)
            idx = rng.choice(support, size=k, replace=False)
            rows[r, idx] = rng.dirichlet(np.ones(k)) * rng.uniform(0.05, 1.0)
        lh = ProductivityModel.log_hicks(rows)
        lp = np.array([productivity.log_productivity_row(rows[r], firm) for r in range(2)])
        if lh[0] < lh[1]:
            lh, lp = lh[::-1], lp[::-1]
        lhs = lp[0] - lp[1]
        rhs = lh[0] - lh[1]
        slack = rel * max(1.0, abs(lhs), abs(rhs))
        if lhs < rhs - slack:
            inc = False
        if lhs > rhs + slack:
            dec = False
    if inc and dec:
        return "neutral"
    if inc:
        return "increasing"
    if dec:
        return "decreasing"
    return "neither"
