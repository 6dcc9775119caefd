"""Trade policies on replicate economies: prevented and catalyzed firm links.

On a clustered network a cross-category link ``i -> j`` with positive
requirement is present exactly when the countries of ``i`` and ``j`` share a
cluster, so link constraints project to "same cluster" / "different cluster"
constraints on country pairs. Same-category links between distinct firms never
appear and self links appear iff the own-category requirement is positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from scipy.cluster.hierarchy import DisjointSet

from .errors import ModelError
from .partitions import DEFAULT_PARTITION_CAP, Partition, canonical, set_partitions
from .replicate import ReplicateGame, build_clustered_network

Link = tuple[int, int]


@dataclass(frozen=True)
class TradePolicy:
    prevented: frozenset = field(default_factory=frozenset)
    catalyzed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "prevented", frozenset((int(i), int(j)) for i, j in self.prevented))
        object.__setattr__(self, "catalyzed", frozenset((int(i), int(j)) for i, j in self.catalyzed))
        both = self.prevented & self.catalyzed
        if both:
            raise ModelError(f"links both prevented and catalyzed: {sorted(both)}")


def _check_links(rep: ReplicateGame, policy: TradePolicy) -> None:
    m = rep.econ.m
    for i, j in policy.prevented | policy.catalyzed:
        if not (0 <= i < m and 0 <= j < m):
            raise ModelError(f"policy link ({i}, {j}) out of range for {m} firms")


def is_compatible(partition, rep: ReplicateGame, policy: TradePolicy) -> bool:
    A = build_clustered_network(rep, partition).network
    _check_links(rep, policy)
    return all(A[i, j] == 0 for i, j in policy.prevented) and all(A[i, j] > 0 for i, j in policy.catalyzed)


@dataclass
class CompatibilityResult:
    partitions: list[Partition]
    merged: list[tuple[int, int]]
    separated: list[tuple[int, int]]
    certificate: Optional[str] = None

    @property
    def feasible(self) -> bool:
        return self.certificate is None


def _requirement(rep: ReplicateGame, i: int, j: int) -> float:
    return float(rep.base.requirements[rep.category(i) - 1, rep.category(j)])


def compatible_partitions(
    rep: ReplicateGame, policy: TradePolicy, n_cap: int = DEFAULT_PARTITION_CAP
) -> CompatibilityResult:
    """Clustered equilibria satisfying ``policy``, with an infeasibility certificate if none can."""
    _check_links(rep, policy)
    merged, separated = [], []
    sets = DisjointSet(range(rep.n))

    def fail(msg):
        return CompatibilityResult([], merged, separated, msg)

    for i, j in sorted(policy.catalyzed):
        b = _requirement(rep, i, j)
        if i == j:
            if b <= 0:
                return fail(f"catalyzed self link ({i}, {i}) has zero own-category requirement")
        elif rep.category(i) == rep.category(j):
            return fail(f"catalyzed link ({i}, {j}) joins two firms of the same category")
        elif b <= 0:
            return fail(f"catalyzed link ({i}, {j}) has zero requirement")
        else:
            merged.append((rep.country(i), rep.country(j)))
            sets.merge(rep.country(i), rep.country(j))
    for i, j in sorted(policy.prevented):
        b = _requirement(rep, i, j)
        if b <= 0 or (i != j and rep.category(i) == rep.category(j)):
            continue  # never present
        if i == j:
            return fail(f"prevented self link ({i}, {i}) is present in every clustered network")
        ci, cj = rep.country(i), rep.country(j)
        separated.append((ci, cj))
        if sets.connected(ci, cj):
            return fail(f"prevented link ({i}, {j}) needs countries {ci} and {cj} apart but catalyzed links join them")

    out = []
    for Q in set_partitions(rep.n, cap=n_cap):
        label = {c: k for k, block in enumerate(Q) for c in block}
        if all(label[a] == label[b] for a, b in merged) and all(label[a] != label[b] for a, b in separated):
            out.append(Q)
    return CompatibilityResult(out, merged, separated)


def _cross_pair(rep: ReplicateGame) -> tuple[int, int]:
    B = rep.intermediate_requirements
    L = rep.num_categories
    for l in range(L):
        for l2 in range(L):
            if l != l2 and B[l, l2] > 0:
                return l + 1, l2 + 1
    raise ModelError("no positive cross-category requirement: every partition yields the same network")


def design_policy(rep: ReplicateGame, partition) -> TradePolicy:
    """Policy whose only compatible clustered equilibrium is ``partition``.

    Catalyzes one link along a path through each block and prevents one link
    between every pair of blocks.
    """
    Q = canonical(partition, rep.n)
    src, dst = _cross_pair(rep)
    catalyzed = set()
    for block in Q:
        for a, b in zip(block[:-1], block[1:]):
            catalyzed.add((rep.firm(src, a), rep.firm(dst, b)))
    prevented = set()
    for k, first in enumerate(Q):
        for second in Q[k + 1 :]:
            prevented.add((rep.firm(src, first[0]), rep.firm(dst, second[0])))
    return TradePolicy(frozenset(prevented), frozenset(catalyzed))


def brute_force_compatible(rep: ReplicateGame, policy: TradePolicy, n_cap: int = DEFAULT_PARTITION_CAP) -> list[Partition]:
    return [Q for Q in set_partitions(rep.n, cap=n_cap) if is_compatible(Q, rep, policy)]
