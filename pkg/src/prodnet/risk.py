"""Link-disruption risk and expected welfare.

Every live link ``(i, j)`` (``A[i, j] > 0``) fails independently with
probability ``r[i, j]``. A disrupted set ``K`` scales firm ``i``'s productivity
by ``(1 - rho) ** phi_i(K)``; revenues and profits do not move, so the game is
unchanged while welfare drops by ``log(1 - rho) * g . phi(K)`` with ``g`` the
gateway weights.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .economy import (
    EconomySpec,
    check_network,
    compute_welfare,
    entropy_corrected_productivity,
    solve_equilibrium,
)
from .errors import CapExceededError, ModelError
from .partitions import DEFAULT_PARTITION_CAP, Partition, canonical, fully_connected, islands, set_partitions
from .replicate import ReplicateGame, build_clustered_network, cluster_inverse_table

DISRUPTION_KINDS = ("min", "sum")
SPATIAL_KINDS = ("homogeneous", "distance", "distance_category")
DEFAULT_LINK_CAP = 20
CHUNK_BITS = 18


@dataclass(frozen=True, eq=False)
class RiskModel:
    r: np.ndarray
    rho: float
    kind: str = "min"

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        object.__setattr__(self, "r", r)
        if np.any(r < 0) or np.any(r > 1) or not np.all(np.isfinite(r)):
            raise ModelError("disruption probabilities must lie in [0, 1]")
        if not 0 <= self.rho < 1:
            raise ModelError("shock magnitude rho must lie in [0, 1)")
        if self.kind not in DISRUPTION_KINDS:
            raise ModelError(f"unknown disruption kind {self.kind!r}; expected one of {DISRUPTION_KINDS}")


def build_risk_matrix(rep: ReplicateGame, spatial: str, r: float) -> np.ndarray:
    """Risk matrix over all firm pairs of a replicate economy.

    ``distance`` scales by country gap, ``r (|c_i - c_j| + 1) / n``;
    ``distance_category`` uses the category gap over ``L`` instead.
    """
    if not 0 <= r <= 1:
        raise ModelError("risk level r must lie in [0, 1]")
    m = rep.econ.m
    idx = np.arange(m)
    if spatial == "homogeneous":
        return np.full((m, m), float(r))
    if spatial == "distance":
        c = idx % rep.n
        return r * (np.abs(c[:, None] - c[None, :]) + 1) / rep.n
    if spatial == "distance_category":
        cat = rep.econ.categories
        return r * (np.abs(cat[:, None] - cat[None, :]) + 1) / rep.num_categories
    raise ModelError(f"unknown spatial risk kind {spatial!r}; expected one of {SPATIAL_KINDS}")


def live_links(A: np.ndarray) -> list[tuple[int, int]]:
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(np.asarray(A) > 0))]


def disruption_exponent(econ: EconomySpec, A: np.ndarray, K, kind: str, i: int) -> float:
    """``phi_i`` for the disrupted link set ``K`` (pairs ``(i, j)``; others ignored)."""
    if kind not in DISRUPTION_KINDS:
        raise ModelError(f"unknown disruption kind {kind!r}")
    hit = [j for (h, j) in K if h == i and A[i, j] > 0]
    if kind == "sum":
        return float(sum(A[i, j] for j in hit))
    total = 0.0
    for cat in range(1, econ.num_categories + 1):
        w = [A[i, j] for j in hit if econ.categories[j] == cat]
        if w:
            total += min(w)
    return total


@dataclass
class ExactRiskResult:
    expected_welfare: float
    expected_log_welfare: float
    base_welfare: float
    weight_sum: float
    expected_exponent: np.ndarray
    link_count: int
    invariance_gap: float


def expected_welfare_exact(
    econ: EconomySpec,
    A: np.ndarray,
    risk: RiskModel,
    link_cap: int = DEFAULT_LINK_CAP,
    invariance_samples: int = 8,
    seed: int = 0,
) -> ExactRiskResult:
    """Expected ``W`` and exact log-welfare by summing over all ``2^|E|`` disrupted sets.

    Scenarios are visited in rank order (bit ``k`` of the rank = link ``k``
    disrupted) in fixed-size chunks, so the sum is bit-stable. A few scenarios
    are re-solved from scratch with scaled productivity to confirm that
    revenues and profits do not move.
    """
    A = check_network(econ, A)
    links = live_links(A)
    E = len(links)
    if E > link_cap:
        raise CapExceededError("live-link cap", link_cap, E)
    eq = solve_equilibrium(econ, A)
    wel = compute_welfare(econ, A, eq)
    g = wel.gateway
    r = np.array([risk.r[i, j] for i, j in links])
    w = np.array([A[i, j] for i, j in links])
    owner = np.array([i for i, _ in links], dtype=int)
    group = np.array([econ.categories[j] for _, j in links], dtype=int)

    # per-(firm, category) link groups for phi^min
    groups: dict[tuple[int, int], np.ndarray] = {}
    for k, key in enumerate(zip(owner, group)):
        groups.setdefault(key, []).append(k)
    groups = {key: np.array(v) for key, v in groups.items()}

    total = 2**E
    chunk = min(total, 2**CHUNK_BITS)
    shifts = np.arange(E, dtype=np.int64)
    weight_sum = 0.0
    phi_sum = np.zeros(econ.m)
    for start in range(0, total, chunk):
        ranks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((ranks[:, None] >> shifts[None, :]) & 1).astype(bool)
        prob = np.prod(np.where(bits, r[None, :], 1.0 - r[None, :]), axis=1)
        weight_sum += float(prob.sum())
        if risk.kind == "sum":
            contrib = bits * w[None, :]
            for i in range(econ.m):
                sel = owner == i
                if sel.any():
                    phi_sum[i] += float(prob @ contrib[:, sel].sum(axis=1))
        else:
            for (i, _), idx in groups.items():
                sub = np.where(bits[:, idx], w[idx][None, :], np.inf).min(axis=1)
                sub[~np.isfinite(sub)] = 0.0
                phi_sum[i] += float(prob @ sub)

    shift = math.log(1.0 - risk.rho) if risk.rho > 0 else 0.0
    gap = _invariance_gap(econ, A, eq, links, risk, invariance_samples, seed)
    return ExactRiskResult(
        expected_welfare=wel.welfare + shift * float(g @ phi_sum),
        expected_log_welfare=wel.log_welfare + shift * float(g @ phi_sum),
        base_welfare=wel.welfare,
        weight_sum=weight_sum,
        expected_exponent=phi_sum,
        link_count=E,
        invariance_gap=gap,
    )


def _invariance_gap(econ, A, eq, links, risk, samples, seed) -> float:
    if samples <= 0 or not links or risk.rho == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        K = [lk for lk in links if rng.random() < 0.5]
        phi = np.array([disruption_exponent(econ, A, K, risk.kind, i) for i in range(econ.m)])
        shocked = econ.with_productivity(econ.productivity.scaled((1.0 - risk.rho) ** phi))
        other = solve_equilibrium(shocked, A)
        worst = max(
            worst,
            float(np.abs(other.revenues - eq.revenues).max()),
            float(np.abs(other.profits - eq.profits).max()),
        )
    return worst


def clustered_exponents(rep: ReplicateGame, partition, risk: RiskModel) -> np.ndarray:
    """Expected ``phi_i`` of every firm on a clustered network, in closed form.

    Cross-category links of a cluster of size ``s`` all weigh ``b / s``: the
    minimum rule pays ``b / s`` when at least one fails, the sum rule pays
    ``b / s`` per failure. The own-category self link pays ``r_ii b_ll``.
    """
    Q = canonical(partition, rep.n)
    L = rep.num_categories
    B = rep.base.requirements
    phi = np.zeros(rep.econ.m)
    for block in Q:
        s = len(block)
        for cat in range(1, L + 1):
            for c in block:
                i = rep.firm(cat, c)
                total = risk.r[i, i] * B[cat - 1, cat]
                for other in range(1, L + 1):
                    b = B[cat - 1, other]
                    if other == cat or b <= 0:
                        continue
                    rs = np.array([risk.r[i, rep.firm(other, c2)] for c2 in block])
                    if risk.kind == "min":
                        total += b * (1.0 - np.prod(1.0 - rs)) / s
                    else:
                        total += b * rs.sum() / s
                phi[i] = total
    return phi


@dataclass
class ClusteredRiskResult:
    partition: Partition
    expected_welfare: float
    base_welfare: float
    exponents: np.ndarray


def expected_welfare_clustered(rep: ReplicateGame, partition, risk: RiskModel) -> ClusteredRiskResult:
    """Closed-form expected ``W`` on the clustered network.

    Gateway weights come from the cluster inverse table: every firm of
    category ``l`` has weight ``Q_l / n`` regardless of the partition.
    """
    Q = canonical(partition, rep.n)
    table = cluster_inverse_table(rep, Q)
    cs = build_clustered_network(rep, Q)
    g = np.array([table.weights[rep.category(i) - 1] / rep.n for i in range(rep.econ.m)])
    u = entropy_corrected_productivity(rep.econ, cs.network)
    base = float(g @ u)
    phi = clustered_exponents(rep, Q, risk)
    shift = math.log(1.0 - risk.rho) if risk.rho > 0 else 0.0
    return ClusteredRiskResult(Q, base + shift * float(g @ phi), base, phi)


@dataclass
class RiskScanReport:
    partitions: list[Partition]
    expected_welfare: list[float]
    tol: float

    @property
    def argmax(self) -> list[Partition]:
        top = max(self.expected_welfare)
        return [q for q, w in zip(self.partitions, self.expected_welfare) if w >= top - self.tol]

    @property
    def argmin(self) -> list[Partition]:
        low = min(self.expected_welfare)
        return [q for q, w in zip(self.partitions, self.expected_welfare) if w <= low + self.tol]

    @property
    def spread(self) -> float:
        return max(self.expected_welfare) - min(self.expected_welfare)

    def ordering(self) -> str:
        """``full_best``, ``islands_best``, ``all_equal`` or ``other``."""
        n = sum(len(block) for block in self.partitions[0])
        full, isl = fully_connected(n), islands(n)
        if self.spread <= self.tol:
            return "all_equal"
        if self.argmax == [full] and self.argmin == [isl]:
            return "full_best"
        if self.argmax == [isl] and self.argmin == [full]:
            return "islands_best"
        return "other"


def risk_partition_scan(
    rep: ReplicateGame, risk: RiskModel, n_cap: int = DEFAULT_PARTITION_CAP, tol: float = 1e-9
) -> RiskScanReport:
    if rep.econ.productivity.kind != "hicks_neutral":
        raise ModelError("the risk partition scan compares clustered equilibria under Hicks-neutral productivity")
    parts = set_partitions(rep.n, cap=n_cap)
    values = [expected_welfare_clustered(rep, Q, risk).expected_welfare for Q in parts]
    return RiskScanReport(parts, values, tol)


def expected_count_identity(p: Sequence[float]) -> tuple[float, float]:
    """Both sides of ``sum_k k P(exactly k events) = sum_j p_j`` for independent events.

    The left side convolves the Bernoulli laws into the exact count distribution.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1):
        raise ModelError("probabilities must lie in [0, 1]")
    dist = np.array([1.0])
    for q in p:
        dist = np.convolve(dist, [1.0 - q, q])
    return float(np.arange(dist.size) @ dist), float(p.sum())


def _pair_sum(x: np.ndarray) -> float:
    return float(sum(abs(a - b) for a, b in itertools.combinations(x, 2)))


@dataclass
class DistanceInequality:
    lhs: float
    rhs: float
    merged_lhs: float
    merged_rhs: float
    displayed_lhs: float
    displayed_rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9 * max(1.0, abs(self.rhs))

    @property
    def merged_holds(self) -> bool:
        return self.merged_lhs >= self.merged_rhs - 1e-9 * max(1.0, abs(self.merged_rhs))

    @property
    def displayed_holds(self) -> bool:
        return self.displayed_lhs <= self.displayed_rhs + 1e-9 * max(1.0, abs(self.displayed_rhs))


def distance_inequality(a: Sequence[float], b: Sequence[float]) -> DistanceInequality:
    """Pairwise-distance inequality between two point sets in three forms.

    ``lhs <= rhs``: ``(m/n) S_a + (n/m) S_b <= S_ab`` with ``S_a``, ``S_b`` over
    unordered pairs and ``S_ab`` over all cross pairs.
    ``merged_lhs >= merged_rhs``: ``(S_a + S_b + S_ab) / (m + n) >= S_a / n + S_b / m``,
    an equivalent rearrangement.
    ``displayed``: ``S_a / n + S_b / m <= S_ab / (m + n)``, which is false in
    general (``a = b = (0, 1)``) and is exposed only for comparison.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = a.size, b.size
    if n == 0 or m == 0:
        raise ModelError("both point sets must be non-empty")
    sa, sb = _pair_sum(a), _pair_sum(b)
    sab = float(np.abs(a[:, None] - b[None, :]).sum())
    return DistanceInequality(
        lhs=(m / n) * sa + (n / m) * sb,
        rhs=sab,
        merged_lhs=(sa + sb + sab) / (m + n),
        merged_rhs=sa / n + sb / m,
        displayed_lhs=sa / n + sb / m,
        displayed_rhs=sab / (m + n),
    )
