"""Best responses, Nash checks, best-response dynamics and the tree potential."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import oracles
from .economy import EconomySpec, build_flow_matrix, check_network, require_ergodic, stationary_vector
from .errors import DegenerateGameError, ModelError
from .walks import direct_walk_column, ratio_profit, transition_weights

MIN_MARGIN = 1e-6
TIE_TOL = 1e-12
TIE_POLICIES = ("uniform_over_argmax", "keep_current", "lowest_index")


def require_margins(econ: EconomySpec) -> None:
    eps = econ.epsilon
    if np.any(eps < MIN_MARGIN):
        bad = int(np.argmin(eps))
        raise DegenerateGameError(
            f"firm {bad} has profit margin {eps[bad]:.3g} < {MIN_MARGIN:g}; profits are (near) zero for every strategy"
        )


@dataclass
class BestResponseResult:
    firm: int
    row: np.ndarray
    coefficients: np.ndarray
    profit: float
    incumbent_profit: float
    ties: dict[int, list[int]] = field(default_factory=dict)

    @property
    def gain(self) -> float:
        return self.profit - self.incumbent_profit


def best_response(econ: EconomySpec, A: np.ndarray, i: int, tie_policy: str = "keep_current") -> BestResponseResult:
    """Profit-maximizing purchase row of firm ``i`` against the others' rows.

    The numerator of the profit ratio does not involve row ``i`` and the
    denominator is affine in it, so each category requirement goes to the
    supplier with the largest direct-walk weight back to ``i`` (``i`` itself
    scores 1).
    """
    if tie_policy not in TIE_POLICIES:
        raise ModelError(f"unknown tie policy {tie_policy!r}; expected one of {TIE_POLICIES}")
    if not 0 <= i < econ.m:
        raise ModelError(f"firm index {i} out of range 0..{econ.m - 1}")
    A = check_network(econ, A)
    require_margins(econ)
    require_ergodic(econ, A)
    T = transition_weights(econ, A)
    col = direct_walk_column(T, i)
    coef = col.copy()
    coef[i] = 1.0

    current = A[i]
    row = np.zeros(econ.m)
    ties = {}
    for cat in range(1, econ.num_categories + 1):
        need = econ.requirements[i, cat]
        members = econ.members(cat)
        if need <= 0 or members.size == 0:
            continue
        scores = coef[members]
        best = members[scores >= scores.max() - TIE_TOL]
        ties[cat] = [int(j) for j in best]
        if tie_policy == "keep_current" and current[members].sum() > 0 and np.all(
            current[np.setdiff1d(members, best)] == 0
        ):
            # keep the incumbent split, renormalized so the category sum is exact
            row[members] = need * (current[members] / current[members].sum())
        elif tie_policy == "lowest_index":
            row[best[0]] = need
        else:
            row[best] = need / best.size
    profit, _ = ratio_profit(econ, T, i, col, row)
    incumbent, _ = ratio_profit(econ, T, i, col)
    return BestResponseResult(i, row, coef, profit, incumbent, ties)


@dataclass
class NashReport:
    is_nash: bool
    worst_firm: int
    max_gain: float
    gains: np.ndarray
    tol: float

    def as_dict(self) -> dict:
        return {
            "is_nash": self.is_nash,
            "worst_firm": self.worst_firm,
            "max_gain": self.max_gain,
            "tol": self.tol,
        }


def is_nash(econ: EconomySpec, A: np.ndarray, tol: float = 1e-9) -> NashReport:
    gains = np.array([best_response(econ, A, i, "uniform_over_argmax").gain for i in range(econ.m)])
    worst = int(np.argmax(gains))
    return NashReport(bool(gains[worst] <= tol), worst, float(gains[worst]), gains, tol)


def matrix_tree_weights(F: np.ndarray) -> np.ndarray:
    """Rooted spanning-tree weights of the chain ``x -> y`` w.p. ``F[y, x]``.

    All-minors matrix-tree theorem: the weight for root ``r`` is the principal
    minor of ``I - F^T`` with row and column ``r`` removed.
    """
    lap = np.eye(F.shape[0]) - F.T
    n = lap.shape[0]
    out = np.empty(n)
    for r in range(n):
        keep = [k for k in range(n) if k != r]
        out[r] = np.linalg.det(lap[np.ix_(keep, keep)])
    return out


@dataclass
class PotentialReport:
    tree_weights: np.ndarray
    enumerated_weights: Optional[np.ndarray]
    value: float
    sum_normalized_value: float
    firm_only_value: float
    stationary: np.ndarray

    @property
    def tree_gap(self) -> float:
        """Disagreement between stationary vector and normalized tree weights."""
        return float(np.abs(self.stationary - self.tree_weights / self.tree_weights.sum()).max())

    @property
    def enumeration_gap(self) -> Optional[float]:
        if self.enumerated_weights is None:
            return None
        return float(np.abs(self.tree_weights - self.enumerated_weights).max())


def potential_value(econ: EconomySpec, A: np.ndarray, enumeration_cap: int = 8) -> PotentialReport:
    """Tree weights of the revenue chain and the induced potential.

    Revenues are ``v_i = w(T_i) / w(T_0)`` and ``w(T_i)`` never involves firm
    ``i``'s own row, so ``1 / w(T_0)`` moves in the same direction as the
    deviator's profit. ``sum_normalized_value`` (``1 / sum_j w(T_j)``) and
    ``firm_only_value`` (sum over firms only) are reported for comparison;
    they are not ordinal potentials in general.
    """
    F = build_flow_matrix(econ, A)
    require_ergodic(econ, A)
    w = matrix_tree_weights(F)
    enumerated = None
    if F.shape[0] <= enumeration_cap:
        enumerated = oracles.tree_enumeration_oracle(F, node_cap=enumeration_cap)
    return PotentialReport(
        tree_weights=w,
        enumerated_weights=enumerated,
        value=1.0 / w[0],
        sum_normalized_value=1.0 / w.sum(),
        firm_only_value=1.0 / w[1:].sum(),
        stationary=stationary_vector(F),
    )


@dataclass
class DynamicsResult:
    network: np.ndarray
    converged: bool
    rounds: int
    trajectory: list[np.ndarray]
    potentials: list[float]
    changed_rows: list[int]

    def potential_monotone(self, tol: float = 1e-12) -> bool:
        p = np.asarray(self.potentials)
        return bool(np.all(np.diff(p) >= -tol * np.maximum(1.0, np.abs(p[:-1]))))


def best_response_dynamics(
    econ: EconomySpec,
    A0: np.ndarray,
    schedule: str = "round_robin",
    max_rounds: int = 100,
    tol: float = 1e-9,
    seed: int = 0,
) -> DynamicsResult:
    """Sequential best responses (``keep_current`` ties) until a full round is idle.

    ``schedule`` is ``round_robin`` or ``random`` (a fresh seeded permutation of
    firms each round). Hitting ``max_rounds`` returns ``converged=False``.
    """
    if schedule not in ("round_robin", "random"):
        raise ModelError(f"unknown schedule {schedule!r}")
    A = check_network(econ, A0).copy()
    require_margins(econ)
    rng = np.random.default_rng(seed)
    trajectory = [A.copy()]
    potentials = [potential_value(econ, A, enumeration_cap=0).value]
    changed_rows = []
    converged = False
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        order = range(econ.m) if schedule == "round_robin" else rng.permutation(econ.m)
        changed = 0
        for i in order:
            br = best_response(econ, A, int(i), "keep_current")
            if np.abs(br.row - A[i]).max() > tol:
                changed += 1
            A[i] = br.row
        trajectory.append(A.copy())
        potentials.append(potential_value(econ, A, enumeration_cap=0).value)
        changed_rows.append(changed)
        if changed == 0:
            converged = True
            break
    return DynamicsResult(A, converged, rounds, trajectory, potentials, changed_rows)
