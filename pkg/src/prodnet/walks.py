"""Walk-weight tables on the firm block of the flow matrix.

A step ``h -> k`` carries weight ``T[h, k] = a_hk + eps_h * a0_k``: the share of
``h``'s revenue reaching ``k`` directly or through profit-funded consumption.
``P[j, i]`` sums the weights of all walks ``j -> i`` inside the firm set and
``D[j, i]`` those of direct walks (``i`` appears only at the end).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economy import EconomySpec, check_network, require_ergodic


def transition_weights(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    return np.asarray(A, dtype=float) + np.outer(econ.epsilon, econ.consumption_shares)


def direct_walk_column(T: np.ndarray, i: int) -> np.ndarray:
    """Column ``D[:, i]``; it does not depend on row ``i`` of ``T``."""
    m = T.shape[0]
    T_cut = T.copy()
    T_cut[i, :] = 0.0
    e = np.zeros(m)
    e[i] = 1.0
    # column i of (I - T_cut)^{-1}
    col = np.linalg.solve(np.eye(m) - T_cut, e)
    out = col.copy()
    out[i] = T[i] @ col
    return out


@dataclass
class WalkTables:
    transition: np.ndarray
    direct: np.ndarray
    total: np.ndarray
    household: np.ndarray

    def identity_gap(self) -> float:
        """Largest violation of ``P_ii (1 - D_ii) = 1`` and ``P_ji = D_ji P_ii``."""
        d = np.diag(self.direct)
        p = np.diag(self.total)
        gap = np.abs(p * (1.0 - d) - 1.0).max()
        off = self.direct * p[None, :]
        np.fill_diagonal(off, np.diag(self.total))
        return float(max(gap, np.abs(self.total - off).max()))


def walk_tables(econ: EconomySpec, A: np.ndarray) -> WalkTables:
    A = check_network(econ, A)
    require_ergodic(econ, A)
    T = transition_weights(econ, A)
    m = econ.m
    P = np.linalg.inv(np.eye(m) - T)
    D = np.column_stack([direct_walk_column(T, i) for i in range(m)])
    return WalkTables(T, D, P, econ.consumption_shares @ P)


@dataclass
class WalkProfits:
    resolvent: np.ndarray
    ratio: np.ndarray
    denominators: np.ndarray

    @property
    def route_gap(self) -> float:
        return float(np.abs(self.resolvent - self.ratio).max())


def ratio_profit(econ: EconomySpec, T: np.ndarray, i: int, direct_col: np.ndarray, row: np.ndarray | None = None):
    """Profit of firm ``i`` as (inflow via direct walks) / (1 - direct-cycle weight).

    ``row`` replaces firm ``i``'s purchases; the denominator is affine in it.
    Returns ``(profit, denominator)``.
    """
    a0 = econ.consumption_shares
    eps_i = econ.epsilon[i]
    coef = direct_col.copy()
    coef[i] = 1.0
    if row is None:
        t_row = T[i]
    else:
        t_row = row + eps_i * a0
    numer = a0[i] + sum(a0[j] * direct_col[j] for j in range(len(a0)) if j != i)
    denom = 1.0 - float(t_row @ coef)
    return eps_i * numer / denom, denom


def profit_via_walks(econ: EconomySpec, A: np.ndarray) -> WalkProfits:
    tables = walk_tables(econ, A)
    resolvent = econ.epsilon * tables.household
    ratio = np.empty(econ.m)
    denoms = np.empty(econ.m)
    for i in range(econ.m):
        ratio[i], denoms[i] = ratio_profit(econ, tables.transition, i, tables.direct[:, i])
    return WalkProfits(resolvent, ratio, denoms)
