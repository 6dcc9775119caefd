"""Cobb-Douglas production-network economies and their general equilibrium.

Indexing conventions used throughout the package:

* firms are ``0 .. m-1``; the household is node ``0`` of the ``(m+1)``-node flow
  matrix, so firm ``i`` sits at flow index ``i + 1``;
* categories are ``1 .. L``; column ``0`` of the requirement matrix is labor;
* ``A[i, j]`` is the share of firm ``i``'s revenue spent on firm ``j``.

Prices are normalized by setting the wage ``p0 = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InadmissibleNetworkError, ModelError, NotErgodicError

SHARE_TOL = 1e-12
RESIDUAL_TOL = 1e-10
COMPARE_TOL = 1e-9
FD_STEP = 1e-6

PRODUCTIVITY_KINDS = ("constant", "hicks_neutral", "power")


def xlogx(a: np.ndarray) -> np.ndarray:
    """Elementwise ``a log a`` with ``0 log 0 = 0``."""
    a = np.asarray(a, dtype=float)
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = a[pos] * np.log(a[pos])
    return out


@dataclass(frozen=True, eq=False)
class ProductivityModel:
    """Productivity ``lambda_i(a_i) = base_i * hicks(a_i) ** theta``.

    ``hicks(a_i) = 1 / prod_j a_ij ** a_ij`` over intermediate suppliers is the
    Hicks-neutral benchmark. ``theta = 0`` gives constant productivity,
    ``theta = 1`` with unit base the Hicks-neutral model itself.
    """

    kind: str = "constant"
    base: object = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in PRODUCTIVITY_KINDS:
            raise ModelError(f"unknown productivity kind {self.kind!r}; expected one of {PRODUCTIVITY_KINDS}")
        base = np.asarray(self.base, dtype=float)
        if np.any(~np.isfinite(base)) or np.any(base <= 0):
            raise ModelError("productivity base must be strictly positive")
        if not np.isfinite(self.theta) or self.theta < 0:
            raise ModelError("productivity exponent theta must be >= 0")
        if self.kind == "constant" and self.theta != 0:
            raise ModelError("constant productivity requires theta = 0")
        if self.kind == "hicks_neutral" and (self.theta != 1 or np.any(base != 1)):
            raise ModelError("hicks_neutral productivity requires theta = 1 and base = 1")

    @classmethod
    def constant(cls, base=1.0) -> "ProductivityModel":
        return cls("constant", base, 0.0)

    @classmethod
    def hicks_neutral(cls) -> "ProductivityModel":
        return cls("hicks_neutral", 1.0, 1.0)

    @classmethod
    def power(cls, theta: float, base=1.0) -> "ProductivityModel":
        return cls("power", base, float(theta))

    def base_vector(self, m: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.base, dtype=float), (m,)).copy()

    def scaled(self, factor: np.ndarray) -> "ProductivityModel":
        """Same model with every firm's base productivity multiplied by ``factor``.

        Scaling a Hicks-neutral model turns it into the equivalent power model.
        """
        factor = np.asarray(factor, dtype=float)
        base = self.base_vector(factor.shape[0]) * factor
        kind = "power" if self.kind == "hicks_neutral" else self.kind
        return ProductivityModel(kind, base, self.theta)

    @staticmethod
    def log_hicks(A: np.ndarray) -> np.ndarray:
        """Row-wise log of the Hicks-neutral productivity (input-mix entropy)."""
        return -xlogx(A).sum(axis=1)

    def log_productivity(self, A: np.ndarray) -> np.ndarray:
        logs = np.log(self.base_vector(A.shape[0]))
        if self.theta:
            logs = logs + self.theta * self.log_hicks(A)
        return logs

    def log_productivity_row(self, row: np.ndarray, firm: int = 0) -> float:
        base = np.asarray(self.base, dtype=float)
        b = float(base) if base.ndim == 0 else float(base[firm])
        return math.log(b) + self.theta * float(self.log_hicks(np.atleast_2d(row))[0])

    def dlog_productivity(self, A: np.ndarray) -> np.ndarray:
        """Partial derivatives of ``log lambda_i`` with respect to ``A[i, j]``.

        Entries where ``A[i, j] = 0`` are ``nan`` when ``theta > 0`` (one-sided
        derivative is infinite).
        """
        if not self.theta:
            return np.zeros_like(A, dtype=float)
        with np.errstate(divide="ignore"):
            d = -self.theta * (np.log(A) + 1.0)
        d[A <= 0] = np.nan
        return d


@dataclass(frozen=True, eq=False)
class EconomySpec:
    """Household consumption shares, firm requirements and productivity.

    ``requirements`` has shape ``(m, L + 1)``: column 0 is the labor share
    ``b_i0``, column ``l`` the share firm ``i`` must source from category ``l``.
    ``categories[i]`` is the category (``1..L``) of firm ``i``'s own good.
    ``countries`` optionally labels replicate copies (``0..n-1``).
    """

    consumption_shares: np.ndarray
    requirements: np.ndarray
    categories: np.ndarray
    productivity: ProductivityModel = field(default_factory=ProductivityModel)
    countries: Optional[np.ndarray] = None

    def __post_init__(self):
        a0 = np.asarray(self.consumption_shares, dtype=float)
        b = np.atleast_2d(np.asarray(self.requirements, dtype=float))
        cats = np.asarray(self.categories, dtype=int)
        object.__setattr__(self, "consumption_shares", a0)
        object.__setattr__(self, "requirements", b)
        object.__setattr__(self, "categories", cats)
        m = a0.shape[0]
        if a0.ndim != 1 or b.shape[0] != m or cats.shape != (m,):
            raise ModelError(
                f"dimension mismatch: {m} consumption shares, requirements {b.shape}, categories {cats.shape}"
            )
        if b.shape[1] < 2:
            raise ModelError("requirements need a labor column and at least one category")
        if np.any(a0 < 0) or np.any(b < 0):
            raise ModelError("shares must be non-negative")
        if abs(a0.sum() - 1.0) > SHARE_TOL:
            raise ModelError(f"consumption shares sum to {a0.sum():.15g}, expected 1")
        if np.any(b.sum(axis=1) > 1.0 + SHARE_TOL):
            bad = int(np.argmax(b.sum(axis=1)))
            raise ModelError(f"requirements of firm {bad} sum to {b[bad].sum():.15g} > 1")
        L = b.shape[1] - 1
        if np.any(cats < 1) or np.any(cats > L):
            raise ModelError(f"firm categories must lie in 1..{L}")
        if self.countries is not None:
            countries = np.asarray(self.countries, dtype=int)
            if countries.shape != (m,):
                raise ModelError("countries must label every firm")
            object.__setattr__(self, "countries", countries)

    @property
    def m(self) -> int:
        return self.consumption_shares.shape[0]

    @property
    def num_categories(self) -> int:
        return self.requirements.shape[1] - 1

    @property
    def labor(self) -> np.ndarray:
        return self.requirements[:, 0]

    @property
    def epsilon(self) -> np.ndarray:
        """Profit margins ``1 - sum_l b_il`` (degree of decreasing returns)."""
        return np.clip(1.0 - self.requirements.sum(axis=1), 0.0, None)

    def members(self, category: int) -> np.ndarray:
        return np.flatnonzero(self.categories == category)

    def with_productivity(self, productivity: ProductivityModel) -> "EconomySpec":
        return replace(self, productivity=productivity)


def with_profit_margin(econ: EconomySpec, eps: float, A: Optional[np.ndarray] = None):
    """Rescale every firm's requirements so they sum to ``1 - eps``.

    If a network is given it is rescaled row by row with the same factors, so it
    stays admissible. Returns the new economy, or ``(economy, network)``.
    """
    if not 0 <= eps < 1:
        raise ModelError("profit margin must lie in [0, 1)")
    totals = econ.requirements.sum(axis=1)
    if np.any(totals <= 0):
        raise ModelError("cannot rescale a firm with no requirements")
    factor = (1.0 - eps) / totals
    new = replace(econ, requirements=econ.requirements * factor[:, None])
    if A is None:
        return new
    return new, np.asarray(A, dtype=float) * factor[:, None]


def network_errors(econ: EconomySpec, A: np.ndarray) -> list[str]:
    """Reasons why ``A`` is not an admissible strategy profile (empty if admissible)."""
    A = np.asarray(A, dtype=float)
    if A.shape != (econ.m, econ.m):
        return [f"network has shape {A.shape}, expected {(econ.m, econ.m)}"]
    errors = []
    if np.any(A < 0) or not np.all(np.isfinite(A)):
        errors.append("network entries must be finite and non-negative")
    for cat in range(1, econ.num_categories + 1):
        cols = econ.members(cat)
        sums = A[:, cols].sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - econ.requirements[:, cat]) > SHARE_TOL)
        for i in bad:
            errors.append(
                f"firm {i} spends {sums[i]:.15g} on category {cat}, requirement is {econ.requirements[i, cat]:.15g}"
            )
    return errors


def check_network(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    errors = network_errors(econ, A)
    if errors:
        raise InadmissibleNetworkError("; ".join(errors))
    return A


def uniform_network(econ: EconomySpec) -> np.ndarray:
    """Each firm splits each category requirement evenly across that category's firms."""
    A = np.zeros((econ.m, econ.m))
    for cat in range(1, econ.num_categories + 1):
        cols = econ.members(cat)
        if cols.size:
            A[:, cols] = econ.requirements[:, [cat]] / cols.size
    return A


def build_flow_matrix(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    """Column-stochastic revenue-routing matrix over the household and firms.

    Column ``i + 1`` splits firm ``i``'s revenue into labor (row 0) and purchases
    from firm ``j`` (row ``j + 1``), with profits routed to goods through the
    household's consumption shares.
    """
    A = check_network(econ, A)
    a0, eps = econ.consumption_shares, econ.epsilon
    m = econ.m
    F = np.zeros((m + 1, m + 1))
    F[0, 1:] = econ.labor
    F[1:, 0] = a0
    F[1:, 1:] = A.T + np.outer(a0, eps)
    col_err = np.abs(F.sum(axis=0) - 1.0).max()
    if col_err > SHARE_TOL:
        raise InadmissibleNetworkError(f"flow matrix columns deviate from 1 by {col_err:.3g}")
    return F


def _period(adj: np.ndarray) -> int:
    """Period of a strongly connected digraph (gcd of cycle lengths)."""
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    g = 0
    for u, v in zip(*np.nonzero(adj)):
        g = math.gcd(g, abs(int(level[u]) + 1 - int(level[v])))
    return g


@dataclass
class AssumptionReport:
    consumption_positive: bool
    labor_positive: bool
    intermediate_input: bool
    strongly_connected: bool
    period: int

    @property
    def aperiodic(self) -> bool:
        return self.period == 1

    @property
    def ergodic(self) -> bool:
        return self.strongly_connected and self.aperiodic

    @property
    def assumptions_hold(self) -> bool:
        return self.consumption_positive and self.labor_positive and self.intermediate_input

    @property
    def eligible(self) -> bool:
        # the solver only needs ergodicity; the sufficient conditions are informational
        return self.ergodic

    def as_dict(self) -> dict:
        return {
            "consumption_positive": self.consumption_positive,
            "labor_positive": self.labor_positive,
            "intermediate_input": self.intermediate_input,
            "strongly_connected": self.strongly_connected,
            "period": self.period,
            "aperiodic": self.aperiodic,
            "ergodic": self.ergodic,
            "eligible": self.eligible,
        }


def validate_assumptions(econ: EconomySpec, A: np.ndarray) -> AssumptionReport:
    F = build_flow_matrix(econ, A)
    # edge x -> y when revenue of x flows to y
    adj = F.T > 0
    n_comp, _ = connected_components(adj.astype(int), directed=True, connection="strong")
    strongly = n_comp == 1
    return AssumptionReport(
        consumption_positive=bool(np.all(econ.consumption_shares > 0)),
        labor_positive=bool(np.all(econ.labor > 0)),
        intermediate_input=bool(np.any(econ.requirements[:, 1:] > 0)),
        strongly_connected=bool(strongly),
        period=_period(adj) if strongly else 0,
    )


def require_ergodic(econ: EconomySpec, A: np.ndarray) -> None:
    report = validate_assumptions(econ, A)
    if not report.ergodic:
        raise NotErgodicError(
            f"flow matrix is not ergodic (strongly connected={report.strongly_connected}, period={report.period})"
        )


def stationary_vector(F: np.ndarray) -> np.ndarray:
    """Probability vector ``mu`` with ``F mu = mu`` by a direct bordered solve."""
    n = F.shape[0]
    M = F - np.eye(n)
    M[0, :] = 1.0
    rhs = np.zeros(n)
    rhs[0] = 1.0
    return np.linalg.solve(M, rhs)


@dataclass
class EquilibriumResult:
    revenues: np.ndarray
    household_revenue: float
    prices: np.ndarray
    outputs: np.ndarray
    allocation: np.ndarray
    profits: np.ndarray
    log_welfare: float
    welfare: float
    stationary: np.ndarray
    balance_residual: float
    labor_residual: float
    market_residual: float
    stationary_gap: float


def _gateway(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    """Row vector ``a0^T (I - A)^{-1}``."""
    return np.linalg.solve((np.eye(econ.m) - A).T, econ.consumption_shares)


def entropy_corrected_productivity(econ: EconomySpec, A: np.ndarray) -> np.ndarray:
    """``u_i = log lambda_i(a_i) + sum_{j in N} a_ij log a_ij`` (labor included)."""
    return econ.productivity.log_productivity(A) + xlogx(A).sum(axis=1) + xlogx(econ.labor)


def simplified_welfare(econ: EconomySpec, A: np.ndarray) -> float:
    """``W(A) = a0^T (I - A)^{-1} u``."""
    A = np.asarray(A, dtype=float)
    return float(_gateway(econ, A) @ entropy_corrected_productivity(econ, A))


def solve_equilibrium(econ: EconomySpec, A: np.ndarray) -> EquilibriumResult:
    A = check_network(econ, A)
    require_ergodic(econ, A)
    m = econ.m
    a0, eps, labor = econ.consumption_shares, econ.epsilon, econ.labor
    F = build_flow_matrix(econ, A)

    v = np.linalg.solve(np.eye(m) - F[1:, 1:], a0)
    mu = stationary_vector(F)
    stationary_gap = float(np.abs(v - mu[1:] / mu[0]).max())

    v0 = 1.0 + float(eps @ v)
    profits = eps * v
    u = entropy_corrected_productivity(econ, A)
    if np.any(~np.isfinite(u)):
        raise ModelError("entropy-corrected productivity is not finite")
    # (A - I) log p = u + D log v with D = diag(-eps)
    log_p = np.linalg.solve(A - np.eye(m), u - eps * np.log(v))
    p = np.exp(log_p)
    y = v / p

    n = m + 1
    prices_n = np.concatenate(([1.0], p))
    x = np.zeros((n, n))
    x[1:, 1:] = A * v[:, None] / p[None, :]
    x[1:, 0] = labor * v
    x[0, 1:] = a0 * v0 / p
    outputs_n = np.concatenate(([1.0], y))

    balance = v - (a0 * 1.0 + a0 * float(eps @ v) + A.T @ v)
    market = np.abs(x.sum(axis=0) - outputs_n) / outputs_n
    with np.errstate(divide="ignore"):
        log_x0 = np.where(a0 > 0, np.log(np.where(a0 > 0, x[0, 1:], 1.0)), 0.0)
    return EquilibriumResult(
        revenues=v,
        household_revenue=v0,
        prices=prices_n,
        outputs=outputs_n,
        allocation=x,
        profits=profits,
        log_welfare=float(a0 @ log_x0),
        welfare=float(_gateway(econ, A) @ u),
        stationary=mu,
        balance_residual=float(np.abs(balance).max()),
        labor_residual=abs(float(labor @ v) - 1.0),
        market_residual=float(market.max()),
        stationary_gap=stationary_gap,
    )


@dataclass
class WelfareReport:
    entropy_corrected: np.ndarray
    returns_diag: np.ndarray
    gateway: np.ndarray
    log_welfare: float
    log_welfare_direct: float
    welfare: float
    household_constant: float
    wage_constant: float

    @property
    def route_gap(self) -> float:
        return abs(self.log_welfare - self.log_welfare_direct)


def compute_welfare(econ: EconomySpec, A: np.ndarray, eq: Optional[EquilibriumResult] = None) -> WelfareReport:
    """Exact log-welfare (closed form and direct) and the simplified measure ``W``.

    ``household_constant`` is ``log v0 + sum a0 log a0`` (the constant of the
    exact formula); ``wage_constant`` uses ``log p0`` instead. They coincide
    under constant returns to scale.
    """
    A = check_network(econ, A)
    if eq is None:
        eq = solve_equilibrium(econ, A)
    a0 = econ.consumption_shares
    u = entropy_corrected_productivity(econ, A)
    d = A.sum(axis=1) + econ.labor - 1.0
    g = _gateway(econ, A)
    entropy_a0 = float(xlogx(a0).sum())
    household_constant = math.log(eq.household_revenue) + entropy_a0
    V = household_constant + float(g @ u) + float(g @ (d * np.log(eq.revenues)))
    return WelfareReport(
        entropy_corrected=u,
        returns_diag=d,
        gateway=g,
        log_welfare=V,
        log_welfare_direct=eq.log_welfare,
        welfare=float(g @ u),
        household_constant=household_constant,
        wage_constant=math.log(eq.prices[0]) + entropy_a0,
    )


@dataclass
class GradientReport:
    closed_form: np.ndarray
    statement_form: np.ndarray
    zero_entries: np.ndarray
    kkt_residual: np.ndarray

    @property
    def route_gap(self) -> float:
        mask = ~self.zero_entries
        if not mask.any():
            return 0.0
        return float(np.abs(self.closed_form[mask] - self.statement_form[mask]).max())


def welfare_first_order(econ: EconomySpec, A: np.ndarray) -> GradientReport:
    """Partial derivatives of ``W`` with respect to each ``A[i, j]``.

    Two evaluations: the resolvent sandwich ``a0^T R E_ij R u + a0^T R du/da_ij``
    and the walk form ``P0_i (sum_k P_jk u_k + du_i/da_ij)``. Entries with
    ``A[i, j] = 0`` have an infinite one-sided derivative; they are flagged in
    ``zero_entries`` and set to ``nan``. ``kkt_residual[i, l - 1]`` is the spread
    of the partials over firm ``i``'s active suppliers in category ``l``.
    """
    A = check_network(econ, A)
    m = econ.m
    a0 = econ.consumption_shares
    R = np.linalg.inv(np.eye(m) - A)
    u = entropy_corrected_productivity(econ, A)
    zero = A <= 0
    with np.errstate(divide="ignore"):
        du = np.log(np.where(zero, 1.0, A)) + 1.0 + np.nan_to_num(econ.productivity.dlog_productivity(A))

    closed = np.full((m, m), np.nan)
    g = a0 @ R
    Ru = R @ u
    for i in range(m):
        for j in range(m):
            if zero[i, j]:
                continue
            E = np.zeros((m, m))
            E[i, j] = 1.0
            du_vec = np.zeros(m)
            du_vec[i] = du[i, j]
            closed[i, j] = a0 @ R @ E @ R @ u + a0 @ R @ du_vec
    statement = g[:, None] * (Ru[None, :] + du)
    statement[zero] = np.nan

    L = econ.num_categories
    kkt = np.zeros((m, L))
    for cat in range(1, L + 1):
        cols = econ.members(cat)
        for i in range(m):
            vals = closed[i, cols][~zero[i, cols]]
            if vals.size:
                kkt[i, cat - 1] = vals.max() - vals.min()
    return GradientReport(closed, statement, zero, kkt)
