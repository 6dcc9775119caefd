"""Invariant and oracle suite run by ``prodnet-eq verify``.

Each check records a measured value, a tolerance and a pass flag. Checks are
run on the scenario's own economy and on a seeded batch of random instances,
so the report is reproducible bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracles
from .economy import (
    FD_STEP,
    EconomySpec,
    build_flow_matrix,
    compute_welfare,
    simplified_welfare,
    solve_equilibrium,
    welfare_first_order,
    with_profit_margin,
)
from .errors import ModelError
from .game import MIN_MARGIN, best_response, is_nash, potential_value
from .partitions import bell_number, set_partitions
from .policy import brute_force_compatible, compatible_partitions
from .replicate import (
    anarchy_constant,
    build_clustered_network,
    cluster_inverse_table,
    partition_welfare_scan,
    with_margin,
)
from .risk import expected_count_identity, expected_welfare_clustered, expected_welfare_exact, distance_inequality, live_links
from .sampling import bounded_network, random_economy, random_network
from .walks import profit_via_walks, walk_tables


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed, "detail": self.detail}


class Suite:
    def __init__(self):
        self.checks: list[Check] = []

    def below(self, name: str, value: float, tol: float, detail: str = "") -> None:
        value = float(value)
        self.checks.append(Check(name, value, tol, bool(np.isfinite(value) and value <= tol), detail))

    def flag(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, 0.0 if ok else 1.0, 0.0, bool(ok), detail))

    def guard(self, name: str, fn: Callable[[], None]) -> None:
        try:
            fn()
        except ModelError as err:
            self.flag(name, False, f"{type(err).__name__}: {err}")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def check_economy(s: Suite, tag: str, econ: EconomySpec, A: np.ndarray, tol: float) -> None:
    F = build_flow_matrix(econ, A)
    s.below(f"{tag}/flow_columns", np.abs(F.sum(axis=0) - 1).max(), 1e-12)
    s.below(f"{tag}/flow_oracle", np.abs(F - oracles.flow_matrix_oracle(econ, A)).max(), 1e-12)
    eq = solve_equilibrium(econ, A)
    s.below(f"{tag}/balance_residual", eq.balance_residual, 1e-10)
    s.below(f"{tag}/labor_clearing", eq.labor_residual, 1e-10)
    s.below(f"{tag}/market_clearing", eq.market_residual, tol)
    s.below(f"{tag}/stationary_vs_resolvent", eq.stationary_gap, tol)
    s.below(f"{tag}/revenue_oracle", _rel(eq.revenues, oracles.revenue_oracle(econ, A)), 1e-8)
    w = compute_welfare(econ, A, eq)
    s.below(f"{tag}/log_welfare_routes", w.route_gap, 1e-10)

    tables = walk_tables(econ, A)
    s.below(f"{tag}/walk_identities", tables.identity_gap(), 1e-10)
    wp = profit_via_walks(econ, A)
    s.below(f"{tag}/profit_resolvent_vs_ratio", wp.route_gap, tol)
    s.below(f"{tag}/profit_walks_vs_solver", np.abs(wp.resolvent - eq.profits).max(), tol)
    if econ.m <= 4:
        rho = tables.transition.sum(axis=1).max()
        if rho < 0.5:
            en = oracles.walk_enumeration_oracle(tables.transition, max_steps=25)
            s.below(f"{tag}/walk_enumeration_total", np.abs(en.total - tables.total).max(), 1e-6)
            off = ~np.eye(econ.m, dtype=bool)
            gap = max(np.abs(en.direct - tables.direct)[off].max(initial=0.0), np.abs(np.diag(en.direct) - np.diag(tables.direct)).max())
            s.below(f"{tag}/walk_enumeration_direct", gap, 1e-6)

    pot = potential_value(econ, A, enumeration_cap=6)
    s.below(f"{tag}/tree_theorem", pot.tree_gap, tol)
    if pot.enumeration_gap is not None:
        s.below(f"{tag}/tree_enumeration", pot.enumeration_gap, 1e-10)


def check_gradient(s: Suite, tag: str, econ: EconomySpec, A: np.ndarray) -> None:
    g = welfare_first_order(econ, A)
    s.below(f"{tag}/gradient_routes", g.route_gap, 1e-9)
    worst = 0.0
    for i, j in zip(*np.nonzero(A > 0)):
        cat = econ.categories[j]
        members = econ.members(cat)
        k = next((k for k in members if k != j and A[i, k] > FD_STEP), None)
        if k is None:
            continue
        # move mass between two suppliers of one category to stay admissible
        def shifted(h):
            B = A.copy()
            B[i, j] += h
            B[i, k] -= h
            return simplified_welfare(econ, B)

        fd = (shifted(FD_STEP) - shifted(-FD_STEP)) / (2 * FD_STEP)
        an = g.closed_form[i, j] - g.closed_form[i, k]
        worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
    s.below(f"{tag}/gradient_finite_difference", worst, 1e-5)


def check_game(s: Suite, tag: str, econ: EconomySpec, A: np.ndarray, tol: float) -> None:
    if np.any(econ.epsilon < MIN_MARGIN):
        econ, A = with_profit_margin(econ, 1e-3, A)
    report = is_nash(econ, A, tol)
    for i in range(econ.m):
        br = best_response(econ, A, i, "uniform_over_argmax")
        own = econ.requirements[i, econ.categories[i]]
        s.flag(f"{tag}/integration_firm{i}", own <= 0 or br.row[i] == own)
        s.below(f"{tag}/best_response_gain_firm{i}", -br.gain, 1e-12)
    small = all(econ.members(c).size <= 3 for c in range(1, econ.num_categories + 1)) and econ.m <= 6
    if small:
        gains = [oracles.grid_deviation_oracle(econ, A, i, step=0.1).max_gain for i in range(econ.m)]
        oracle_nash = max(gains) <= tol
        # a grid point can only do as well as the analytic best response
        s.below(f"{tag}/grid_below_best_response", max(gains) - report.max_gain, tol)
        if report.is_nash:
            s.flag(f"{tag}/grid_confirms_nash", oracle_nash)


def run_suite(scenario, instances: int | None = None) -> Suite:
    s = Suite()
    opts = scenario.options
    tol = opts.tol
    econ, A = scenario.econ, scenario.network()
    s.guard("scenario/economy", lambda: check_economy(s, "scenario", econ, A, tol))
    s.guard("scenario/game", lambda: check_game(s, "scenario", econ, A, tol))

    rng = np.random.default_rng(opts.seed)
    count = opts.verify_instances if instances is None else instances
    for k in range(count):
        m = int(rng.integers(1, 7))
        e = random_economy(rng, m)
        net = random_network(e, rng)
        s.guard(f"random{k}/economy", lambda: check_economy(s, f"random{k}", e, net, tol))
        if k % 4 == 0:
            dense = bounded_network(e, rng)
            s.guard(f"random{k}/gradient", lambda: check_gradient(s, f"random{k}", e, dense))
        if k % 5 == 0 and m <= 4:
            s.guard(f"random{k}/game", lambda: check_game(s, f"random{k}", e, net, tol))

    for n in range(0, 6):
        parts = set_partitions(n)
        s.flag(f"partitions/bell_{n}", len(parts) == bell_number(n) and parts == oracles.partition_enumerator(n))
    for k in range(10):
        p = rng.uniform(size=int(rng.integers(1, 13)))
        lhs, rhs = expected_count_identity(p)
        s.below(f"identity/expected_count_{k}", abs(lhs - rhs), 1e-12)
        ineq = distance_inequality(rng.normal(size=int(rng.integers(1, 6))), rng.normal(size=int(rng.integers(1, 6))))
        s.flag(f"identity/distance_{k}", ineq.holds and ineq.merged_holds)

    if scenario.rep is not None:
        s.guard("replicate", lambda: _check_replicate(s, scenario, tol))
    return s


def _check_replicate(s: Suite, scenario, tol: float) -> None:
    rep = scenario.rep
    opts = scenario.options
    parts = set_partitions(rep.n, cap=opts.n_cap)
    tables = [cluster_inverse_table(rep, Q) for Q in parts]
    s.below("replicate/cluster_closed_form", max(t.closed_form_gap for t in tables), 1e-10)
    s.below("replicate/cluster_block_sums", max(t.block_sum_gap for t in tables), 1e-10)
    game = with_margin(rep, opts.epsilon)
    for Q in parts:
        s.flag(f"replicate/clustered_nash_{Q}", is_nash(game.econ, build_clustered_network(game, Q).network, tol).is_nash)
    if rep.econ.productivity.kind == "constant" and rep.n >= 2:
        scan = partition_welfare_scan(rep, n_cap=opts.n_cap, check_nash=False)
        K = anarchy_constant(rep)
        s.below("replicate/anarchy_gap", abs(scan.islands_minus_full - K * np.log(rep.n)), tol)
    if rep.econ.productivity.kind == "hicks_neutral":
        w = [simplified_welfare(rep.econ, build_clustered_network(rep, Q).network) for Q in parts]
        s.below("replicate/hicks_neutral_spread", max(w) - min(w), tol)

    risk = scenario.risk_model()
    if risk is not None:
        cap = scenario.model.risk.link_cap
        for Q in parts:
            net = build_clustered_network(rep, Q).network
            if len(live_links(net)) > cap:
                continue
            ex = expected_welfare_exact(rep.econ, net, risk, link_cap=cap, seed=opts.seed)
            cf = expected_welfare_clustered(rep, Q, risk)
            s.below(f"risk/exact_vs_closed_{Q}", abs(ex.expected_welfare - cf.expected_welfare), tol)
            s.below(f"risk/weights_{Q}", abs(ex.weight_sum - 1.0), 1e-10)
            s.below(f"risk/invariance_{Q}", ex.invariance_gap, 1e-12)

    policy = scenario.trade_policy()
    if policy is not None:
        res = compatible_partitions(rep, policy, n_cap=opts.n_cap)
        s.flag("policy/propagation_vs_brute_force", res.partitions == brute_force_compatible(rep, policy, opts.n_cap))
