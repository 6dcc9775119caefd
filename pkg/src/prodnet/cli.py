"""Command-line entry point ``prodnet-eq``.

Exit codes: 0 success, 1 infeasible computation (cap, degeneracy, infeasible
policy, non-ergodic network), 2 usage or scenario error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .economy import compute_welfare, solve_equilibrium, validate_assumptions, welfare_first_order, with_profit_margin
from .errors import CapExceededError, ModelError
from .game import MIN_MARGIN, best_response, best_response_dynamics, is_nash, potential_value
from .partitions import fully_connected, set_partitions
from .policy import brute_force_compatible, compatible_partitions, design_policy
from .replicate import anarchy_constant, cluster_inverse_table, partition_welfare_scan
from .report import write_report
from .risk import expected_welfare_clustered, expected_welfare_exact, live_links, risk_partition_scan
from .scenario import Scenario, ScenarioError, load_scenario
from .verify import run_suite

COMMANDS = ("solve", "welfare", "nash", "dynamics", "replicate-scan", "poa", "risk", "policy-filter", "verify")

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class Infeasible(Exception):
    """Report was written but the requested computation is infeasible."""


def _blocks(Q) -> list[list[int]]:
    return [[c + 1 for c in block] for block in Q]


def _game_inputs(sc: Scenario):
    """Economy and network for game commands, rescaled to margin ``epsilon`` when margins vanish."""
    econ, A = sc.econ, sc.network()
    if np.any(econ.epsilon < MIN_MARGIN):
        econ, A = with_profit_margin(econ, sc.options.epsilon, A)
        return econ, A, True
    return econ, A, False


def _require_replicate(sc: Scenario):
    if sc.rep is None:
        raise ScenarioError("this command needs a 'replicate' block in the scenario")
    return sc.rep


def cmd_solve(sc: Scenario) -> dict:
    econ, A = sc.econ, sc.network()
    report = validate_assumptions(econ, A)
    eq = solve_equilibrium(econ, A)
    return {
        "assumptions": report.as_dict(),
        "revenues": eq.revenues,
        "household_revenue": eq.household_revenue,
        "prices": eq.prices,
        "outputs": eq.outputs,
        "profits": eq.profits,
        "welfare": eq.welfare,
        "log_welfare": eq.log_welfare,
        "residuals": {
            "balance": eq.balance_residual,
            "labor": eq.labor_residual,
            "market": eq.market_residual,
            "stationary": eq.stationary_gap,
        },
    }


def cmd_welfare(sc: Scenario) -> dict:
    econ, A = sc.econ, sc.network()
    w = compute_welfare(econ, A)
    g = welfare_first_order(econ, A)
    return {
        "entropy_corrected_productivity": w.entropy_corrected,
        "returns_diagonal": w.returns_diag,
        "gateway": w.gateway,
        "welfare": w.welfare,
        "log_welfare": w.log_welfare,
        "log_welfare_direct": w.log_welfare_direct,
        "household_constant": w.household_constant,
        "wage_constant": w.wage_constant,
        "gradient": g.closed_form,
        "gradient_statement_form": g.statement_form,
        "gradient_route_gap": g.route_gap,
        "kkt_residual": g.kkt_residual,
    }


def cmd_nash(sc: Scenario) -> dict:
    econ, A, rescaled = _game_inputs(sc)
    tol = sc.options.tol
    rep = is_nash(econ, A, tol)
    brs = [best_response(econ, A, i, sc.options.tie_policy) for i in range(econ.m)]
    pot = potential_value(econ, A, enumeration_cap=8)
    return {
        "rescaled_to_epsilon": rescaled,
        "nash": rep.as_dict(),
        "gains": rep.gains,
        "best_responses": [
            {"firm": b.firm + 1, "row": b.row, "profit": b.profit, "incumbent_profit": b.incumbent_profit}
            for b in brs
        ],
        "potential": {
            "value": pot.value,
            "tree_weights": pot.tree_weights,
            "sum_normalized_value": pot.sum_normalized_value,
            "tree_gap": pot.tree_gap,
            "enumeration_gap": pot.enumeration_gap,
        },
    }


def cmd_dynamics(sc: Scenario) -> dict:
    econ, A, rescaled = _game_inputs(sc)
    o = sc.options
    res = best_response_dynamics(econ, A, o.schedule, o.max_rounds, o.tol, o.seed)
    return {
        "rescaled_to_epsilon": rescaled,
        "converged": res.converged,
        "rounds": res.rounds,
        "changed_rows": res.changed_rows,
        "potentials": res.potentials,
        "potential_monotone": res.potential_monotone(),
        "terminal_network": res.network,
        "terminal_nash": is_nash(econ, res.network, o.tol).as_dict(),
    }


def _scan(sc: Scenario, random_starts: int) -> dict:
    rep = _require_replicate(sc)
    o = sc.options
    scan = partition_welfare_scan(
        rep, n_cap=o.n_cap, epsilon=o.epsilon, random_starts=random_starts, seed=o.seed, tol=o.tol
    )
    return scan, {
        "partitions": [
            {"partition": _blocks(Q), "welfare": w, "nash": ok}
            for Q, w, ok in zip(scan.partitions, scan.welfare, scan.nash)
        ],
        "max_equilibrium_welfare": scan.max_equilibrium,
        "min_equilibrium_welfare": scan.min_equilibrium,
        "islands_minus_full": scan.islands_minus_full,
    }


def cmd_replicate_scan(sc: Scenario) -> dict:
    _, out = _scan(sc, 0)
    table = cluster_inverse_table(sc.rep, fully_connected(sc.rep.n))
    out["cluster_table"] = table.table
    out["category_weights"] = table.weights
    return out


def cmd_poa(sc: Scenario) -> dict:
    scan, out = _scan(sc, sc.options.random_starts)
    rep = sc.rep
    out.update(
        {
            "poa_ratio": scan.poa_ratio,
            "poa_difference": scan.poa_difference,
            "poa_ratio_all_configurations": scan.poa_ratio_all_configurations,
            "max_configuration_welfare": scan.max_configuration,
            "dynamics_welfare": scan.dynamics_welfare,
            "anarchy_constant": anarchy_constant(rep),
            "anarchy_prediction": anarchy_constant(rep) * math.log(rep.n),
        }
    )
    return out


def cmd_risk(sc: Scenario) -> dict:
    risk = sc.risk_model()
    if risk is None:
        raise ScenarioError("this command needs a 'risk' block in the scenario")
    cap = sc.model.risk.link_cap
    econ, A = sc.econ, sc.network()
    out = {"links": len(live_links(A)), "link_cap": cap}
    try:
        ex = expected_welfare_exact(econ, A, risk, link_cap=cap, seed=sc.options.seed)
        out["exact"] = {
            "expected_welfare": ex.expected_welfare,
            "expected_log_welfare": ex.expected_log_welfare,
            "base_welfare": ex.base_welfare,
            "weight_sum": ex.weight_sum,
            "expected_exponent": ex.expected_exponent,
            "invariance_gap": ex.invariance_gap,
        }
    except CapExceededError as err:
        out["exact"] = {"skipped": str(err)}
    if sc.rep is not None:
        parts = set_partitions(sc.rep.n, cap=sc.options.n_cap)
        out["clustered"] = [
            {"partition": _blocks(Q), "expected_welfare": expected_welfare_clustered(sc.rep, Q, risk).expected_welfare}
            for Q in parts
        ]
        if sc.rep.econ.productivity.kind == "hicks_neutral":
            rs = risk_partition_scan(sc.rep, risk, n_cap=sc.options.n_cap, tol=sc.options.tol)
            out["ordering"] = rs.ordering()
            out["argmax"] = [_blocks(Q) for Q in rs.argmax]
            out["argmin"] = [_blocks(Q) for Q in rs.argmin]
    return out


def cmd_policy_filter(sc: Scenario) -> dict:
    rep = _require_replicate(sc)
    policy = sc.trade_policy()
    if policy is None:
        raise ScenarioError("this command needs a 'policy' block in the scenario")
    n_cap = sc.options.n_cap
    res = compatible_partitions(rep, policy, n_cap=n_cap)
    out = {
        "prevented": sorted([i + 1, j + 1] for i, j in policy.prevented),
        "catalyzed": sorted([i + 1, j + 1] for i, j in policy.catalyzed),
        "feasible": res.feasible,
        "certificate": res.certificate,
        "compatible": [_blocks(Q) for Q in res.partitions],
        "matches_brute_force": res.partitions == brute_force_compatible(rep, policy, n_cap),
        "designed": [],
    }
    for Q in res.partitions:
        d = design_policy(rep, Q)
        out["designed"].append(
            {
                "partition": _blocks(Q),
                "prevented": sorted([i + 1, j + 1] for i, j in d.prevented),
                "catalyzed": sorted([i + 1, j + 1] for i, j in d.catalyzed),
            }
        )
    if not res.feasible:
        raise Infeasible(out)
    return out


def cmd_verify(sc: Scenario) -> dict:
    suite = run_suite(sc)
    return {
        "passed": suite.passed,
        "checks": [c.as_dict() for c in suite.checks],
        "failed": [c.name for c in suite.checks if not c.passed],
    }


HANDLERS = {
    "solve": cmd_solve,
    "welfare": cmd_welfare,
    "nash": cmd_nash,
    "dynamics": cmd_dynamics,
    "replicate-scan": cmd_replicate_scan,
    "poa": cmd_poa,
    "risk": cmd_risk,
    "policy-filter": cmd_policy_filter,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prodnet-eq", description="Production-network formation analyses.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--tol", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tie-break", dest="tie_policy", choices=("uniform_over_argmax", "keep_current", "lowest_index"))
    p.add_argument("--seed", type=int)
    p.add_argument("--n-cap", dest="n_cap", type=int)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        sc = load_scenario(args.scenario).with_overrides(
            tol=args.tol, epsilon=args.epsilon, tie_policy=args.tie_policy, seed=args.seed, n_cap=args.n_cap
        )
    except ScenarioError as err:
        print(f"prodnet-eq: scenario error: {err}", file=sys.stderr)
        return EXIT_USAGE
    header = {"command": args.command, "scenario": sc.name}
    code = EXIT_OK
    try:
        body = HANDLERS[args.command](sc)
    except Infeasible as inf:
        body, code = inf.args[0], EXIT_INFEASIBLE
        print(f"prodnet-eq: infeasible: {body.get('certificate')}", file=sys.stderr)
    except ScenarioError as err:
        print(f"prodnet-eq: scenario error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as err:
        print(f"prodnet-eq: {err.cap_name} exceeded (limit {err.limit}, requested {err.requested})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ModelError as err:
        print(f"prodnet-eq: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    stem = args.command.replace("-", "_")
    write_report({**header, **body}, args.out, stem, args.format)
    if args.command == "verify" and not body["passed"]:
        print(f"prodnet-eq: verification failed: {', '.join(body['failed'])}", file=sys.stderr)
        return EXIT_VERIFY
    return code


if __name__ == "__main__":
    sys.exit(main())
