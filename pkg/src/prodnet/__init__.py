"""Strategic production-network formation on Cobb-Douglas economies."""
from .economy import (
    EconomySpec,
    EquilibriumResult,
    ProductivityModel,
    WelfareReport,
    build_flow_matrix,
    compute_welfare,
    simplified_welfare,
    solve_equilibrium,
    uniform_network,
    validate_assumptions,
    welfare_first_order,
    with_profit_margin,
)
from .errors import CapExceededError, DegenerateGameError, InadmissibleNetworkError, ModelError, NotErgodicError
from .game import best_response, best_response_dynamics, is_nash, potential_value
from .partitions import set_partitions
from .policy import TradePolicy, compatible_partitions, design_policy, is_compatible
from .replicate import (
    anarchy_constant,
    build_clustered_network,
    classify_returns_to_diversification,
    cluster_inverse_table,
    partition_welfare_scan,
    replicate_game,
    verify_cluster_nash,
)
from .risk import (
    RiskModel,
    build_risk_matrix,
    disruption_exponent,
    expected_welfare_clustered,
    expected_welfare_exact,
    risk_partition_scan,
)
from .walks import profit_via_walks, walk_tables

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "DegenerateGameError",
    "EconomySpec",
    "EquilibriumResult",
    "InadmissibleNetworkError",
    "ModelError",
    "NotErgodicError",
    "ProductivityModel",
    "RiskModel",
    "TradePolicy",
    "WelfareReport",
    "anarchy_constant",
    "best_response",
    "best_response_dynamics",
    "build_clustered_network",
    "build_flow_matrix",
    "build_risk_matrix",
    "classify_returns_to_diversification",
    "cluster_inverse_table",
    "compatible_partitions",
    "compute_welfare",
    "design_policy",
    "disruption_exponent",
    "expected_welfare_clustered",
    "expected_welfare_exact",
    "is_compatible",
    "is_nash",
    "partition_welfare_scan",
    "potential_value",
    "profit_via_walks",
    "replicate_game",
    "risk_partition_scan",
    "set_partitions",
    "simplified_welfare",
    "solve_equilibrium",
    "uniform_network",
    "validate_assumptions",
    "verify_cluster_nash",
    "walk_tables",
    "welfare_first_order",
    "with_profit_margin",
]
