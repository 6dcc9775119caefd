import numpy as np
import pytest

from prodnet import oracles
from prodnet.economy import EconomySpec, solve_equilibrium
from prodnet.errors import CapExceededError


def test_config_validation():
    assert oracles.OracleConfig().tree_node_cap == 8
    with pytest.raises(ValueError):
        oracles.OracleConfig(walk_length_cap=0)
    with pytest.raises(ValueError):
        oracles.OracleConfig(grid_step=0.0)


def test_stationary_oracle(inst_a):
    F = oracles.flow_matrix_oracle(inst_a, np.zeros((1, 1)))
    np.testing.assert_allclose(oracles.stationary_oracle(F), [0.375, 0.625], atol=1e-14)


def test_profit_oracle(inst_b):
    A = np.array([[0.2, 0.3], [0.3, 0.2]])
    np.testing.assert_allclose(oracles.profit_oracle(inst_b, A), solve_equilibrium(inst_b, A).profits, atol=1e-14)


def test_single_supplier_grid_is_degenerate():
    econ = EconomySpec([0.5, 0.5], [[0.5, 0.2, 0.29], [0.5, 0.3, 0.19]], [1, 2])
    A = np.array([[0.2, 0.29], [0.3, 0.19]])
    grid = oracles.grid_deviation_oracle(econ, A, 0)
    assert len(grid.rows) == 1
    assert grid.max_gain == pytest.approx(0.0, abs=1e-15)


def test_grid_cap(rep2):
    from prodnet.economy import with_profit_margin
    from prodnet.replicate import build_clustered_network

    econ, A = with_profit_margin(rep2.econ, 1e-3, build_clustered_network(rep2, [[0], [1]]).network)
    with pytest.raises(CapExceededError, match="grid point cap"):
        oracles.grid_deviation_oracle(econ, A, 0, step=0.05, point_cap=100)


def test_compositions():
    comps = list(oracles._compositions(3, 2))
    assert comps == [(0, 3), (1, 2), (2, 1), (3, 0)]
