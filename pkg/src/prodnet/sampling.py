"""Seeded random economies and networks for property tests and the verify suite."""
from __future__ import annotations

import numpy as np

from .economy import EconomySpec, ProductivityModel


def random_economy(
    rng: np.random.Generator,
    m: int,
    num_categories: int | None = None,
    margin: tuple[float, float] = (0.0, 0.3),
    labor: tuple[float, float] = (0.1, 0.6),
    productivity: ProductivityModel | None = None,
) -> EconomySpec:
    """Economy with strictly positive labor shares and every category non-empty.

    Profit margins are drawn from ``margin``; the remaining budget after labor
    is split over categories with a Dirichlet draw.
    """
    L = num_categories or int(rng.integers(1, m + 1))
    L = min(L, m)
    cats = np.concatenate([np.arange(1, L + 1), rng.integers(1, L + 1, size=m - L)])
    rng.shuffle(cats)
    a0 = rng.dirichlet(np.ones(m))
    eps = rng.uniform(*margin, size=m)
    lab = rng.uniform(*labor, size=m) * (1.0 - eps)
    inter = (1.0 - eps - lab)[:, None] * rng.dirichlet(np.ones(L), size=m)
    b = np.column_stack([lab, inter])
    if productivity is None:
        productivity = ProductivityModel.constant(rng.uniform(0.5, 2.0, size=m))
    return EconomySpec(a0, b, cats, productivity)


def random_row(econ: EconomySpec, i: int, rng: np.random.Generator, sparsity: float = 0.3) -> np.ndarray:
    """Admissible purchase row for firm ``i``; some suppliers are dropped at random."""
    row = np.zeros(econ.m)
    for cat in range(1, econ.num_categories + 1):
        members = econ.members(cat)
        need = econ.requirements[i, cat]
        if need <= 0:
            continue
        keep = members[rng.random(members.size) >= sparsity]
        if keep.size == 0:
            keep = members[[int(rng.integers(members.size))]]
        row[keep] = need * rng.dirichlet(np.ones(keep.size))
    return row


def random_network(econ: EconomySpec, rng: np.random.Generator, sparsity: float = 0.3) -> np.ndarray:
    return np.vstack([random_row(econ, i, rng, sparsity) for i in range(econ.m)])


def bounded_network(econ: EconomySpec, rng: np.random.Generator, floor: float = 0.01) -> np.ndarray:
    """Dense network whose non-zero entries stay at least ``floor`` times the category requirement."""
    A = np.zeros((econ.m, econ.m))
    for cat in range(1, econ.num_categories + 1):
        members = econ.members(cat)
        k = members.size
        w = floor + (1.0 - k * floor) * rng.dirichlet(np.ones(k), size=econ.m)
        A[:, members] = econ.requirements[:, [cat]] * w
    return A
