import math

import numpy as np
import pytest

from fasuav import aco
from fasuav.aco import AcoParams, CellPheromone, Grid
from fasuav.oracles import (closed_walks, exhaustive_association, simplex_grid,
                            two_stage_walks)


def test_simplex_grid_counts():
    assert len(simplex_grid(1, 0.1)) == 1
    assert len(simplex_grid(2, 0.1)) == 11
    assert len(simplex_grid(3, 0.1)) == 66
    assert len(simplex_grid(4, 0.25)) == math.comb(4 + 3, 3)
    assert np.allclose(simplex_grid(3, 0.01).sum(axis=1), 1.0)


def test_exhaustive_association_by_hand():
    R = np.array([[3.0, 1.0, 0.2], [0.5, 2.0, 4.0]])
    gamma, owner = exhaustive_association(R)
    assert gamma == 4.0 and owner == (0, 0, 1)


def test_closed_walk_counts():
    g = Grid(3, 3, 1.0, (0.0, 0.0), (1, 1))
    assert closed_walks(g, 2) == [((1, 1), (1, 1))]
    assert len(closed_walks(g, 3)) == 5       # out-and-back to 4 neighbours, or stay twice
    # corner start: 2 neighbours + stay
    assert len(closed_walks(Grid(3, 3, 1.0, (0.0, 0.0), (0, 0)), 3)) == 3


def test_two_stage_walks_cover_sampled_ones():
    g = Grid(5, 5, 50.0, (0.0, 0.0), (2, 2))
    support = set(two_stage_walks(g, 8))
    assert support <= set(closed_walks(g, 8))
    rng = np.random.default_rng(0)
    for i in range(500):
        pher = CellPheromone(g, 1.0)
        pher.tau[:] = rng.uniform(0.01, 10, (5, 5))
        t = aco.explore(g, pher, AcoParams(), rng.uniform(0.1, 1, (5, 5)), 8, rng)
        assert t in support
