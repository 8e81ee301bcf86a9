import numpy as np
import pytest

from qcwalk.graph import complete_graph, cycle_graph, from_edges, grid_graph, path_graph, petersen_graph


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def p2():
    return path_graph(2)


@pytest.fixture
def k3():
    return complete_graph(3)


TEST_GRAPHS = {
    "P2": path_graph(2),
    "P2w4": path_graph(2, weight=4.0),
    "K3": complete_graph(3),
    "C4": cycle_graph(4),
    "star4": from_edges(5, [(0, i) for i in range(1, 5)]),
    "petersen": petersen_graph(),
    "grid3x3": grid_graph(3, 3),
    "weighted": from_edges(4, [(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.5), (0, 3, 0.25), (0, 2, 3.0)]),
}
