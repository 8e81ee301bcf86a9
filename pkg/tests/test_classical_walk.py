import numpy as np
import pytest

from qcwalk.classical_walk import (
    ClassicalWalk,
    check_semigroup,
    evolve_probability,
    log_time_grid,
    propagate,
)
from qcwalk.errors import DomainError, ValidationError
from qcwalk.graph import complete_graph, from_edges, laplacian, path_graph

from conftest import TEST_GRAPHS

P2 = laplacian(path_graph(2))
K3 = laplacian(complete_graph(3))


def k3_entries(t):
    # spectrum {0, 3, 3}: P = J/3 + exp(-3t) (I - J/3)
    return (1 + 2 * np.exp(-3 * t)) / 3, (1 - np.exp(-3 * t)) / 3


def test_propagate_p2_quarter():
    p = propagate(P2, np.log(2) / 2)
    np.testing.assert_allclose(p.matrix[0, 1], 0.25, atol=1e-15)
    assert p.t == pytest.approx(np.log(2) / 2)


def test_propagate_identity():
    assert np.array_equal(propagate(K3, 0).matrix, np.eye(3))


@pytest.mark.parametrize("t", [0.01, 0.5, 2.0])
def test_propagate_k3(t):
    diag, off = k3_entries(t)
    expected = np.full((3, 3), off) + (diag - off) * np.eye(3)
    np.testing.assert_allclose(propagate(K3, t).matrix, expected, atol=1e-14)


def test_evolve_long_time_p2():
    np.testing.assert_allclose(evolve_probability(P2, [1, 0], 50.0), [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
def test_uniform_is_fixed(name):
    lap = laplacian(TEST_GRAPHS[name])
    n = len(lap)
    np.testing.assert_allclose(evolve_probability(lap, np.full(n, 1 / n), 0.8), 1 / n, atol=1e-14)


def test_evolve_k3_localized():
    diag, off = k3_entries(0.37)
    np.testing.assert_allclose(evolve_probability(K3, [1, 0, 0], 0.37), [diag, off, off], atol=1e-14)


def test_evolve_rejects_bad_vector():
    with pytest.raises(DomainError):
        evolve_probability(P2, [0.7, 0.7], 1.0)
    with pytest.raises(ValidationError):
        evolve_probability(P2, [1, 0, 0], 1.0)


def test_invalid_generator_rejected():
    with pytest.raises(ValidationError):
        propagate(np.array([[1.0, -1.0], [-1.0, 2.0]]), 1.0)


@pytest.mark.parametrize("lap, t1, t2", [(P2, 0.3, 0.7), (K3, 1.0, 2.0), (P2, 0.0, 5.0)])
def test_semigroup_examples(lap, t1, t2):
    rep = check_semigroup(lap, t1, t2, 1e-10)
    assert rep.passed
    if lap is P2 and t1 == 0.3:
        assert rep.deviation < 1e-12


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
def test_mass_conservation_and_symmetry(name):
    walk = ClassicalWalk(laplacian(TEST_GRAPHS[name]))
    p0 = np.zeros(walk.n)
    p0[0] = 1
    grid = log_time_grid()
    series = walk.series(p0, grid)
    assert np.abs(series.sum(axis=1) - 1).max() <= 1e-12
    for t in grid[::7]:
        m = walk.propagator(t).matrix
        assert np.abs(m - m.T).max() <= 1e-10


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
def test_monotone_mixing(name):
    walk = ClassicalWalk(laplacian(TEST_GRAPHS[name]))
    p0 = np.zeros(walk.n)
    p0[-1] = 1
    dist = np.linalg.norm(walk.series(p0, log_time_grid()) - walk.stationary(), axis=1)
    assert np.all(np.diff(dist) <= 1e-14)


def test_stationary_requires_connected():
    walk = ClassicalWalk(laplacian(from_edges(4, [(0, 1), (2, 3)])))
    with pytest.raises(ValidationError):
        walk.stationary()


def test_time_grid_defaults():
    g = log_time_grid()
    assert len(g) == 50 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e2)
