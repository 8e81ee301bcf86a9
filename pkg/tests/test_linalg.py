import numpy as np
import pytest
from scipy.linalg import expm

from qcwalk.errors import DomainError, PositivityError, SymmetryError
from qcwalk.graph import complete_graph, laplacian, path_graph
from qcwalk.linalg import (
    SpectralDecomposition,
    eigh,
    read_complex_csv,
    stochastic_propagator_kernel,
    unitary_propagator,
    validate_density_matrix,
    write_complex_csv,
)

from conftest import TEST_GRAPHS, random_hermitian

P2 = np.array([[1.0, -1.0], [-1.0, 1.0]])
K3 = 3 * np.eye(3) - np.ones((3, 3))


def test_eigh_p2():
    # characteristic polynomial (1 - x)^2 - 1 = x (x - 2)
    np.testing.assert_allclose(eigh(P2).eigenvalues, [0, 2], atol=1e-14)


def test_eigh_identity():
    dec = eigh(np.eye(3))
    np.testing.assert_allclose(dec.eigenvalues, [1, 1, 1])
    np.testing.assert_allclose(dec.eigenvectors.conj().T @ dec.eigenvectors, np.eye(3), atol=1e-14)


def test_eigh_sigma_y():
    # x^2 - 1 = 0
    np.testing.assert_allclose(eigh(np.array([[0, 1j], [-1j, 0]])).eigenvalues, [-1, 1], atol=1e-14)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(SymmetryError) as exc:
        eigh(np.array([[0, 1.0], [0, 0]]))
    assert exc.value.defect == pytest.approx(1.0)


def test_eigh_phase_convention(rng):
    dec = eigh(random_hermitian(rng, 6))
    v = dec.eigenvectors
    for c in range(v.shape[1]):
        col = v[:, c]
        p = np.argmax(np.abs(col) >= np.abs(col).max() * (1 - 1e-9))
        assert abs(col[p].imag) < 1e-15 and col[p].real > 0


def test_eigh_reproducible_on_degenerate(rng):
    h = np.kron(np.eye(2), random_hermitian(rng, 3))
    a, b = eigh(h), eigh(h.copy())
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


@pytest.mark.parametrize("seed", range(10))
def test_eigh_invariants(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, int(rng.integers(2, 12)))
    dec = eigh(h)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.abs(dec.reconstruct() - h).max() <= 1e-9
    v = dec.eigenvectors
    assert np.abs(v.conj().T @ v - np.eye(len(h))).max() <= 1e-10
    assert abs(dec.eigenvalues.sum() - np.trace(h).real) <= 1e-10


def test_unitary_at_zero_is_identity(rng):
    assert np.array_equal(unitary_propagator(random_hermitian(rng, 4), 0.0), np.eye(4))


def test_unitary_p2_closed_form():
    t = np.pi / 2
    sx = np.array([[0, 1], [1, 0]])
    expected = np.exp(-1j * t) * (np.cos(t) * np.eye(2) + 1j * np.sin(t) * sx)
    u = unitary_propagator(P2, t)
    np.testing.assert_allclose(u, expected, atol=1e-14)
    assert np.abs(np.diag(u)).max() < 1e-15
    np.testing.assert_allclose(np.abs(u[0, 1]), 1.0, atol=1e-15)


def test_unitary_group_law():
    u = unitary_propagator
    np.testing.assert_allclose(u(K3, 0.3) @ u(K3, 0.7), u(K3, 1.0), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_unitary_matches_expm_and_det(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, 7)
    for t in (-1.3, 0.4, 5.0):
        u = unitary_propagator(h, t)
        np.testing.assert_allclose(u, expm(-1j * h * t), atol=1e-10)
        assert abs(abs(np.linalg.det(u)) - 1) <= 1e-10
        assert np.abs(u.conj().T @ u - np.eye(7)).max() <= 1e-10


def test_kernel_p2_closed_form():
    t = np.log(2) / 2
    p = stochastic_propagator_kernel(P2, t)
    np.testing.assert_allclose(p[0, 1], 0.25, atol=1e-15)
    for t in (0.1, 1.0, 3.0):
        off = (1 - np.exp(-2 * t)) / 2
        np.testing.assert_allclose(stochastic_propagator_kernel(P2, t),
                                   [[1 - off, off], [off, 1 - off]], atol=1e-14)


def test_kernel_identity_and_long_time():
    assert np.array_equal(stochastic_propagator_kernel(K3, 0.0), np.eye(3))
    np.testing.assert_allclose(stochastic_propagator_kernel(P2, 50.0), 0.5, atol=1e-12)


def test_kernel_rejects_negative_time():
    with pytest.raises(DomainError):
        stochastic_propagator_kernel(P2, -0.1)


def test_kernel_rejects_positive_offdiagonal_generator():
    bad = np.array([[-1.0, 1.0], [1.0, -1.0]])
    with pytest.raises(PositivityError):
        stochastic_propagator_kernel(bad, 1.0)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
def test_kernel_semigroup_and_expm(name):
    lap = laplacian(TEST_GRAPHS[name])
    k = stochastic_propagator_kernel
    np.testing.assert_allclose(k(lap, 0.4) @ k(lap, 1.1), k(lap, 1.5), atol=1e-10)
    np.testing.assert_allclose(k(lap, 0.7), expm(-0.7 * lap), atol=1e-12)


def test_decomposition_reuse_and_serialization(tmp_path, rng):
    h = random_hermitian(rng, 4)
    dec = eigh(h)
    again = SpectralDecomposition.from_dict(dec.to_dict())
    np.testing.assert_array_equal(again.eigenvectors, dec.eigenvectors)
    np.testing.assert_allclose(unitary_propagator(dec, 0.3), unitary_propagator(h, 0.3), atol=1e-14)
    path = tmp_path / "u.csv"
    write_complex_csv(unitary_propagator(dec, 0.3), path)
    assert path.read_text().splitlines()[0].startswith("re_0,im_0,re_1")
    np.testing.assert_array_equal(read_complex_csv(path), unitary_propagator(dec, 0.3))


def test_density_matrix_validation():
    validate_density_matrix(np.diag([0.5, 0.5]))
    with pytest.raises(DomainError):
        validate_density_matrix(np.diag([0.5, 0.6]))
    with pytest.raises(PositivityError):
        validate_density_matrix(np.diag([1.5, -0.5]))
