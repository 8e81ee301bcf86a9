"""Dense spectral decompositions and the propagators built on them.

All generators in this package are Hermitian (quantum) or real symmetric
(classical), so every exponential is evaluated through one eigendecomposition
that can be reused across a whole time grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, PositivityError, SymmetryError

TOL_HERM = 1e-10
TOL_UNITARY = 1e-10
TOL_RECON = 1e-9
CLIP_WINDOW = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def apply(self, f) -> np.ndarray:
        """Matrix function ``V f(lambda) V^dagger``."""
        v = self.eigenvectors
        return (v * f(self.eigenvalues)) @ v.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(lambda x: x)

    def to_dict(self) -> dict:
        v = np.asarray(self.eigenvectors, dtype=complex)
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "eigenvectors": [[[float(z.real), float(z.imag)] for z in row] for row in v],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralDecomposition":
        vec = np.array(data["eigenvectors"], dtype=float)
        return cls(np.array(data["eigenvalues"], dtype=float), vec[..., 0] + 1j * vec[..., 1])


def hermitian_defect(h) -> float:
    h = np.asarray(h)
    return float(np.abs(h - h.conj().T).max(initial=0.0))


def as_hermitian(h, tol_herm: float = TOL_HERM) -> np.ndarray:
    """Check ``h`` is square and Hermitian within ``tol_herm``; return it symmetrized."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {h.shape}")
    defect = hermitian_defect(h)
    if defect > tol_herm:
        raise SymmetryError(f"matrix is not Hermitian (defect {defect:.3e} > {tol_herm:.1e})", defect)
    if np.iscomplexobj(h):
        return 0.5 * (h + h.conj().T)
    return 0.5 * (h + h.T).astype(float)


def _canonical_phase(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each column so its first largest-modulus entry is real positive.

    Returns the rotated columns and the pivot index of each.
    """
    mod = np.abs(v)
    # first index within rounding of the column maximum
    pivots = np.argmax(mod >= mod.max(axis=0) * (1 - 1e-9), axis=0)
    cols = np.arange(v.shape[1])
    p = v[pivots, cols]
    return v * (p.conj() / np.abs(p)), pivots


def eigh(h, tol_herm: float = TOL_HERM) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with reproducible eigenvectors.

    Eigenvalues are ascending.  Each eigenvector is phase-fixed so that its
    first component of largest modulus is real and positive; within a
    degenerate cluster eigenvectors are ordered by that pivot index.

    Raises
    ------
    SymmetryError
        If ``h`` deviates from Hermiticity by more than ``tol_herm``.
    """
    h = as_hermitian(h, tol_herm)
    w, v = np.linalg.eigh(h)
    v, pivots = _canonical_phase(v)
    if v.shape[1] > 1:
        scale = max(1.0, float(np.abs(w).max()))
        order = np.arange(len(w))
        start = 0
        for i in range(1, len(w) + 1):
            if i == len(w) or w[i] - w[i - 1] > 1e-12 * scale:
                if i - start > 1:
                    block = order[start:i]
                    order[start:i] = block[np.argsort(pivots[block], kind="stable")]
                start = i
        w, v = w[order], v[:, order]
    return SpectralDecomposition(w, v)


def _decompose(h) -> SpectralDecomposition:
    return h if isinstance(h, SpectralDecomposition) else eigh(h)


def unitary_propagator(h, t: float) -> np.ndarray:
    """``exp(-i H t)``; ``h`` may be a matrix or a precomputed decomposition."""
    dec = _decompose(h)
    if t == 0:
        return np.eye(dec.n, dtype=complex)
    return dec.apply(lambda lam: np.exp(-1j * lam * t))


def stochastic_propagator_kernel(lap, t: float) -> np.ndarray:
    """``exp(-t L)`` for a symmetric generator, with roundoff negatives clipped.

    Entries in ``(-1e-12, 0)`` are set to zero; anything more negative means
    the generator was not a valid Laplacian and raises :class:`PositivityError`.
    """
    if t < 0:
        raise DomainError(f"classical evolution requires t >= 0, got {t}")
    dec = _decompose(lap)
    if t == 0:
        return np.eye(dec.n)
    p = np.real(dec.apply(lambda lam: np.exp(-t * lam)))
    low = p.min()
    if low < -CLIP_WINDOW:
        raise PositivityError(f"propagator has negative entry {low:.3e}; generator is not a valid Laplacian")
    p[p < 0] = 0.0
    return p


def validate_density_matrix(rho, tol_herm: float = TOL_HERM) -> np.ndarray:
    rho = as_hermitian(np.asarray(rho, dtype=complex), tol_herm)
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-12:
        raise DomainError(f"density matrix trace is {tr!r}, expected 1")
    low = np.linalg.eigvalsh(rho).min()
    if low < -1e-10:
        raise PositivityError(f"density matrix has eigenvalue {low:.3e} < 0")
    return rho


def localized_state(n: int, j: int) -> np.ndarray:
    rho = np.zeros((n, n), dtype=complex)
    rho[j, j] = 1.0
    return rho


def write_complex_csv(m, path) -> None:
    """Complex matrix as CSV with interleaved ``re_k, im_k`` column pairs."""
    m = np.asarray(m, dtype=complex)
    header = ",".join(f"re_{k},im_{k}" for k in range(m.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in m:
            fh.write(",".join(f"{z.real:.16e},{z.imag:.16e}" for z in row) + "\n")


def read_complex_csv(path) -> np.ndarray:
    raw = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    return raw[:, 0::2] + 1j * raw[:, 1::2]


def dump_decomposition(dec: SpectralDecomposition, path) -> None:
    with open(path, "w") as fh:
        json.dump(dec.to_dict(), fh)
