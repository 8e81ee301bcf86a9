"""Intrinsic decoherence in the energy eigenbasis.

The master equation ``drho/dt = -i[H, rho] - (gamma/2) [H, [H, rho]]`` is
diagonal in the eigenbasis of ``H``: the coherence between levels ``a`` and
``b`` evolves as ``exp(-i w t - (gamma/2) w**2 t)`` with ``w = E_a - E_b``.
Populations of localized states then pick up a first-order term in ``t``
that is exactly ``-gamma * correspondence_map(H)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExtractionError, DomainError
from .linalg import SpectralDecomposition, as_hermitian, eigh, validate_density_matrix


@dataclass(frozen=True)
class DecoherenceParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"decoherence rate must be non-negative, got {self.gamma}")


def _params(p) -> DecoherenceParams:
    return p if isinstance(p, DecoherenceParams) else DecoherenceParams(float(p))


class IntrinsicDecoherence:
    """Closed-form solver for one Hamiltonian and rate."""

    def __init__(self, h, params):
        self.h = as_hermitian(np.asarray(h, dtype=complex))
        self.params = _params(params)
        self.dec: SpectralDecomposition = eigh(self.h)
        e = self.dec.eigenvalues
        self._gap = e[:, None] - e[None, :]
        v = self.dec.eigenvectors
        # amp[k, a, b] = V[k, a] * conj(V[k, b])
        self._amp = v[:, :, None] * v.conj()[:, None, :]

    @property
    def n(self) -> int:
        return self.dec.n

    def _factor(self, t: float) -> np.ndarray:
        w = self._gap
        return np.exp(-1j * w * t - 0.5 * self.params.gamma * w**2 * t)

    def to_eigenbasis(self, rho) -> np.ndarray:
        v = self.dec.eigenvectors
        return v.conj().T @ rho @ v

    def evolve(self, rho0, t: float) -> np.ndarray:
        if t < 0:
            raise DomainError(f"decoherent evolution is defined for t >= 0, got {t}")
        rho0 = validate_density_matrix(rho0)
        v = self.dec.eigenvectors
        rho = v @ (self.to_eigenbasis(rho0) * self._factor(t)) @ v.conj().T
        return 0.5 * (rho + rho.conj().T)

    def population_matrix(self, t: float) -> np.ndarray:
        """``P[k, j]``: population of site ``k`` at ``t`` starting from site ``j``.

        Defined for negative ``t`` as the analytic continuation of the
        closed form, which the finite-difference derivative needs.
        """
        f = self._factor(t)
        p = np.einsum("kab,ab,jab->kj", self._amp, f, self._amp.conj(), optimize=True)
        return p.real


def evolve_density(h, rho0, params, t: float) -> np.ndarray:
    return IntrinsicDecoherence(h, params).evolve(rho0, t)


def default_step(h) -> float:
    norm = float(np.abs(np.asarray(h)).max(initial=0.0))
    return 1e-3 / norm if norm > 0 else 1e-3


def extract_generator(h, params, dt: float | None = None, richardson: bool = True) -> np.ndarray:
    """Estimate the classical generator from short-time populations.

    ``L[k, j] ~ -(1/gamma) d<k|rho_j(t)|k>/dt`` at ``t = 0`` with
    ``rho_j(0) = |j><j|``.  The slope is a central difference with step
    ``dt``; with ``richardson=True`` the steps ``dt`` and ``dt/2`` are
    combined to cancel the ``O(dt**2)`` term.
    """
    params = _params(params)
    if params.gamma == 0:
        raise DegenerateExtractionError("gamma = 0 leaves no first-order classical term to extract")
    solver = IntrinsicDecoherence(h, params)
    if dt is None:
        dt = default_step(solver.h)
    norm = float(np.abs(solver.h).max(initial=0.0))
    if not dt > 0 or (norm > 0 and dt > 0.1 / norm):
        raise DomainError(f"step {dt} outside (0, 0.1/|H|_max]")

    def slope(step):
        return (solver.population_matrix(step) - solver.population_matrix(-step)) / (2 * step)

    d = slope(dt)
    if richardson:
        d = (4 * slope(dt / 2) - d) / 3
    return -d / params.gamma
