"""Continuous-time classical random walks generated by a graph Laplacian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError, ValidationError
from .graph import TOL_SUM, TOL_SYM, validate_laplacian
from .linalg import SpectralDecomposition, eigh, stochastic_propagator_kernel

STOCHASTIC_TOL = 1e-10


@dataclass(frozen=True)
class StochasticPropagator:
    matrix: np.ndarray
    t: float


@dataclass(frozen=True)
class SemigroupReport:
    t1: float
    t2: float
    deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol

    def to_dict(self) -> dict:
        return {"t1": self.t1, "t2": self.t2, "deviation": self.deviation, "tol": self.tol, "passed": self.passed}


class ClassicalWalk:
    """Random walk ``p(t) = exp(-tL) p(0)`` with one cached eigendecomposition.

    The generator is validated once at construction.
    """

    def __init__(self, lap, tol_sym: float = TOL_SYM, tol_sum: float = TOL_SUM):
        report = validate_laplacian(lap, tol_sym, tol_sum)
        if not report.ok:
            raise ValidationError("generator is not a valid Laplacian", report=report)
        self.laplacian = np.asarray(lap, dtype=float)
        self.report = report
        self._dec: SpectralDecomposition | None = None

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]

    @property
    def decomposition(self) -> SpectralDecomposition:
        if self._dec is None:
            self._dec = eigh(self.laplacian)
        return self._dec

    def propagator(self, t: float) -> StochasticPropagator:
        p = stochastic_propagator_kernel(self.decomposition, t)
        rows = np.abs(p.sum(axis=1) - 1).max()
        cols = np.abs(p.sum(axis=0) - 1).max()
        if max(rows, cols) > STOCHASTIC_TOL or p.max() > 1 + STOCHASTIC_TOL:
            raise ConsistencyError(
                f"P({t}) is not bi-stochastic (row defect {rows:.2e}, column defect {cols:.2e})"
            )
        return StochasticPropagator(p, float(t))

    def evolve(self, p0, t: float) -> np.ndarray:
        p0 = check_probability_vector(p0, self.n)
        return self.propagator(t).matrix @ p0

    def series(self, p0, times) -> np.ndarray:
        """Rows ``p(t)`` for each time in ``times``."""
        p0 = check_probability_vector(p0, self.n)
        return np.array([self.propagator(t).matrix @ p0 for t in times])

    def stationary(self) -> np.ndarray:
        """The uniform vector, which symmetric generators always leave fixed."""
        if not self.report.connected:
            raise ValidationError("stationary state is not unique on a disconnected graph")
        u = np.full(self.n, 1.0 / self.n)
        if np.abs(self.laplacian @ u).max() > STOCHASTIC_TOL:
            raise ConsistencyError("uniform vector is not in the kernel of L")
        return u


def check_probability_vector(p, n: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (n is not None and len(p) != n):
        raise ValidationError(f"probability vector must have length {n}, got shape {p.shape}")
    if p.min() < 0 or abs(p.sum() - 1) > 1e-12:
        raise DomainError("probability vector must be non-negative and sum to 1")
    return p


def propagate(lap, t: float) -> StochasticPropagator:
    return ClassicalWalk(lap).propagator(t)


def evolve_probability(lap, p0, t: float) -> np.ndarray:
    return ClassicalWalk(lap).evolve(p0, t)


def check_semigroup(lap, t1: float, t2: float, tol: float = 1e-10) -> SemigroupReport:
    """Max-entry deviation of ``P(t1) P(t2)`` from ``P(t1 + t2)``."""
    walk = ClassicalWalk(lap)
    lhs = walk.propagator(t1).matrix @ walk.propagator(t2).matrix
    dev = float(np.abs(lhs - walk.propagator(t1 + t2).matrix).max())
    return SemigroupReport(float(t1), float(t2), dev, tol)


def log_time_grid(tmin: float = 1e-3, tmax: float = 1e2, num: int = 50) -> np.ndarray:
    return np.logspace(np.log10(tmin), np.log10(tmax), num)
