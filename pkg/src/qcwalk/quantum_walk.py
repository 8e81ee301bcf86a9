"""Chiral continuous-time quantum walks.

Hopping convention: for a canonical edge ``u < v`` with weight ``w`` and
phase ``phi``::

    H[v, u] = -hop_scale * sqrt(w) * exp(1j * phi)
    H[u, v] = conj(H[v, u])

so all-zero phases with the default on-site energies give back the graph
Laplacian (times ``hop_scale**2``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SpecificationError
from .graph import Edge, Graph
from .linalg import SpectralDecomposition, as_hermitian, eigh, unitary_propagator

TWO_PI = 2 * np.pi
FD_STEP = 1e-5


@dataclass(frozen=True)
class HamiltonianSpec:
    """A point in the family of walks on ``graph``.

    ``edge_phases`` follows ``graph.edges`` order; ``onsite=None`` selects
    the Laplacian diagonal.
    """

    graph: Graph
    edge_phases: tuple[float, ...] | None = None
    onsite: tuple[float, ...] | None = None
    hop_scale: float = 1.0

    def __post_init__(self):
        phases = self.edge_phases
        if phases is None:
            phases = (0.0,) * self.graph.n_edges
        if len(phases) != self.graph.n_edges:
            raise SpecificationError(f"got {len(phases)} phases for {self.graph.n_edges} edges")
        object.__setattr__(self, "edge_phases", tuple(float(p) % TWO_PI for p in phases))
        if self.onsite is not None:
            if len(self.onsite) != self.graph.n:
                raise SpecificationError(f"got {len(self.onsite)} on-site energies for {self.graph.n} vertices")
            object.__setattr__(self, "onsite", tuple(float(d) for d in self.onsite))
        if not self.hop_scale > 0:
            raise SpecificationError("hop_scale must be positive")

    def hopping_moduli(self) -> np.ndarray:
        return self.hop_scale * np.sqrt([e.w for e in self.graph.edges])

    def default_onsite(self) -> np.ndarray:
        d = np.zeros(self.graph.n)
        for e in self.graph.edges:
            d[e.u] += self.hop_scale**2 * e.w
            d[e.v] += self.hop_scale**2 * e.w
        return d

    def to_dict(self) -> dict:
        onsite = self.onsite if self.onsite is not None else tuple(self.default_onsite())
        return {
            "graph": self.graph.to_dict(),
            "phases": [{"u": e.u, "v": e.v, "phi": p} for e, p in zip(self.graph.edges, self.edge_phases)],
            "onsite": list(onsite),
            "hop_scale": self.hop_scale,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HamiltonianSpec":
        g = Graph.from_dict(data["graph"])
        index = g.edge_index()
        phases = [0.0] * g.n_edges
        for rec in data.get("phases", []):
            u, v, phi = int(rec["u"]), int(rec["v"]), float(rec["phi"])
            if u > v:
                # reversed orientation carries the conjugate phase
                u, v, phi = v, u, -phi
            if (u, v) not in index:
                raise SpecificationError(f"phase given for non-edge ({u}, {v})")
            phases[index[(u, v)]] = phi
        onsite = data.get("onsite")
        return cls(g, tuple(phases), tuple(onsite) if onsite is not None else None,
                   float(data.get("hop_scale", 1.0)))


def build_hamiltonian(spec: HamiltonianSpec) -> np.ndarray:
    g = spec.graph
    h = np.zeros((g.n, g.n), dtype=complex)
    mods = spec.hopping_moduli()
    for e, r, phi in zip(g.edges, mods, spec.edge_phases):
        h[e.v, e.u] = -r * np.exp(1j * phi)
        h[e.u, e.v] = np.conj(h[e.v, e.u])
    onsite = spec.onsite if spec.onsite is not None else spec.default_onsite()
    h[np.diag_indices(g.n)] = onsite
    return h


def spec_from_hamiltonian(h, tol: float = 0.0) -> HamiltonianSpec:
    """Inverse of :func:`build_hamiltonian` with ``hop_scale = 1``.

    Entries with modulus ``<= tol`` are treated as absent.
    """
    h = as_hermitian(h)
    n = h.shape[0]
    edges, phases = [], []
    for u in range(n):
        for v in range(u + 1, n):
            z = h[v, u]
            if abs(z) > tol:
                edges.append(Edge(u, v, float(abs(z)) ** 2))
                phases.append(float(np.angle(-z)) % TWO_PI)
    g = Graph(n, tuple(edges))
    # Graph sorts edges; ours are generated in sorted order already
    return HamiltonianSpec(g, tuple(phases), tuple(np.real(np.diag(h))))


def load_hamiltonian_spec(path) -> HamiltonianSpec:
    with open(path) as fh:
        return HamiltonianSpec.from_dict(json.load(fh))


def dump_hamiltonian_spec(spec: HamiltonianSpec, path, extra: dict | None = None) -> None:
    data = spec.to_dict()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def _decompose(h) -> SpectralDecomposition:
    return h if isinstance(h, SpectralDecomposition) else eigh(h)


def transition_probabilities(h, t: float) -> np.ndarray:
    """Born-rule matrix ``pi[k, j] = |<k| exp(-iHt) |j>|**2``.

    ``h`` may be a Hermitian matrix or a cached :class:`SpectralDecomposition`.
    """
    u = unitary_propagator(_decompose(h), t)
    return u.real**2 + u.imag**2


def transition_series(h, times) -> np.ndarray:
    """Stack of ``pi(t)`` matrices, one eigendecomposition for the whole grid."""
    dec = _decompose(h)
    return np.array([transition_probabilities(dec, t) for t in times])


def gauge_transform(h, alpha) -> np.ndarray:
    """Conjugate by ``U = diag(exp(i*alpha))``: returns ``U^dagger H U``.

    Entry-wise ``H[j, k] -> exp(i*(alpha[k] - alpha[j])) * H[j, k]``.
    """
    h = as_hermitian(h)
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (h.shape[0],):
        raise SpecificationError(f"need {h.shape[0]} gauge phases, got shape {alpha.shape}")
    rot = np.exp(1j * alpha)
    return rot.conj()[:, None] * h * rot[None, :]


def time_reversal_asymmetry(h, t: float) -> float:
    """``max |pi_kj(t) - pi_jk(t)|``, equal to the ``t -> -t`` asymmetry."""
    pi = transition_probabilities(h, t)
    return float(np.abs(pi - pi.T).max(initial=0.0))


@dataclass
class ViolationReport:
    t1: float
    t2: float
    violation: float
    derivative: np.ndarray
    dt: float

    @property
    def max_derivative(self) -> float:
        return float(np.abs(self.derivative).max())

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "t2": self.t2,
            "violation": self.violation,
            "max_derivative_at_0": self.max_derivative,
            "derivative_at_0": self.derivative.tolist(),
            "dt": self.dt,
        }


def born_semigroup_violation(h, t1: float, t2: float, dt: float = FD_STEP) -> ViolationReport:
    """How far Born-rule probabilities are from a classical semigroup.

    Reports ``max |Pi(t1 + t2) - Pi(t1) Pi(t2)|`` and the central-difference
    slope of ``Pi`` at ``t = 0``, which a classical generator would need to
    be non-zero.
    """
    dec = _decompose(h)
    pi1 = transition_probabilities(dec, t1)
    pi2 = transition_probabilities(dec, t2)
    pi12 = transition_probabilities(dec, t1 + t2)
    violation = float(np.abs(pi12 - pi1 @ pi2).max())
    deriv = (transition_probabilities(dec, dt) - transition_probabilities(dec, -dt)) / (2 * dt)
    return ViolationReport(float(t1), float(t2), violation, deriv, dt)


def write_transition_csv(times, series, path) -> None:
    """Rows ``t, pi_0_0, pi_1_0, ...`` with each matrix flattened column-major."""
    series = np.asarray(series)
    n = series.shape[1]
    labels = [f"pi_{k}_{j}" for j in range(n) for k in range(n)]
    with open(path, "w") as fh:
        fh.write(",".join(["t"] + labels) + "\n")
        for t, pi in zip(times, series):
            vals = pi.flatten(order="F")
            fh.write(",".join(f"{x:.16e}" for x in [t, *vals]) + "\n")
