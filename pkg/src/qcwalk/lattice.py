"""Chiral walks on finite square lattices.

Sites ``(n, m)`` with ``0 <= n < Lx``, ``0 <= m < Ly`` are numbered
``n + Lx*m``.  Link phase tables are indexed ``[n, m]`` by the site the link
leaves from: ``fx[n, m]`` sits on ``(n, m) -> (n+1, m)`` and ``fy[n, m]`` on
``(n, m) -> (n, m+1)``.  A hop along a link in its forward direction
carries ``-hop_rate * exp(1j*f)``, so the Hamiltonian reads::

    H[(n+1, m), (n, m)] = -hop_rate * exp(1j * fx[n, m])
    H[(n, m+1), (n, m)] = -hop_rate * exp(1j * fy[n, m])
    H[(n, m), (n, m)]   =  hop_rate * (z + d[n, m])

with ``z = 4`` on a plane and ``z = 2`` on a chain.  Periodic boundaries add
the wrap links ``(Lx-1, m) -> (0, m)`` and ``(n, Ly-1) -> (n, 0)`` with the
same convention.

Units: ``hbar = 1``, with mass and charge absorbed into the continuum
coefficients ``K = lim a**2 * hop_rate``, ``F = lim f / a`` and
``U = lim hop_rate * d``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .correspondence import gauge_fix, link_phase
from .errors import (
    CommensurabilityError,
    EvaluationError,
    GaugePreconditionError,
    InsufficientDataError,
    SpecificationError,
)
from .graph import Edge, Graph
from .quantum_walk import HamiltonianSpec, build_hamiltonian

TWO_PI = 2 * np.pi
QUAD_TOL = 1e-10


def _n_links(size: int, periodic: bool) -> int:
    if size == 1:
        return 0
    if periodic:
        if size == 2:
            raise SpecificationError("periodic wrap on a length-2 axis would duplicate an edge")
        return size
    return size - 1


@dataclass
class LatticeSpec:
    dims: tuple[int, int]
    spacing: float = 1.0
    boundary: str = "open"
    hop_rate: float = 1.0
    fx: np.ndarray | None = None
    fy: np.ndarray | None = None
    d: np.ndarray | None = None

    def __post_init__(self):
        lx, ly = (int(x) for x in self.dims)
        if lx < 1 or ly < 1:
            raise SpecificationError(f"lattice dims must be positive, got {self.dims}")
        self.dims = (lx, ly)
        if self.boundary not in ("open", "periodic"):
            raise SpecificationError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if not self.spacing > 0 or not self.hop_rate > 0:
            raise SpecificationError("spacing and hop_rate must be positive")
        shapes = {"fx": self.fx_shape, "fy": self.fy_shape, "d": (lx, ly)}
        for name, shape in shapes.items():
            table = getattr(self, name)
            table = np.zeros(shape) if table is None else np.asarray(table, dtype=float)
            if table.size == 0 and math.prod(shape) == 0:
                table = table.reshape(shape)
            if table.shape != shape:
                raise SpecificationError(f"{name} table has shape {table.shape}, expected {shape}")
            if not np.isfinite(table).all():
                raise SpecificationError(f"{name} table has non-finite entries")
            setattr(self, name, table)

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def fx_shape(self) -> tuple[int, int]:
        return (_n_links(self.dims[0], self.periodic), self.dims[1])

    @property
    def fy_shape(self) -> tuple[int, int]:
        return (self.dims[0], _n_links(self.dims[1], self.periodic))

    @property
    def n_sites(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def coordination(self) -> int:
        return 2 * (self.dims[0] > 1) + 2 * (self.dims[1] > 1)

    def site(self, n: int, m: int) -> int:
        return n + self.dims[0] * m

    def links(self):
        """Yield ``(axis, n, m, src, dst)`` for every link in table order."""
        lx, ly = self.dims
        for n in range(self.fx_shape[0]):
            for m in range(ly):
                yield "x", n, m, self.site(n, m), self.site((n + 1) % lx, m)
        for n in range(lx):
            for m in range(self.fy_shape[1]):
                yield "y", n, m, self.site(n, m), self.site(n, (m + 1) % ly)

    def with_fields(self, fx=None, fy=None, d=None) -> "LatticeSpec":
        return LatticeSpec(self.dims, self.spacing, self.boundary, self.hop_rate,
                           self.fx if fx is None else fx,
                           self.fy if fy is None else fy,
                           self.d if d is None else d)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "spacing": self.spacing,
            "boundary": self.boundary,
            "hop_rate": self.hop_rate,
            "fx": self.fx.tolist(),
            "fy": self.fy.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeSpec":
        try:
            spec = cls(tuple(data["dims"]), float(data.get("spacing", 1.0)), data.get("boundary", "open"),
                       float(data.get("hop_rate", 1.0)), data.get("fx"), data.get("fy"), data.get("d"))
        except KeyError as exc:
            raise SpecificationError(f"lattice spec missing {exc}") from exc
        if "landau" in data:
            preset = data["landau"]
            fx, fy = peierls_phases(landau_potential(float(preset["B"])), float(preset.get("q", 1.0)), spec)
            spec = spec.with_fields(fx=fx, fy=fy)
        return spec


def load_lattice_spec(path) -> LatticeSpec:
    with open(path) as fh:
        return LatticeSpec.from_dict(json.load(fh))


def _link_table(spec: LatticeSpec, axis: str) -> np.ndarray:
    return spec.fx if axis == "x" else spec.fy


def build_lattice_hamiltonian(spec: LatticeSpec) -> tuple[HamiltonianSpec, Graph]:
    """The lattice walk as a :class:`HamiltonianSpec` on the unit-weight lattice graph."""
    edges, phases = [], []
    for axis, n, m, src, dst in spec.links():
        f = _link_table(spec, axis)[n, m]
        if src < dst:
            edges.append((src, dst, f))
        else:
            edges.append((dst, src, -f))
    edges.sort()
    g = Graph(spec.n_sites, tuple(Edge(u, v) for u, v, _ in edges))
    phases = tuple(f for _, _, f in edges)
    onsite = spec.hop_rate * (spec.coordination + spec.d.flatten(order="F"))
    return HamiltonianSpec(g, phases, tuple(onsite), hop_scale=spec.hop_rate), g


def lattice_matrix(spec: LatticeSpec) -> np.ndarray:
    """Dense Hamiltonian assembled straight from the tables."""
    lx, ly = spec.dims
    n_sites = spec.n_sites
    h = np.zeros((n_sites, n_sites), dtype=complex)
    nn, mm = np.meshgrid(np.arange(lx), np.arange(ly), indexing="ij")
    for axis, table in (("x", spec.fx), ("y", spec.fy)):
        if table.size == 0:
            continue
        k, l = table.shape
        n, m = nn[:k, :l], mm[:k, :l]
        src = n + lx * m
        dst = ((n + 1) % lx + lx * m) if axis == "x" else (n + lx * ((m + 1) % ly))
        hop = -spec.hop_rate * np.exp(1j * table)
        h[dst.ravel(), src.ravel()] = hop.ravel()
        h[src.ravel(), dst.ravel()] = hop.conj().ravel()
    h[np.diag_indices(n_sites)] = spec.hop_rate * (spec.coordination + spec.d.flatten(order="F"))
    return h


def landau_potential(b: float) -> Callable:
    """``A(x, y) = (0, b*x)``: uniform field ``b`` with no x component."""
    return lambda x, y: (0.0, b * x)


def peierls_phases(vector_potential: Callable, charge: float, spec: LatticeSpec):
    """Link phases ``f = q * integral of A . dr`` along each straight link.

    Site ``(n, m)`` sits at ``(n*a, m*a)``; a wrap link is integrated along
    its unwrapped continuation.  Quadrature runs to absolute tolerance
    ``1e-10``.
    """
    a = spec.spacing

    def component(x, y, idx):
        val = vector_potential(x, y)[idx]
        if not np.isfinite(val):
            raise EvaluationError(f"vector potential is not finite at ({x}, {y})")
        return float(val)

    def line(x0, y0, dx, dy, idx):
        val, _ = integrate.quad(lambda s: component(x0 + s * dx, y0 + s * dy, idx),
                                0.0, 1.0, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        return charge * val * (dx if idx == 0 else dy)

    fx = np.zeros(spec.fx_shape)
    fy = np.zeros(spec.fy_shape)
    for n in range(fx.shape[0]):
        for m in range(fx.shape[1]):
            fx[n, m] = line(n * a, m * a, a, 0.0, 0)
    for n in range(fy.shape[0]):
        for m in range(fy.shape[1]):
            fy[n, m] = line(n * a, m * a, 0.0, a, 1)
    return fx, fy


def discrete_magnetic_field(fy, spec: LatticeSpec) -> np.ndarray:
    """``B(n, m) = (fy[n+1, m] - fy[n-1, m]) / (2a)`` in the ``fx = 0`` gauge.

    Open boundaries use one-sided differences at the first and last column.
    On periodic lattices the wrapped difference is shifted by the multiple
    of ``2*pi`` closest to the local one-sided gradient.
    """
    if np.any(spec.fx != 0):
        raise GaugePreconditionError("fx must vanish; transform to the fx = 0 gauge first")
    fy = np.asarray(fy, dtype=float)
    lx = fy.shape[0]
    if lx < 2:
        raise SpecificationError("need at least two columns to differentiate along x")
    a = spec.spacing
    diff = np.empty_like(fy)
    diff[1:-1] = fy[2:] - fy[:-2]
    diff[0] = 2 * (fy[1] - fy[0])
    diff[-1] = 2 * (fy[-1] - fy[-2])
    if spec.periodic:
        wrapped_first = fy[1] - fy[-1]
        wrapped_last = fy[0] - fy[-2]
        diff[0] = wrapped_first + TWO_PI * np.round((diff[0] - wrapped_first) / TWO_PI)
        diff[-1] = wrapped_last + TWO_PI * np.round((diff[-1] - wrapped_last) / TWO_PI)
    return diff / (2 * a)


def plaquette_fluxes(spec: LatticeSpec) -> np.ndarray:
    """Phase circulation counter-clockwise around each unit plaquette ``(n, m)``."""
    lx, ly = spec.dims
    px, py = spec.fx_shape[0], spec.fy_shape[1]
    if ly < 2 or lx < 2:
        return np.zeros((0, 0))
    nx_, ny_ = (px, py) if spec.periodic else (lx - 1, ly - 1)
    out = np.empty((nx_, ny_))
    for n in range(nx_):
        for m in range(ny_):
            out[n, m] = (spec.fx[n, m] + spec.fy[(n + 1) % lx, m]
                         - spec.fx[n, (m + 1) % ly] - spec.fy[n, m])
    return out


def comb_tree(spec: LatticeSpec) -> list[tuple[int, int]]:
    """Spanning tree of all non-wrap x links plus the y links of column 0."""
    lx, ly = spec.dims
    tree = []
    for m in range(ly):
        if m > 0:
            tree.append((spec.site(0, m - 1), spec.site(0, m)))
        for n in range(lx - 1):
            tree.append((spec.site(n, m), spec.site(n + 1, m)))
    return tree


def axial_gauge(spec: LatticeSpec) -> tuple[LatticeSpec, np.ndarray]:
    """Gauge-equivalent lattice with ``fx = 0`` on every non-wrap link.

    Returns the new spec and the vertex phases used.
    """
    ham, g = build_lattice_hamiltonian(spec)
    fixed, alpha = gauge_fix(build_hamiltonian(ham), g, tree=comb_tree(spec))
    fx = np.zeros(spec.fx_shape)
    fy = np.zeros(spec.fy_shape)
    for axis, n, m, src, dst in spec.links():
        table = fx if axis == "x" else fy
        table[n, m] = link_phase(fixed, src, dst)
    return spec.with_fields(fx=fx, fy=fy), alpha


def farey_fluxes(qmax: int) -> list[Fraction]:
    """All reduced fractions ``p/q`` in ``[0, 1]`` with ``q <= qmax``, ascending."""
    return sorted({Fraction(p, q) for q in range(1, qmax + 1) for p in range(0, q + 1)})


def hofstadter_lattice(size: int, flux: Fraction, hop_rate: float = 1.0) -> LatticeSpec:
    """Periodic ``size x size`` lattice with ``fy[n, m] = 2*pi*flux*n`` and ``fx = 0``."""
    b = TWO_PI * float(flux)
    fy = np.repeat((b * np.arange(size))[:, None], size, axis=1)
    return LatticeSpec((size, size), 1.0, "periodic", hop_rate, fy=fy)


def _spectrum_row(args):
    size, flux, hop_rate = args
    return np.linalg.eigvalsh(lattice_matrix(hofstadter_lattice(size, flux, hop_rate)))


@dataclass
class SpectrumTable:
    fluxes: list[Fraction]
    fields: np.ndarray
    eigenvalues: np.ndarray
    incommensurate: list[Fraction] = field(default_factory=list)

    def write_csv(self, path) -> None:
        n = self.eigenvalues.shape[1]
        with open(path, "w") as fh:
            fh.write(",".join(["B"] + [f"lambda_{i + 1}" for i in range(n)]) + "\n")
            for b, row in zip(self.fields, self.eigenvalues):
                fh.write(",".join(f"{x:.16e}" for x in [b, *row]) + "\n")


def hofstadter_spectrum(
    size: int,
    fluxes: Sequence,
    hop_rate: float = 1.0,
    strict: bool = True,
    jobs: int = 1,
) -> SpectrumTable:
    """Sorted spectra of the Landau-gauge torus for each flux ``p/q`` per plaquette.

    With ``strict=True`` every ``q`` must divide ``size``; otherwise the x
    wrap carries a seam and the offending fluxes are listed in
    ``incommensurate``.  ``jobs > 1`` spreads diagonalizations over worker
    processes; rows come back in input order either way.
    """
    fluxes = [Fraction(f) for f in fluxes]
    bad = [f for f in fluxes if size % f.denominator]
    if strict and bad:
        q = bad[0].denominator
        smallest = -(-size // q) * q
        raise CommensurabilityError(
            f"flux {bad[0]} needs q={q} to divide the lattice size {size}; smallest valid size is {smallest}",
            smallest,
        )
    work = [(size, f, hop_rate) for f in fluxes]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_spectrum_row, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        rows = [_spectrum_row(w) for w in work]
    fields = np.array([TWO_PI * float(f) for f in fluxes])
    return SpectrumTable(fluxes, fields, np.array(rows), bad)


def square_dispersion(size: int, hop_rate: float = 1.0) -> np.ndarray:
    k = TWO_PI * np.arange(size) / size
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return np.sort((hop_rate * (4 - 2 * np.cos(kx) - 2 * np.cos(ky))).ravel())


@dataclass
class ConvergenceReport:
    case: str
    sizes: list[int]
    eigenvalues: list[float]
    continuum: float
    errors: list[float]
    order: float
    lattice_reference: list[float] | None = None
    cauchy_differences: list[float] | None = None
    cauchy_order: float | None = None

    @property
    def lattice_mismatch(self) -> float | None:
        if self.lattice_reference is None:
            return None
        return float(np.max(np.abs(np.subtract(self.eigenvalues, self.lattice_reference))))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["lattice_mismatch"] = self.lattice_mismatch
        return d


def uniform_field_torus(size: int, flux_quanta: int, hop_rate: float, spacing: float) -> LatticeSpec:
    """Periodic lattice threaded by ``flux_quanta`` total flux quanta, uniformly.

    Landau gauge ``fy[n, m] = n*phi`` plus a twist ``fx[L-1, m] = -m*L*phi`` on
    the x wrap so the seam plaquettes carry the same ``phi`` as the bulk.
    """
    phi = TWO_PI * flux_quanta / size**2
    n = np.arange(size)
    fy = np.repeat((phi * n)[:, None], size, axis=1)
    fx = np.zeros((size, size))
    fx[size - 1, :] = -phi * size * n
    return LatticeSpec((size, size), spacing, "periodic", hop_rate, fx=fx, fy=fy)


def _fit_order(sizes, errors) -> float:
    slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
    return float(-slope)


def continuum_convergence(case: str, sizes: Sequence[int], k_target: float = 1.0,
                          flux_quanta: int = 1) -> ConvergenceReport:
    """Lattice eigenvalues on the unit torus with ``hop_rate = K / a**2``, ``a = 1/n``.

    ``free_particle`` tracks the lowest non-zero level against the lattice
    closed form ``2 K n**2 (1 - cos(2 pi / n))`` and the continuum ``4 pi**2 K``.
    ``uniform_field`` tracks the ground level against the lowest Landau level
    ``K * B`` with ``B = 2 pi * flux_quanta``.  The order is fitted on the
    three largest sizes.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise InsufficientDataError("order fitting needs at least three sizes")
    if sorted(sizes) != sizes:
        raise SpecificationError("sizes must be ascending")
    values, reference = [], []
    for n in sizes:
        a = 1.0 / n
        hop = k_target / a**2
        if case == "free_particle":
            spec = LatticeSpec((n, n), a, "periodic", hop)
            lam = np.linalg.eigvalsh(lattice_matrix(spec).real)
            cut = 1e-8 * np.abs(lam).max()
            values.append(float(lam[lam > cut][0]))
            reference.append(2 * k_target * n**2 * (1 - np.cos(TWO_PI / n)))
        elif case == "uniform_field":
            spec = uniform_field_torus(n, flux_quanta, hop, a)
            values.append(float(np.linalg.eigvalsh(lattice_matrix(spec))[0]))
        else:
            raise SpecificationError(f"unknown convergence case {case!r}")
    if case == "free_particle":
        continuum = k_target * TWO_PI**2
    else:
        continuum = k_target * TWO_PI * flux_quanta
    errors = [abs(v - continuum) for v in values]
    tail = slice(-3, None)
    order = _fit_order(sizes[tail], errors[tail])
    cauchy = [abs(values[i + 1] - values[i]) for i in range(len(values) - 1)]
    cauchy_order = None
    if len(cauchy) >= 2 and cauchy[-1] > 0:
        cauchy_order = float(np.log(cauchy[-2] / cauchy[-1]) / np.log(sizes[-1] / sizes[-2]))
    return ConvergenceReport(case, sizes, values, continuum, errors, order,
                             reference if case == "free_particle" else None, cauchy, cauchy_order)
