"""The map from quantum walk Hamiltonians to classical generators.

For Hermitian ``H`` the classical generator is::

    L[k, j] = (H @ H)[j, j] * delta(j, k) - H[j, k] * H[k, j]

i.e. off-diagonal rates ``-|H[j, k]|**2`` and diagonal escape rates equal to
the on-site energy variance ``sum_{s != j} |H[j, s]|**2``.  The map forgets
on-site energies and hopping phases, so every Laplacian has a whole family
of compatible Hamiltonians; this module samples that family, checks the
defining postulates, and fixes the gauge redundancy in it.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError, SpecificationError, ValidationError
from .graph import Edge, Graph, graph_from_laplacian, validate_laplacian
from .linalg import as_hermitian
from .quantum_walk import HamiltonianSpec, gauge_transform

TWO_PI = 2 * np.pi
POSTULATE_TOL = 1e-12


def correspondence_map(h) -> np.ndarray:
    """Classical generator compatible with the Hamiltonian ``h``.

    The diagonal is accumulated from the off-diagonal moduli rather than
    from ``(H @ H)[j, j] - H[j, j]**2``; the two are equal for Hermitian
    input but the former keeps column sums exact to rounding.
    """
    h = as_hermitian(h)
    rates = (h.real**2 + h.imag**2) if np.iscomplexobj(h) else h**2
    lap = -rates
    lap[np.diag_indices_from(lap)] = 0.0
    lap[np.diag_indices_from(lap)] = -lap.sum(axis=0)
    return lap


@dataclass
class PostulateCheck:
    passed: bool
    violation: float
    applicable: bool = True


@dataclass
class PostulateReport:
    t0: PostulateCheck
    a1: PostulateCheck
    a2: PostulateCheck
    p3: PostulateCheck
    p4: PostulateCheck

    @property
    def all_passed(self) -> bool:
        return all(c.passed or not c.applicable for c in (self.t0, self.a1, self.a2, self.p3, self.p4))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["all_passed"] = self.all_passed
        return d


def _is_unweighted_laplacian(h: np.ndarray, tol: float) -> bool:
    if np.iscomplexobj(h) and np.abs(h.imag).max(initial=0.0) > tol:
        return False
    r = np.real(h)
    if np.abs(r - r.T).max(initial=0.0) > tol:
        return False
    off = r - np.diag(np.diag(r))
    unit = np.isclose(off, -1.0, rtol=0, atol=tol) | np.isclose(off, 0.0, rtol=0, atol=tol)
    if not unit.all():
        return False
    return bool(np.abs(np.diag(r) + off.sum(axis=0)).max(initial=0.0) <= tol)


def verify_postulates(h, lap, tol: float = POSTULATE_TOL) -> PostulateReport:
    """Check a Hamiltonian / generator pair against the five postulates.

    * ``t0`` -- off-diagonal zero patterns of ``h`` and ``lap`` coincide
    * ``a1`` -- the mapped generator has vanishing column sums
    * ``a2`` -- the map fixes ``h`` when ``h`` is an unweighted Laplacian
      (``applicable=False`` otherwise)
    * ``p3`` -- ``lap[j, k] == -|h[j, k]|**2`` off the diagonal
    * ``p4`` -- ``lap[j, j] == sum_{s != j} |h[j, s]|**2``
    """
    h = as_hermitian(h)
    lap = np.asarray(lap)
    if lap.shape != h.shape:
        raise DimensionError(f"shape mismatch: H {h.shape} vs L {lap.shape}")
    lap = np.real(lap).astype(float)
    n = h.shape[0]
    offmask = ~np.eye(n, dtype=bool)

    hz = np.abs(h) > tol
    lz = np.abs(lap) > tol
    mismatch = (hz != lz) & offmask
    t0v = float(np.maximum(np.abs(h), np.abs(lap))[mismatch].max(initial=0.0))
    t0 = PostulateCheck(not mismatch.any(), t0v)

    mapped = correspondence_map(h)
    a1v = float(np.abs(mapped.sum(axis=0)).max(initial=0.0))
    a1 = PostulateCheck(a1v <= tol, a1v)

    if _is_unweighted_laplacian(h, tol):
        a2v = float(np.abs(mapped - np.real(h)).max(initial=0.0))
        a2 = PostulateCheck(a2v <= tol, a2v)
    else:
        a2 = PostulateCheck(True, 0.0, applicable=False)

    mod2 = np.abs(h) ** 2
    p3v = float(np.abs(lap + mod2)[offmask].max(initial=0.0))
    p3 = PostulateCheck(p3v <= tol, p3v)

    escape = (mod2 * offmask).sum(axis=1)
    p4v = float(np.abs(np.diag(lap) - escape).max(initial=0.0))
    p4 = PostulateCheck(p4v <= tol, p4v)
    return PostulateReport(t0, a1, a2, p3, p4)


def sample_compatible_hamiltonians(
    lap,
    count: int,
    seed: int,
    onsite_range: tuple[float, float] = (0.0, 1.0),
    shift_nonnegative: bool = False,
) -> list[HamiltonianSpec]:
    """Draw ``count`` Hamiltonians that all map to ``lap``.

    Hopping moduli are forced to ``sqrt(-lap[j, k])``; phases are uniform on
    ``[0, 2*pi)`` and on-site energies uniform on ``onsite_range``.  Sample
    ``i`` uses its own Philox stream spawned from ``seed``, so it does not
    depend on ``count``.
    """
    if count < 1:
        raise SpecificationError("count must be at least 1")
    lo, hi = onsite_range
    if not hi >= lo:
        raise SpecificationError(f"empty on-site range {onsite_range}")
    g = graph_from_laplacian(lap)
    out = []
    for child in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.Generator(np.random.Philox(child))
        phases = rng.uniform(0.0, TWO_PI, g.n_edges)
        onsite = rng.uniform(lo, hi, g.n)
        if shift_nonnegative and onsite.min() < 0:
            onsite = onsite - onsite.min()
        out.append(HamiltonianSpec(g, tuple(phases), tuple(onsite)))
    return out


@dataclass(frozen=True)
class ParameterCount:
    total_free: int
    effective: int
    n_vertices: int
    n_edges: int

    def to_dict(self) -> dict:
        return asdict(self)


def count_parameters(g: Graph) -> ParameterCount:
    """Free real parameters of the compatible family, and those visible in site probabilities."""
    return ParameterCount(g.n + g.n_edges - 1, g.n_edges, g.n, g.n_edges)


def graph_of(h, tol: float = 0.0) -> Graph:
    """Unweighted support graph of a Hamiltonian."""
    h = np.asarray(h)
    n = h.shape[0]
    iu, ju = np.nonzero(np.triu(np.abs(h) > tol, 1))
    return Graph(n, tuple(Edge(int(u), int(v)) for u, v in zip(iu, ju)))


def spanning_tree(g: Graph) -> list[tuple[int, int]]:
    """BFS forest as ``(parent, child)`` pairs.

    Each component is rooted at its smallest vertex and children are visited
    in index order.
    """
    adj = g.neighbors()
    seen = [False] * g.n
    tree = []
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    tree.append((x, y))
                    queue.append(y)
    return tree


def link_phase(h, src: int, dst: int) -> float:
    """Phase of the hop ``src -> dst`` in the ``-|H| exp(i phi)`` convention."""
    return float(np.angle(-h[dst, src]))


def gauge_fix(h, g: Graph | None = None, tree: list[tuple[int, int]] | None = None):
    """Gauge-equivalent Hamiltonian with real negative hoppings on a spanning tree.

    Parameters
    ----------
    h : (n, n) array
        Hermitian Hamiltonian whose off-diagonal support is ``g``.
    g : Graph, optional
        Defaults to the support of ``h``.
    tree : list of (parent, child), optional
        Spanning forest to fix; defaults to :func:`spanning_tree`.  Pairs
        must be ordered so every parent is reached before its children.

    Returns
    -------
    h_fixed : (n, n) complex array
    alpha : (n,) array
        Vertex phases with ``h_fixed = gauge_transform(h, alpha)``.  Roots
        get phase zero.  Only off-tree edges retain a phase, and that phase
        is the holonomy of the edge's fundamental cycle.
    """
    h = as_hermitian(np.asarray(h, dtype=complex))
    n = h.shape[0]
    if g is None:
        g = graph_of(h)
    elif g.n != n:
        raise DimensionError(f"graph has {g.n} vertices, Hamiltonian has {n}")
    else:
        support = graph_of(h)
        if {(e.u, e.v) for e in support.edges} != {(e.u, e.v) for e in g.edges}:
            raise ValidationError("Hamiltonian support does not match the graph")
    if tree is None:
        tree = spanning_tree(g)
        n_comp = n - len(tree)
        if n_comp > 1:
            warnings.warn(f"graph has {n_comp} components; fixing each separately", stacklevel=2)

    alpha = np.zeros(n)
    for parent, child in tree:
        alpha[child] = alpha[parent] + link_phase(h, parent, child)
    fixed = gauge_transform(h, alpha)
    for parent, child in tree:
        # snap away rounding so a second pass picks alpha == 0 exactly
        fixed[child, parent] = -abs(fixed[child, parent])
        fixed[parent, child] = fixed[child, parent]
    return fixed, alpha


def fundamental_cycles(g: Graph, tree: list[tuple[int, int]] | None = None) -> list[list[int]]:
    """One vertex cycle per off-tree edge ``(u, v)``: ``u -> v -> ... -> u`` through the tree."""
    tree = spanning_tree(g) if tree is None else tree
    parent = {c: p for p, c in tree}
    tree_edges = {tuple(sorted(pc)) for pc in tree}

    def to_root(x):
        path = [x]
        while path[-1] in parent:
            path.append(parent[path[-1]])
        return path

    cycles = []
    for e in g.edges:
        if (e.u, e.v) in tree_edges:
            continue
        pu, pv = to_root(e.u), to_root(e.v)
        common = set(pu) & set(pv)
        lca = next(x for x in pu if x in common)
        down_u = pu[: pu.index(lca) + 1]
        up_v = pv[: pv.index(lca)]
        # u -> v, then v up to the common ancestor, then down to u
        cyc = [e.u] + up_v + down_u[::-1][:-1]
        cycles.append(cyc)
    return cycles


def cycle_holonomy(h, cycle) -> float:
    """Sum of hop phases around a closed vertex sequence, reduced to ``[0, 2*pi)``."""
    total = 0.0
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        total += link_phase(h, a, b)
    return total % TWO_PI


def phase_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)
