"""Undirected simple weighted graphs and their Laplacian generators."""

from __future__ import annotations

import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, SpecificationError, ValidationError

TOL_SYM = 1e-10
TOL_SUM = 1e-10


@dataclass(frozen=True, order=True)
class Edge:
    u: int
    v: int
    w: float = 1.0


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Edges are stored in canonical orientation ``u < v`` and sorted, so two
    graphs with the same edge set compare equal.
    """

    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise SpecificationError(f"vertex count must be a positive integer, got {self.n!r}")
        canon = {}
        for e in self.edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            u, v, w = int(e.u), int(e.v), float(e.w)
            if u == v:
                raise SpecificationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise SpecificationError(f"edge ({u}, {v}) out of range for n={self.n}")
            if not np.isfinite(w) or w <= 0:
                raise SpecificationError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in canon:
                raise SpecificationError(f"duplicate edge {key}")
            canon[key] = w
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(
            self, "edges", tuple(Edge(u, v, w) for (u, v), w in sorted(canon.items()))
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.u, e.v): i for i, e in enumerate(self.edges)}

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        for a in adj:
            a.sort()
        return adj

    def components(self) -> list[list[int]]:
        adj = self.neighbors()
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                x = queue.popleft()
                comp.append(x)
                for y in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    @property
    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [{"u": e.u, "v": e.v, "w": e.w} for e in self.edges]}

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        try:
            n = data["n"]
            edges = [Edge(int(e["u"]), int(e["v"]), float(e.get("w", 1.0))) for e in data.get("edges", [])]
        except (KeyError, TypeError) as exc:
            raise SpecificationError(f"malformed graph record: {exc}") from exc
        return cls(n, tuple(edges))


def from_edges(n: int, pairs: Iterable, weight: float = 1.0) -> Graph:
    """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples."""
    edges = []
    for p in pairs:
        if len(p) == 2:
            edges.append(Edge(p[0], p[1], weight))
        else:
            edges.append(Edge(*p))
    return Graph(n, tuple(edges))


def path_graph(n: int, weight: float = 1.0) -> Graph:
    return from_edges(n, [(i, i + 1) for i in range(n - 1)], weight)


def cycle_graph(n: int, weight: float = 1.0) -> Graph:
    if n < 3:
        raise SpecificationError("a simple cycle needs at least 3 vertices")
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)], weight)


def complete_graph(n: int, weight: float = 1.0) -> Graph:
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], weight)


def star_graph(n_leaves: int, weight: float = 1.0) -> Graph:
    return from_edges(n_leaves + 1, [(0, i) for i in range(1, n_leaves + 1)], weight)


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return from_edges(10, outer + spokes + inner)


def grid_graph(lx: int, ly: int, periodic: bool = False) -> Graph:
    """Square lattice graph, site index ``n + lx*m``."""
    pairs = set()
    for m in range(ly):
        for n in range(lx):
            s = n + lx * m
            if n + 1 < lx or (periodic and lx > 2):
                pairs.add(tuple(sorted((s, (n + 1) % lx + lx * m))))
            if m + 1 < ly or (periodic and ly > 2):
                pairs.add(tuple(sorted((s, n + lx * ((m + 1) % ly)))))
    return from_edges(lx * ly, sorted(pairs))


def laplacian(g: Graph) -> np.ndarray:
    """``L = D - A`` for the weighted graph ``g``."""
    lap = np.zeros((g.n, g.n))
    for e in g.edges:
        lap[e.u, e.v] = lap[e.v, e.u] = -e.w
    lap[np.diag_indices(g.n)] = -lap.sum(axis=0)
    return lap


@dataclass
class ValidityReport:
    """Per-invariant outcome of :func:`validate_laplacian`.

    Violation magnitudes are worst-case absolute values; a passing check has
    violation no larger than its tolerance.
    """

    symmetric: bool
    symmetry_violation: float
    column_sums: bool
    column_sum_violation: float
    sign_pattern: bool
    sign_violation: float
    diagonal_nonnegative: bool
    diagonal_violation: float
    connected: bool
    n_components: int
    tol_sym: float = TOL_SYM
    tol_sum: float = TOL_SUM
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.symmetric and self.column_sums and self.sign_pattern and self.diagonal_nonnegative

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["ok"] = self.ok
        return d


def _as_square(m, name="matrix") -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def validate_laplacian(m, tol_sym: float = TOL_SYM, tol_sum: float = TOL_SUM) -> ValidityReport:
    arr = _as_square(m, "Laplacian")
    if np.iscomplexobj(arr):
        if np.abs(arr.imag).max(initial=0.0) > tol_sym:
            raise ValidationError("Laplacian must be real")
        arr = arr.real
    arr = arr.astype(float)
    n = arr.shape[0]

    sym = float(np.abs(arr - arr.T).max(initial=0.0))
    colsum = float(np.abs(arr.sum(axis=0)).max(initial=0.0))
    off = arr[~np.eye(n, dtype=bool)]
    sign = float(max(off.max(initial=0.0), 0.0))
    diag = float(max(-np.diag(arr).min(initial=0.0), 0.0))

    support = np.abs(arr) > 0
    np.fill_diagonal(support, False)
    comps = _pattern_components(support)
    report = ValidityReport(
        symmetric=sym <= tol_sym,
        symmetry_violation=sym,
        column_sums=colsum <= tol_sum,
        column_sum_violation=colsum,
        sign_pattern=sign == 0.0,
        sign_violation=sign,
        diagonal_nonnegative=diag == 0.0,
        diagonal_violation=diag,
        connected=len(comps) == 1,
        n_components=len(comps),
        tol_sym=tol_sym,
        tol_sum=tol_sum,
    )
    if not report.connected:
        report.warnings.append(f"graph is disconnected ({len(comps)} components)")
    return report


def _pattern_components(support: np.ndarray) -> list[list[int]]:
    sym = np.triu(support | support.T, 1)
    return Graph(support.shape[0], tuple(Edge(j, k) for j, k in zip(*np.nonzero(sym)))).components()


def graph_from_laplacian(m, tol_sym: float = TOL_SYM, tol_sum: float = TOL_SUM) -> Graph:
    report = validate_laplacian(m, tol_sym, tol_sum)
    if not report.ok:
        raise ValidationError("matrix is not a valid Laplacian", report=report)
    arr = np.real(np.asarray(m, dtype=complex)).astype(float)
    n = arr.shape[0]
    edges = []
    for j in range(n):
        for k in range(j + 1, n):
            # symmetric within tolerance; averaging is exact when it is exactly symmetric
            w = -0.5 * (arr[j, k] + arr[k, j])
            if w != 0.0:
                edges.append(Edge(j, k, float(w)))
    return Graph(n, tuple(edges))


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_dict(json.load(fh))


def dump_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_dict(), fh, indent=2)
        fh.write("\n")


def write_matrix_csv(m, path_or_buf, labels: Sequence[str] | None = None) -> None:
    """Real matrix to CSV with a header row of column labels (vertex indices by default)."""
    arr = np.asarray(m, dtype=float)
    labels = labels if labels is not None else [str(i) for i in range(arr.shape[1])]
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    fh = open(path_or_buf, "w") if own else path_or_buf
    try:
        fh.write(",".join(labels) + "\n")
        for row in arr:
            fh.write(",".join(f"{x:.16e}" for x in row) + "\n")
    finally:
        if own:
            fh.close()


def read_matrix_csv(path_or_text) -> np.ndarray:
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        buf = io.StringIO(path_or_text)
        return np.atleast_2d(np.loadtxt(buf, delimiter=",", skiprows=1))
    return np.atleast_2d(np.loadtxt(path_or_text, delimiter=",", skiprows=1))
