"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the PASS/FAIL lines.
"""

import time
from contextlib import contextmanager

import networkx as nx
import numpy as np
import pytest

from qcwalk.classical_walk import ClassicalWalk, check_semigroup, log_time_grid
from qcwalk.correspondence import (
    correspondence_map,
    cycle_holonomy,
    fundamental_cycles,
    gauge_fix,
    link_phase,
    phase_distance,
    sample_compatible_hamiltonians,
    spanning_tree,
)
from qcwalk.decoherence import default_step, extract_generator
from qcwalk.graph import (
    complete_graph,
    cycle_graph,
    from_edges,
    grid_graph,
    laplacian,
    path_graph,
    petersen_graph,
)
from qcwalk.lattice import (
    continuum_convergence,
    farey_fluxes,
    hofstadter_spectrum,
    square_dispersion,
)
from qcwalk.quantum_walk import (
    HamiltonianSpec,
    born_semigroup_violation,
    build_hamiltonian,
    gauge_transform,
    time_reversal_asymmetry,
    transition_probabilities,
)

from conftest import TEST_GRAPHS, random_hermitian


@contextmanager
def criterion(number, title, budget):
    """Print one PASS/FAIL line; failures include the runtime budget overrun."""
    start = time.perf_counter()
    detail = {}
    ok = False
    try:
        yield detail
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        extras = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in detail.items())
        print(f"\n[{status}] criterion {number:2d}: {title} ({elapsed:.2f}s / {budget:g}s) {extras}")
    assert elapsed < budget, f"criterion {number} took {elapsed:.1f}s, budget {budget}s"


def test_c01_unweighted_laplacians_are_fixed_points():
    with criterion(1, "unweighted graphs n<=6 map to themselves", 10) as d:
        worst, count = 0.0, 0
        for atlas in nx.graph_atlas_g():
            if not 0 < atlas.number_of_nodes() <= 6 or not nx.is_connected(atlas):
                continue
            lap = laplacian(from_edges(atlas.number_of_nodes(), list(atlas.edges())))
            worst = max(worst, float(np.abs(correspondence_map(lap) - lap).max()))
            count += 1
        d.update(graphs=count, max_err=worst)
        assert count == 143  # connected graphs on 1..6 vertices, up to isomorphism
        assert worst <= 1e-12


def test_c02_compatible_families_round_trip():
    with criterion(2, "sampled Hamiltonians map back to their Laplacian", 10) as d:
        worst = 0.0
        for g in (path_graph(2), complete_graph(3), cycle_graph(4), petersen_graph()):
            lap = laplacian(g)
            for spec in sample_compatible_hamiltonians(lap, 100, seed=2024, onsite_range=(-5, 5)):
                worst = max(worst, float(np.abs(correspondence_map(build_hamiltonian(spec)) - lap).max()))
        d["max_err"] = worst
        assert worst <= 1e-12


def test_c03_column_sums_vanish():
    with criterion(3, "mapped generators have zero column sums", 5) as d:
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 13))
            h = random_hermitian(rng, n, scale=float(rng.uniform(0.1, 10)))
            worst = max(worst, float(np.abs(correspondence_map(h).sum(axis=0)).max()))
        d["max_colsum"] = worst
        assert worst <= 1e-12


def test_c04_born_probabilities_are_not_a_semigroup():
    with criterion(4, "no first-order term, yet semigroup violated", 1) as d:
        rep = born_semigroup_violation(laplacian(path_graph(2)), 0.5, 0.5, dt=1e-5)
        closed = abs(np.sin(1) ** 2 - 2 * np.sin(0.5) ** 2 * np.cos(0.5) ** 2)
        d.update(violation=rep.violation, derivative=rep.max_derivative)
        assert rep.max_derivative <= 1e-8
        assert abs(rep.violation - closed) <= 1e-10
        assert rep.violation == pytest.approx(0.354, abs=1e-3)


def test_c05_gauge_invariance():
    with criterion(5, "gauge transforms leave probabilities and holonomies intact", 10) as d:
        rng = np.random.default_rng(5)
        worst_pi, worst_tree, worst_hol = 0.0, 0.0, 0.0
        for g in (complete_graph(3), grid_graph(3, 3)):
            tree = spanning_tree(g)
            cycles = fundamental_cycles(g, tree)
            for _ in range(100):
                spec = HamiltonianSpec(g, tuple(rng.uniform(0, 2 * np.pi, g.n_edges)),
                                       tuple(rng.uniform(-2, 2, g.n)))
                h = build_hamiltonian(spec)
                alpha = rng.uniform(0, 2 * np.pi, g.n)
                t = float(rng.uniform(0, 5))
                diff = transition_probabilities(gauge_transform(h, alpha), t) - transition_probabilities(h, t)
                worst_pi = max(worst_pi, float(np.abs(diff).max()))
                fixed, _ = gauge_fix(h, g)
                for p, c in tree:
                    worst_tree = max(worst_tree, abs(link_phase(fixed, p, c)))
                for cyc in cycles:
                    worst_hol = max(worst_hol, phase_distance(cycle_holonomy(h, cyc), cycle_holonomy(fixed, cyc)))
        d.update(max_dpi=worst_pi, max_tree_phase=worst_tree, max_dholonomy=worst_hol)
        assert worst_pi <= 1e-10
        assert worst_tree <= 1e-12
        assert worst_hol <= 1e-12


def test_c06_decoherence_extracts_the_mapped_generator():
    with criterion(6, "short-time decoherent populations give the mapped generator", 30) as d:
        rng = np.random.default_rng(6)
        graphs = [complete_graph(4), cycle_graph(5), grid_graph(4, 2), complete_graph(8), path_graph(6)]
        worst, ratios = 0.0, []
        for i in range(20):
            g = graphs[i % len(graphs)]
            spec = sample_compatible_hamiltonians(laplacian(g), 1, seed=600 + i, onsite_range=(-1, 1))[0]
            h = build_hamiltonian(spec)
            target = correspondence_map(h)
            dt = default_step(h)
            est = extract_generator(h, 0.1, dt)
            worst = max(worst, float(np.abs(est - target).max()))
            # order check on the plain central difference
            r1 = np.abs(extract_generator(h, 0.1, dt, richardson=False) - target).max()
            r2 = np.abs(extract_generator(h, 0.1, dt / 2, richardson=False) - target).max()
            ratios.append(r1 / r2)
        d.update(max_residual=worst, min_ratio=min(ratios), max_ratio=max(ratios))
        assert worst <= 1e-6
        assert all(3.5 <= r <= 4.5 for r in ratios)


def test_c07_classical_propagators_are_bistochastic():
    with criterion(7, "exp(-tL) bi-stochastic and a semigroup", 5) as d:
        grid = log_time_grid(1e-3, 1e2, 50)
        worst_sum, lowest, worst_semi = 0.0, np.inf, 0.0
        for g in TEST_GRAPHS.values():
            walk = ClassicalWalk(laplacian(g))
            for t in grid:
                p = walk.propagator(t).matrix
                worst_sum = max(worst_sum, float(np.abs(p.sum(axis=0) - 1).max()), float(np.abs(p.sum(axis=1) - 1).max()))
                lowest = min(lowest, float(p.min()))
            for t1, t2 in ((0.1, 0.3), (1.0, 2.0), (0.01, 10.0)):
                worst_semi = max(worst_semi, check_semigroup(laplacian(g), t1, t2).deviation)
        d.update(max_sum_err=worst_sum, min_entry=lowest, max_semigroup=worst_semi)
        assert worst_sum <= 1e-10 and lowest >= -1e-12 and worst_semi <= 1e-10


def test_c08_chirality_witness():
    with criterion(8, "time-reversal asymmetry needs a cycle phase", 1) as d:
        def k3(phi):
            # uniform phase around 0 -> 1 -> 2 -> 0; canonical edge (0, 2) runs backwards
            return build_hamiltonian(HamiltonianSpec(complete_graph(3), (phi, -phi, phi), (2, 2, 2)))
        chiral = time_reversal_asymmetry(k3(np.pi / 2), 1.0)
        flat = time_reversal_asymmetry(k3(0.0), 1.0)
        d.update(chiral=chiral, flat=flat)
        assert chiral > 1e-3 and flat <= 1e-12


@pytest.mark.slow
def test_c09_hofstadter_structure():
    with criterion(9, "24x24 butterfly bounds, mirror symmetry and B=0 band", 120) as d:
        fluxes = farey_fluxes(24)
        table = hofstadter_spectrum(24, fluxes, 1.0, strict=False, jobs=2)
        ev = table.eigenvalues
        index = {f: i for i, f in enumerate(fluxes)}
        mirror = max(float(np.abs(ev[i] - ev[index[1 - f]]).max()) for f, i in index.items())
        zero = float(np.abs(ev[index[0]] - square_dispersion(24)).max())
        d.update(rows=len(fluxes), lo=float(ev.min()), hi=float(ev.max()), mirror=mirror, zero_field=zero)
        assert ev.min() >= -1e-10 and ev.max() <= 8 + 1e-10
        assert mirror <= 1e-10
        assert zero <= 1e-10


@pytest.mark.slow
def test_c10_continuum_convergence():
    with criterion(10, "free-particle level converges at second order", 30) as d:
        rep = continuum_convergence("free_particle", [16, 32, 64], k_target=1.0)
        d.update(lattice_mismatch=rep.lattice_mismatch, order=rep.order, last_err=rep.errors[-1])
        assert rep.lattice_mismatch <= 1e-10
        assert 1.9 <= rep.order <= 2.1
        assert rep.continuum == pytest.approx(4 * np.pi**2)


def test_c11_quantum_classical_contrast():
    with criterion(11, "perfect transfer on P2 versus classical ceiling 1/2", 1) as d:
        lap = laplacian(path_graph(2))
        quantum = float(transition_probabilities(lap, np.pi / 2)[1, 0])
        walk = ClassicalWalk(lap)
        times = np.concatenate([np.linspace(0, 10, 1001), log_time_grid(1e-3, 1e3, 200)])
        classical = max(float(walk.propagator(t).matrix[1, 0]) for t in times)
        d.update(quantum=quantum, classical_sup=classical)
        assert abs(quantum - 1) <= 1e-12
        assert classical <= 0.5 + 1e-12
