"""Command-line entry point.

Usage: ``qcwalk GROUP ACTION [options]``.  Every run writes its artifacts and
a ``manifest.json`` into ``--out``.  Exit status is 0 on success, 2 on
rejected input or usage errors and 1 on internal errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classical_walk import ClassicalWalk, check_semigroup
from .config import DEFAULTS, load_config, merge_flags
from .correspondence import (
    correspondence_map,
    count_parameters,
    cycle_holonomy,
    fundamental_cycles,
    gauge_fix,
    graph_of,
    sample_compatible_hamiltonians,
    verify_postulates,
)
from .decoherence import DecoherenceParams, IntrinsicDecoherence, default_step, extract_generator
from .errors import ValidationError
from .graph import (
    complete_graph,
    cycle_graph,
    dump_graph,
    graph_from_laplacian,
    grid_graph,
    laplacian,
    load_graph,
    path_graph,
    petersen_graph,
    read_matrix_csv,
    star_graph,
    validate_laplacian,
    write_matrix_csv,
)
from .lattice import (
    build_lattice_hamiltonian,
    continuum_convergence,
    discrete_magnetic_field,
    farey_fluxes,
    hofstadter_spectrum,
    landau_potential,
    load_lattice_spec,
    peierls_phases,
)
from .linalg import localized_state
from .quantum_walk import (
    born_semigroup_violation,
    build_hamiltonian,
    dump_hamiltonian_spec,
    load_hamiltonian_spec,
    spec_from_hamiltonian,
    time_reversal_asymmetry,
    transition_series,
    write_transition_csv,
)

INPUT_FLAGS = ("hamiltonian", "graph", "laplacian", "spec", "config")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Run:
    """Per-invocation state: output directory, merged config, written files."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        self.out = Path(args.out)
        self.dry_run = args.dry_run
        self.outputs: list[str] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs.append(name)
        return self.out / name

    def write_json(self, name: str, data) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")

    def write_matrix(self, name: str, m) -> None:
        if self.args.format == "json":
            self.write_json(f"{name}.json", np.asarray(m).tolist())
        else:
            write_matrix_csv(m, self.path(f"{name}.csv"))


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return str(obj)


def _time_grid(args, cfg):
    if getattr(args, "times", None):
        return np.array(args.times, dtype=float)
    lo = args.tmin if args.tmin is not None else cfg["tmin"]
    hi = args.tmax if args.tmax is not None else cfg["tmax"]
    num = args.num if args.num is not None else cfg["num_times"]
    return np.logspace(np.log10(lo), np.log10(hi), num)


def _load_laplacian(args, cfg):
    if getattr(args, "laplacian", None):
        lap = read_matrix_csv(args.laplacian)
        report = validate_laplacian(lap, cfg["tol_sym"], cfg["tol_sum"])
        if not report.ok:
            raise ValidationError(f"{args.laplacian} is not a valid Laplacian", report=report)
        return lap
    if getattr(args, "graph", None):
        return laplacian(load_graph(args.graph))
    raise ValidationError("need --graph or --laplacian")


def _load_h(args):
    spec = load_hamiltonian_spec(args.hamiltonian)
    return spec, build_hamiltonian(spec)


# -- graph -----------------------------------------------------------------

def cmd_graph_build(run: Run):
    a = run.args
    fam = {
        "path": lambda: path_graph(a.n, a.weight),
        "cycle": lambda: cycle_graph(a.n, a.weight),
        "complete": lambda: complete_graph(a.n, a.weight),
        "star": lambda: star_graph(a.n - 1, a.weight),
        "petersen": petersen_graph,
        "grid": lambda: grid_graph(a.n, a.ly or a.n, a.periodic),
    }
    g = fam[a.family]()
    if run.dry_run:
        return
    dump_graph(g, run.path("graph.json"))
    run.write_matrix("laplacian", laplacian(g))


def cmd_graph_validate(run: Run):
    lap = read_matrix_csv(run.args.laplacian)
    report = validate_laplacian(lap, run.cfg["tol_sym"], run.cfg["tol_sum"])
    if run.dry_run:
        return
    run.write_json("validity.json", report.to_dict())
    print(json.dumps(report.to_dict(), default=_json_default))
    if not report.ok:
        raise ValidationError("Laplacian failed validation", report=report)


def cmd_graph_convert(run: Run):
    a = run.args
    if a.graph:
        g = load_graph(a.graph)
        if not run.dry_run:
            run.write_matrix("laplacian", laplacian(g))
    elif a.laplacian:
        g = graph_from_laplacian(read_matrix_csv(a.laplacian), run.cfg["tol_sym"], run.cfg["tol_sum"])
        if not run.dry_run:
            dump_graph(g, run.path("graph.json"))
    else:
        raise ValidationError("need --graph or --laplacian")


# -- classical -------------------------------------------------------------

def cmd_classical_evolve(run: Run):
    walk = ClassicalWalk(_load_laplacian(run.args, run.cfg), run.cfg["tol_sym"], run.cfg["tol_sum"])
    times = _time_grid(run.args, run.cfg)
    p0 = np.zeros(walk.n)
    p0[run.args.source] = 1.0
    if run.dry_run:
        return
    series = walk.series(p0, times)
    write_matrix_csv(np.column_stack([times, series]), run.path("probabilities.csv"),
                     ["t"] + [f"p_{k}" for k in range(walk.n)])


def cmd_classical_semigroup(run: Run):
    lap = _load_laplacian(run.args, run.cfg)
    if run.dry_run:
        return
    report = check_semigroup(lap, run.args.t1, run.args.t2, run.cfg["tol_semigroup"])
    run.write_json("semigroup.json", report.to_dict())
    print(json.dumps(report.to_dict()))


# -- quantum ---------------------------------------------------------------

def cmd_quantum_evolve(run: Run):
    _, h = _load_h(run.args)
    times = _time_grid(run.args, run.cfg)
    if run.dry_run:
        return
    write_transition_csv(times, transition_series(h, times), run.path("transitions.csv"))


def cmd_quantum_asymmetry(run: Run):
    _, h = _load_h(run.args)
    if run.dry_run:
        return
    data = {"t": run.args.t, "asymmetry": time_reversal_asymmetry(h, run.args.t)}
    run.write_json("asymmetry.json", data)
    print(json.dumps(data))


def cmd_quantum_nogo(run: Run):
    _, h = _load_h(run.args)
    if run.dry_run:
        return
    report = born_semigroup_violation(h, run.args.t1, run.args.t2)
    run.write_json("nogo.json", report.to_dict())
    print(json.dumps({k: v for k, v in report.to_dict().items() if k != "derivative_at_0"}))


# -- correspond ------------------------------------------------------------

def cmd_correspond_map(run: Run):
    _, h = _load_h(run.args)
    if run.dry_run:
        return
    run.write_matrix("laplacian", correspondence_map(h))


def cmd_correspond_verify(run: Run):
    _, h = _load_h(run.args)
    lap = read_matrix_csv(run.args.laplacian)
    if run.dry_run:
        return
    report = verify_postulates(h, lap)
    run.write_json("postulates.json", report.to_dict())
    print(json.dumps(report.to_dict()))


def cmd_correspond_sample(run: Run):
    a = run.args
    lap = _load_laplacian(a, run.cfg)
    seed = a.seed if a.seed is not None else run.cfg["seed"]
    if run.dry_run:
        return
    specs = sample_compatible_hamiltonians(lap, a.count, seed, (a.onsite_min, a.onsite_max), a.shift)
    lap_hash = hashlib.sha256(",".join(f"{x:.16e}" for x in np.ravel(lap)).encode()).hexdigest()
    files = []
    for i, spec in enumerate(specs):
        name = f"sample_{i:04d}.json"
        dump_hamiltonian_spec(spec, run.path(name), {"seed": seed, "index": i})
        files.append(name)
    run.write_json("samples.json", {"seed": seed, "count": a.count, "laplacian_sha256": lap_hash, "files": files})


def cmd_correspond_count(run: Run):
    g = load_graph(run.args.graph)
    if run.dry_run:
        return
    count = count_parameters(g)
    run.write_json("parameters.json", count.to_dict())
    print(json.dumps(count.to_dict()))


def cmd_correspond_gaugefix(run: Run):
    spec, h = _load_h(run.args)
    if run.dry_run:
        return
    fixed, alpha = gauge_fix(h, graph_of(h))
    cycles = fundamental_cycles(graph_of(h))
    dump_hamiltonian_spec(spec_from_hamiltonian(fixed), run.path("gauge_fixed.json"))
    run.write_json("gauge.json", {
        "alpha": alpha,
        "cycles": cycles,
        "holonomy_before": [cycle_holonomy(h, c) for c in cycles],
        "holonomy_after": [cycle_holonomy(fixed, c) for c in cycles],
    })


# -- decohere --------------------------------------------------------------

def cmd_decohere_evolve(run: Run):
    _, h = _load_h(run.args)
    times = _time_grid(run.args, run.cfg)
    solver = IntrinsicDecoherence(h, DecoherenceParams(run.args.gamma))
    if run.dry_run:
        return
    rho0 = localized_state(solver.n, run.args.source)
    rows = [np.real(np.diag(solver.evolve(rho0, t))) for t in times]
    write_matrix_csv(np.column_stack([times, rows]), run.path("populations.csv"),
                     ["t"] + [f"p_{k}" for k in range(solver.n)])
    run.write_json("decoherence.json", {"gamma": run.args.gamma, "dt": None, "seed": run.args.seed,
                                        "source": run.args.source})


def cmd_decohere_extract(run: Run):
    _, h = _load_h(run.args)
    params = DecoherenceParams(run.args.gamma)
    dt = run.args.dt if run.args.dt is not None else default_step(h)
    if run.dry_run:
        return
    est = extract_generator(h, params, dt)
    run.write_matrix("generator", est)
    resid = float(np.abs(est - correspondence_map(h)).max())
    run.write_json("decoherence.json", {"gamma": params.gamma, "dt": dt, "seed": run.args.seed,
                                        "residual_vs_map": resid})


# -- lattice ---------------------------------------------------------------

def cmd_lattice_build(run: Run):
    spec = load_lattice_spec(run.args.spec)
    ham, _ = build_lattice_hamiltonian(spec)
    if run.dry_run:
        return
    dump_hamiltonian_spec(ham, run.path("hamiltonian.json"))


def cmd_lattice_peierls(run: Run):
    spec = load_lattice_spec(run.args.spec)
    if run.dry_run:
        return
    fx, fy = peierls_phases(landau_potential(run.args.field), run.args.charge, spec)
    run.write_json("phases.json", {"fx": fx, "fy": fy, "B": run.args.field, "q": run.args.charge})


def cmd_lattice_bfield(run: Run):
    spec = load_lattice_spec(run.args.spec)
    if run.dry_run:
        return
    run.write_matrix("bfield", discrete_magnetic_field(spec.fy, spec))


def cmd_lattice_butterfly(run: Run):
    a = run.args
    fluxes = farey_fluxes(a.qmax)
    if run.dry_run:
        return
    table = hofstadter_spectrum(a.size, fluxes, a.hop_rate, strict=a.strict, jobs=a.jobs)
    table.write_csv(run.path("butterfly.csv"))
    if table.incommensurate:
        run.extra["warnings"] = [f"{len(table.incommensurate)} fluxes incommensurate with size {a.size}"]
        run.extra["incommensurate_fluxes"] = [str(f) for f in table.incommensurate]


def cmd_lattice_converge(run: Run):
    a = run.args
    if run.dry_run:
        return
    report = continuum_convergence(a.case, a.sizes, a.K, a.flux_quanta)
    run.write_json("convergence.json", report.to_dict())
    print(json.dumps({"case": report.case, "order": report.order, "errors": report.errors}))


# -- parser ----------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON file of default overrides")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--dry-run", action="store_true", help="validate inputs and write only the manifest")
    p.add_argument("--tol-sym", type=float, default=None)
    p.add_argument("--tol-sum", type=float, default=None)
    p.add_argument("--tol-herm", type=float, default=None)
    p.add_argument("--tol-semigroup", type=float, default=None)
    return p


def _grid(p):
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--num", type=int)
    p.add_argument("--times", type=float, nargs="+")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="qcwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)

    def action(group, name, func, help_):
        p = group.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    g = groups.add_parser("graph", help="build, validate and convert graphs").add_subparsers(dest="action", required=True)
    p = action(g, "build", cmd_graph_build, "named graph family to JSON + Laplacian")
    p.add_argument("--family", choices=("path", "cycle", "complete", "star", "petersen", "grid"), required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--ly", type=int)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--weight", type=float, default=1.0)
    p = action(g, "validate", cmd_graph_validate, "check Laplacian invariants")
    p.add_argument("--laplacian", required=True)
    p = action(g, "convert", cmd_graph_convert, "graph JSON <-> Laplacian CSV")
    p.add_argument("--graph")
    p.add_argument("--laplacian")

    c = groups.add_parser("classical", help="classical random walk").add_subparsers(dest="action", required=True)
    p = action(c, "evolve", cmd_classical_evolve, "p(t) from a localized start")
    p.add_argument("--graph")
    p.add_argument("--laplacian")
    p.add_argument("--source", type=int, default=0)
    _grid(p)
    p = action(c, "semigroup", cmd_classical_semigroup, "check P(t1)P(t2) = P(t1+t2)")
    p.add_argument("--graph")
    p.add_argument("--laplacian")
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)

    q = groups.add_parser("quantum", help="chiral quantum walk").add_subparsers(dest="action", required=True)
    p = action(q, "evolve", cmd_quantum_evolve, "Born transition probabilities over a time grid")
    p.add_argument("--hamiltonian", required=True)
    _grid(p)
    p = action(q, "asymmetry", cmd_quantum_asymmetry, "time-reversal asymmetry of pi(t)")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--t", type=float, required=True)
    p = action(q, "nogo", cmd_quantum_nogo, "Born-rule semigroup violation")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--t1", type=float, default=0.5)
    p.add_argument("--t2", type=float, default=0.5)

    r = groups.add_parser("correspond", help="Hamiltonian to Laplacian correspondence").add_subparsers(dest="action", required=True)
    p = action(r, "map", cmd_correspond_map, "Laplacian of a Hamiltonian")
    p.add_argument("--hamiltonian", required=True)
    p = action(r, "verify", cmd_correspond_verify, "postulate report for an (H, L) pair")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--laplacian", required=True)
    p = action(r, "sample", cmd_correspond_sample, "random Hamiltonians compatible with L")
    p.add_argument("--graph")
    p.add_argument("--laplacian")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--onsite-min", type=float, default=0.0)
    p.add_argument("--onsite-max", type=float, default=1.0)
    p.add_argument("--shift", action="store_true", help="shift on-site energies to be non-negative")
    p = action(r, "count", cmd_correspond_count, "free and effective parameter counts")
    p.add_argument("--graph", required=True)
    p = action(r, "gaugefix", cmd_correspond_gaugefix, "spanning-tree gauge and cycle holonomies")
    p.add_argument("--hamiltonian", required=True)

    d = groups.add_parser("decohere", help="intrinsic decoherence").add_subparsers(dest="action", required=True)
    p = action(d, "evolve", cmd_decohere_evolve, "site populations under dephasing")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--source", type=int, default=0)
    _grid(p)
    p = action(d, "extract", cmd_decohere_extract, "classical generator from short-time populations")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--dt", type=float)

    lat = groups.add_parser("lattice", help="square-lattice walks").add_subparsers(dest="action", required=True)
    p = action(lat, "build", cmd_lattice_build, "lattice spec to Hamiltonian spec")
    p.add_argument("--spec", required=True)
    p = action(lat, "peierls", cmd_lattice_peierls, "Landau-gauge Peierls phases")
    p.add_argument("--spec", required=True)
    p.add_argument("--field", type=float, required=True, help="uniform field B")
    p.add_argument("--charge", type=float, default=1.0)
    p = action(lat, "bfield", cmd_lattice_bfield, "discrete field from fy in the fx = 0 gauge")
    p.add_argument("--spec", required=True)
    p = action(lat, "butterfly", cmd_lattice_butterfly, "Hofstadter spectra over Farey fluxes")
    p.add_argument("--size", type=int, default=24)
    p.add_argument("--qmax", type=int, default=24)
    p.add_argument("--hop-rate", type=float, default=1.0)
    p.add_argument("--strict", action="store_true", help="reject fluxes whose q does not divide size")
    p = action(lat, "converge", cmd_lattice_converge, "continuum-limit convergence")
    p.add_argument("--case", choices=("free_particle", "uniform_field"), default="free_particle")
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--flux-quanta", type=int, default=1)
    return parser


def _write_manifest(run: Run, argv, duration, error=None):
    args = run.args
    params = {k: v for k, v in vars(args).items() if k != "func"}
    inputs = {}
    for key in INPUT_FLAGS:
        path = getattr(args, key, None)
        if path and Path(path).exists():
            inputs[path] = _sha256(path)
    manifest = {
        "command": f"{args.group} {args.action}",
        "argv": list(argv),
        "parameters": params,
        "config": run.cfg,
        "seed": args.seed if args.seed is not None else run.cfg["seed"],
        "version": __version__,
        "inputs": inputs,
        "outputs": list(run.outputs),
        "duration_s": duration,
        "error": error,
        **run.extra,
    }
    run.out.mkdir(parents=True, exist_ok=True)
    with open(run.out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {
        "tol_sym": args.tol_sym,
        "tol_sum": args.tol_sum,
        "tol_herm": args.tol_herm,
        "tol_semigroup": args.tol_semigroup,
        "seed": args.seed,
    }
    run = Run(args, dict(DEFAULTS))
    start = time.perf_counter()
    try:
        run.cfg = merge_flags(load_config(args.config), flags)
        args.func(run)
    except (ValidationError, OSError, json.JSONDecodeError) as exc:
        _write_manifest(run, argv, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
        print(f"qcwalk: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported in the manifest
        _write_manifest(run, argv, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
        print(f"qcwalk: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _write_manifest(run, argv, time.perf_counter() - start)
    return 0


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
