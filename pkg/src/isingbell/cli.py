"""Command-line interface.

Commands: chsh, diagnose, sweep, search, reproduce, quantum, mc, dump.
Global flags: --spec, --out, --threads, --format {csv,text,both}. Outputs
land in the --out directory with the run manifest embedded in every report
(and written as manifest.json). Exit codes: 0 success, 2 input error,
3 resource cap exceeded, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .chsh import CONVENTIONS, MAX_CONVENTION, chsh, pairwise_correlations
from .diagnostics import independence_report, subset_sweep
from .errors import CapExceededError, NumericalError, SpecError
from .gibbs import build_distribution, table_rows
from .lattice import (
    LatticeSpec,
    validate_spec,
    with_beta,
    with_fields,
    with_uniform_coupling,
)
from .mc import McConfig, chsh_estimate, metropolis_run
from .parallel import default_threads
from .quantum import (
    QuantumModel,
    ground_state_z_distribution,
    scan_grid,
    thermal_z_distribution,
)
from .reporting import RunManifest, fmt, write_csv, write_manifest, write_text
from .search import (
    SearchParameter,
    SearchProblem,
    grid_sweep,
    local_maximize,
    reproduce_published_points,
)
from .specfile import SpecDocument, load_spec_file

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_NUMERICAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingbell",
        description="Bell-CHSH correlation experiments on Ising spin lattices")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, help="lattice spec file (JSON)")
    common.add_argument("--out", type=Path, default=Path("isingbell-out"),
                        help="output directory (default: ./isingbell-out)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap for sweeps (default: ISINGBELL_THREADS or 1)")
    common.add_argument("--format", choices=("csv", "text", "both"), default="both",
                        help="which report formats to write")
    common.add_argument("--beta", type=float, default=None,
                        help="override inverse temperature")
    common.add_argument("--coupling", type=float, default=None,
                        help="override every edge coupling")
    common.add_argument("--field-all", type=float, default=None,
                        help="override every local field")
    common.add_argument("--field", action="append", default=[],
                        metavar="SITE=VALUE",
                        help="override one local field (label or index); repeatable")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh", parents=[common],
                       help="CHSH report plus independence diagnostics")
    p.add_argument("--convention", default="mm",
                   choices=(*CONVENTIONS, MAX_CONVENTION))
    p.add_argument("--lambda-subset", default=None,
                   help="comma-separated hidden sites (labels or indices)")
    p.add_argument("--pairwise", action="store_true",
                   help="also emit the pairwise-correlation census")
    p.set_defaults(handler=cmd_chsh)

    p = sub.add_parser("diagnose", parents=[common],
                       help="independence diagnostics only")
    p.add_argument("--lambda-subset", default=None)
    p.add_argument("--sweep-subsets", action="store_true",
                   help="one report per non-empty hidden subset (<= 8 hidden)")
    p.set_defaults(handler=cmd_diagnose)

    p = sub.add_parser("sweep", parents=[common],
                       help="exact grid sweep over free parameters")
    p.add_argument("--param", action="append", nargs=3, required=True,
                   metavar=("NAME", "LO", "HI"),
                   help="free parameter with bounds; repeatable "
                        "(names: J, beta, h, h:<site>)")
    p.add_argument("--steps", type=int, default=41, help="grid points per axis")
    p.add_argument("--budget", type=int, default=250000)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("search", parents=[common],
                       help="derivative-free local maximization of X")
    p.add_argument("--param", action="append", nargs=3, required=True,
                   metavar=("NAME", "LO", "HI"))
    p.add_argument("--start", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--asymmetric", action="store_true",
                   help="do not tie per-site fields to their mirror images")
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("reproduce", parents=[common],
                       help="evaluate the published parameter points on every "
                            "admissible candidate geometry")
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--free-field", default=None,
                   help="comma-separated values for the unstated field "
                        "(default: fine sweep of [0, 3])")
    p.set_defaults(handler=cmd_reproduce)

    p = sub.add_parser("quantum", parents=[common],
                       help="transverse-field model: thermal z-distribution "
                            "pipeline or a (J, h, beta) grid scan")
    p.add_argument("--qj", type=float, default=None, help="uniform coupling J")
    p.add_argument("--qh", type=float, default=None, help="transverse strength h")
    p.add_argument("--qbeta", type=float, default=None)
    p.add_argument("--ground", action="store_true",
                   help="use the ground state instead of the thermal state")
    p.add_argument("--longitudinal-from-fields", action="store_true",
                   help="exploration mode: add the spec's classical fields "
                        "as longitudinal terms")
    p.add_argument("--scan-j", default=None, help="comma-separated J values")
    p.add_argument("--scan-h", default=None)
    p.add_argument("--scan-beta", default=None)
    p.set_defaults(handler=cmd_quantum)

    p = sub.add_parser("mc", parents=[common], help="Metropolis Monte Carlo run")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sweeps", type=int, default=60000)
    p.add_argument("--burn-in", type=int, default=4000)
    p.add_argument("--thinning", type=int, default=1)
    p.add_argument("--batches", type=int, default=25)
    p.add_argument("--chains", type=int, default=1)
    p.set_defaults(handler=cmd_mc)

    p = sub.add_parser("dump", parents=[common],
                       help="full distribution table as CSV")
    p.set_defaults(handler=cmd_dump)

    return parser


def _load(args) -> SpecDocument:
    if args.spec is None:
        raise SpecError("--spec is required for this command")
    doc = load_spec_file(args.spec)
    lattice = doc.lattice
    if args.coupling is not None:
        lattice = with_uniform_coupling(lattice, args.coupling)
    if args.field_all is not None:
        lattice = with_fields(lattice, args.field_all)
    overrides = {}
    for item in args.field:
        if "=" not in item:
            raise SpecError(f"--field expects SITE=VALUE, got {item!r}")
        ref, _, value = item.partition("=")
        try:
            overrides[ref.strip()] = float(value)
        except ValueError:
            raise SpecError(f"--field value is not a real: {item!r}") from None
    if overrides:
        lattice = with_fields(lattice, overrides)
    if args.beta is not None:
        lattice = with_beta(lattice, args.beta)
    report = validate_spec(lattice)
    if not report.ok:
        raise SpecError("; ".join(report.errors))
    return SpecDocument(lattice=lattice, quantum=doc.quantum)


def _overrides(args) -> dict:
    out = {}
    for key in ("beta", "coupling", "field_all"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "field", None):
        out["field"] = list(args.field)
    return out


def _manifest(args, seed: int | None = None) -> RunManifest:
    return RunManifest(command=args.command,
                       spec_path=str(args.spec) if args.spec else None,
                       overrides=_overrides(args),
                       out_dir=str(args.out),
                       seed=seed)


def _subset_arg(spec: LatticeSpec, text: str | None):
    if text is None:
        return None
    return tuple(spec.site_of(part.strip()) for part in text.split(",") if part.strip())


def _emit_chsh(args, manifest, report, prefix: str = "chsh") -> None:
    header = ["m_pp", "m_mp", "m_pm", "m_mm", "x_bi", "convention"]
    if args.format in ("csv", "both"):
        write_csv(args.out / f"{prefix}.csv", manifest, header, [report.csv_row()])
    if args.format in ("text", "both"):
        lines = [f"sign convention: {report.sign_convention}", ""]
        for (a, b), m in report.m_values.items():
            lines.append(f"M(a={a:+d}, b={b:+d}) = {fmt(m)}   "
                         f"[P(a,b) = {fmt(report.setting_probs[(a, b)])}]")
        lines += ["", f"x_bi = {fmt(report.x_bi)}"]
        write_text(args.out / f"{prefix}.txt", manifest, "CHSH report", lines)


def _independence_rows(report) -> list[tuple]:
    subset = ",".join(str(s) for s in report.lambda_subset)
    return [(subset, report.mi_deviation, report.oi_deviation,
             report.pi_deviation, report.factorability_deviation,
             report.mi.tv, report.oi.tv, report.pi.tv, report.factorability.tv)]


_IND_HEADER = ["lambda_subset", "mi_dev", "oi_dev", "pi_dev", "fact_dev",
               "mi_tv", "oi_tv", "pi_tv", "fact_tv"]


def _emit_independence(args, manifest, report, prefix: str = "independence") -> None:
    if args.format in ("csv", "both"):
        write_csv(args.out / f"{prefix}.csv", manifest, _IND_HEADER,
                  _independence_rows(report))
    if args.format in ("text", "both"):
        lines = [f"lambda subset: {list(report.lambda_subset)}", ""]
        for label, result in (("measurement independence", report.mi),
                              ("outcome independence", report.oi),
                              ("parameter independence", report.pi),
                              ("factorability", report.factorability)):
            lines.append(f"{label}: deviation = {fmt(result.value)}, "
                         f"tv = {fmt(result.tv)}")
            if result.witness:
                lines.append(f"    witness: {result.witness}")
        if report.pairwise is not None:
            lines += ["", f"fully pairwise correlated: "
                          f"{report.pairwise.fully_correlated} "
                          f"(threshold {report.pairwise.threshold})"]
        write_text(args.out / f"{prefix}.txt", manifest,
                   "Independence diagnostics", lines)


def cmd_chsh(args) -> int:
    doc = _load(args)
    spec = doc.lattice
    if spec.roles is None:
        raise SpecError("spec has no role assignment; chsh needs one")
    manifest = _manifest(args)
    dist = build_distribution(spec)
    report = chsh(dist, spec.roles, args.convention)
    _emit_chsh(args, manifest, report)
    subset = _subset_arg(spec, args.lambda_subset)
    pairwise = pairwise_correlations(dist, spec) if args.pairwise else None
    ind = independence_report(dist, spec.roles, subset, pairwise=pairwise)
    _emit_independence(args, manifest, ind)
    if pairwise is not None and args.format in ("csv", "both"):
        n = spec.n_sites
        write_csv(args.out / "pairwise.csv", manifest,
                  ["site_i", "site_j", "deviation"],
                  [(i, j, float(pairwise.matrix[i, j]))
                   for i in range(n) for j in range(i + 1, n)])
    write_manifest(args.out, manifest)
    print(f"x_bi = {fmt(report.x_bi)} ({report.sign_convention}); "
          f"reports in {args.out}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    doc = _load(args)
    spec = doc.lattice
    if spec.roles is None:
        raise SpecError("spec has no role assignment; diagnose needs one")
    manifest = _manifest(args)
    dist = build_distribution(spec)
    if args.sweep_subsets:
        reports = subset_sweep(dist, spec.roles, threads=args.threads)
        rows = [row for rep in reports for row in _independence_rows(rep)]
        write_csv(args.out / "independence_subsets.csv", manifest,
                  _IND_HEADER, rows)
        print(f"{len(reports)} subsets diagnosed; reports in {args.out}")
    subset = _subset_arg(spec, args.lambda_subset)
    ind = independence_report(dist, spec.roles, subset)
    _emit_independence(args, manifest, ind)
    write_manifest(args.out, manifest)
    print(f"mi={fmt(ind.mi_deviation)} oi={fmt(ind.oi_deviation)} "
          f"pi={fmt(ind.pi_deviation)} fact={fmt(ind.factorability_deviation)}")
    return EXIT_OK


def _problem(args, spec: LatticeSpec) -> SearchProblem:
    params = tuple(SearchParameter(name, float(lo), float(hi))
                   for name, lo, hi in args.param)
    symmetric = not getattr(args, "asymmetric", False)
    return SearchProblem(base=spec, parameters=params, symmetric=symmetric)


def cmd_sweep(args) -> int:
    doc = _load(args)
    problem = _problem(args, doc.lattice)
    manifest = _manifest(args)
    rows = grid_sweep(problem, args.steps, budget=args.budget,
                      threads=args.threads)
    names = [p.name for p in problem.parameters]
    header = [*names, "x_bi", "mi_dev", "oi_dev", "pi_dev", "fact_dev"]
    csv_rows = [(*(r.params[n] for n in names), r.x_bi, r.mi_deviation,
                 r.oi_deviation, r.pi_deviation, r.factorability_deviation)
                for r in rows]
    write_csv(args.out / "sweep.csv", manifest, header, csv_rows)
    write_manifest(args.out, manifest)
    best = rows[0]
    print(f"{len(rows)} grid points; max x_bi = {fmt(best.x_bi)} at "
          f"{best.params}; sweep.csv in {args.out}")
    return EXIT_OK


def cmd_search(args) -> int:
    doc = _load(args)
    problem = _problem(args, doc.lattice)
    start = {}
    for item in args.start:
        name, _, value = item.partition("=")
        start[name.strip()] = float(value)
    for p in problem.parameters:
        start.setdefault(p.name, (p.lower + p.upper) / 2.0)
    manifest = _manifest(args)
    result = local_maximize(problem, start, tolerance=args.tolerance)
    names = [p.name for p in problem.parameters]
    write_csv(args.out / "trace.csv", manifest,
              [*names, "x_bi"],
              [(*(pt[n] for n in names), value) for pt, value in result.trace])
    lines = [f"converged: {result.converged}",
             f"evaluations: {result.evaluations}",
             f"x_bi = {fmt(result.x_bi)}",
             f"params: { {n: result.params[n] for n in names} }"]
    write_text(args.out / "search.txt", manifest, "Local maximization", lines)
    write_manifest(args.out, manifest)
    print(f"x_bi = {fmt(result.x_bi)} at {result.params} "
          f"(converged={result.converged})")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    free = None
    if args.free_field:
        free = tuple(float(v) for v in args.free_field.split(","))
    manifest = _manifest(args)
    report = reproduce_published_points(free_field_values=free,
                                        tolerance=args.tolerance,
                                        threads=args.threads)
    header = ["geometry", "x_uniform", "uniform_error", "x_tuned_best",
              "free_field_best", "tuned_error"]
    rows = [(r.name, r.x_uniform, r.uniform_error, r.x_tuned_best,
             r.free_field_best, r.tuned_error) for r in report.rows]
    write_csv(args.out / "reproduction.csv", manifest, header, rows)
    lines = [report.headline(), "",
             f"targets: {report.targets[0]} and {report.targets[1]} "
             f"(tolerance {report.tolerance})",
             f"candidate geometries evaluated: {len(report.rows)}", ""]
    for r in sorted(report.rows, key=lambda r: max(r.uniform_error, r.tuned_error))[:10]:
        lines.append(f"{r.name}: x_uniform = {r.x_uniform:.6f} "
                     f"(err {r.uniform_error:.4f}), x_tuned = {r.x_tuned_best:.6f} "
                     f"at free field {r.free_field_best} (err {r.tuned_error:.4f})")
    write_text(args.out / "reproduction.txt", manifest,
               "Published-value reproduction", lines)
    write_manifest(args.out, manifest)
    print(report.headline())
    return EXIT_OK if report.rows else EXIT_INPUT


def _float_list(text: str | None):
    if not text:
        return None
    return [float(v) for v in text.split(",")]


def cmd_quantum(args) -> int:
    doc = _load(args)
    spec = doc.lattice
    q = doc.quantum
    coupling = args.qj if args.qj is not None else (q.coupling if q else None)
    transverse = args.qh if args.qh is not None else (q.transverse if q else None)
    beta = args.qbeta if args.qbeta is not None else (q.beta if q else None)
    if coupling is None or transverse is None or beta is None:
        raise SpecError("quantum parameters missing: provide --qj/--qh/--qbeta "
                        "or a quantum block in the spec file")
    manifest = _manifest(args)

    scan_j = _float_list(args.scan_j)
    scan_h = _float_list(args.scan_h)
    scan_beta = _float_list(args.scan_beta)
    if scan_j or scan_h or scan_beta:
        if spec.roles is None:
            raise SpecError("quantum scan needs a role assignment")
        rows = scan_grid(spec, scan_j or [coupling], scan_h or [transverse],
                         scan_beta or [beta], threads=args.threads)
        write_csv(args.out / "quantum_scan.csv", manifest,
                  ["J", "h", "beta", "x_bi", "mi_dev", "oi_dev", "pi_dev",
                   "fact_dev"],
                  [(r.coupling, r.transverse, r.beta, r.x_bi, r.mi_deviation,
                    r.oi_deviation, r.pi_deviation, r.factorability_deviation)
                   for r in rows])
        write_manifest(args.out, manifest)
        best = max(rows, key=lambda r: r.x_bi)
        print(f"{len(rows)} scan points; max x_bi = {fmt(best.x_bi)} at "
              f"J={best.coupling}, h={best.transverse}, beta={best.beta}")
        return EXIT_OK

    longitudinal = tuple(spec.fields) if args.longitudinal_from_fields else None
    model = QuantumModel(spec=spec, coupling=coupling, transverse=transverse,
                         beta=beta, longitudinal=longitudinal)
    dist = (ground_state_z_distribution(model) if args.ground
            else thermal_z_distribution(model))
    # energy column = diagonal part of H (zz terms, plus longitudinal if any)
    energy_spec = with_uniform_coupling(spec, coupling)
    if longitudinal is None:
        energy_spec = with_fields(energy_spec, 0.0)
    write_csv(args.out / "distribution.csv", manifest,
              ["index", *(f"s{i}" for i in range(spec.n_sites)),
               "energy", "probability"],
              list(table_rows(energy_spec, dist)))
    if spec.roles is not None:
        report = chsh(dist, spec.roles)
        _emit_chsh(args, manifest, report, prefix="quantum_chsh")
        if spec.roles.hidden:
            ind = independence_report(dist, spec.roles)
            _emit_independence(args, manifest, ind, prefix="quantum_independence")
        print(f"x_bi = {fmt(report.x_bi)}; reports in {args.out}")
    else:
        print(f"distribution dumped to {args.out}")
    write_manifest(args.out, manifest)
    return EXIT_OK


def cmd_mc(args) -> int:
    doc = _load(args)
    spec = doc.lattice
    mc = McConfig(seed=args.seed, sweeps=args.sweeps, burn_in=args.burn_in,
                  thinning=args.thinning, batch_count=args.batches,
                  chains=args.chains)
    manifest = _manifest(args, seed=args.seed)
    result = metropolis_run(spec, mc)
    rows = [(e.name, e.value, e.std_error, e.n_effective)
            for e in result.estimates]
    if spec.roles is not None:
        clamped = chsh_estimate(spec, mc)
        rows += [(f"clamped_{e.name}", e.value, e.std_error, e.n_effective)
                 for e in clamped.estimates]
    write_csv(args.out / "mc_estimates.csv", manifest,
              ["estimator", "value", "std_error", "n_effective"], rows)
    write_manifest(args.out, manifest)
    for note in result.notes:
        print(f"note: {note}")
    print(f"{len(rows)} estimators written to {args.out}")
    return EXIT_OK


def cmd_dump(args) -> int:
    doc = _load(args)
    spec = doc.lattice
    manifest = _manifest(args)
    dist = build_distribution(spec)
    write_csv(args.out / "distribution.csv", manifest,
              ["index", *(f"s{i}" for i in range(spec.n_sites)),
               "energy", "probability"],
              list(table_rows(spec, dist)))
    write_manifest(args.out, manifest)
    print(f"{dist.probs.size} rows written to {args.out / 'distribution.csv'}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    try:
        return args.handler(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
