"""Command-line entry point: ``ttpoly <command> ...``.

Exit codes: 0 success, 1 a verification or reproduction check failed,
2 usage error, 3 solver or runtime failure.
"""

from __future__ import annotations

import argparse
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import lp, polyhedra, tables
from .enumeration import optimum
from .instances import FAMILIES, InstanceFormatError, generate, parse_robinx, write_robinx
from .model import (LIFTED_FAMILIES, BuildOptions, Constraint, Model, build, export_lp, export_mps, lp_text, mps_text,
                    relax, size_report)
from .schedule import Instance, TournamentError, itinerary, layout, total_distance

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

PRESETS = ("plain", "base", "full")


class UsageError(Exception):
    pass


# --- shared argument handling ---------------------------------------------------

_TOKEN = re.compile(r"^([a-z]+?)(\d+)$", re.I)


def load_instance(token: str, data_dir: str | None = None) -> Instance:
    """``circ4``-style family tokens, XML paths, or names looked up in ``data_dir``."""
    path = Path(token)
    if path.suffix.lower() == ".xml" or path.exists():
        if not path.exists():
            raise UsageError(f"no such instance file: {token}")
        return parse_robinx(path)
    m = _TOKEN.match(token)
    if m and m.group(1).lower() in FAMILIES:
        return generate(m.group(1).lower(), int(m.group(2)))
    if data_dir:
        found = tables.find_instance_file(data_dir, token)
        if found:
            return parse_robinx(found)
    raise UsageError(f"unknown instance {token!r}: use e.g. circ4, an XML path, or --data-dir")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", help="family token such as circ4, or a RobinX XML file")
    p.add_argument("--data-dir", help="directory searched for NAME.xml instance files")
    g = p.add_argument_group("model")
    g.add_argument("--preset", choices=PRESETS, default="base",
                   help="plain: round-robin and travel rows only; base: plus no-repeaters and "
                        "home-stand/road-trip limits (default); full: base plus every strengthening")
    g.add_argument("--U", type=int, default=None, help=f"max home stand / road trip length (default {tables.DEFAULT_U})")
    g.add_argument("--mirrored", action="store_true", help="second half mirrors the first")
    g.add_argument("--lifted", action="store_true", help="replace travel rows by their lifted versions")
    g.add_argument("--keep-unlifted", action="store_true", help="keep original travel rows next to lifted ones")
    g.add_argument("--flow", action="store_true", help="flow rows for venues other than the team's home")
    g.add_argument("--flow-own", action="store_true", help="flow rows at the team's own venue")
    g.add_argument("--home-flow", action="store_true", help="home-flow rows")
    g.add_argument("--flow-eq", action="store_true", help="flow equations")
    g.add_argument("--hsrt-flow", action="store_true", help="home-stand/road-trip flow rows")
    g.add_argument("--drop", action="append", default=[],
                   choices=("lifted", "home-flow", "flow-eq", "hsrt-flow", "no-repeaters"),
                   help="remove a row group from the preset (repeatable)")


def preset_options(preset: str, mirrored: bool, U: int | None) -> BuildOptions:
    if preset == "plain":
        return BuildOptions(mirrored=mirrored, U=U)
    u = tables.DEFAULT_U if U is None else U
    if preset == "base":
        return replace(tables.BASE, mirrored=mirrored, U=u)
    return tables.column_options(5, mirrored, u)


def options_from_args(args: argparse.Namespace) -> BuildOptions:
    if args.U is not None and args.U < 1:
        raise UsageError("--U must be at least 1")
    opts = preset_options(args.preset, args.mirrored, args.U)
    changes: dict[str, object] = {}
    for flag, field_names in (("lifted", ("lifted_away_away", "lifted_home_travel")), ("keep_unlifted", ("keep_unlifted",)),
                              ("flow", ("flow",)), ("flow_own", ("flow_own_venue",)), ("home_flow", ("home_flow",)),
                              ("flow_eq", ("flow_equations",)), ("hsrt_flow", ("hsrt_flow",))):
        if getattr(args, flag):
            changes.update({f: True for f in field_names})
    drops = {"lifted": ("lifted_away_away", "lifted_home_travel"), "home-flow": ("home_flow",),
             "flow-eq": ("flow_equations",), "hsrt-flow": ("hsrt_flow",), "no-repeaters": ("no_repeaters",)}
    for d in args.drop:
        for f in drops[d]:
            if changes.get(f):
                raise UsageError(f"--drop {d} conflicts with a flag adding the same rows")
            changes[f] = False
    opts = replace(opts, **changes)
    if opts.hsrt_flow and opts.U is None:
        raise UsageError("--hsrt-flow needs a home-stand/road-trip limit: pass --U or use --preset base")
    if opts.keep_unlifted and not (opts.lifted_away_away or opts.lifted_home_travel):
        raise UsageError("--keep-unlifted only makes sense together with lifted rows")
    return opts


def _build_from_args(args: argparse.Namespace) -> tuple[Instance, BuildOptions, Model]:
    inst = load_instance(args.instance, args.data_dir)
    opts = options_from_args(args)
    return inst, opts, build(inst, opts)


def _fmt(v: Fraction | float | None) -> str:
    if v is None:
        return "-"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v} (~{float(v):.6g})"
    return f"{v:.10g}"


# --- commands ---------------------------------------------------------------------

def cmd_gen(args: argparse.Namespace) -> int:
    inst = generate(args.family, args.n)
    if args.out:
        write_robinx(inst, args.out)
        print(f"wrote {inst.name} to {args.out}")
    else:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "inst.xml"
            write_robinx(inst, path)
            sys.stdout.write(path.read_text())
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    inst, opts, model = _build_from_args(args)
    rep = size_report(model)
    preset = build(inst, preset_options(args.preset, args.mirrored, args.U))
    # the model text owns stdout when it is exported there
    out = sys.stderr if args.export and not args.out else sys.stdout
    print(f"{model.name}: {rep['variables']} variables, {rep['constraints']} constraints, {rep['nonzeros']} nonzeros",
          file=out)
    delta = len(model.constraints) - len(preset.constraints)
    if delta:
        print(f"{delta:+d} constraints relative to preset {args.preset}", file=out)
    for fam, count in rep["families"].items():
        print(f"  {fam:24s} {count}", file=out)
    if args.export and args.out:
        (export_lp if args.export == "lp" else export_mps)(model, args.out)
        print(f"wrote {args.export.upper()} file to {args.out}")
    elif args.export:
        sys.stdout.write(lp_text(model) if args.export == "lp" else mps_text(model))
    return EXIT_OK


def solve_model(model: Model, mode: str, solver_cmd: str | None = None) -> lp.LpResult:
    if mode == "external":
        return lp.solve_external(model, solver_cmd)
    return lp.solve_simplex(relax(model), mode)


def cmd_lp(args: argparse.Namespace) -> int:
    inst, opts, model = _build_from_args(args)
    try:
        res = solve_model(model, args.mode, args.solver_cmd)
    except (lp.ExternalSolverError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"{model.name}: status {res.status}, LP bound {_fmt(res.objective)}, {res.iterations} iterations")
    if not res.ok:
        if res.message:
            print(res.message, file=sys.stderr)
        return EXIT_SOLVER
    best: Fraction | None = None
    if args.best is not None:
        best = Fraction(args.best)
    elif inst.n == 4:
        found = optimum(model)
        if found is None:
            print("integer model is infeasible; no ratio", file=sys.stderr)
            return EXIT_SOLVER
        best = found[0]
        print(f"integer optimum by enumeration: {_fmt(best)}")
    if best is not None:
        if best <= 0:
            raise UsageError("--best must be positive")
        pct = tables.percent(res.objective, best)
        print(f"LP bound / best: {tables.format_percent(pct)}%")
    return EXIT_OK


def schedule_grid(T, inst: Instance) -> list[str]:
    n = inst.n
    head = "slot " + " ".join(f"{t:>4d}" for t in range(1, n + 1))
    lines = [head]
    for k in range(1, 2 * n - 1):
        cells = []
        for t in range(1, n + 1):
            opp, home = T.opponent(k, t)
            cells.append(f"{'+' if home else '@'}{opp:>3d}")
        lines.append(f"{k:>4d} " + " ".join(cells))
    return lines


def cmd_ip4(args: argparse.Namespace) -> int:
    inst, opts, model = _build_from_args(args)
    if inst.n != 4:
        raise UsageError("ip4 enumerates all tournaments and needs a 4-team instance")
    found = optimum(model)
    if found is None:
        print(f"{model.name}: no tournament satisfies the model")
        return EXIT_FAIL
    value, T = found
    print(f"{model.name}: optimum {_fmt(value)}")
    print("schedule (+ home, @ away):")
    for line in schedule_grid(T, inst):
        print("  " + line)
    print("itineraries (venue per slot, home at both ends):")
    for t in range(1, inst.n + 1):
        print(f"  team {t}: " + " ".join(str(v) for v in itinerary(t, T)))
    dist = total_distance(T, inst)
    print(f"total distance of the schedule: {_fmt(dist)}")
    if dist != value:
        print("schedule distance differs from the reported optimum", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def corrupted_row(n: int) -> Constraint:
    """A row violated by some tournament, used to exercise failure reporting."""
    lay = layout(n)
    return Constraint({lay.x(1, 1, 2): Fraction(1)}, "<=", Fraction(0), "corrupted_nonpositive[1,1,2]")


def _run_suite(job: tuple[str, int | None]) -> list[polyhedra.ClaimRecord]:
    name, per_class = job
    return polyhedra.run_suites([name], per_class=per_class)


def _pool_map(fn: Callable, jobs: Sequence, workers: int) -> list:
    """Map in a process pool when asked to; results keep job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def cmd_verify(args: argparse.Namespace) -> int:
    names = list(polyhedra.SUITES) if "all" in args.suite else list(dict.fromkeys(args.suite))
    per_class = None if args.per_class == 0 else args.per_class
    records: list[polyhedra.ClaimRecord] = []
    for recs in _pool_map(_run_suite, [(nm, per_class) for nm in names], args.jobs):
        records += recs
    if args.inject_invalid:
        con = corrupted_row(4)
        try:
            computed: object = polyhedra.face_dimension(4, con)
        except polyhedra.InvalidInequalityError as exc:
            computed = f"invalid: {exc}"
        records.append(polyhedra.ClaimRecord.check(f"face dimension {con.tag}", polyhedra.dimension_of_polytope(4) - 1,
                                                   computed))
    print(polyhedra.report_text(records))
    if args.json:
        Path(args.json).write_text(polyhedra.report_json(records))
    return EXIT_OK if all(r.status == "PASS" for r in records) else EXIT_FAIL


def cmd_table2(args: argparse.Namespace) -> int:
    ns = [n for n in (4, 6, 8) if n <= args.max_n]
    failures = 0
    print(f"{'quantity':24s} {'n':>2s} {'reference':>10s} {'computed':>9s}  status")
    for n in ns:
        inst = generate("con", n)
        base = build(inst, tables.BASE)
        mirrored = build(inst, replace(tables.BASE, mirrored=True))
        cells = [
            ("variables", tables.SIZE_REFERENCE["variables"][n], base.num_vars, True),
            ("flow rows", tables.SIZE_REFERENCE["flow rows"][n],
             len(build(inst, replace(tables.BASE, flow=True)).constraints) - len(base.constraints), True),
            ("hsrt-flow rows", tables.SIZE_REFERENCE["hsrt-flow rows"][n],
             len(build(inst, replace(tables.BASE, hsrt_flow=True)).constraints) - len(base.constraints), True),
            ("mirrored flow rows", tables.SIZE_REFERENCE["flow rows"][n],
             len(build(inst, replace(tables.BASE, mirrored=True, flow=True)).constraints) - len(mirrored.constraints),
             True),
            ("mirrored hsrt-flow rows", tables.SIZE_REFERENCE["hsrt-flow rows"][n],
             len(build(inst, replace(tables.BASE, mirrored=True, hsrt_flow=True)).constraints)
             - len(mirrored.constraints), True),
            ("constraints", tables.SIZE_REFERENCE_PRESOLVED["constraints"][n], len(base.constraints), False),
            ("nonzeros", tables.SIZE_REFERENCE_PRESOLVED["nonzeros"][n], base.nonzeros, False),
            ("lifted rows", tables.SIZE_REFERENCE_PRESOLVED["lifted rows"][n],
             build(inst, replace(tables.BASE, **tables.LP_BOUND_COLUMNS[1][1])).count(*LIFTED_FAMILIES), False),
        ]
        for label, ref, got, asserted in cells:
            if asserted:
                status = "PASS" if ref == got else "FAIL"
                failures += status == "FAIL"
            else:
                status = "info (reference counted after presolve)"
            print(f"{label:24s} {n:>2d} {ref:>10d} {got:>9d}  {status}")
    return EXIT_FAIL if failures else EXIT_OK


def _lp_cell(job: tuple[Instance, bool, int, str]) -> tuple[str, object]:
    inst, mirrored, column, mode = job
    model = build(inst, tables.column_options(column, mirrored))
    try:
        res = lp.solve_simplex(relax(model), mode)
    except ArithmeticError as exc:
        return "error", str(exc)
    if not res.ok:
        return "error", f"status {res.status}"
    return "ok", Fraction(res.objective)


def _parse_best(items: Iterable[str]) -> dict[tuple[str, bool], Fraction]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--best expects NAME=VALUE, got {item!r}")
        mirrored = name.lower().endswith("-mirrored")
        base_name = name[: -len("-mirrored")] if mirrored else name
        try:
            out[(base_name.upper(), mirrored)] = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad --best value {value!r}") from None
    return out


def cmd_table3(args: argparse.Namespace) -> int:
    families = [f.strip().upper() for f in args.families.split(",") if f.strip()]
    for f in families:
        if f not in tables.SYNTHETIC + tables.FILE_BASED:
            raise UsageError(f"unknown family {f!r}")
    variants = {"plain": (False,), "mirrored": (True,), "both": (True, False)}[args.variant]
    best_given = _parse_best(args.best)
    rows: list[tuple[Instance, bool, Fraction]] = []
    notes: list[str] = []
    for n in (4, 6, 8):
        if n > args.max_n:
            continue
        for fam in families:
            name = f"{fam}{n}"
            if fam in tables.FILE_BASED:
                path = tables.find_instance_file(args.data_dir, name) if args.data_dir else None
                if path is None:
                    notes.append(f"{name}: skipped, needs {name}.xml in --data-dir")
                    continue
                inst = parse_robinx(path)
                if inst.n != n:
                    raise UsageError(f"{path} has {inst.n} teams, expected {n}")
                inst = Instance(inst.n, name, inst.d)
            else:
                inst = generate(fam.lower(), n)
            for mirrored in variants:
                best = best_given.get((name, mirrored))
                if best is None and n == 4:
                    found = optimum(build(inst, tables.column_options(0, mirrored)))
                    best = found[0] if found else None
                if best is None:
                    suffix = "-mirrored" if mirrored else ""
                    notes.append(f"{tables.instance_label(inst, mirrored)}: skipped, pass --best {name}{suffix}=VALUE")
                    continue
                rows.append((inst, mirrored, best))
    jobs = [(inst, mirrored, c, args.mode) for inst, mirrored, _ in rows for c in range(len(tables.LP_BOUND_COLUMNS))]
    results = _pool_map(_lp_cell, jobs, args.jobs)
    failures = errors = passed = 0
    print(f"{'instance':18s} {'column':24s} {'best':>6s} {'LP bound':>10s} {'reference':>9s} {'computed':>8s}  status")
    for r, (inst, mirrored, best) in enumerate(rows):
        ref = tables.reference_row(inst.name, mirrored)
        for c, (label, _) in enumerate(tables.LP_BOUND_COLUMNS):
            kind, value = results[r * len(tables.LP_BOUND_COLUMNS) + c]
            ref_text = str(ref[c]) if ref else "-"
            if kind == "error":
                errors += 1
                print(f"{tables.instance_label(inst, mirrored):18s} {label:24s} {_fmt(best):>6s} {'-':>10s} "
                      f"{ref_text:>9s} {'-':>8s}  ERROR {value}")
                continue
            pct = tables.percent(value, best)
            if ref is None:
                status = "no reference"
            elif tables.cell_matches(pct, ref[c]):
                status = "PASS"
                passed += 1
            else:
                status = "FAIL"
                failures += 1
            print(f"{tables.instance_label(inst, mirrored):18s} {label:24s} {_fmt(best):>6s} {float(value):>10.4f} "
                  f"{ref_text:>9s} {tables.format_percent(pct):>8s}  {status}")
    for note in notes:
        print(note)
    skipped = f", {len(notes)} instances skipped" if notes else ""
    print(f"{passed}/{passed + failures + errors} cells within {float(tables.CELL_TOLERANCE)} percentage points"
          f"{skipped}")
    if errors:
        return EXIT_SOLVER
    return EXIT_FAIL if failures else EXIT_OK


# --- parser -----------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttpoly", description="Cubic traveling tournament models: build, solve, verify.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic instance as RobinX XML")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("n", type=int)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build a model, print its size, optionally export it")
    _model_args(p)
    p.add_argument("--export", choices=("lp", "mps"))
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("lp", help="solve the LP relaxation")
    _model_args(p)
    p.add_argument("--mode", choices=("float", "exact", "external"), default="exact")
    p.add_argument("--best", help="best known objective for the ratio (n = 4 is enumerated)")
    p.add_argument("--solver-cmd", help=f"external command template with {{lp}} and {{sol}} (else ${lp.ENV_VAR})")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("ip4", help="exact integer optimum of a 4-team model by enumeration")
    _model_args(p)
    p.set_defaults(func=cmd_ip4)

    p = sub.add_parser("verify", help="run the polyhedral verification suites")
    p.add_argument("--suite", action="append", choices=polyhedra.SUITES + ("all",), default=None)
    p.add_argument("--json", help="write a JSON report here")
    p.add_argument("--per-class", type=int, default=3, help="rows sampled per inequality class (0 = all)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--inject-invalid", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table2", help="model sizes against the reference counts")
    p.add_argument("--max-n", type=int, default=8, choices=(4, 6, 8))
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("table3", help="LP-bound ratios against the reference percentages")
    p.add_argument("--families", default="con,circ,line,incr,nl,sup,gal")
    p.add_argument("--max-n", type=int, default=4, choices=(4, 6, 8))
    p.add_argument("--variant", choices=("plain", "mirrored", "both"), default="both")
    p.add_argument("--data-dir", help="directory with NAME.xml files for NL, SUP and GAL instances")
    p.add_argument("--best", action="append", default=[], metavar="NAME=VALUE",
                   help="best known objective, e.g. CON6=43 or CON6-mirrored=48 (repeatable)")
    p.add_argument("--mode", choices=("float", "exact"), default="exact")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_table3)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "verify" and args.suite is None:
        args.suite = ["all"]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ttpoly {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, TournamentError, ValueError) as exc:
        print(f"ttpoly {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (lp.ExternalSolverError, ArithmeticError, OSError) as exc:
        print(f"ttpoly {args.command}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
