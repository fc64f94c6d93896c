"""Command-line front end.

Exit status: 0 on success (or all inequalities satisfied), 1 when a
violation or a failed check is found, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import cone, groups, ineq, quantum, stab, verify
from .entvec import EntropyVector, PartySystem, format_exact

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2

CONES = {
    "quantum-ingleton-4": lambda: cone.build_quantum_ingleton_cone(4),
    "quantum-ingleton-4-literal": lambda: cone.build_quantum_ingleton_cone(4, ingleton="parties"),
    "poly-quantoid-4": lambda: cone.build_quantum_ingleton_cone(4, ingleton=None),
    "pure-ingleton-5": cone.build_pure_ingleton_cone,
}


class InputError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _fmt_value(v, scale) -> str:
    if isinstance(v, Fraction):
        return format_exact(v, scale.prime)
    return f"{v:.12g}"


def render_vector(v: EntropyVector, fmt: str) -> str:
    if fmt == "csv":
        return v.to_csv()
    bits = v.to_bits()
    if fmt == "json-lines":
        lines = [json.dumps({"party_system": list(v.system.names)})]
        for m, x in v.items():
            lines.append(
                json.dumps({"subset": v.system.label(m), "value": _fmt_value(x, v.scale), "bits": float(f"{bits.values[m]:.12g}")})
            )
        return "\n".join(lines) + "\n"
    width = max(len(v.system.label(m)) for m in v.system.subsets())
    lines = [f"{'subset':<{max(width, 6)}}  {'value':>16}  {'bits':>16}"]
    for m, x in v.items():
        lines.append(f"{v.system.label(m):<{max(width, 6)}}  {_fmt_value(x, v.scale):>16}  {bits.values[m]:>16.12g}")
    return "\n".join(lines) + "\n"


def render_report(report: ineq.SatisfactionReport, fmt: str) -> str:
    if fmt == "csv":
        return report.to_csv()
    if fmt == "json-lines":
        return "".join(
            json.dumps({"instance": i.name, "margin": ineq._fmt(m), "verdict": report.verdict(m)}) + "\n"
            for i, m in report.margins
        )
    return report.summary() + "\n"


def _load_state_file(text: str):
    head = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")), "")
    if head.startswith("dims:"):
        return quantum.load_state(text)
    return stab.load_group(text)


def _entropy_of(obj) -> EntropyVector:
    if isinstance(obj, stab.StabiliserGroup):
        return stab.entropy_vector(obj)
    return quantum.entropy_vector(obj)


def cmd_entropy(args) -> int:
    v = _entropy_of(_load_state_file(_read(args.file)))
    sys.stdout.write(render_vector(v, args.format))
    return EXIT_OK


def cmd_check(args) -> int:
    v = EntropyVector.from_csv(_read(args.vector))
    instances = []
    for fam in args.family or ["shannon"]:
        try:
            instances += ineq.named_family(fam, v.system)
        except (KeyError, ValueError) as exc:
            raise InputError(f"family {fam!r}: {exc}") from exc
    report = ineq.check(v, ineq._dedup(instances), Path(args.vector).stem)
    sys.stdout.write(render_report(report, args.format))
    return EXIT_OK if report.ok else EXIT_VIOLATION


def table1_layout(rays, group: str) -> str:
    """Rows are Table 1 subsets, one column per orbit."""
    match = cone.match_table1(rays, group)
    by_rep = {o.representative: k for k, o in match.matched.items()}
    cols = []
    extra = 0
    for o in match.orbits:
        k = by_rep.get(o.representative)
        if k is not None:
            cols.append((str(k), cone.table1_ray(k), o.size))
        else:
            extra += 1
            cols.append((f"x{extra}", o.representative, o.size))
    cols.sort(key=lambda c: (c[0] == "0", c[0].startswith("x"), c[0]))
    annot = {
        "e": "e (= abcd)",
        **{f"{x}e": f"{x}e (= {''.join(y for y in 'abcd' if y != x)})" for x in "abcd"},
    }
    row_names = [annot.get(r, r) for r in cone.TABLE1_ROWS]
    w = max(len(r) for r in row_names)
    header = f"{'subset':<{w}} | " + " ".join(f"{c[0]:>3}" for c in cols)
    lines = [header, "-" * len(header)]
    values = [cone.column_rows(c[1]) for c in cols]
    for i, name in enumerate(row_names):
        lines.append(f"{name:<{w}} | " + " ".join(f"{vals[i]!s:>3}" for vals in values))
    lines.append("-" * len(header))
    lines.append(f"{'orbit size':<{w}} | " + " ".join(f"{c[2]:>3}" for c in cols))
    lines.append(f"total extreme rays: {len(rays)}; orbits under {group}: {len(cols)}")
    if match.missing:
        lines.append(f"Table 1 columns not found: {match.missing}")
    return "\n".join(lines) + "\n"


def cmd_rays(args) -> int:
    if args.name not in CONES:
        raise InputError(f"unknown cone {args.name!r}; choose from {', '.join(CONES)}")
    c = CONES[args.name]()
    rays = cone.extreme_rays(c)
    if args.format == "table":
        sys.stdout.write(table1_layout(rays, args.group))
        return EXIT_OK
    reps = {}
    for o in cone.group_orbits(rays, args.group):
        reps[o.representative] = len(reps)
    rows = []
    for i, r in enumerate(rays):
        orbit = reps[cone.canonicalize_orbit(r, args.group).representative]
        rows.append((i, orbit, cone.column_rows(r)))
    if args.format == "csv":
        out = ["ray,orbit," + ",".join(cone.TABLE1_ROWS)]
        out += [f"{i},{o}," + ",".join(map(str, vals)) for i, o, vals in rows]
    else:
        out = [
            json.dumps({"ray": i, "orbit": o, **{k: int(v) for k, v in zip(cone.TABLE1_ROWS, vals)}})
            for i, o, vals in rows
        ]
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_states(args) -> int:
    obj = stab.build_paper_state(args.tag)
    show_entropy = args.entropy or not args.stab
    if args.stab:
        if isinstance(obj, stab.StabiliserGroup):
            sys.stdout.write(stab.dump_group(obj))
        else:
            sys.stdout.write(quantum.dump_state(obj))
    if show_entropy:
        sys.stdout.write(render_vector(_entropy_of(obj), args.format))
    return EXIT_OK


def cmd_group(args) -> int:
    text = _read(args.file)
    if args.distribution:
        dist = groups.load_distribution(text)
        n = len(next(iter(dist)))
        v = groups.classical_polymatroid(dist, PartySystem.of_size(n))
    else:
        g, subs = groups.load_group(text)
        if not subs:
            raise InputError("group file lists no subgroups")
        v = groups.group_polymatroid(groups.SubgroupFamily(g, subs), exact=args.exact)
    sys.stdout.write(render_vector(v, args.format))
    return EXIT_OK


def cmd_verify(args) -> int:
    seeded = {4, 6, 7, 9, 10, 11}
    results = []
    for crit in verify.CRITERIA:
        n = int(crit.__name__.rsplit("_", 1)[1])
        if args.only and n not in args.only:
            continue
        res = crit(seed=args.seed) if n in seeded else crit()
        results.append(res)
        print(res.line(), flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entcone", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomised checks (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    def fmt(p, default="csv"):
        p.add_argument("--format", choices=("csv", "table", "json-lines"), default=default)

    p = sub.add_parser("entropy", help="entropy vector of a stabiliser or density-matrix file")
    p.add_argument("file")
    fmt(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("check", help="check an entropy-vector CSV against inequality families")
    p.add_argument("vector")
    p.add_argument(
        "--family", action="append", choices=("shannon", "quantum", "ingleton", "kinser", "matus", "matus-published")
    )
    fmt(p, "table")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("rays", help="extreme rays of a named cone")
    p.add_argument("name", help=", ".join(CONES))
    p.add_argument("--group", choices=("S4", "S5"), default="S5", help="symmetry used for orbits")
    fmt(p, "table")
    p.set_defaults(func=cmd_rays)

    p = sub.add_parser("states", help="built-in witness states")
    p.add_argument("tag", choices=stab.PAPER_TAGS + stab.EXTRA_TAGS)
    p.add_argument("--stab", action="store_true", help="print the state file")
    p.add_argument("--entropy", action="store_true", help="print the entropy vector (default)")
    fmt(p)
    p.set_defaults(func=cmd_states)

    p = sub.add_parser("group", help="poly-matroid of a subgroup family or a distribution")
    p.add_argument("file")
    p.add_argument("--distribution", action="store_true", help="file holds 'atom p' lines")
    p.add_argument("--exact", action="store_true", help="exact output for prime-power groups")
    fmt(p)
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("verify-paper", help="run every reproduction check")
    p.add_argument("--only", type=int, action="append", help="run only this criterion (repeatable)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"entcone {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
