"""liftcount command line."""
import argparse
import json
import logging
import sys
import time

from .arith import format_rational, format_weight
from .bench import bench_rows, format_table, rows_to_csv, sequence_table, write_csv
from .engine import Engine
from .logic import ParseError, parse_problem, to_text
from .normalize import NormalizationError, normalize
from .oracle import DEFAULT_MAX_ATOMS, BudgetExceeded, oracle_wfomc
from .presets import PresetError, parse_params
from .solver import sweep

EXIT_OK, EXIT_ERROR, EXIT_REFUSED = 0, 1, 2


class Refusal(Exception):
    """A request that is well formed but over a configured limit."""


def parse_range(text):
    """'5' -> [5], '3..7' -> [3, 4, 5, 6, 7]"""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if lo > hi:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path):
    return parse_problem(_read(path))


def _normalize(problem, n=None):
    try:
        return normalize(problem, domain_size=n)
    except NormalizationError as e:
        if e.stage == "shannon_expand":
            raise Refusal(str(e))
        raise


def cmd_count(args):
    problem = _load(args.file)
    if args.sweep:
        ns = parse_range(args.sweep)
    elif args.n is not None:
        ns = [args.n]
    else:
        raise ValueError("give -n or --sweep")
    trace = []
    t0 = time.perf_counter()
    try:
        res = sweep(problem, ns, prune=not args.no_prune, trace=trace)
    except NormalizationError as e:
        if e.stage == "shannon_expand":
            raise Refusal(str(e))
        raise
    elapsed = (time.perf_counter() - t0) * 1000.0
    if args.trace_layers:
        for h, size, secs in trace:
            print(f"layer {h}: {size} configurations, {secs * 1000.0:.1f} ms", file=sys.stderr)
    if args.json:
        if len(ns) == 1 and not args.sweep:
            out = {"n": ns[0], "count": format_rational(res.counts[ns[0]]),
                   "wall_ms": round(elapsed, 1)}
        else:
            out = {"counts": {str(n): format_rational(res.counts[n]) for n in ns},
                   "wall_ms": round(elapsed, 1)}
        print(json.dumps(out))
    elif len(ns) == 1 and not args.sweep:
        print(format_rational(res.counts[ns[0]]))
    else:
        for n in ns:
            print(f"{n}\t{format_rational(res.counts[n])}")
    return EXIT_OK


def cmd_oracle(args):
    problem = _load(args.file)
    try:
        value = oracle_wfomc(problem, args.n, max_atoms=args.max_atoms)
    except BudgetExceeded as e:
        raise Refusal(f"{e}; rerun with --max-atoms {e.needed} to force it")
    if args.json:
        print(json.dumps({"n": args.n, "count": format_rational(value)}))
    else:
        print(format_rational(value))
    return EXIT_OK


def normalized_text(np_, multiplier, index, total):
    lines = [f"# branch {index} of {total}, multiplier {format_rational(multiplier)}"]
    for name, a in sorted(np_.vocabulary.items()):
        if name != np_.order:
            lines.append(f"predicate {name}/{a}")
    if np_.order:
        lines.append(f"order {np_.order}")
    for name in sorted(np_.weights):
        w, wb = np_.weights[name]
        if (w, wb) != (1, 1):
            lines.append(f"weight {name} {format_rational(w)} {format_rational(wb)}")
    for name, t in np_.cardinality:
        lines.append(f"card |{name}| = {t}")
    lines.append(f"forall x: forall y: {to_text(np_.psi)}")
    for p, cmp, k in np_.binary_counting:
        lines.append(f"forall x: exists[{cmp}{k}] y: {p}(x,y)")
    for p, cmp, r, k in np_.binary_modulo:
        lines.append(f"forall x: exists[{cmp}{r} mod {k}] y: {p}(x,y)")
    for p, cmp, t in np_.unary_counting:
        if isinstance(t, int):
            lines.append(f"exists[{cmp}{t}] x: {p}(x)")
        else:
            lines.append(f"card |{p}| = {t}")
    for p, cmp, r, k in np_.unary_modulo:
        lines.append(f"exists[{cmp}{r} mod {k}] x: {p}(x)")
    for r in np_.divisors:
        lines.append(f"# divide by C(n,{r})")
    if np_.min_domain > 1:
        lines.append(f"# exact for n >= {np_.min_domain}")
    return "\n".join(lines)


def cmd_normalize(args):
    problem = _load(args.file)
    branches = _normalize(problem, args.n)
    if not branches:
        print("# no branches: the sentence is unsatisfiable")
    for i, (np_, mult) in enumerate(branches, 1):
        print(normalized_text(np_, mult, i, len(branches)))
        if i < len(branches):
            print()
    return EXIT_OK


def cmd_cells(args):
    problem = _load(args.file)
    branches = _normalize(problem, args.n)
    for b, (np_, mult) in enumerate(branches, 1):
        eng = Engine(np_)
        cell = eng.cell
        print(f"# branch {b}: {cell.p} one-types, {len(cell.binary)} binary predicates, "
              f"{len(cell.axes)} axes, {eng.C} c-types, D={eng.D}, M={eng.M}")
        for i in range(cell.p):
            print(f"one-type {i}: {cell.describe_one_type(i)} weight {format_weight(cell.one_weights[i])}")
        for i in range(cell.p):
            for j in range(cell.p):
                tables = cell.compat[(i, j)]
                print(f"pair ({i},{j}): {len(tables)} compatible 2-tables, weight {format_weight(cell.pair_weight(i, j))}")
                if args.verbose:
                    for t, w in tables:
                        print(f"    {cell.describe_table(t)} {format_weight(w)}")
                    for (t, s), w in sorted(cell.grouped[(i, j)].items()):
                        print(f"    grouped t={t:0{max(eng.M, 1)}b} t'={s:0{max(eng.M, 1)}b}: {format_weight(w)}")
    return EXIT_OK


def cmd_bench(args):
    params = parse_params(args.params)
    ns = parse_range(args.n)
    rows = bench_rows(args.preset, params, ns, prune=not args.no_prune)
    timings = not args.no_timings
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh, timings)
    sys.stdout.write(rows_to_csv(rows, timings))
    return EXIT_OK


def cmd_sequence_table(args):
    table = sequence_table(args.nmax, args.kmax, args.mmax)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write("n,m,k,count\n")
            for (n, m, k) in sorted(table):
                fh.write(f"{n},{m},{k},{format_rational(table[(n, m, k)])}\n")
    print(format_table(table, args.nmax, args.kmax))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="liftcount",
                                 description="Exact weighted model counting for C2 with modulo counting.")
    ap.add_argument("-v", "--verbose-log", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="lifted count of a sentence file")
    p.add_argument("file")
    p.add_argument("-n", type=int)
    p.add_argument("--sweep", metavar="A..B")
    p.add_argument("--json", action="store_true")
    p.add_argument("--trace-layers", action="store_true")
    p.add_argument("--no-prune", action="store_true")
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("oracle", help="brute-force count (small n only)")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--max-atoms", type=int, default=DEFAULT_MAX_ATOMS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("normalize", help="print the normalized branches")
    p.add_argument("file")
    p.add_argument("-n", type=int, help="domain size, for the small-domain form of the lemmas")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("cells", help="print 1-types and 2-table statistics")
    p.add_argument("file")
    p.add_argument("-n", type=int)
    p.add_argument("--verbose", action="store_true", help="list every 2-table")
    p.set_defaults(fn=cmd_cells)

    p = sub.add_parser("bench", help="sweep a benchmark preset")
    p.add_argument("preset")
    p.add_argument("--params", default="")
    p.add_argument("--n", required=True, metavar="A..B")
    p.add_argument("--csv")
    p.add_argument("--no-timings", action="store_true", help="leave wall_ms empty (byte-stable output)")
    p.add_argument("--no-prune", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("sequence-table", help="T(n,m,k) for graphs with m odd vertices and k edges")
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--kmax", type=int, default=13)
    p.add_argument("--mmax", type=int)
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_sequence_table)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose_log else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except Refusal as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except (ParseError, PresetError, NormalizationError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
