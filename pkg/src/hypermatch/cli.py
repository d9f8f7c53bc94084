"""Command-line interface: ``hypermatch gen|solve|nu|codegree|check-theorem|scan|verify-absorbing``.

Exit status: 0 completed, 2 completed with findings (counterexamples,
stalls, inexact results), 1 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .absorbing import (
    asymptotic_floor,
    asymptotic_size_cap,
    find_absorb_cert,
    sample_absorbing_matching,
)
from .core import min_l_degree
from .driver import SolveParams, check_theorem, scan, scan_csv, solve
from .errors import AbsorbPlanUnavailable, HypermatchError, InputError
from .generators import KINDS, GenSpec
from .oracle import DEFAULT_BUDGET, max_matching_exact
from .textio import format_instance, load_instance

EXIT_OK, EXIT_INPUT, EXIT_FINDINGS = 0, 1, 2

COMMON_DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "gamma": 0.1,
    "epsilon": 0.2,
    "beta": None,
    "c": None,
    "strict_constants": False,
    "fallback_cap": None,
    "budget": DEFAULT_BUDGET,
    "format": "text",
    "out": None,
    "timings": False,
    "verbose": False,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which means "findings" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=S, help="PRNG seed (default 0)")
    g.add_argument("--gamma", type=float, default=S, help="extremality parameter (default 0.1)")
    g.add_argument("--epsilon", type=float, default=S, help="extremal-route epsilon (default 0.2)")
    g.add_argument("--beta", type=float, default=S, help="local-search beta (default gamma/(2k^2))")
    g.add_argument("--c", type=float, default=S, help="absorbing co-degree ratio (default 1/k)")
    g.add_argument("--strict-constants", action="store_true", default=S,
                   help="enforce the asymptotic parameter regime and absorbing constants")
    g.add_argument("--fallback-cap", type=int, default=S, help="largest n handed to the exact oracle")
    g.add_argument("--budget", type=int, default=S, help="branch-and-bound node budget")
    g.add_argument("--format", choices=["text", "csv"], default=S)
    g.add_argument("--out", type=Path, default=S, help="write output to this file")
    g.add_argument("--timings", action="store_true", default=S, help="include wall-clock timings")
    g.add_argument("-v", "--verbose", action="store_true", default=S)


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=KINDS, help="generator for the grid")
    p.add_argument("--k", dest="ks", type=_int_list, default=[3], help="k values, e.g. 3 or 3,4")
    p.add_argument("--n", dest="ns", type=_int_list, help="n values, e.g. 6-12 or 6,9")
    p.add_argument("--seeds", type=_int_list, default=None, help="seed range, e.g. 0-99")
    p.add_argument("--p", type=float, help="edge density for random instances")
    p.add_argument("--d-min", help="co-degree floor, an integer or 'auto' for ceil(n/k)")
    p.add_argument("--grid", type=Path, help="JSON list of generator specs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypermatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate an instance")
    _add_common(p)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--d-min", type=int)

    p = sub.add_parser("solve", help="find a large matching")
    _add_common(p)
    p.add_argument("instance", type=Path)
    p.add_argument("--route", choices=["auto", "extremal", "nonextremal", "oracle"], default="auto")

    p = sub.add_parser("nu", help="exact matching number")
    _add_common(p)
    p.add_argument("instance", type=Path)

    p = sub.add_parser("codegree", help="minimum l-degree (default: co-degree)")
    _add_common(p)
    p.add_argument("instance", type=Path)
    p.add_argument("--l", type=int, default=None)

    p = sub.add_parser("check-theorem", help="test the co-degree theorem exactly")
    _add_common(p)
    p.add_argument("instances", type=Path, nargs="*")
    _add_grid(p)
    p.add_argument("--dump-dir", type=Path, help="write counterexample instances here")

    p = sub.add_parser("scan", help="solve a grid of generated instances into CSV")
    _add_common(p)
    _add_grid(p)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("verify-absorbing", help="sample and certify an absorbing matching")
    _add_common(p)
    p.add_argument("instance", type=Path)
    p.add_argument("--t", type=int, default=None, help="per-set absorbing floor (default 1)")
    p.add_argument("--size-cap", type=int, default=None, help="largest accepted sample")
    p.add_argument("--retries", type=int, default=200)
    return parser


def _params(args: argparse.Namespace, route: str = "auto") -> SolveParams:
    return SolveParams(
        gamma=args.gamma,
        epsilon=args.epsilon,
        beta=args.beta,
        c=args.c,
        seed=args.seed,
        strict=args.strict_constants,
        fallback_cap=args.fallback_cap,
        budget=args.budget,
        route=route,
    )


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _grid(args: argparse.Namespace) -> list[GenSpec]:
    if args.grid is not None:
        entries = json.loads(Path(args.grid).read_text())
        return [GenSpec(**e) for e in entries]
    if args.kind is None or args.ns is None:
        raise InputError("give --grid FILE or both --kind and --n")
    seeds = args.seeds if args.seeds is not None else [args.seed]
    specs = []
    for k in args.ks:
        for n in args.ns:
            d_min = None
            if args.kind == "codegree_floor":
                if args.d_min in (None, "auto"):
                    d_min = -(-n // k)
                else:
                    d_min = int(args.d_min)
            for s in seeds if args.kind in ("random", "codegree_floor") else [0]:
                specs.append(GenSpec(args.kind, k, n, args.p, d_min, s))
    return specs


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(args.kind, args.k, args.n, args.p, args.d_min, args.seed)
    _emit(args, format_instance(spec.build(), [spec.header()]))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    H, _ = load_instance(args.instance)
    rep = solve(H, _params(args, args.route))
    if args.format == "csv":
        text = _csv_text(
            ["route", "size", "target", "delta", "hypothesis_met", "exact_fallback"],
            [[rep.route_taken, rep.size, rep.target, rep.delta, rep.hypothesis_met, rep.exact_fallback]],
        )
    else:
        text = rep.to_text(timings=args.timings)
    _emit(args, text)
    return EXIT_OK if rep.size >= rep.target else EXIT_FINDINGS


def cmd_nu(args: argparse.Namespace) -> int:
    H, _ = load_instance(args.instance)
    res = max_matching_exact(H, args.budget)
    if args.format == "csv":
        text = _csv_text(["nu", "exact", "nodes"], [[res.size, res.exact, res.nodes]])
    else:
        flag = "exact" if res.exact else "lower bound only (budget exhausted)"
        text = f"nu: {res.size} ({flag})\n" + "".join(
            " ".join(map(str, e)) + "\n" for e in res.matching
        )
    _emit(args, text)
    return EXIT_OK if res.exact else EXIT_FINDINGS


def cmd_codegree(args: argparse.Namespace) -> int:
    H, _ = load_instance(args.instance)
    l = args.l if args.l is not None else H.k - 1
    d = min_l_degree(H, l)
    if args.format == "csv":
        _emit(args, _csv_text(["l", "min_degree"], [[l, d]]))
    else:
        _emit(args, f"delta_{l}: {d}\n")
    return EXIT_OK


def cmd_check_theorem(args: argparse.Namespace) -> int:
    items: list[tuple[str, Any]] = []
    if args.instances:
        for path in args.instances:
            items.append((str(path), load_instance(path)[0]))
    else:
        for spec in _grid(args):
            items.append((f"{spec.label}/k={spec.k}/n={spec.n}/seed={spec.seed}", spec.build()))
    rows = []
    tally: dict[str, int] = {}
    findings = False
    for name, H in items:
        v = check_theorem(H, args.budget)
        tally[v.verdict] = tally.get(v.verdict, 0) + 1
        rows.append([name, v.k, v.n, v.delta, "" if v.nu is None else v.nu, v.verdict])
        if v.is_finding:
            findings = True
        if v.dump and args.dump_dir is not None:
            args.dump_dir.mkdir(parents=True, exist_ok=True)
            safe = name.replace("/", "_").replace(":", "_").replace("=", "")
            (args.dump_dir / f"counterexample_{safe}.txt").write_text(v.dump)
    if args.format == "csv":
        text = _csv_text(["instance", "k", "n", "delta", "nu", "verdict"], rows)
    else:
        text = "".join(f"{r[0]}: {r[5]} (delta={r[3]}, nu={r[4]})\n" for r in rows)
        text += "tally: " + ", ".join(f"{k}={v}" for k, v in sorted(tally.items())) + "\n"
    _emit(args, text)
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    rows = scan(_grid(args), _params(args), workers=args.workers, timings=args.timings)
    _emit(args, scan_csv(rows))
    bad = [r for r in rows if r["verdict"] not in ("confirmed", "hypothesis-false")]
    return EXIT_FINDINGS if bad else EXIT_OK


def cmd_verify_absorbing(args: argparse.Namespace) -> int:
    H, _ = load_instance(args.instance)
    k, n = H.k, H.n
    c = args.c if args.c is not None else 1 / k
    if args.strict_constants:
        t = args.t if args.t is not None else asymptotic_floor(k, n)
        cap = args.size_cap if args.size_cap is not None else asymptotic_size_cap(k, n, c)
    else:
        t = args.t if args.t is not None else 1
        cap = args.size_cap if args.size_cap is not None else 2 * k
    try:
        plan = sample_absorbing_matching(H, c, t, cap, args.seed, args.retries, keep_counts=True)
    except AbsorbPlanUnavailable as exc:
        sys.stdout.write(f"certified: no\nreason: {exc}\nevidence: {json.dumps(exc.evidence, sort_keys=True)}\n")
        return EXIT_FINDINGS
    report = [
        "certified: yes",
        f"c: {c}",
        f"t: {t}",
        f"size_cap: {cap}",
        f"p: {plan.p:.6g}",
        f"tries: {plan.retries_used}",
        f"|M'|: {len(plan.M_prime)}",
        f"sets checked: {plan.checked_sets} ({'all' if plan.exhaustive else 'sampled'})",
        f"min absorbing count: {plan.min_count}",
        "M':",
    ] + ["  " + " ".join(map(str, e)) for e in plan.M_prime]
    sys.stdout.write("\n".join(report) + "\n")
    if args.out is not None:
        rows = []
        for S, cnt in plan.counts:
            first = next((find_absorb_cert(H, e, S) for e in plan.M_prime
                          if find_absorb_cert(H, e, S) is not None), None)
            rows.append([S.j, " ".join(map(str, S.slots)), S.extra, cnt,
                         "" if first is None else " ".join(map(str, first.e))])
        Path(args.out).write_text(_csv_text(["j", "slots", "extra", "count", "first_edge"], rows))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "nu": cmd_nu,
    "codegree": cmd_codegree,
    "check-theorem": cmd_check_theorem,
    "scan": cmd_scan,
    "verify-absorbing": cmd_verify_absorbing,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in COMMON_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (HypermatchError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"hypermatch: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
