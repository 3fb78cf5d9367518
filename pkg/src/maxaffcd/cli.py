"""Command line entry point: ``maxaffcd <subcommand> ...``.

Exit codes: 0 converged or verified, 1 input error, 2 diverging (or a
detected cycle), 3 sweep limit reached.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import decomposition as dec
from . import maxaff, midpoint, mrf, oracle
from ._numeric import format_number
from .generate import generate_grid, generate_maxaff
from .io import ParseError, dumps_maxaff, dumps_mrf, load_model, parse_maxaff, trace_row, write_trace
from .maxaff import Verdict

EXIT_OK, EXIT_INPUT, EXIT_DIVERGING, EXIT_MAX_SWEEPS = 0, 1, 2, 3

_EXIT = {
    Verdict.CONVERGED: EXIT_OK,
    Verdict.CONSTANT: EXIT_OK,
    Verdict.DIVERGING: EXIT_DIVERGING,
    Verdict.UNBOUNDED: EXIT_DIVERGING,
    Verdict.MAX_SWEEPS: EXIT_MAX_SWEEPS,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _nonneg(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _common(p):
    p.add_argument("--eps", type=_nonneg, default=1e-9)
    p.add_argument("--max-sweeps", type=_positive_int, default=10000)
    p.add_argument("--exact", action="store_true", help="rational arithmetic")
    p.add_argument("--trace", metavar="PATH", help="write a CSV trace of every update")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=("cyclic", "shuffle"), default="cyclic")
    p.add_argument("--check-oracle", action="store_true",
                   help="cross-check the result with brute-force references")


def build_parser():
    parser = _Parser(prog="maxaffcd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="coordinate descent on a JSON max-of-affine instance")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--divergence-budget", type=float, default=None)

    p = sub.add_parser("midpoint", help="mid-point rule coordinate descent (exact)")
    p.add_argument("instance")
    _common(p)

    p = sub.add_parser("diffusion", help="max-sum diffusion on an MRF or UAI model")
    p.add_argument("model")
    _common(p)
    p.add_argument("--log-domain", action="store_true", help="take logs of UAI table entries")
    p.add_argument("--dump", metavar="PATH", help="write the messages as JSON")

    p = sub.add_parser("mma", help="max-marginal averaging over a chain decomposition")
    p.add_argument("model")
    _common(p)
    p.add_argument("--log-domain", action="store_true")
    p.add_argument("--decomp", choices=("rows-cols",), default="rows-cols")
    p.add_argument("--dump", metavar="PATH", help="write subproblem weights and messages as JSON")

    p = sub.add_parser("demo", help="built-in demonstrations")
    p.add_argument("name", choices=("cycle",))

    p = sub.add_parser("gen", help="write a seeded random instance")
    p.add_argument("kind", choices=("maxaff", "grid"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--coeffs", default="-1,1", help="comma separated coefficient set")
    p.add_argument("--rows", type=int, default=4)
    p.add_argument("--cols", type=int, default=4)
    p.add_argument("--labels", type=int, default=3)
    p.add_argument("--low", type=float, default=-1.0)
    p.add_argument("--high", type=float, default=1.0)
    p.add_argument("-o", "--output", help="output path (default stdout)")
    return parser


def _fmt_vec(values):
    return "[" + ", ".join(format_number(v) for v in values) + "]"


def _solve(args):
    mode = "exact" if args.exact else "float"
    instance, x0 = parse_maxaff(args.instance, mode)
    eps = args.eps
    if args.exact:
        from fractions import Fraction

        eps = Fraction(repr(args.eps))
    report = maxaff.run(
        instance, x0, eps=eps, max_sweeps=args.max_sweeps, order=args.order, seed=args.seed,
        divergence_budget=args.divergence_budget, trace=bool(args.trace),
        certify=bool(args.trace) and args.exact,
    )
    print(f"verdict: {report.verdict.value}")
    print(f"sweeps: {report.sweeps}  updates: {report.updates}  eta: {format_number(report.eta)}")
    print(f"objective: {format_number(report.objective)}")
    print(f"x: {_fmt_vec(report.x)}")
    if args.trace:
        rows = [
            trace_row(sw, up, "maxaff", j, d, eta, f,
                      (led.before, led.after) if led is not None else None)
            for sw, up, j, d, eta, f, led in report.trace
        ]
        write_trace(args.trace, rows)
    if args.check_oracle and report.pruned is not None:
        sub = report.pruned
        state = maxaff.initial_state(sub, [report.x[j] for j in report.kept_columns])
        worst = 0
        for j in range(sub.n):
            _, lo, hi = oracle.reference_envelope(sub, state.x, j, ignore_constant=True)
            worst = max(worst, abs(state.x[j] - lo), abs(state.x[j] - hi))
        print(f"oracle fixed-point residual: {format_number(worst)}")
    return _EXIT[report.verdict]


def _midpoint(args):
    instance, x0 = parse_maxaff(args.instance, "exact")
    limit = args.max_sweeps * max(instance.n, 1)
    traj = midpoint.run_midpoint(instance, x0, max_updates=limit)
    for k, it in enumerate(traj.iterates):
        print(f"{k:4d} {_fmt_vec(it)}  f={format_number(traj.objectives[k])}")
    if args.trace:
        rows = []
        for k, j in enumerate(traj.coords):
            d = traj.iterates[k + 1][j] - traj.iterates[k][j]
            rows.append(trace_row(k // instance.n + 1, k + 1, "midpoint", j, d, abs(d),
                                  traj.objectives[k + 1]))
        write_trace(args.trace, rows)
    if traj.fixed:
        print("verdict: fixed point")
        return EXIT_OK
    if traj.period is not None:
        print(f"verdict: cycle of period {traj.period} starting at update {traj.cycle_start}")
        return EXIT_DIVERGING
    print("verdict: update limit reached")
    return EXIT_MAX_SWEEPS


def _feature_label(feature):
    if len(feature) == 2:
        return f"{feature[0]}:{feature[1]}"
    return f"{feature[0]}-{feature[1]}:{feature[2]}-{feature[3]}"


def _model_oracle(model, bound, label):
    try:
        F, arg = oracle.brute_force_map(model)
    except oracle.OracleSizeError as exc:
        print(f"oracle skipped: {exc}")
        return True
    ok = F <= bound + 1e-9 * (1 + abs(F))
    print(f"oracle MAP value: {format_number(F)}  argmax: {list(arg)}  {label} >= F: {ok}")
    return ok


def _diffusion(args):
    model = load_model(args.model, "exact" if args.exact else "float", args.log_domain)
    report = mrf.run_diffusion(model, eps=args.eps, max_sweeps=args.max_sweeps,
                               order=args.order, seed=args.seed, trace=bool(args.trace))
    rep = mrf.reparameterize(model, report.delta)
    u2 = mrf.bound_u2(rep)
    print(f"verdict: {report.verdict.value}")
    print(f"sweeps: {report.sweeps}  updates: {report.updates}  eta: {format_number(report.eta)}")
    print(f"U2: {format_number(u2)}  U1: {format_number(mrf.bound_u1(rep))}")
    print(f"residual: {format_number(mrf.diffusion_residual(model, report.delta))}")
    if args.trace:
        write_trace(args.trace, [
            trace_row(sw, up, "diffusion", f"{i}-{j}-{x}", d, eta, obj)
            for sw, up, (i, j, x), d, eta, obj in report.trace
        ])
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            json.dump({f"{i}-{j}-{x}": format_number(d) for (i, j, x), d in report.delta.items()},
                      fh, indent=1)
            fh.write("\n")
    if args.check_oracle:
        n_terms = model.n_nodes + len(model.pairwise)
        if not _model_oracle(model, n_terms * u2, "(|V|+|E|)*U2"):
            return EXIT_INPUT
    return _EXIT[report.verdict]


def _mma(args):
    model = load_model(args.model, "exact" if args.exact else "float", args.log_domain)
    decomp = dec.build_rows_cols_decomposition(model)
    report = dec.run_mma(decomp, eps=args.eps, max_sweeps=args.max_sweeps,
                         order=args.order, seed=args.seed, trace=bool(args.trace))
    values = [dec.chain_value(s) for s in report.subproblems]
    print(f"verdict: {report.verdict.value}")
    print(f"subproblems: {len(values)}  sweeps: {report.sweeps}  updates: {report.updates}"
          f"  eta: {format_number(report.eta)}")
    print(f"sum bound: {format_number(sum(values))}  "
          f"max bound: {format_number(len(values) * max(values))}")
    print(f"residual: {format_number(dec.mma_residual(decomp, report.delta))}")
    if args.trace:
        write_trace(args.trace, [
            trace_row(sw, up, "mma", f"{_feature_label(f)}/({s},{t})", d, eta, obj)
            for sw, up, (f, s, t), d, eta, obj in report.trace
        ])
    if args.dump:
        doc = {
            "subproblems": [
                {"nodes": list(s.nodes),
                 "unary": [[format_number(v) for v in r] for r in s.unary],
                 "pairwise": [[[format_number(v) for v in r] for r in m] for m in s.pairwise]}
                for s in report.subproblems
            ],
            "messages": {
                f"{_feature_label(f)}/({s},{t})": format_number(d)
                for (f, s, t), d in report.delta.items()
            },
        }
        subs = ",\n".join("  " + json.dumps(sp) for sp in doc["subproblems"])
        msgs = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc["messages"].items())
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write('{\n "subproblems": [\n' + subs + '\n ],\n "messages": ')
            fh.write("{\n" + msgs + "\n }\n}\n" if msgs else "{}\n}\n")
    if args.check_oracle and not _model_oracle(model, sum(values), "sum bound"):
        return EXIT_INPUT
    return _EXIT[report.verdict]


def _demo(args):
    report = midpoint.verify_cycle_instance()
    traj = report.trajectory
    print("mid-point rule on max{0, Ax - b}, cyclic order, from (0, 0, 0):")
    for k, j in enumerate(traj.coords):
        print(f"  update {k + 1:2d}  x{j + 1}  ->  {_fmt_vec(traj.iterates[k + 1])}")
    print(f"period: {traj.period}")
    print(f"all 12 points satisfy all 12 halfspaces: {report.points_feasible}")
    print(f"each halfspace tight at exactly its own point: {report.tight_exactly_designated}")
    print(f"trajectory matches the table: {report.trajectory_matches}")
    for failure in report.failures:
        print(f"FAIL: {failure}")
    return EXIT_OK if report.ok else EXIT_INPUT


def _gen(args):
    if args.kind == "maxaff":
        coeffs = [int(c) for c in args.coeffs.split(",")]
        text = dumps_maxaff(generate_maxaff(args.m, args.n, args.density, coeffs, seed=args.seed))
    else:
        text = dumps_mrf(generate_grid(args.rows, args.cols, args.labels,
                                       (args.low, args.high), seed=args.seed))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "solve": _solve, "midpoint": _midpoint, "diffusion": _diffusion, "mma": _mma,
    "demo": _demo, "gen": _gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ValueError, KeyError, OSError, oracle.OracleSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
