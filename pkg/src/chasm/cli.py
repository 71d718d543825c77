"""Command-line driver: generators, single passes, pipelines, equivalence
verification, and bound-report aggregation.

Exit codes: 0 success with all bound checks passing, 2 on bound-check or
equivalence failure, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus
from .abp import abp_stats, emit_abp, parse_abp
from .circuit import circuit_stats, emit_circuit, parse_circuit
from .errors import ChasmError
from .passes.depth import (
    PipelineConfig,
    circuit_to_abp,
    run_pipeline,
    to_weakly_skew,
)
from .passes.normalize import collapse_additions, eliminate_subtractions, homogenize
from .poly import equiv_exact, equiv_random, monomial_cap
from .report import bound_report, dump_report_json, render_table, write_csv


def load_any(path: str):
    with open(path) as fh:
        text = fh.read()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        return parse_abp(text) if line.split()[0] == "abp" else parse_circuit(text)
    raise ChasmError(f"{path}: empty file")


def load_circuit(path: str):
    with open(path) as fh:
        return parse_circuit(fh.read())


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_result(obj, path) -> None:
    from .abp import Abp

    _write(path, emit_abp(obj) if isinstance(obj, Abp) else emit_circuit(obj))


def _finish(report, args) -> int:
    if getattr(args, "report", None):
        dump_report_json(report, args.report)
    ok = report.all_ok()
    if not ok:
        print("bound checks FAILED:", file=sys.stderr)
        for b in _failed(report):
            print(f"  {b.name}: claimed {b.claimed}, observed {b.observed}", file=sys.stderr)
    return 0 if ok else 2


def _failed(report):
    out = [b for b in report.bounds if not b.ok]
    for s in report.stages:
        out.extend(_failed(s))
    return out


def cmd_gen(args) -> int:
    spec = corpus.CorpusSpec(
        family=args.family.replace("-", "_"),
        n=args.n,
        k=args.k,
        vars=args.vars,
        size=args.size,
        max_degree=args.max_degree,
        seed=args.seed,
        nodes=args.nodes,
    )
    _emit_result(corpus.gen_corpus(spec), args.output)
    return 0


def cmd_stats(args) -> int:
    obj = load_any(args.file)
    from .abp import Abp

    stats = abp_stats(obj) if isinstance(obj, Abp) else circuit_stats(obj)
    print(json.dumps(stats.to_json(), indent=2))
    return 0


_PASSES = {
    "eliminate-sub": lambda c, a: eliminate_subtractions(c),
    "collapse-add": lambda c, a: collapse_additions(c),
    "homogenize": lambda c, a: homogenize(c, mode=a.mode or "vp"),
    "to-weakly-skew": lambda c, a: to_weakly_skew(c),
    "to-abp": lambda c, a: circuit_to_abp(c),
}


def cmd_pass(args) -> int:
    c = load_circuit(args.file)
    result, report = _PASSES[args.name](c, args)
    if args.output:
        _emit_result(result, args.output)
    rc = _finish(report, args)
    return rc


def cmd_pipeline(args) -> int:
    c = load_circuit(args.file)
    cfg = PipelineConfig(
        target=args.target.replace("-", ""),
        mode=args.mode,
        delta=args.delta,
        prune_zero_terms=not args.no_prune,
        verify=args.verify,
        trials=args.trials,
        seed=args.seed,
    )
    out, report = run_pipeline(c, cfg)
    if args.output:
        _emit_result(out, args.output)
    return _finish(report, args)


def cmd_verify(args) -> int:
    a, b = load_any(args.a), load_any(args.b)
    if args.mode == "exact":
        same = equiv_exact(a, b, monomial_cap())
        payload = {"mode": "exact", "equivalent": same}
    else:
        verdict = equiv_random(a, b, trials=args.trials, seed=args.seed)
        same = verdict.equivalent
        payload = {
            "mode": "random",
            "equivalent": same,
            "trials": verdict.trials,
            "failure_bound": float(verdict.failure_bound),
        }
        if verdict.witness is not None:
            payload["witness"] = verdict.witness
    print(json.dumps(payload, indent=2))
    return 0 if same else 2


def cmd_report(args) -> int:
    named = []
    for path in args.files:
        with open(path) as fh:
            named.append((path, json.load(fh)))
    agg = bound_report(named)
    if args.json:
        print(json.dumps(agg, indent=2))
    else:
        print(render_table(agg))
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(agg, fh, indent=2)
            fh.write("\n")
    if args.csv:
        write_csv(agg, args.csv)
    if args.plot:
        from .plots import render_bounds_figure

        render_bounds_figure(agg, args.plot)
    return 0 if agg["all_bounds_ok"] else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chasm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a corpus circuit")
    g.add_argument("--family", required=True,
                   choices=["ryser", "imm", "power", "random", "bool-reach"])
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--k", type=int, default=0)
    g.add_argument("--vars", type=int, default=0)
    g.add_argument("--size", type=int, default=0)
    g.add_argument("--max-degree", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--nodes", type=int, default=0)
    g.add_argument("-o", "--output", default="-")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", help="print circuit or abp statistics as JSON")
    s.add_argument("file")
    s.set_defaults(func=cmd_stats)

    ps = sub.add_parser("pass", help="run a single transformation pass")
    ps.add_argument("name", choices=sorted(_PASSES))
    ps.add_argument("file")
    ps.add_argument("-o", "--output")
    ps.add_argument("--report")
    ps.add_argument("--mode", choices=["vp", "vp0"], default=None,
                    help="homogenize variant")
    ps.set_defaults(func=cmd_pass)

    pl = sub.add_parser("pipeline", help="run a full reduction pipeline")
    pl.add_argument("target", choices=["depth4", "depth2delta", "polylog", "boolean"])
    pl.add_argument("file")
    pl.add_argument("-o", "--output")
    pl.add_argument("--report")
    pl.add_argument("--mode", choices=["circuit", "formula"], default="circuit")
    pl.add_argument("--delta", type=int, default=2)
    pl.add_argument("--no-prune", action="store_true",
                    help="keep products over structurally-zero entries")
    pl.add_argument("--verify", choices=["exact", "random", "none"], default="exact")
    pl.add_argument("--trials", type=int, default=20)
    pl.add_argument("--seed", type=int, default=0)
    pl.set_defaults(func=cmd_pipeline)

    v = sub.add_parser("verify", help="check two circuits/abps for equivalence")
    v.add_argument("a")
    v.add_argument("b")
    v.add_argument("--mode", choices=["exact", "random"], default="exact")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="aggregate pass reports into one table")
    r.add_argument("files", nargs="+")
    r.add_argument("-o", "--output")
    r.add_argument("--csv")
    r.add_argument("--plot", help="write a bound-headroom figure (png/svg/pdf)")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def run_pipeline_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ChasmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_pipeline_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
