"""Command-line entry points: ``optimize-seating`` and ``seating-benchmark``."""
from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

from .bench import (
    NO_VALID,
    SKIPPED,
    SOLVER_KINDS,
    BenchmarkReport,
    SolverSpec,
    emit_tsv,
    format_table,
    run_benchmark,
    run_solver,
)
from .chart import render_chart
from .classical import BRUTE_FORCE_LIMIT
from .compiler import InfeasibleProblem, compile_cfn
from .problem_io import BUILTIN_NAMES, ProblemFormatError, load_problem
from .qubo import SAMPLERS


class _Fail(Exception):
    pass


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _fraction(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _kappa(text):
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return v


def _add_solver_options(p: argparse.ArgumentParser):
    p.add_argument("--steps", type=_positive(int), default=1000,
                   help="MC/HF trajectory length; annealing sweeps per shot for qubo-* (default 1000)")
    p.add_argument("--shots", type=_positive(int), default=1000, help="samples for qubo-* solvers (default 1000)")
    p.add_argument("--replicates", type=_positive(int), default=1, help="independent MC/HF runs (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--swap-frac", type=_fraction, default=0.5, help="share of swap moves in MC/HF (default 0.5)")
    p.add_argument("--hf-ceiling", type=_positive(float), default=None,
                   help="hill-flattening ceiling above the best score (default 10 x starting temperature)")
    p.add_argument("--hf-kappa", type=_kappa, default=0.1, help="slope above the ceiling, 1 disables flattening")
    p.add_argument("--lambda-enc", type=_positive(float), default=None,
                   help="one-hot/domain-wall constraint strength (default: safe bound from the cost tables)")
    p.add_argument("--sampler", choices=sorted(SAMPLERS), default="anneal", help="QUBO sampling backend")


def _spec_kw(args) -> dict:
    return dict(steps=args.steps, shots=args.shots, replicates=args.replicates,
                swap_frac=args.swap_frac, hf_ceiling=args.hf_ceiling, hf_kappa=args.hf_kappa,
                lambda_enc=args.lambda_enc, sampler=args.sampler)


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise _Fail(f"cannot write {path}: {e.strerror or e}") from None


def _load(spec: str):
    try:
        return load_problem(spec)
    except ProblemFormatError as e:
        raise _Fail(f"{spec}: {e}") from None
    except KeyError as e:
        raise _Fail(str(e.args[0])) from None
    except OSError as e:
        raise _Fail(f"cannot read {spec}: {e.strerror or e}") from None


def optimize_main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="optimize-seating",
        description="Solve one seating problem and print the best arrangement found.")
    ap.add_argument("--problem", required=True,
                    help=f"problem file, or builtin:NAME with NAME in {', '.join(BUILTIN_NAMES)}")
    ap.add_argument("--solver", required=True, choices=SOLVER_KINDS)
    _add_solver_options(ap)
    ap.add_argument("--report", help="write a one-row TSV report here")
    ap.add_argument("--chart", help="write an SVG seating chart here")
    args = ap.parse_args(argv)

    try:
        sp = _load(args.problem)
        try:
            cfn, cmap = compile_cfn(sp)
        except InfeasibleProblem as e:
            raise _Fail(str(e)) from None
        spec = SolverSpec(args.solver, **_spec_kw(args))
        name = args.problem.split(":", 1)[1] if args.problem.startswith("builtin:") else args.problem
        if args.solver == "brute" and math.prod(cfn.choice_counts) > BRUTE_FORCE_LIMIT:
            raise _Fail(f"brute force over {math.prod(cfn.choice_counts)} states exceeds "
                        f"the limit of {BRUTE_FORCE_LIMIT}")
        cell = run_solver(cfn, spec, args.seed, name)
        row = cell.row
        if row.marker == SKIPPED:
            raise _Fail("solver could not run")

        print(f"problem   {name}")
        print(f"solver    {row.solver_tag}")
        if row.valid_fraction is not None:
            res = cell.detail
            print(f"qubits    {res.qubits}")
            print(f"valid     {res.valid}/{res.valid + res.invalid} shots ({res.valid_fraction:.3f})")
        if row.marker == NO_VALID:
            print("result    no_valid_solution")
        else:
            print(f"score     {row.best_score:.6g}")
            print(f"overlaps  {row.overlap_count}")
            seating = cmap.seating(cell.record.assignment)
            print("seating")
            for g in (x.id for x in sp.guests):
                seat = sp.seats[seating[g]]
                fixed = "  (fixed)" if g in cmap.fixed else ""
                print(f"  {g:<14} {seat.table_id}:{seat.index_in_table}{fixed}")
        print(f"time      {row.wall_time:.3f}s")

        if args.report:
            _write(args.report, emit_tsv(BenchmarkReport([row])))
        if args.chart:
            seating = cmap.seating(cell.record.assignment) if cell.record else None
            _write(args.chart, render_chart(sp, seating))
    except _Fail as e:
        print(f"optimize-seating: error: {e}", file=sys.stderr)
        return 1
    return 0


def benchmark_main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="seating-benchmark",
        description="Run every solver on every problem and print a score(overlaps) matrix.")
    ap.add_argument("--problems", nargs="+", default=[f"builtin:{n}" for n in BUILTIN_NAMES],
                    help="problem files or builtin:NAME (default: all built-ins)")
    ap.add_argument("--solvers", nargs="*", default=["mc:1000", "mc:30000", "hf:1000", "hf:30000", "brute"],
                    help="solver specs KIND[:N]; N is steps for mc/hf and shots for qubo-* "
                         "(default: mc:1000 mc:30000 hf:1000 hf:30000 brute)")
    _add_solver_options(ap)
    ap.add_argument("--report", help="write the TSV report here")
    args = ap.parse_args(argv)

    kw = _spec_kw(args)
    try:
        try:
            specs = [SolverSpec.parse(s, **kw) for s in args.solvers]
        except ValueError as e:
            raise _Fail(str(e)) from None
        problems = []
        for p in args.problems:
            name = p.split(":", 1)[1] if p.startswith("builtin:") else p
            problems.append((name, _load(p)))
        try:
            report = run_benchmark(problems, specs, args.seed)
        except InfeasibleProblem as e:
            raise _Fail(str(e)) from None
        if report.rows:
            print(format_table(report))
        if args.report:
            _write(args.report, emit_tsv(report))
    except _Fail as e:
        print(f"seating-benchmark: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(optimize_main())
