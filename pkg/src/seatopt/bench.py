"""Solver x problem benchmark matrix with a round-trippable TSV report."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .cfn import Assignment, CfnProblem, SolutionRecord, count_overlaps, evaluate
from .classical import (
    AnnealSchedule,
    HfConfig,
    SearchSpaceTooLarge,
    brute_force_solve,
    hf_solver,
    mc_solver,
    run_replicates,
)
from .compiler import InfeasibleProblem, compile_cfn
from .geometry import SeatingProblem
from .problem_io import load_problem
from .qubo import make_sampler, solve_via_qubo

FORMAT_VERSION = 1
SOLVER_KINDS = ("brute", "mc", "hf", "qubo-oh", "qubo-dw", "qubo-ab")
QUBO_ENCODINGS = {"qubo-oh": "one_hot", "qubo-dw": "domain_wall", "qubo-ab": "approx_binary"}
NO_VALID = "no_valid_solution"
SKIPPED = "skipped"
COLUMNS = ("solver_tag", "problem_name", "best_score", "overlap_count", "wall_time",
           "valid_fraction", "marker", "assignment")


def _short(n: int) -> str:
    for unit, size in (("M", 10**6), ("k", 10**3)):
        if n >= size and n % size == 0:
            return f"{n // size}{unit}"
    return str(n)


@dataclass(frozen=True)
class SolverSpec:
    """One column of the benchmark.

    ``steps`` is the MC/HF trajectory length and the number of annealing
    sweeps per shot for the QUBO solvers.
    """

    kind: str
    steps: int = 1000
    shots: int = 1000
    replicates: int = 1
    swap_frac: float = 0.5
    hf_ceiling: Optional[float] = None
    hf_kappa: float = 0.1
    lambda_enc: Optional[float] = None
    sampler: str = "anneal"
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.kind!r}; choose from {', '.join(SOLVER_KINDS)}")
        if self.steps < 1 or self.shots < 1 or self.replicates < 1:
            raise ValueError("steps, shots and replicates must be >= 1")
        if self.lambda_enc is not None and not self.lambda_enc > 0:
            raise ValueError("lambda_enc must be positive")

    @property
    def tag(self) -> str:
        if self.label:
            return self.label
        if self.kind == "brute":
            return "brute"
        if self.kind in ("mc", "hf"):
            return f"{self.kind.upper()} {_short(self.steps)}"
        return f"{self.kind[5:].upper()} {_short(self.shots)}"

    @classmethod
    def parse(cls, text: str, **defaults) -> "SolverSpec":
        """``kind`` or ``kind:N``; N is steps for mc/hf and shots for QUBO solvers."""
        kind, _, n = text.partition(":")
        kw = dict(defaults)
        if n:
            try:
                value = int(n)
            except ValueError:
                raise ValueError(f"bad count in solver spec {text!r}") from None
            kw["shots" if kind.startswith("qubo-") else "steps"] = value
        return cls(kind, **kw)


@dataclass(frozen=True)
class ReportRow:
    solver_tag: str
    problem_name: str
    best_score: Optional[float]
    overlap_count: Optional[int]
    wall_time: float
    valid_fraction: Optional[float] = None
    marker: str = ""
    # choice index per free guest of the compiled network
    assignment: Optional[tuple[int, ...]] = None


@dataclass
class BenchmarkReport:
    rows: list[ReportRow] = field(default_factory=list)
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class CellResult:
    """Everything one solver run produced; ``row`` is its report line."""

    row: ReportRow
    record: Optional[SolutionRecord]
    detail: object = None


def run_solver(problem: CfnProblem, spec: SolverSpec, seed: int, problem_name: str = "") -> CellResult:
    t0 = time.perf_counter()
    valid_fraction = None
    marker = ""
    record = None
    detail = None
    try:
        if spec.kind == "brute":
            res = brute_force_solve(problem)
            record, detail = res.optima[0], res
        elif spec.kind in ("mc", "hf"):
            kw = dict(swap_move_fraction=spec.swap_frac)
            if spec.kind == "mc":
                solver = mc_solver(spec.steps, **kw)
            else:
                ceiling = spec.hf_ceiling
                if ceiling is None:
                    ceiling = 10.0 * AnnealSchedule.default(problem, spec.steps).t_high
                hf = HfConfig(ceiling, spec.hf_kappa)
                solver = hf_solver(spec.steps, hf, **kw)
            res = run_replicates(problem, solver, spec.replicates, base_seed=seed)
            record, detail = res.best, res
        else:
            res = solve_via_qubo(problem, QUBO_ENCODINGS[spec.kind], spec.shots, seed=seed,
                                 sweeps=spec.steps, lam=spec.lambda_enc,
                                 sampler=make_sampler(spec.sampler, spec.steps))
            valid_fraction = res.valid_fraction
            record, detail = res.best, res
            if res.no_valid_solution:
                marker = NO_VALID
    except (SearchSpaceTooLarge, InfeasibleProblem):
        marker = SKIPPED
    wall = time.perf_counter() - t0
    row = ReportRow(
        solver_tag=spec.tag,
        problem_name=problem_name,
        best_score=record.score if record else None,
        overlap_count=record.overlap_count if record else None,
        wall_time=wall,
        valid_fraction=valid_fraction,
        marker=marker,
        assignment=tuple(int(c) for c in record.assignment) if record else None,
    )
    return CellResult(row, record, detail)


ProblemArg = Union[str, tuple[str, SeatingProblem]]


def _named(p: ProblemArg) -> tuple[str, SeatingProblem]:
    if isinstance(p, str):
        return (p.split(":", 1)[1] if p.startswith("builtin:") else p), load_problem(p)
    return p


def run_benchmark(problems: Sequence[ProblemArg], solvers: Sequence[SolverSpec],
                  seed: int = 0) -> BenchmarkReport:
    """Every problem against every solver, problems outermost.

    ``problems`` holds ``builtin:NAME`` strings, paths or ``(name, SeatingProblem)``
    pairs.  Cells that cannot run are kept as ``skipped`` rows.
    """
    report = BenchmarkReport()
    for p in problems:
        name, sp = _named(p)
        cfn, _ = compile_cfn(sp)
        for spec in solvers:
            report.rows.append(run_solver(cfn, spec, seed, name).row)
    return report


def verify_row(problem: CfnProblem, row: ReportRow, tol: float = 1e-9) -> bool:
    """Re-score the stored assignment and compare with the reported numbers."""
    if row.assignment is None:
        return row.best_score is None
    a = Assignment(row.assignment)
    return (abs(evaluate(problem, a) - row.best_score) <= tol * max(1.0, abs(row.best_score))
            and count_overlaps(problem, a) == row.overlap_count)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, tuple):
        return ",".join(str(v) for v in x) or "-"
    return str(x)


def emit_tsv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version {report.format_version}\n")
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(COLUMNS)
    for r in report.rows:
        w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def parse_tsv(text: str) -> BenchmarkReport:
    lines = text.splitlines()
    version = FORMAT_VERSION
    if lines and lines[0].startswith("#"):
        parts = lines[0][1:].split()
        if len(parts) != 2 or parts[0] != "format_version":
            raise ValueError(f"bad report preamble {lines[0]!r}")
        version = int(parts[1])
        lines = lines[1:]
    reader = csv.reader(lines, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ValueError(f"bad report header {header!r}")

    def opt(v, kind):
        return kind(v) if v != "" else None

    rows = []
    for rec in reader:
        if len(rec) != len(COLUMNS):
            raise ValueError(f"expected {len(COLUMNS)} columns, got {len(rec)}")
        d = dict(zip(COLUMNS, rec))
        rows.append(ReportRow(
            solver_tag=d["solver_tag"],
            problem_name=d["problem_name"],
            best_score=opt(d["best_score"], float),
            overlap_count=opt(d["overlap_count"], int),
            wall_time=float(d["wall_time"]),
            valid_fraction=opt(d["valid_fraction"], float),
            marker=d["marker"],
            assignment=_parse_assignment(d["assignment"]),
        ))
    return BenchmarkReport(rows, version)


def _parse_assignment(v: str) -> Optional[tuple[int, ...]]:
    if v == "":
        return None
    if v == "-":
        return ()
    return tuple(int(x) for x in v.split(","))


def format_table(report: BenchmarkReport) -> str:
    """Human-readable matrix: one line per problem, ``score(overlaps)`` per solver."""
    tags = list(dict.fromkeys(r.solver_tag for r in report.rows))
    names = list(dict.fromkeys(r.problem_name for r in report.rows))
    cells = {(r.problem_name, r.solver_tag): r for r in report.rows}
    width = max([12] + [len(t) + 2 for t in tags])
    out = ["problem".ljust(10) + "".join(t.rjust(width) for t in tags)]
    for n in names:
        line = n.ljust(10)
        for t in tags:
            r = cells.get((n, t))
            if r is None:
                s = ""
            elif r.marker == NO_VALID:
                s = "NVS"
            elif r.marker == SKIPPED:
                s = "skipped"
            else:
                s = f"{r.best_score:.2f}({r.overlap_count})"
            line += s.rjust(width)
        out.append(line)
    return "\n".join(out)


def iter_specs(texts: Iterable[str], **defaults) -> list[SolverSpec]:
    return [SolverSpec.parse(t, **defaults) for t in texts]
