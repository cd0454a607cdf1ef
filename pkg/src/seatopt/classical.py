"""Exact enumeration, Metropolis Monte Carlo and hill-flattening solvers."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from . import _kernels
from .cfn import Assignment, CfnProblem, SolutionRecord, evaluate

BRUTE_FORCE_LIMIT = 10**8


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling from ``t_high`` to ``t_low`` over ``steps`` moves."""

    t_high: float
    t_low: float
    steps: int
    shape: Literal["geometric"] = "geometric"

    def __post_init__(self):
        if not (self.t_high >= self.t_low > 0):
            raise ValueError(f"need t_high >= t_low > 0, got {self.t_high}, {self.t_low}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.shape != "geometric":
            raise ValueError(f"unsupported schedule shape {self.shape!r}")

    def temperature(self, step: int) -> float:
        if self.steps == 1:
            return self.t_high
        return self.t_high * (self.t_low / self.t_high) ** (step / (self.steps - 1))

    @classmethod
    def default(cls, problem: CfnProblem, steps: int) -> "AnnealSchedule":
        t_high = problem.max_abs_beta()
        if not t_high > 0:
            t_high = 1.0
        return cls(max(t_high, 0.01), 0.01, steps)


@dataclass(frozen=True)
class HfConfig:
    ceiling_h: float
    slope_kappa: float = 0.1

    def __post_init__(self):
        if not self.ceiling_h > 0:
            raise ValueError("ceiling_h must be positive")
        if not 0 < self.slope_kappa <= 1:
            raise ValueError("slope_kappa must lie in (0, 1]")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.  ``schedule=None`` picks :meth:`AnnealSchedule.default`
    for ``steps`` moves; ``keep`` is how many distinct best states a trajectory
    remembers."""

    steps: int = 1000
    schedule: Optional[AnnealSchedule] = None
    swap_move_fraction: float = 0.5
    seed: int = 0
    keep: int = 8

    def __post_init__(self):
        if not 0.0 <= self.swap_move_fraction <= 1.0:
            raise ValueError("swap_move_fraction must lie in [0, 1]")
        if self.keep < 1:
            raise ValueError("keep must be >= 1")

    def resolved_schedule(self, problem: CfnProblem) -> AnnealSchedule:
        return self.schedule or AnnealSchedule.default(problem, self.steps)


def hf_transform(raw_score: float, best_so_far: float, config: HfConfig) -> float:
    """Soft-clamp scores more than ``ceiling_h`` above the best seen so far."""
    top = best_so_far + config.ceiling_h
    if raw_score <= top:
        return raw_score
    return top + config.slope_kappa * (raw_score - top)


def default_hf_config(problem: CfnProblem, mc: McConfig) -> HfConfig:
    return HfConfig(ceiling_h=10.0 * mc.resolved_schedule(problem).t_high, slope_kappa=0.1)


@dataclass
class Trajectory:
    """Raw output of one annealing run."""

    pool: list[Assignment]
    pool_scores: list[float]
    trace: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)


def _anneal(problem: CfnProblem, mc: McConfig, hf: Optional[HfConfig], record_trace: bool,
            init: Optional[Assignment] = None) -> Trajectory:
    sched = mc.resolved_schedule(problem)
    packed = _kernels.PackedCfn(problem)
    start = np.full(problem.node_count, -1, dtype=np.int64)
    if init is not None:
        start[:] = init.choice_index
    pool_states, scores, size, trace, states = _kernels.anneal_cfn(
        mc.seed % 2**32, start, sched.steps, sched.t_high, sched.t_low,
        mc.swap_move_fraction, hf is not None,
        hf.ceiling_h if hf else 0.0, hf.slope_kappa if hf else 1.0,
        mc.keep, record_trace, *packed.args())
    pool = [Assignment(pool_states[q]) for q in range(size)]
    return Trajectory(pool, [float(s) for s in scores[:size]], trace, states)


def _record(problem, traj: Trajectory, tag: str, mc: McConfig) -> SolutionRecord:
    # re-score with the reference evaluator; the kernel's running sum is only a guide
    exact = [evaluate(problem, a) for a in traj.pool]
    order = sorted(range(len(exact)), key=lambda q: (exact[q], q))
    pool = [traj.pool[q] for q in order]
    return SolutionRecord.from_assignment(problem, pool[0], tag, mc.seed,
                                          mc.resolved_schedule(problem).steps, pool[1:])


def mc_solve(problem: CfnProblem, config: McConfig) -> SolutionRecord:
    """Annealed Metropolis Monte Carlo; returns the best state of the trajectory."""
    traj = _anneal(problem, config, None, False)
    return _record(problem, traj, "MC", config)


def hf_solve(problem: CfnProblem, config: McConfig, hf: Optional[HfConfig] = None) -> SolutionRecord:
    """Hill-flattening Monte Carlo: like :func:`mc_solve`, but the Metropolis test sees
    scores passed through :func:`hf_transform` relative to the best raw score so far."""
    hf = hf or default_hf_config(problem, config)
    traj = _anneal(problem, config, hf, False)
    return _record(problem, traj, "HF", config)


def trajectory(problem: CfnProblem, config: McConfig, hf: Optional[HfConfig] = None) -> Trajectory:
    """One run with the score and choice vector recorded after every step."""
    return _anneal(problem, config, hf, True)


@dataclass(frozen=True)
class BruteForceResult:
    optimum: float
    optima: list[SolutionRecord]


def brute_force_solve(problem: CfnProblem, mode: Literal["all", "permutations"] = "permutations",
                      limit: int = BRUTE_FORCE_LIMIT, chunk: int = 1 << 16) -> BruteForceResult:
    """Enumerate every choice vector and return all minimisers in lexicographic order.

    ``mode="permutations"`` skips states where two guests share a seat
    (including seats held by fixed guests).
    """
    if mode not in ("all", "permutations"):
        raise ValueError(f"unknown mode {mode!r}")
    counts = problem.choice_counts
    n = len(counts)
    total = math.prod(counts)
    if total > limit:
        raise SearchSpaceTooLarge(f"{total} states exceeds the limit of {limit}")
    if n == 0:
        rec = SolutionRecord.from_assignment(problem, Assignment(()), "brute")
        return BruteForceResult(rec.score, [rec])

    fixed = np.array(problem.fixed_seats, dtype=np.int64)
    best = math.inf
    hits: list[np.ndarray] = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.empty((n, idx.size), dtype=np.int64)
        rem = idx.copy()
        for i in range(n - 1, -1, -1):
            digits[i] = rem % counts[i]
            rem //= counts[i]
        seats = np.stack([problem.choices[i][digits[i]] for i in range(n)])
        score = np.full(idx.size, problem.constant_offset)
        for i in range(n):
            score += problem.one_node[i][digits[i]]
        for (i, j), block in problem.two_node.items():
            score += block[digits[i], digits[j]]
        clash = np.zeros(idx.size, dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                clash += seats[i] == seats[j]
        if problem.overlap_penalty is not None:
            score += problem.overlap_penalty * clash
        if mode == "permutations":
            if fixed.size:
                clash += np.isin(seats, fixed).sum(axis=0)
            score = np.where(clash == 0, score, np.inf)
        m = score.min()
        if not np.isfinite(m):
            continue
        if m < best - _tol(best):
            best = float(m)
            hits = []
        sel = np.nonzero(score <= best + _tol(best))[0]
        if sel.size:
            hits.append(digits[:, sel].T)
    if not hits:
        raise ValueError("no feasible state")
    cand = np.concatenate(hits)
    records = [SolutionRecord.from_assignment(problem, Assignment(row), "brute") for row in cand]
    best = min(r.score for r in records)
    records = [r for r in records if r.score <= best + _tol(best)]
    return BruteForceResult(best, records)


def _tol(x: float) -> float:
    return 1e-9 * max(1.0, abs(x)) if math.isfinite(x) else 0.0


@dataclass(frozen=True)
class ReplicateResult:
    best: SolutionRecord
    best_index: int
    records: list[SolutionRecord]


Solver = Callable[[CfnProblem, int], SolutionRecord]


def mc_solver(steps: int = 1000, **kw) -> Solver:
    """Seeded :func:`mc_solve` closure for :func:`run_replicates`."""
    def solve(problem, seed):
        return mc_solve(problem, McConfig(steps=steps, seed=seed, **kw))
    return solve


def hf_solver(steps: int = 1000, hf: Optional[HfConfig] = None, **kw) -> Solver:
    def solve(problem, seed):
        return hf_solve(problem, McConfig(steps=steps, seed=seed, **kw), hf)
    return solve


def run_replicates(problem: CfnProblem, solver: Solver, replicate_count: int,
                   base_seed: int = 0, workers: int = 1) -> ReplicateResult:
    """Run ``solver`` with seeds ``base_seed + r``; the best record wins, lowest index on ties."""
    if replicate_count < 1:
        raise ValueError("replicate_count must be >= 1")
    seeds = [base_seed + r for r in range(replicate_count)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(lambda s: solver(problem, s), seeds))
    else:
        records = [solver(problem, s) for s in seeds]
    best_index = min(range(len(records)), key=lambda r: (records[r].score, r))
    return ReplicateResult(records[best_index], best_index, records)


def distinct_optima(problem: CfnProblem, records, optimum: float) -> set[tuple[int, ...]]:
    """Distinct assignments scoring ``optimum`` among the records and their pools."""
    found = set()
    for rec in records:
        for a in (rec.assignment, *rec.pool):
            if evaluate(problem, a) <= optimum + _tol(optimum):
                found.add(a.choice_index)
    return found
