"""Pairwise-decomposable cost function network problems.

A problem has ``N`` nodes; node ``i`` picks one of ``D_i`` choices, each of
which names a global seat.  The score of an assignment is

    offset + sum_i alpha_i[s_i] + sum_{i<j} beta_ij[s_i, s_j]

where the guest-overlap part of ``beta`` is kept implicit: any two nodes
whose choices name the same seat pay ``overlap_penalty``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class CfnProblem:
    choices: tuple[np.ndarray, ...]
    one_node: tuple[np.ndarray, ...]
    two_node: Mapping[tuple[int, int], np.ndarray]
    constant_offset: float = 0.0
    overlap_penalty: Optional[float] = None
    # seats held by guests folded out of the network; a node landing on one
    # counts as an overlap (its cost is already carried by one_node)
    fixed_seats: tuple[int, ...] = ()
    _nbrs: list = field(init=False, repr=False)

    def __post_init__(self):
        choices = tuple(np.asarray(c, dtype=np.int64) for c in self.choices)
        one = tuple(np.asarray(a, dtype=float) for a in self.one_node)
        n = len(choices)
        if len(one) != n:
            raise ValueError("one_node must have one table per node")
        for i, (c, a) in enumerate(zip(choices, one)):
            if c.ndim != 1 or len(c) == 0:
                raise ValueError(f"node {i} has no choices")
            if a.shape != c.shape:
                raise ValueError(f"one-node table {i} has shape {a.shape}, expected {c.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite one-node score at node {i}")
        two = {}
        for (i, j), block in self.two_node.items():
            if not 0 <= i < j < n:
                raise ValueError(f"bad two-node key {(i, j)}")
            block = np.asarray(block, dtype=float)
            if block.shape != (len(choices[i]), len(choices[j])):
                raise ValueError(f"block {(i, j)} has shape {block.shape}")
            if not np.all(np.isfinite(block)):
                raise ValueError(f"non-finite score in block {(i, j)}")
            if np.any(block):
                two[(i, j)] = block
        if self.overlap_penalty is not None and not self.overlap_penalty > 0:
            raise ValueError("overlap penalty must be positive")
        object.__setattr__(self, "choices", choices)
        object.__setattr__(self, "one_node", one)
        object.__setattr__(self, "two_node", dict(sorted(two.items())))
        object.__setattr__(self, "constant_offset", float(self.constant_offset))
        object.__setattr__(self, "fixed_seats", tuple(int(s) for s in self.fixed_seats))
        nbrs = [[] for _ in range(n)]
        for (i, j), block in self.two_node.items():
            nbrs[i].append((j, block))
            nbrs[j].append((i, block.T))
        object.__setattr__(self, "_nbrs", nbrs)

    @property
    def node_count(self) -> int:
        return len(self.choices)

    @property
    def choice_counts(self) -> list[int]:
        return [len(c) for c in self.choices]

    def seat_of(self, node: int, choice: int) -> int:
        return int(self.choices[node][choice])

    def overlap_block(self, i: int, j: int) -> np.ndarray:
        if self.overlap_penalty is None:
            return np.zeros((len(self.choices[i]), len(self.choices[j])))
        eq = self.choices[i][:, None] == self.choices[j][None, :]
        return eq * float(self.overlap_penalty)

    def pair_block(self, i: int, j: int) -> np.ndarray:
        """Full two-node block for ``i < j``: stored terms plus the overlap term."""
        block = self.overlap_block(i, j)
        if (i, j) in self.two_node:
            block = block + self.two_node[(i, j)]
        return block

    def interacting_pairs(self) -> list[tuple[int, int]]:
        """Every ``(i, j)``, ``i < j``, whose full block is not identically zero."""
        pairs = set(self.two_node)
        if self.overlap_penalty is not None:
            n = self.node_count
            for i in range(n):
                for j in range(i + 1, n):
                    if np.intersect1d(self.choices[i], self.choices[j]).size:
                        pairs.add((i, j))
        return sorted(pairs)

    def max_abs_beta(self) -> float:
        """Largest single two-node entry in magnitude, overlap term included."""
        m = max((float(np.abs(b).max()) for b in self.two_node.values()), default=0.0)
        if self.overlap_penalty is not None and self.node_count > 1:
            m = max(m, float(self.overlap_penalty))
        return m


@dataclass(frozen=True)
class Assignment:
    choice_index: tuple[int, ...]

    def __init__(self, choice_index: Sequence[int]):
        object.__setattr__(self, "choice_index", tuple(int(c) for c in choice_index))

    def __len__(self):
        return len(self.choice_index)

    def __getitem__(self, i):
        return self.choice_index[i]

    def __iter__(self):
        return iter(self.choice_index)

    def replace(self, node: int, choice: int) -> "Assignment":
        c = list(self.choice_index)
        c[node] = choice
        return Assignment(c)

    def seats(self, problem: CfnProblem) -> list[int]:
        return [problem.seat_of(i, c) for i, c in enumerate(self.choice_index)]


def check_assignment(problem: CfnProblem, a: Assignment) -> None:
    if len(a) != problem.node_count:
        raise ValueError(f"assignment has {len(a)} entries for {problem.node_count} nodes")
    for i, c in enumerate(a):
        if not 0 <= c < len(problem.choices[i]):
            raise ValueError(f"choice {c} out of range at node {i}")


def count_overlaps(problem: CfnProblem, a: Assignment) -> int:
    """Colliding guest pairs: node-node pairs sharing a seat, plus nodes on fixed seats."""
    seats = a.seats(problem)
    counts: dict[int, int] = {}
    for s in seats:
        counts[s] = counts.get(s, 0) + 1
    n = sum(k * (k - 1) // 2 for k in counts.values())
    return n + sum(counts.get(s, 0) for s in problem.fixed_seats)


def evaluate(problem: CfnProblem, a: Assignment) -> float:
    check_assignment(problem, a)
    c = a.choice_index
    total = problem.constant_offset
    for i, table in enumerate(problem.one_node):
        total += table[c[i]]
    for (i, j), block in problem.two_node.items():
        total += block[c[i], c[j]]
    if problem.overlap_penalty is not None:
        seats = a.seats(problem)
        counts: dict[int, int] = {}
        for s in seats:
            counts[s] = counts.get(s, 0) + 1
        total += problem.overlap_penalty * sum(k * (k - 1) // 2 for k in counts.values())
    return float(total)


def delta_evaluate(problem: CfnProblem, a: Assignment, node: int, new_choice: int) -> float:
    """Score change from moving ``node`` to ``new_choice``, touching only that node's terms."""
    old = a[node]
    if new_choice == old:
        return 0.0
    c = a.choice_index
    alpha = problem.one_node[node]
    d = alpha[new_choice] - alpha[old]
    for j, block in problem._nbrs[node]:
        d += block[new_choice, c[j]] - block[old, c[j]]
    p = problem.overlap_penalty
    if p is not None:
        s_old = problem.seat_of(node, old)
        s_new = problem.seat_of(node, new_choice)
        for j, cj in enumerate(c):
            if j == node:
                continue
            sj = problem.seat_of(j, cj)
            d += p * ((sj == s_new) - (sj == s_old))
    return float(d)


@dataclass(frozen=True)
class SolutionRecord:
    assignment: Assignment
    score: float
    overlap_count: int
    solver_tag: str
    seed: int
    steps_or_shots: int
    # other distinct low-scoring assignments seen by the run, best first
    pool: tuple[Assignment, ...] = ()

    @classmethod
    def from_assignment(cls, problem: CfnProblem, a: Assignment, solver_tag: str,
                        seed: int = 0, steps_or_shots: int = 0,
                        pool: Sequence[Assignment] = ()) -> "SolutionRecord":
        return cls(a, evaluate(problem, a), count_overlaps(problem, a),
                   solver_tag, seed, steps_or_shots, tuple(pool))
