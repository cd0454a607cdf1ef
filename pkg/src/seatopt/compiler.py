"""Compile a :class:`SeatingProblem` into a :class:`CfnProblem`.

Guests are nodes and seats are choices.  Guests with a fixed seat are folded
out of the network: their interactions with free guests become one-node
terms, and interactions among themselves become the constant offset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cfn import Assignment, CfnProblem
from .geometry import (
    ConstraintSpec,
    PairAdjacent,
    PairProximity,
    PairSameTable,
    SeatingProblem,
    SeatPair,
)

__all__ = [
    "ConstraintSpec",
    "PairAdjacent",
    "PairProximity",
    "PairSameTable",
    "NodeChoiceMap",
    "InfeasibleProblem",
    "gaussian_penalty",
    "build_overlap_block",
    "build_pair_block",
    "build_proximity_block",
    "compile_cfn",
]


class InfeasibleProblem(ValueError):
    pass


def gaussian_penalty(d, p_prox: float, lam: float):
    """Gaussian proximity term, normalised so its value at distance 1 is ``p_prox``.

    Works elementwise on arrays.
    """
    # p * exp(-(d/lam)^2) / exp(-1/lam^2), folded into one exponent for accuracy
    return p_prox * np.exp((1.0 - np.square(d)) / (lam * lam))


def build_overlap_block(p_overlap: float, choices_i: Sequence[int], choices_j: Sequence[int]) -> np.ndarray:
    ci = np.asarray(choices_i)[:, None]
    cj = np.asarray(choices_j)[None, :]
    return (ci == cj) * float(p_overlap)


def build_pair_block(p: float, sigma: Iterable[SeatPair],
                     choices_i: Sequence[int], choices_j: Sequence[int]) -> np.ndarray:
    """``p`` wherever the (unordered) seat pair of the two choices is in ``sigma``."""
    sigma = {(a, b) if a < b else (b, a) for a, b in sigma}
    block = np.zeros((len(choices_i), len(choices_j)))
    for a, sa in enumerate(choices_i):
        for b, sb in enumerate(choices_j):
            key = (sa, sb) if sa < sb else (sb, sa)
            if key in sigma:
                block[a, b] = p
    return block


def build_proximity_block(spec: PairProximity, positions: np.ndarray,
                          choices_i: Sequence[int], choices_j: Sequence[int]) -> np.ndarray:
    """Gaussian of seat-seat distance; ``positions`` is a (D, 2) array of seat coordinates."""
    pi = positions[np.asarray(choices_i)]
    pj = positions[np.asarray(choices_j)]
    d = np.hypot(pi[:, None, 0] - pj[None, :, 0], pi[:, None, 1] - pj[None, :, 1])
    return gaussian_penalty(d, spec.p_prox, spec.lam)


@dataclass(frozen=True)
class NodeChoiceMap:
    """How guests map onto network nodes after compilation."""

    node_guests: tuple[str, ...]            # node index -> guest id
    allowed: tuple[tuple[int, ...], ...]    # node index -> allowed global seats
    fixed: Mapping[str, int]                # folded-out guest -> seat

    def node_of(self, guest_id: str) -> int:
        return self.node_guests.index(guest_id)

    def seating(self, a: Assignment) -> dict[str, int]:
        """Full guest -> global seat map for an assignment, fixed guests included."""
        out = dict(self.fixed)
        for i, g in enumerate(self.node_guests):
            out[g] = self.allowed[i][a[i]]
        return out

    def assignment(self, seating: Mapping[str, int]) -> Assignment:
        """Inverse of :meth:`seating` for the free guests."""
        return Assignment([self.allowed[i].index(seating[g]) for i, g in enumerate(self.node_guests)])


class _PairTerm:
    """Callable seat-pair cost for one constraint, plus a block builder."""

    def __init__(self, spec: ConstraintSpec, adj: set, same: set, positions: np.ndarray):
        self.spec = spec
        if isinstance(spec, PairAdjacent):
            self.sigma, self.p = adj, spec.p
        elif isinstance(spec, PairSameTable):
            self.sigma, self.p = same, spec.p
        else:
            self.sigma = None
        self.positions = positions

    def value(self, sa: int, sb: int) -> float:
        if self.sigma is not None:
            key = (sa, sb) if sa < sb else (sb, sa)
            return self.p if key in self.sigma else 0.0
        d = math.dist(self.positions[sa], self.positions[sb])
        return float(gaussian_penalty(d, self.spec.p_prox, self.spec.lam))

    def block(self, ci, cj) -> np.ndarray:
        if self.sigma is not None:
            return build_pair_block(self.p, self.sigma, ci, cj)
        return build_proximity_block(self.spec, self.positions, ci, cj)


def _spec_key(spec: ConstraintSpec):
    # fixed summation order, independent of how the file listed constraints
    return (type(spec).__name__, tuple(sorted((spec.g0, spec.g1))), repr(spec))


def compile_cfn(problem: SeatingProblem) -> tuple[CfnProblem, NodeChoiceMap]:
    fixed = dict(problem.fixed_assignments)
    free = [g.id for g in problem.guests if g.id not in fixed]
    node = {g: i for i, g in enumerate(free)}
    allowed = []
    for g in free:
        seats = problem.allowed_seats(g)
        if not seats:
            raise InfeasibleProblem(f"guest {g!r} has no allowed seat")
        allowed.append(tuple(seats))
    choices = [np.array(s, dtype=np.int64) for s in allowed]

    positions = np.array([s.position for s in problem.seats], dtype=float).reshape(-1, 2)
    adj = problem.adjacent_seat_pairs()
    same = problem.same_table_seat_pairs()
    p_ov = float(problem.overlap_penalty)

    one = [np.zeros(len(c)) for c in choices]
    two: dict[tuple[int, int], np.ndarray] = {}
    offset = 0.0

    # overlap with folded-out guests
    for g, s in fixed.items():
        for i, c in enumerate(choices):
            one[i] += (c == s) * p_ov
    fixed_items = sorted(fixed.items(), key=lambda kv: kv[1])
    for a in range(len(fixed_items)):
        for b in range(a + 1, len(fixed_items)):
            if fixed_items[a][1] == fixed_items[b][1]:
                offset += p_ov

    for spec in sorted(problem.constraints, key=_spec_key):
        term = _PairTerm(spec, adj, same, positions)
        g0, g1 = spec.g0, spec.g1
        if g0 in node and g1 in node:
            i, j = node[g0], node[g1]
            if i > j:
                i, j = j, i
            blk = term.block(choices[i], choices[j])
            two[(i, j)] = two[(i, j)] + blk if (i, j) in two else blk
        elif g0 in node or g1 in node:
            g_free, g_fixed = (g0, g1) if g0 in node else (g1, g0)
            i, s = node[g_free], fixed[g_fixed]
            one[i] += np.array([term.value(int(sa), s) for sa in choices[i]])
        else:
            offset += term.value(fixed[g0], fixed[g1])

    cfn = CfnProblem(
        choices=tuple(choices),
        one_node=tuple(one),
        two_node=two,
        constant_offset=offset,
        overlap_penalty=p_ov,
        fixed_seats=tuple(sorted(fixed.values())),
    )
    return cfn, NodeChoiceMap(tuple(free), tuple(allowed), fixed)
