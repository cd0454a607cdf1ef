"""Tables, seats and guests, and the seat geometry derived from table layouts."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

SeatPair = tuple[int, int]


@dataclass(frozen=True)
class Round:
    center: tuple[float, float]
    radius: float
    seat_count: int

    def __post_init__(self):
        if self.seat_count < 1:
            raise ValueError(f"seat_count must be >= 1, got {self.seat_count}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class Row:
    start: tuple[float, float]
    spacing: float
    angle: float  # radians
    seat_count: int

    def __post_init__(self):
        if self.seat_count < 1:
            raise ValueError(f"seat_count must be >= 1, got {self.seat_count}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")


Layout = Union[Round, Row]


@dataclass(frozen=True)
class Table:
    id: str
    layout: Layout

    @property
    def seat_count(self) -> int:
        return self.layout.seat_count


@dataclass(frozen=True)
class Seat:
    global_index: int
    table_id: str
    index_in_table: int
    position: tuple[float, float]


@dataclass(frozen=True)
class Guest:
    id: str
    node_index: int


def layout_coordinates(table: Table) -> list[tuple[float, float]]:
    """Seat positions for a table, in seat-index order.

    Round tables start due east of the center and proceed counterclockwise;
    rows step from ``start`` along ``angle``.
    """
    lay = table.layout
    n = lay.seat_count
    if isinstance(lay, Round):
        cx, cy = lay.center
        out = []
        for k in range(n):
            theta = 2.0 * math.pi * k / n
            out.append((cx + lay.radius * math.cos(theta), cy + lay.radius * math.sin(theta)))
        return out
    sx, sy = lay.start
    dx, dy = math.cos(lay.angle), math.sin(lay.angle)
    return [(sx + k * lay.spacing * dx, sy + k * lay.spacing * dy) for k in range(n)]


def seat_distance(a: Seat, b: Seat) -> float:
    return math.hypot(a.position[0] - b.position[0], a.position[1] - b.position[1])


def _pair(a: int, b: int) -> SeatPair:
    return (a, b) if a < b else (b, a)


def adjacency_pairs(table: Table) -> set[SeatPair]:
    """Unordered pairs of neighbouring seat indices (local to the table)."""
    n = table.seat_count
    pairs = {_pair(k, k + 1) for k in range(n - 1)}
    if isinstance(table.layout, Round) and n >= 3:
        pairs.add(_pair(n - 1, 0))
    return pairs


def same_table_pairs(table: Table) -> set[SeatPair]:
    return set(itertools.combinations(range(table.seat_count), 2))


@dataclass(frozen=True)
class PairAdjacent:
    g0: str
    g1: str
    p: float


@dataclass(frozen=True)
class PairSameTable:
    g0: str
    g1: str
    p: float


@dataclass(frozen=True)
class PairProximity:
    g0: str
    g1: str
    p_prox: float
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"proximity lambda must be > 0, got {self.lam}")


ConstraintSpec = Union[PairAdjacent, PairSameTable, PairProximity]

DEFAULT_OVERLAP_PENALTY = 100.0


@dataclass(frozen=True)
class SeatingProblem:
    """A validated seating problem.

    ``fixed_assignments`` maps guest id to a global seat index;
    ``restraints`` maps guest id to the frozenset of global seats it may use.
    Seats are derived from the tables and should not be passed in.
    """

    tables: tuple[Table, ...]
    guests: tuple[Guest, ...]
    fixed_assignments: Mapping[str, int] = field(default_factory=dict)
    restraints: Mapping[str, frozenset[int]] = field(default_factory=dict)
    constraints: tuple[ConstraintSpec, ...] = ()
    overlap_penalty: float = DEFAULT_OVERLAP_PENALTY
    seats: tuple[Seat, ...] = field(init=False)

    def __post_init__(self):
        seats = []
        ids = set()
        for t in self.tables:
            if t.id in ids:
                raise ValueError(f"duplicate table id {t.id!r}")
            ids.add(t.id)
            for k, pos in enumerate(layout_coordinates(t)):
                seats.append(Seat(len(seats), t.id, k, pos))
        object.__setattr__(self, "seats", tuple(seats))
        object.__setattr__(self, "tables", tuple(self.tables))
        object.__setattr__(self, "guests", tuple(self.guests))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        self._validate()

    def _validate(self):
        gids = [g.id for g in self.guests]
        if len(set(gids)) != len(gids):
            raise ValueError("duplicate guest id")
        if [g.node_index for g in self.guests] != list(range(len(self.guests))):
            raise ValueError("guest node indices must be contiguous from 0")
        if len(self.guests) > len(self.seats):
            raise ValueError(f"{len(self.guests)} guests but only {len(self.seats)} seats")
        if not self.overlap_penalty > 0:
            raise ValueError("overlap penalty must be positive")
        known = set(gids)
        D = len(self.seats)
        for g, s in self.fixed_assignments.items():
            if g not in known:
                raise ValueError(f"unknown guest {g!r} in fixed assignments")
            if not 0 <= s < D:
                raise ValueError(f"seat {s} out of range")
        taken = list(self.fixed_assignments.values())
        if len(set(taken)) != len(taken):
            raise ValueError("two guests fixed to the same seat")
        for g, allowed in self.restraints.items():
            if g not in known:
                raise ValueError(f"unknown guest {g!r} in restraints")
            if not allowed:
                raise ValueError(f"guest {g!r} restrained to an empty seat set")
            if any(not 0 <= s < D for s in allowed):
                raise ValueError(f"restraint for {g!r} names a seat out of range")
            if g in self.fixed_assignments and self.fixed_assignments[g] not in allowed:
                raise ValueError(f"guest {g!r} is fixed outside its restraint")
        for c in self.constraints:
            for g in (c.g0, c.g1):
                if g not in known:
                    raise ValueError(f"unknown guest {g!r} in constraint")
            if c.g0 == c.g1:
                raise ValueError(f"constraint pairs guest {c.g0!r} with itself")

    @property
    def n_guests(self) -> int:
        return len(self.guests)

    @property
    def n_seats(self) -> int:
        return len(self.seats)

    def table(self, table_id: str) -> Table:
        for t in self.tables:
            if t.id == table_id:
                return t
        raise KeyError(table_id)

    def seat_index(self, table_id: str, index_in_table: int) -> int:
        for s in self.seats:
            if s.table_id == table_id and s.index_in_table == index_in_table:
                return s.global_index
        raise KeyError(f"{table_id}:{index_in_table}")

    def table_seats(self, table_id: str) -> list[int]:
        return [s.global_index for s in self.seats if s.table_id == table_id]

    def _global_pairs(self, local_pairs) -> set[SeatPair]:
        out: set[SeatPair] = set()
        for t in self.tables:
            base = self.table_seats(t.id)
            out |= {_pair(base[a], base[b]) for a, b in local_pairs(t)}
        return out

    def adjacent_seat_pairs(self) -> set[SeatPair]:
        """Adjacency pairs over all tables, as global seat indices."""
        return self._global_pairs(adjacency_pairs)

    def same_table_seat_pairs(self) -> set[SeatPair]:
        return self._global_pairs(same_table_pairs)

    def allowed_seats(self, guest_id: str) -> list[int]:
        if guest_id in self.restraints:
            return sorted(self.restraints[guest_id])
        return list(range(self.n_seats))

    def guest(self, guest_id: str) -> Optional[Guest]:
        for g in self.guests:
            if g.id == guest_id:
                return g
        return None


def make_guests(ids: Sequence[str]) -> tuple[Guest, ...]:
    return tuple(Guest(g, i) for i, g in enumerate(ids))
