"""Read and write the line-oriented seating-problem format.

Example::

    [tables]
    round head cx=0 cy=0 radius=1 seats=4
    row   bar  cx=5 cy=0 spacing=1 angle_deg=90 seats=3
    [guests]
    guest ann
    guest bob
    [assignments]
    assign ann head:0
    [restraints]
    restrict bob tables head
    [constraints]
    overlap_penalty 100
    adjacent ann bob -5
    proximity ann bob p=2 lambda=1.5

``#`` starts a comment.  Several ``restrict`` lines for one guest are unioned.
"""
from __future__ import annotations

import math
from importlib import resources
from typing import Optional

from .geometry import (
    DEFAULT_OVERLAP_PENALTY,
    PairAdjacent,
    PairProximity,
    PairSameTable,
    Round,
    Row,
    SeatingProblem,
    Table,
    make_guests,
)

BUILTIN_NAMES = ("prob1", "prob2", "prob3", "prob4", "prob5s", "prob5")
SECTIONS = ("tables", "guests", "assignments", "restraints", "constraints")


class ProblemFormatError(ValueError):
    def __init__(self, line: Optional[int], message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _kv(tokens, lineno, required):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ProblemFormatError(lineno, f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    missing = [k for k in required if k not in out]
    extra = [k for k in out if k not in required]
    if missing:
        raise ProblemFormatError(lineno, f"missing parameter(s): {', '.join(missing)}")
    if extra:
        raise ProblemFormatError(lineno, f"unknown parameter(s): {', '.join(extra)}")
    return out


def _num(s, lineno, kind=float):
    try:
        v = kind(s)
    except ValueError:
        raise ProblemFormatError(lineno, f"bad {kind.__name__} value {s!r}") from None
    if kind is float and not math.isfinite(v):
        raise ProblemFormatError(lineno, f"non-finite value {s!r}")
    return v


def parse_problem(text: str) -> SeatingProblem:
    tables: list[Table] = []
    guests: list[str] = []
    assign_lines: list[tuple[int, str, str]] = []
    restrict_lines: list[tuple[int, str, str, list[str]]] = []
    constraint_lines: list[tuple[int, list[str]]] = []
    overlap = DEFAULT_OVERLAP_PENALTY
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in SECTIONS:
                raise ProblemFormatError(lineno, f"unknown section header {line!r}")
            section = line[1:-1].strip()
            continue
        tok = line.split()
        head, rest = tok[0], tok[1:]
        if section is None:
            raise ProblemFormatError(lineno, "content before any section header")

        if section == "tables":
            if head not in ("round", "row") or not rest:
                raise ProblemFormatError(lineno, f"expected 'round <id> ...' or 'row <id> ...', got {line!r}")
            tid = rest[0]
            if any(t.id == tid for t in tables):
                raise ProblemFormatError(lineno, f"duplicate table id {tid!r}")
            if head == "round":
                kv = _kv(rest[1:], lineno, ("cx", "cy", "radius", "seats"))
                args = dict(center=(_num(kv["cx"], lineno), _num(kv["cy"], lineno)),
                            radius=_num(kv["radius"], lineno),
                            seat_count=_num(kv["seats"], lineno, int))
                make = Round
            else:
                kv = _kv(rest[1:], lineno, ("cx", "cy", "spacing", "angle_deg", "seats"))
                args = dict(start=(_num(kv["cx"], lineno), _num(kv["cy"], lineno)),
                            spacing=_num(kv["spacing"], lineno),
                            angle=math.radians(_num(kv["angle_deg"], lineno)),
                            seat_count=_num(kv["seats"], lineno, int))
                make = Row
            try:
                tables.append(Table(tid, make(**args)))
            except ValueError as e:
                raise ProblemFormatError(lineno, str(e)) from None

        elif section == "guests":
            if head != "guest" or len(rest) != 1:
                raise ProblemFormatError(lineno, f"expected 'guest <id>', got {line!r}")
            if rest[0] in guests:
                raise ProblemFormatError(lineno, f"duplicate guest id {rest[0]!r}")
            guests.append(rest[0])

        elif section == "assignments":
            if head != "assign" or len(rest) != 2:
                raise ProblemFormatError(lineno, f"expected 'assign <guest> <table>:<seat>', got {line!r}")
            assign_lines.append((lineno, rest[0], rest[1]))

        elif section == "restraints":
            if head != "restrict" or len(rest) != 3 or rest[1] not in ("tables", "seats"):
                raise ProblemFormatError(lineno, f"expected 'restrict <guest> tables|seats <list>', got {line!r}")
            restrict_lines.append((lineno, rest[0], rest[1], rest[2].split(",")))

        else:
            if head == "overlap_penalty":
                if len(rest) != 1:
                    raise ProblemFormatError(lineno, "expected 'overlap_penalty <float>'")
                overlap = _num(rest[0], lineno)
                if overlap <= 0:
                    raise ProblemFormatError(lineno, "overlap_penalty must be positive")
            elif head in ("adjacent", "same_table", "proximity"):
                constraint_lines.append((lineno, tok))
            else:
                raise ProblemFormatError(lineno, f"unknown constraint kind {head!r}")

    if not tables:
        raise ProblemFormatError(None, "no tables defined")

    # seat lookup without building the problem yet
    seat_ix: dict[tuple[str, int], int] = {}
    table_seats: dict[str, list[int]] = {}
    for t in tables:
        table_seats[t.id] = []
        for k in range(t.seat_count):
            seat_ix[(t.id, k)] = len(seat_ix)
            table_seats[t.id].append(seat_ix[(t.id, k)])
    known = set(guests)

    def guest_ref(g, lineno):
        if g not in known:
            raise ProblemFormatError(lineno, f"unknown guest {g!r}")
        return g

    def seat_ref(ref, lineno):
        tid, _, idx = ref.rpartition(":")
        if not tid:
            raise ProblemFormatError(lineno, f"expected <table>:<seat>, got {ref!r}")
        if tid not in table_seats:
            raise ProblemFormatError(lineno, f"unknown table {tid!r}")
        k = _num(idx, lineno, int)
        if (tid, k) not in seat_ix:
            raise ProblemFormatError(lineno, f"table {tid!r} has no seat {k}")
        return seat_ix[(tid, k)]

    if len(guests) > len(seat_ix):
        raise ProblemFormatError(None, f"{len(guests)} guests but only {len(seat_ix)} seats")

    fixed: dict[str, int] = {}
    for lineno, g, ref in assign_lines:
        guest_ref(g, lineno)
        if g in fixed:
            raise ProblemFormatError(lineno, f"guest {g!r} assigned twice")
        s = seat_ref(ref, lineno)
        if s in fixed.values():
            raise ProblemFormatError(lineno, f"seat {ref} already assigned")
        fixed[g] = s

    restraints: dict[str, set[int]] = {}
    for lineno, g, kind, items in restrict_lines:
        guest_ref(g, lineno)
        seats = restraints.setdefault(g, set())
        for item in items:
            if kind == "tables":
                if item not in table_seats:
                    raise ProblemFormatError(lineno, f"unknown table {item!r}")
                seats.update(table_seats[item])
            else:
                seats.add(seat_ref(item, lineno))
    for g, s in fixed.items():
        if g in restraints and s not in restraints[g]:
            raise ProblemFormatError(None, f"guest {g!r} is fixed outside its restraint")

    constraints = []
    for lineno, tok in constraint_lines:
        kind = tok[0]
        if len(tok) < 4:
            raise ProblemFormatError(lineno, f"too few fields for {kind}")
        g0, g1 = guest_ref(tok[1], lineno), guest_ref(tok[2], lineno)
        if g0 == g1:
            raise ProblemFormatError(lineno, f"constraint pairs guest {g0!r} with itself")
        if kind == "proximity":
            kv = _kv(tok[3:], lineno, ("p", "lambda"))
            lam = _num(kv["lambda"], lineno)
            if lam <= 0:
                raise ProblemFormatError(lineno, "lambda must be positive")
            constraints.append(PairProximity(g0, g1, _num(kv["p"], lineno), lam))
        else:
            if len(tok) != 4:
                raise ProblemFormatError(lineno, f"expected '{kind} <g1> <g2> <float>'")
            cls = PairAdjacent if kind == "adjacent" else PairSameTable
            constraints.append(cls(g0, g1, _num(tok[3], lineno)))

    try:
        return SeatingProblem(
            tables=tuple(tables),
            guests=make_guests(guests),
            fixed_assignments=fixed,
            restraints={g: frozenset(s) for g, s in restraints.items()},
            constraints=tuple(constraints),
            overlap_penalty=overlap,
        )
    except ValueError as e:
        raise ProblemFormatError(None, str(e)) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_angle(angle: float) -> str:
    # pick a degree value that converts back to exactly the same radians
    deg = math.degrees(angle)
    cand = deg
    for _ in range(8):
        if math.radians(cand) == angle:
            return repr(cand)
        cand = math.nextafter(cand, math.inf if math.radians(cand) < angle else -math.inf)
    return repr(deg)


def serialize_problem(problem: SeatingProblem) -> str:
    out = ["[tables]"]
    for t in problem.tables:
        lay = t.layout
        if isinstance(lay, Round):
            out.append(f"round {t.id} cx={_fmt(lay.center[0])} cy={_fmt(lay.center[1])} "
                       f"radius={_fmt(lay.radius)} seats={lay.seat_count}")
        else:
            out.append(f"row {t.id} cx={_fmt(lay.start[0])} cy={_fmt(lay.start[1])} "
                       f"spacing={_fmt(lay.spacing)} angle_deg={_fmt_angle(lay.angle)} seats={lay.seat_count}")
    out.append("[guests]")
    out += [f"guest {g.id}" for g in problem.guests]

    def ref(s):
        seat = problem.seats[s]
        return f"{seat.table_id}:{seat.index_in_table}"

    if problem.fixed_assignments:
        out.append("[assignments]")
        out += [f"assign {g} {ref(s)}" for g, s in problem.fixed_assignments.items()]
    if problem.restraints:
        out.append("[restraints]")
        for g, seats in problem.restraints.items():
            out.append(f"restrict {g} seats {','.join(ref(s) for s in sorted(seats))}")
    out.append("[constraints]")
    out.append(f"overlap_penalty {_fmt(problem.overlap_penalty)}")
    for c in problem.constraints:
        if isinstance(c, PairAdjacent):
            out.append(f"adjacent {c.g0} {c.g1} {_fmt(c.p)}")
        elif isinstance(c, PairSameTable):
            out.append(f"same_table {c.g0} {c.g1} {_fmt(c.p)}")
        else:
            out.append(f"proximity {c.g0} {c.g1} p={_fmt(c.p_prox)} lambda={_fmt(c.lam)}")
    return "\n".join(out) + "\n"


def builtin_source(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"unknown built-in problem {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return resources.files("seatopt.problems").joinpath(f"{name}.txt").read_text(encoding="utf-8")


def builtin_problem(name: str) -> SeatingProblem:
    return parse_problem(builtin_source(name))


def load_problem(spec: str) -> SeatingProblem:
    """Load ``builtin:NAME`` or a path to a problem file."""
    if spec.startswith("builtin:"):
        return builtin_problem(spec.split(":", 1)[1])
    with open(spec, encoding="utf-8") as fh:
        return parse_problem(fh.read())
