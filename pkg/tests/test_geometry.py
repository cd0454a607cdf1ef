import math

import pytest

from seatopt.geometry import (
    PairAdjacent,
    Round,
    Row,
    SeatingProblem,
    Table,
    adjacency_pairs,
    layout_coordinates,
    make_guests,
    same_table_pairs,
)


def close(p, q):
    return all(math.isclose(a, b, abs_tol=1e-12) for a, b in zip(p, q))


def test_round_coordinates_start_east_and_go_counterclockwise():
    pts = layout_coordinates(Table("t", Round((0.0, 0.0), 1.0, 4)))
    for got, want in zip(pts, [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        assert close(got, want)


def test_row_coordinates():
    pts = layout_coordinates(Table("r", Row((1.0, 2.0), 0.5, math.pi / 2, 3)))
    for got, want in zip(pts, [(1, 2), (1, 2.5), (1, 3)]):
        assert close(got, want)


@pytest.mark.parametrize("layout,expected", [
    (Round((0, 0), 1, 4), {(0, 1), (1, 2), (2, 3), (0, 3)}),
    (Round((0, 0), 1, 2), {(0, 1)}),
    (Round((0, 0), 1, 1), set()),
    (Row((0, 0), 1, 0, 3), {(0, 1), (1, 2)}),
])
def test_adjacency(layout, expected):
    assert adjacency_pairs(Table("t", layout)) == expected


def test_same_table_pairs_is_all_pairs():
    assert len(same_table_pairs(Table("t", Round((0, 0), 1, 6)))) == 15


def test_bad_layouts():
    with pytest.raises(ValueError):
        Round((0, 0), 0.0, 3)
    with pytest.raises(ValueError):
        Row((0, 0), 1.0, 0.0, 0)


def two_tables(**kw):
    tables = (Table("a", Round((0, 0), 1, 3)), Table("b", Row((5, 0), 1, 0, 2)))
    return SeatingProblem(tables, make_guests(["x", "y", "z"]), **kw)


def test_global_seats_and_pairs():
    p = two_tables()
    assert [(s.table_id, s.index_in_table) for s in p.seats] == [
        ("a", 0), ("a", 1), ("a", 2), ("b", 0), ("b", 1)]
    assert p.seat_index("b", 1) == 4
    assert p.adjacent_seat_pairs() == {(0, 1), (1, 2), (0, 2), (3, 4)}
    assert p.same_table_seat_pairs() == {(0, 1), (1, 2), (0, 2), (3, 4)}
    assert p.allowed_seats("x") == [0, 1, 2, 3, 4]


@pytest.mark.parametrize("kw", [
    dict(fixed_assignments={"x": 0, "y": 0}),
    dict(fixed_assignments={"nobody": 0}),
    dict(fixed_assignments={"x": 9}),
    dict(restraints={"x": frozenset()}),
    dict(restraints={"x": frozenset({1})}, fixed_assignments={"x": 0}),
    dict(constraints=(PairAdjacent("x", "x", 1.0),)),
    dict(constraints=(PairAdjacent("x", "w", 1.0),)),
    dict(overlap_penalty=0.0),
])
def test_invalid_problems(kw):
    with pytest.raises(ValueError):
        two_tables(**kw)


def test_too_many_guests():
    with pytest.raises(ValueError):
        SeatingProblem((Table("a", Round((0, 0), 1, 2)),), make_guests(["x", "y", "z"]))
