import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seatopt.cfn import (
    Assignment,
    CfnProblem,
    SolutionRecord,
    count_overlaps,
    delta_evaluate,
    evaluate,
)


def small():
    # 3 nodes; nodes 0 and 1 share seats 10/11, node 2 is on its own seats
    return CfnProblem(
        choices=([10, 11], [10, 11, 12], [20, 21]),
        one_node=([1.0, 2.0], [0.0, -1.0, 4.0], [0.5, 0.25]),
        two_node={(0, 2): np.array([[1.0, 0.0], [0.0, 3.0]])},
        constant_offset=7.0,
        overlap_penalty=100.0,
    )


@pytest.mark.parametrize("a,score", [
    ((0, 0, 0), 7 + 1 + 0 + 0.5 + 1 + 100),
    ((0, 1, 1), 7 + 1 - 1 + 0.25 + 0),
    ((1, 1, 1), 7 + 2 - 1 + 0.25 + 3 + 100),
    ((1, 2, 0), 7 + 2 + 4 + 0.5 + 0),
])
def test_evaluate_by_hand(a, score):
    assert evaluate(small(), Assignment(a)) == pytest.approx(score, abs=1e-12)


def test_count_overlaps():
    p = CfnProblem(([0, 1], [0, 1], [0, 1]), ([0, 0], [0, 0], [0, 0]), {}, overlap_penalty=1.0,
                   fixed_seats=(1,))
    assert count_overlaps(p, Assignment((0, 0, 0))) == 3
    assert count_overlaps(p, Assignment((0, 0, 1))) == 2
    assert count_overlaps(p, Assignment((1, 1, 1))) == 3 + 3


def test_problem_validation():
    with pytest.raises(ValueError):
        CfnProblem(([0, 1],), ([0.0],), {})
    with pytest.raises(ValueError):
        CfnProblem(([0, 1], [2]), ([0, 0], [0]), {(1, 0): np.zeros((1, 2))})
    with pytest.raises(ValueError):
        CfnProblem(([0, 1], [2]), ([0, 0], [0]), {(0, 1): np.zeros((1, 2))})
    with pytest.raises(ValueError):
        CfnProblem(([0, 1],), ([0, np.inf],), {})
    with pytest.raises(ValueError):
        CfnProblem(([],), ([],), {})
    with pytest.raises(ValueError):
        evaluate(small(), Assignment((0, 3, 0)))
    with pytest.raises(ValueError):
        evaluate(small(), Assignment((0, 0)))


def test_zero_blocks_are_dropped_and_pair_block_includes_overlap():
    p = CfnProblem(([0, 1], [1, 2]), ([0, 0], [0, 0]), {(0, 1): np.zeros((2, 2))}, overlap_penalty=5.0)
    assert p.two_node == {}
    assert p.pair_block(0, 1).tolist() == [[0, 0], [5, 0]]
    assert p.interacting_pairs() == [(0, 1)]
    assert p.max_abs_beta() == 5.0


@st.composite
def networks(draw):
    n = draw(st.integers(1, 5))
    seats = st.lists(st.integers(0, 5), min_size=1, max_size=4, unique=True)
    choices = [draw(seats) for _ in range(n)]
    vals = st.floats(-50, 50, allow_nan=False)
    one = [[draw(vals) for _ in c] for c in choices]
    two = {}
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                two[(i, j)] = np.array([[draw(vals) for _ in choices[j]] for _ in choices[i]])
    pen = draw(st.sampled_from([None, 10.0, 100.0]))
    p = CfnProblem(choices, one, two, draw(vals), pen)
    a = Assignment([draw(st.integers(0, len(c) - 1)) for c in choices])
    return p, a


@settings(max_examples=300, deadline=None)
@given(networks(), st.data())
def test_delta_matches_full_difference(net, data):
    p, a = net
    node = data.draw(st.integers(0, p.node_count - 1))
    c = data.draw(st.integers(0, p.choice_counts[node] - 1))
    want = evaluate(p, a.replace(node, c)) - evaluate(p, a)
    assert delta_evaluate(p, a, node, c) == pytest.approx(want, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(networks(), st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), max_size=40))
def test_chained_deltas(net, moves):
    p, a = net
    total = evaluate(p, a)
    for node, c in moves:
        node %= p.node_count
        c %= p.choice_counts[node]
        total += delta_evaluate(p, a, node, c)
        a = a.replace(node, c)
    assert total == pytest.approx(evaluate(p, a), abs=1e-8)


def test_solution_record():
    p = small()
    rec = SolutionRecord.from_assignment(p, Assignment((0, 0, 0)), "X", 3, 10)
    assert rec.score == evaluate(p, Assignment((0, 0, 0)))
    assert rec.overlap_count == 1
    assert (rec.solver_tag, rec.seed, rec.steps_or_shots, rec.pool) == ("X", 3, 10, ())
