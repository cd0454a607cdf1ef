import itertools
import math

import numpy as np
import pytest

from seatopt.cfn import Assignment, CfnProblem, evaluate
from seatopt.classical import (
    AnnealSchedule,
    HfConfig,
    McConfig,
    SearchSpaceTooLarge,
    brute_force_solve,
    default_hf_config,
    distinct_optima,
    hf_solve,
    hf_solver,
    hf_transform,
    mc_solve,
    mc_solver,
    run_replicates,
    trajectory,
)

from conftest import compiled


def naive_optima(p, permutations_only):
    best, hits = math.inf, []
    for a in itertools.product(*[range(d) for d in p.choice_counts]):
        seats = Assignment(a).seats(p)
        if permutations_only and (len(set(seats)) < len(seats) or set(seats) & set(p.fixed_seats)):
            continue
        s = evaluate(p, Assignment(a))
        if s < best - 1e-9:
            best, hits = s, [a]
        elif abs(s - best) <= 1e-9:
            hits.append(a)
    return best, hits


@pytest.mark.parametrize("name", ["prob1", "prob2"])
@pytest.mark.parametrize("mode", ["all", "permutations"])
def test_brute_force_matches_naive_enumeration(name, mode):
    p, _ = compiled(name)
    res = brute_force_solve(p, mode=mode, chunk=97)
    best, hits = naive_optima(p, mode == "permutations")
    assert res.optimum == pytest.approx(best)
    assert [r.assignment.choice_index for r in res.optima] == hits


def test_brute_force_limit_and_mode():
    p, _ = compiled("prob3")
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_solve(p)
    with pytest.raises(ValueError):
        brute_force_solve(compiled("prob1")[0], mode="some")


def test_brute_force_all_mode_can_prefer_overlaps():
    # two guests who badly want to share a seat
    p = CfnProblem(([0, 1], [0, 1]), ([0, 0], [0, 0]), {(0, 1): np.array([[-500.0, 0], [0, -500.0]])},
                   overlap_penalty=100.0)
    assert brute_force_solve(p, mode="all").optimum == -400.0
    assert brute_force_solve(p, mode="permutations").optimum == 0.0


def test_schedule():
    s = AnnealSchedule(10.0, 0.1, 5)
    assert s.temperature(0) == 10.0
    assert s.temperature(4) == pytest.approx(0.1)
    assert s.temperature(2) == pytest.approx(1.0)
    assert AnnealSchedule(3.0, 0.5, 1).temperature(0) == 3.0
    for bad in [(0.1, 1.0, 5), (1.0, 0.0, 5), (1.0, 0.1, 0)]:
        with pytest.raises(ValueError):
            AnnealSchedule(*bad)
    p, _ = compiled("prob1")
    d = AnnealSchedule.default(p, 100)
    assert (d.t_high, d.t_low, d.steps) == (100.0, 0.01, 100)   # overlap penalty dominates


def test_hf_transform():
    cfg = HfConfig(10.0, 0.1)
    assert hf_transform(5.0, 0.0, cfg) == 5.0
    assert hf_transform(10.0, 0.0, cfg) == 10.0
    assert hf_transform(30.0, 0.0, cfg) == pytest.approx(12.0)
    assert hf_transform(30.0, 0.0, HfConfig(10.0, 1.0)) == 30.0
    with pytest.raises(ValueError):
        HfConfig(0.0)
    with pytest.raises(ValueError):
        HfConfig(1.0, 0.0)
    p, _ = compiled("prob1")
    assert default_hf_config(p, McConfig()).ceiling_h == 1000.0


def test_mc_is_deterministic_and_reports_exact_scores():
    p, _ = compiled("prob4")
    a = mc_solve(p, McConfig(steps=5000, seed=11))
    b = mc_solve(p, McConfig(steps=5000, seed=11))
    assert a == b
    assert a.score == evaluate(p, a.assignment)
    pool_scores = [evaluate(p, x) for x in a.pool]
    assert all(a.score <= s for s in pool_scores)
    assert pool_scores == sorted(pool_scores)
    assert len({x.choice_index for x in (a.assignment, *a.pool)}) == 1 + len(a.pool) <= 8
    assert mc_solve(p, McConfig(steps=5000, seed=12)) != a


def test_best_of_trajectory_is_the_trace_minimum():
    p, _ = compiled("prob3")
    cfg = McConfig(steps=3000, seed=5)
    traj = trajectory(p, cfg)
    assert traj.trace.shape == (3000,)
    rec = mc_solve(p, cfg)
    assert rec.score == pytest.approx(min(traj.trace.min(), rec.score))
    # the recorded running score agrees with re-evaluation at every sampled step
    for k in range(0, 3000, 250):
        assert traj.trace[k] == pytest.approx(evaluate(p, Assignment(traj.states[k])), abs=1e-6)


def test_mc_finds_prob2_optimum():
    p, _ = compiled("prob2")
    res = run_replicates(p, mc_solver(2000), 4)
    assert res.best.score == -40.0
    assert res.best.overlap_count == 0


def test_hf_solve_runs_and_scores_raw():
    p, _ = compiled("prob3")
    rec = hf_solve(p, McConfig(steps=5000, seed=2))
    assert rec.solver_tag == "HF"
    assert rec.score == evaluate(p, rec.assignment)


def test_hf_with_unit_slope_is_plain_mc():
    p, _ = compiled("prob4")
    cfg = McConfig(steps=4000, seed=9)
    a = trajectory(p, cfg)
    b = trajectory(p, cfg, HfConfig(1.0, 1.0))
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.trace, b.trace)


def test_swap_only_moves_preserve_permutations():
    p, _ = compiled("prob2")
    start = Assignment((0, 1, 2, 3, 4))
    from seatopt.classical import _anneal
    traj = _anneal(p, McConfig(steps=2000, swap_move_fraction=1.0, seed=1), None, True, start)
    for row in traj.states:
        seats = Assignment(row).seats(p)
        assert len(set(seats)) == len(seats)


def test_replicates_pick_lowest_index_on_ties_and_threads_agree():
    p, _ = compiled("prob1")
    res = run_replicates(p, mc_solver(1000), 6, base_seed=3)
    assert [r.seed for r in res.records] == [3, 4, 5, 6, 7, 8]
    assert res.best_index == min(i for i, r in enumerate(res.records) if r.score == res.best.score)
    par = run_replicates(p, mc_solver(1000), 6, base_seed=3, workers=3)
    assert par.records == res.records
    with pytest.raises(ValueError):
        run_replicates(p, mc_solver(10), 0)


def test_distinct_optima_counts_pools():
    p, _ = compiled("prob1")
    recs = run_replicates(p, hf_solver(1000), 8).records
    found = distinct_optima(p, recs, -15.0)
    assert found and all(evaluate(p, Assignment(a)) == -15.0 for a in found)


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(swap_move_fraction=1.5)
    with pytest.raises(ValueError):
        McConfig(keep=0)
