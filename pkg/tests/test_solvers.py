import math

import pytest

from gussp.compiler import compile_gussp, enumerate_reachable
from gussp.errors import NonConvergence
from gussp.model import GoalPrior, GusspModel
from gussp.solvers import (
    ValueTable,
    bellman_backup,
    flares,
    greedy_action,
    lao_star,
    value_iteration,
)
from gussp.heuristics import build_distance_oracle, make_heuristic


def test_bellman_line4_partial_backup(line4_solved):
    ssp, _reach, vi = line4_solved
    # state: standing one step from the last cell knowing the first goal is
    # out; the only sensible move costs one step to certain termination
    from gussp.model import KnowledgeVector

    i = ssp.intern((2, 0), KnowledgeVector(2, no=0b01))
    v, a, _res = bellman_backup(ssp, vi.table, i)
    assert v == pytest.approx(1.0)
    assert a == "right"


def test_bellman_tie_breaks_to_earliest_action():
    def transition(s, a):
        if s == 0:
            return ((1, 1.0),)
        return ((s, 1.0),)

    model = GusspModel(
        base_states=[0, 1],
        actions=("a", "b"),
        transition=transition,
        cost=lambda s, a: 1.0,
        start_state=0,
        potential_goals=(1,),
        prior=GoalPrior.uniform(1),
    )
    ssp = compile_gussp(model)
    table = ValueTable()
    _v, act, _ = bellman_backup(ssp, table, ssp.start_id)
    assert act == "a"  # identical outcomes: first action order wins


def test_vi_matches_hand_value(line4_solved):
    ssp, _reach, vi = line4_solved
    assert vi.table.value(ssp.start_id) == pytest.approx(7 / 3, abs=1e-6)
    assert vi.policy.act(ssp.start_id) == "right"


def test_vi_backends_agree(small_grids):
    for _params, model in small_grids[:6]:
        ssp = compile_gussp(model)
        reach = enumerate_reachable(ssp)
        v_np = value_iteration(ssp, reachable=reach, backend="numpy")
        v_py = value_iteration(ssp, reachable=reach, backend="python")
        for i in reach.ids:
            assert v_np.table.value(i) == pytest.approx(
                v_py.table.value(i), abs=1e-7
            )


def test_vi_monotone_from_below(line4_solved):
    ssp, reach, _vi = line4_solved
    starts = []
    value_iteration(
        ssp,
        reachable=reach,
        on_sweep=lambda sweep, residual, values: starts.append(float(values[0])),
    )
    # Jacobi sweeps from zero never overshoot on the way up
    assert all(b >= a - 1e-12 for a, b in zip(starts, starts[1:]))
    assert starts[-1] == pytest.approx(7 / 3, abs=1e-6)


def test_vi_nonconvergence_raises(line4_solved):
    ssp, reach, _vi = line4_solved
    with pytest.raises(NonConvergence):
        value_iteration(ssp, reachable=reach, max_sweeps=1)


def test_vi_policy_covers_nongoal_states(line4_solved):
    ssp, reach, vi = line4_solved
    for i in reach.ids:
        if i in reach.goal_ids:
            assert vi.policy.get(i) is None
        else:
            assert vi.policy.get(i) is not None


@pytest.mark.parametrize("heuristic", ["zero", "hmin", "hpg"])
def test_lao_matches_vi(small_grids_solved, heuristic):
    for _params, model, ssp, _reach, vi in small_grids_solved[:8]:
        oracle = build_distance_oracle(model) if heuristic == "hpg" else None
        h = make_heuristic(heuristic, ssp, oracle)
        res = lao_star(ssp, h)
        assert res.table.value(ssp.start_id) == pytest.approx(
            vi.table.value(ssp.start_id), abs=1e-6
        )


def test_lao_expands_fewer_states_than_full_enumeration(small_grids_solved):
    wins = 0
    for _params, model, ssp, reach, _vi in small_grids_solved:
        res = lao_star(ssp, make_heuristic("hpg", ssp, build_distance_oracle(model)))
        if res.expanded < len(reach):
            wins += 1
    assert wins >= len(small_grids_solved) // 2


def test_lao_warm_start_reuses_table(line4_solved):
    ssp, _reach, _vi = line4_solved
    h = make_heuristic("hmin", ssp)
    first = lao_star(ssp, h)
    v0 = first.table.value(ssp.start_id)
    from gussp.model import KnowledgeVector

    other = ssp.intern((0, 0), KnowledgeVector(2, no=0b01))
    second = lao_star(ssp, h, table=first.table, start=other)
    assert second.table.value(ssp.start_id) == pytest.approx(v0, abs=1e-9)
    assert second.table.value(other) == pytest.approx(3.0, abs=1e-6)


def test_flares_infinite_horizon_is_optimal(small_grids_solved):
    for _params, model, ssp, _reach, vi in small_grids_solved[:6]:
        res = flares(ssp, horizon=None, epsilon=1e-6, seed=4)
        assert not res.exhausted
        assert res.table.value(ssp.start_id) == pytest.approx(
            vi.table.value(ssp.start_id), abs=1e-4
        )


def test_flares_depth1_lower_bound(line4_solved):
    ssp, _reach, vi = line4_solved
    res = flares(ssp, horizon=1, epsilon=1e-6, seed=0)
    # admissible start: labeled values never exceed the optimum by much more
    # than the tolerance allows at this tiny size
    assert res.table.value(ssp.start_id) <= vi.table.value(ssp.start_id) + 1e-3


def test_flares_exhausted_flag(line4_solved):
    ssp, _reach, _vi = line4_solved
    res = flares(ssp, max_trials=0)
    assert res.exhausted
    assert res.trials == 0


def test_flares_deterministic_given_seed(line4_solved):
    ssp, _reach, _vi = line4_solved
    a = flares(ssp, horizon=1, seed=9)
    b = flares(ssp, horizon=1, seed=9)
    assert a.trials == b.trials
    assert a.table.values == b.table.values


def test_greedy_action_fallback(line4_solved):
    ssp, _reach, vi = line4_solved
    assert greedy_action(ssp, vi.table, ssp.start_id) == "right"
