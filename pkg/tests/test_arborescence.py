import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gussp.arborescence import (
    audit_goal_graph,
    build_goal_graph,
    min_arborescence,
    visiting_order_oracle,
)
from gussp.domains import GridParams, build_grid
from gussp.errors import NonDeterministicModel, TooManyGoals, UnreachableVertex
from oracles import brute_force_arborescence


def test_line4_goal_graph(line4_model):
    graph = build_goal_graph(line4_model)
    assert graph.n_vertices == 3
    assert graph.distances[(0, 1)] == pytest.approx(2.0)
    assert graph.distances[(0, 2)] == pytest.approx(3.0)
    assert graph.distances[(1, 2)] == pytest.approx(1.0)
    assert graph.distances[(2, 1)] == pytest.approx(1.0)
    # weights scale legs by the chance the endpoint is not a goal
    assert graph.weights[(0, 1)] == pytest.approx(2 / 3)
    assert graph.weights[(1, 2)] == pytest.approx(1 / 3)


def test_line4_arborescence(line4_model):
    graph = build_goal_graph(line4_model)
    arb = min_arborescence(graph.n_vertices, graph.weights)
    assert arb.edges() == [(0, 1), (1, 2)]
    assert arb.weight == pytest.approx(1.0)


def test_line4_visiting_order(line4_model):
    order, cost = visiting_order_oracle(line4_model)
    assert order == (0, 1)
    assert cost == pytest.approx(7 / 3)


def test_line4_audit_rows(line4_model):
    audit = audit_goal_graph(line4_model, optimal_value=7 / 3)
    rows = dict(audit.rows())
    assert rows["arborescence_weight"] == "1.000000000"
    assert rows["arborescence_edges"] == "0->1;1->2"
    assert rows["best_order"] == "0;1"
    assert float(rows["best_order_cost"]) == pytest.approx(7 / 3)
    assert float(rows["optimal_value"]) == pytest.approx(7 / 3)


def _random_weights(rng, n, density):
    weights = {}
    for u in range(n):
        for v in range(n):
            if u != v and v != 0 and rng.random() < density:
                weights[(u, v)] = round(rng.uniform(0.1, 5.0), 3)
    return weights


def _is_arborescence(parent, n, root=0):
    for v in range(n):
        if v == root:
            continue
        hops, u = 0, v
        while u != root:
            u = parent[u]
            hops += 1
            if hops > n:
                return False
    return True


def test_matches_brute_force_on_random_graphs():
    rng = random.Random(2024)
    solved = 0
    for _ in range(200):
        n = rng.randint(2, 6)
        weights = _random_weights(rng, n, density=0.6)
        try:
            arb = min_arborescence(n, weights)
        except UnreachableVertex:
            w_ref, _ = brute_force_arborescence(n, weights)
            assert math.isinf(w_ref)
            continue
        w_ref, _ = brute_force_arborescence(n, weights)
        assert arb.weight == pytest.approx(w_ref, abs=1e-9)
        assert _is_arborescence(arb.parent, n)
        assert all(e in weights for e in arb.edges())
        solved += 1
    assert solved > 100


@settings(max_examples=60)
@given(st.data())
def test_arborescence_property(data):
    n = data.draw(st.integers(2, 5))
    pool = [(u, v) for u in range(n) for v in range(1, n) if u != v]
    chosen = data.draw(st.sets(st.sampled_from(pool), min_size=n - 1))
    weights = {
        e: data.draw(st.floats(0.1, 9.0, allow_nan=False), label=str(e))
        for e in chosen
    }
    try:
        arb = min_arborescence(n, weights)
    except UnreachableVertex:
        w_ref, _ = brute_force_arborescence(n, weights)
        assert math.isinf(w_ref)
        return
    w_ref, _ = brute_force_arborescence(n, weights)
    assert arb.weight == pytest.approx(w_ref, abs=1e-9)


def test_unreachable_vertex():
    with pytest.raises(UnreachableVertex):
        min_arborescence(3, {(0, 1): 1.0})


def test_rejects_stochastic_motion():
    params = GridParams(
        width=4, height=1, start=(0, 0),
        potential_goals=((2, 0), (3, 0)), move_success=0.8,
    )
    with pytest.raises(NonDeterministicModel):
        build_goal_graph(build_grid(params))


def test_order_oracle_goal_cap():
    goals = tuple((x, 0) for x in range(1, 10))
    model = build_grid(GridParams(width=11, height=1, start=(0, 0),
                                  potential_goals=goals))
    with pytest.raises(TooManyGoals):
        visiting_order_oracle(model)
