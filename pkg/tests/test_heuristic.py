import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from qconnpart.graph import Graph, connected_components, is_connected, is_q_connected
from qconnpart.heuristic import (
    HeuristicSettings,
    HeuristicTrace,
    balance_violation,
    construct_initial,
    ear_construction,
    local_search,
    repair_2connectivity,
    solve_heuristic,
)
from qconnpart.instance import Instance, complete, cycle, grid, preprocess_raise_connectivity, random_graph
from qconnpart.model import evaluate_compactness, make_partition, verify_feasible
from strategies import graphs


def compactness(parts, inst):
    return evaluate_compactness(make_partition(parts, inst.costs), inst.costs)


class TestEarConstruction:
    def test_tree_gives_empty(self):
        tree = Graph(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
        assert ear_construction(tree, 3, random.Random(0)) == set()

    def test_cycle_is_one_ear(self):
        assert ear_construction(cycle(5), 5, random.Random(0)) == set(range(5))

    @pytest.mark.parametrize("seed", range(5))
    def test_grid_reaches_size(self, seed):
        t = ear_construction(grid(3, 3), 6, random.Random(seed))
        assert len(t) >= 6 and is_q_connected(grid(3, 3), 2, t)

    def test_within_restricts(self):
        g = grid(3, 3)
        t = ear_construction(g, 9, random.Random(0), within={0, 1, 3, 4, 6, 7})
        assert t <= {0, 1, 3, 4, 6, 7} and is_q_connected(g, 2, t)

    def test_stops_when_maximal(self):
        # a triangle with a pendant path: no ear reaches the path
        g = Graph(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)])
        assert ear_construction(g, 10, random.Random(0)) == {0, 1, 2}

    @given(graphs(min_n=3, max_n=10), st.integers(0, 20), st.integers(0, 10))
    def test_output_is_two_connected(self, g, seed, lower):
        t = ear_construction(g, lower, random.Random(seed))
        if t:
            assert len(t) >= 3 and is_q_connected(g, 2, t)


class TestConstruct:
    def test_grid_two_parts(self):
        g = grid(2, 4)
        for seed in range(10):
            parts = construct_initial(g, 2, 4, random.Random(seed))
            if parts is None:
                continue
            assert len(parts) == 2
            assert sorted(v for p in parts for v in p) == list(range(8))
            assert all(is_connected(g, p) for p in parts)

    def test_too_few_pieces_signals_restart(self):
        assert construct_initial(cycle(6), 2, 6, random.Random(0)) is None

    def test_merges_down_to_k(self):
        g = grid(4, 4)
        for seed in range(10):
            parts = construct_initial(g, 2, 3, random.Random(seed))
            if parts is not None:
                assert len(parts) == 2 and all(is_connected(g, p) for p in parts)

    def test_exact_count_needs_no_merge(self):
        # two triangles joined by an edge: ear construction takes one triangle, the other stays
        g = Graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
        parts = construct_initial(g, 2, 3, random.Random(0))
        assert sorted(map(sorted, parts)) == [[0, 1, 2], [3, 4, 5]]


class TestRepair:
    def test_pendant_chunk_moves(self):
        # square 0-1-2-3 with a pendant path 3-4-5 belonging to part A; part B is a triangle-ish block
        g = Graph(8, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (4, 6), (5, 7), (6, 7), (5, 6)])
        parts = [{0, 1, 2, 3, 4}, {5, 6, 7}]
        out = repair_2connectivity(g, parts, random.Random(0), HeuristicTrace())
        assert out is not None
        assert all(is_q_connected(g, 2, p) for p in out)
        assert sorted(v for p in out for v in p) == list(range(8))

    def test_already_fine_is_unchanged(self):
        g = grid(3, 4)
        parts = [{0, 1, 4, 5, 8, 9}, {2, 3, 6, 7, 10, 11}]
        trace = HeuristicTrace()
        assert repair_2connectivity(g, parts, random.Random(0), trace) == parts
        assert len(trace.reassignment_log) == 0

    def test_no_neighboring_part_restarts(self):
        # 2 is a cut vertex of the whole graph: {0, 1} has no other part next
        # to it, and moving {3, 4} instead only shifts the problem around
        g = Graph(7, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (5, 6), (6, 4), (5, 4)])
        parts = [{0, 1, 2, 3, 4}, {5, 6}]
        for seed in range(5):
            out = repair_2connectivity(g, parts, random.Random(seed), HeuristicTrace())
            assert out is None

    def test_tiny_part_restarts(self):
        g = grid(3, 3)
        assert repair_2connectivity(g, [{0, 1}, set(range(2, 9))], random.Random(0), HeuristicTrace()) is None

    def test_cycling_detection(self):
        trace = HeuristicTrace(cycling_window=4)
        for _ in range(2):
            trace.record({1, 2}, 0, 1)
            trace.record({1, 2}, 1, 0)
        assert trace.cycling()
        trace = HeuristicTrace(cycling_window=4)
        for i in range(4):
            trace.record({i}, 0, 1)
        assert not trace.cycling()

    def test_log_is_bounded(self):
        trace = HeuristicTrace(cycling_window=3)
        for i in range(10):
            trace.record({i}, 0, 1)
        assert len(trace.reassignment_log) == 3


class TestLocalSearch:
    def test_balance_already_zero_returns_at_once(self):
        inst = Instance(grid(3, 4), 2, 2, bounds=(6, 6))
        parts = [{0, 1, 4, 5, 8, 9}, {2, 3, 6, 7, 10, 11}]
        assert local_search(inst.graph, parts, "balance", inst, random.Random(0)) == parts

    def test_balance_reaches_target(self):
        # triangulated strip: every interval of 3+ vertices is 2-connected
        g = Graph(12, [(i, i + 1) for i in range(11)] + [(i, i + 2) for i in range(10)])
        inst = Instance(g, 2, 2, bounds=(6, 6))
        parts = [{0, 1, 2, 3}, set(range(4, 12))]
        out = local_search(g, parts, "balance", inst, random.Random(0))
        assert sorted(g.size(p) for p in out) == [6, 6]
        assert verify_feasible(make_partition(out, inst.costs), inst).passed

    def test_ladder_cannot_balance_by_single_flips(self):
        # in a 2 x 6 ladder the 2-connected pieces are full-column blocks of even size,
        # so a 4/8 split has no balance-improving flip
        inst = Instance(grid(2, 6), 2, 2, bounds=(6, 6))
        parts = [{0, 1, 6, 7}, {2, 3, 4, 5, 8, 9, 10, 11}]
        out = local_search(inst.graph, parts, "balance", inst, random.Random(0))
        assert out == parts

    @pytest.mark.parametrize("seed", range(5))
    def test_compactness_never_worsens(self, seed):
        inst = Instance(grid(4, 4), 2, 2, tau=0.5)
        parts = [{0, 1, 2, 3, 4, 5, 6, 7}, {8, 9, 10, 11, 12, 13, 14, 15}]
        before = compactness(parts, inst)
        out = local_search(inst.graph, parts, "compactness", inst, random.Random(seed))
        assert compactness(out, inst) <= before + 1e-12
        assert verify_feasible(make_partition(out, inst.costs), inst).passed

    def test_unknown_objective(self):
        inst = Instance(grid(2, 2), 2, 1, tau=math.inf)
        with pytest.raises(ValueError):
            local_search(inst.graph, [{0, 1}, {2, 3}], "cut", inst, random.Random(0))

    def test_balance_violation(self):
        assert balance_violation([5, 7], 6, 6) == 1
        assert balance_violation([6, 6], 6, 6) == 0.0
        assert balance_violation([3, 9], 5, 7) == 2


class TestSolve:
    def test_grid_feasible(self):
        inst = Instance(grid(4, 4), 2, 2, tau=0.1)
        res = solve_heuristic(inst, HeuristicSettings(seed=0))
        assert res.status == "feasible" and res.method == "heuristic"
        assert verify_feasible(res.partition, inst).passed
        assert res.lower_bound is None
        assert set(res.stage_times) == {"construct", "repair", "balance", "compactness"}

    def test_infeasible_instance_is_inconclusive(self):
        res = solve_heuristic(Instance(cycle(6), 2, 2, tau=math.inf), HeuristicSettings(max_restarts=50))
        assert res.status == "inconclusive" and res.partition is None and res.restarts == 50

    def test_time_limit(self):
        res = solve_heuristic(Instance(cycle(6), 2, 2, tau=math.inf), HeuristicSettings(time_limit=0.0))
        assert res.status == "inconclusive"

    def test_rejects_other_q(self):
        with pytest.raises(ValueError):
            solve_heuristic(Instance(grid(3, 3), 2, 1, tau=math.inf))

    def test_deterministic(self):
        inst = Instance(grid(5, 6), 3, 2, tau=0.1)
        a = solve_heuristic(inst, HeuristicSettings(seed=4))
        b = solve_heuristic(inst, HeuristicSettings(seed=4))
        assert a.to_json(timings=False) == b.to_json(timings=False)


@settings(max_examples=25)
@given(st.integers(8, 20), st.integers(0, 1000), st.integers(2, 3), st.sampled_from([0.1, 0.3, math.inf]))
def test_feasible_results_verify(n, seed, k, tau):
    g = preprocess_raise_connectivity(random_graph(n, 0.25, seed), 2)
    inst = Instance(g, k, 2, tau=tau)
    res = solve_heuristic(inst, HeuristicSettings(seed=seed, time_limit=2.0, max_restarts=100))
    if res.status == "feasible":
        assert verify_feasible(res.partition, inst).passed
