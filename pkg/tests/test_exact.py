import math
import re

import pytest
from hypothesis import given, settings, strategies as st

from oracles import BruteForce
from qconnpart.exact import SolverSettings, build_master, export_lp, solve_exact
from qconnpart.graph import Graph
from qconnpart.instance import Instance, complete, cycle, grid, mycielskian
from qconnpart.model import make_partition, verify_feasible
from qconnpart.separation import SeparatorCut
from strategies import graphs


def bounds(n, k, tau):
    if math.isinf(tau):
        return 0.0, float(n)
    return (1 - tau) * n / k, (1 + tau) * n / k


class TestNamedInstances:
    def test_cycle_six_two_parts_is_infeasible(self):
        res = solve_exact(Instance(cycle(6), 2, 2, tau=math.inf))
        assert res.status == "infeasible" and res.objective is None and res.partition is None

    def test_k4_pairs(self):
        res = solve_exact(Instance(complete(4), 2, 1, bounds=(2, 2)))
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.5, abs=1e-9)
        assert res.lower_bound == res.objective

    def test_grid_halves(self):
        inst = Instance(grid(3, 4), 2, 2, bounds=(6, 6))
        res = solve_exact(inst)
        assert res.status == "optimal"
        assert verify_feasible(res.partition, inst).passed
        assert res.objective == pytest.approx(BruteForce(inst.graph).optimum(2, 2, 6, 6), abs=1e-9)

    def test_low_degree_vertex_is_infeasible_for_q(self):
        pendant = Graph(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5)])
        assert solve_exact(Instance(pendant, 2, 2, tau=math.inf)).status == "infeasible"

    def test_disconnected_graph(self):
        g = Graph(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
        res = solve_exact(Instance(g, 2, 2, tau=0.0))
        assert res.status == "optimal"
        assert {frozenset(p) for p in res.partition.parts} == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}


class TestSettings:
    @pytest.mark.parametrize("rr", [True, False])
    @pytest.mark.parametrize("mode", ["all", "one"])
    def test_matrix_cells_agree(self, rr, mode):
        inst = Instance(mycielskian(cycle(5), 1), 2, 2, tau=math.inf)
        res = solve_exact(inst, SolverSettings(root_resilience=rr, cut_mode=mode))
        ref = solve_exact(inst)
        assert res.status == "optimal" and res.objective == pytest.approx(ref.objective, abs=1e-9)
        assert res.settings["cut_mode"] == mode and res.settings["root_resilience"] == rr

    def test_bad_cut_mode(self):
        with pytest.raises(ValueError):
            SolverSettings(cut_mode="few")

    def test_without_degree_rows(self):
        inst = Instance(grid(3, 4), 3, 2, tau=math.inf)
        a = solve_exact(inst)
        b = solve_exact(inst, SolverSettings(degree_inequalities=False))
        assert a.status == b.status
        assert a.objective == pytest.approx(b.objective, abs=1e-9)

    def test_cuts_are_counted(self):
        inst = Instance(grid(3, 4), 2, 2, tau=math.inf)
        res = solve_exact(inst, SolverSettings(degree_inequalities=False))
        assert res.cuts_added > 0 and res.separation_time > 0

    def test_node_limit_keeps_a_valid_bound(self):
        inst = Instance(grid(4, 4), 2, 2, tau=0.1)
        opt = solve_exact(inst).objective
        res = solve_exact(inst, SolverSettings(node_limit=5))
        assert res.status in ("feasible", "inconclusive")
        assert res.lower_bound is None or res.lower_bound <= opt + 1e-9
        if res.status == "feasible":
            assert res.objective >= opt - 1e-9

    def test_warm_start_is_kept_when_optimal(self):
        inst = Instance(grid(3, 4), 2, 2, bounds=(6, 6))
        best = solve_exact(inst)
        res = solve_exact(inst, warm_start=best.partition)
        assert res.objective == pytest.approx(best.objective)

    def test_warm_start_must_be_feasible(self):
        inst = Instance(grid(3, 4), 2, 2, bounds=(6, 6))
        bad = make_partition([set(range(6)), set(range(6, 12))], inst.costs)
        with pytest.raises(RuntimeError):
            solve_exact(inst, warm_start=bad)

    def test_repeatable(self):
        inst = Instance(grid(3, 4), 3, 1, tau=0.1)
        a = solve_exact(inst).to_json(timings=False)
        b = solve_exact(inst).to_json(timings=False)
        assert a == b


@settings(max_examples=60)
@given(graphs(min_n=3, max_n=7), st.integers(2, 3), st.integers(1, 3), st.sampled_from([0.1, 0.5, math.inf]))
def test_matches_enumeration(g, k, q, tau):
    if k > g.n:
        return
    inst = Instance(g, k, q, tau=tau)
    res = solve_exact(inst)
    expected = BruteForce(g).optimum(k, q, *bounds(g.n, k, tau))
    if expected is None:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal"
        assert abs(res.objective - expected) <= 1e-9
        assert verify_feasible(res.partition, inst).passed


def parse_lp(text):
    sections = [ln for ln in text.splitlines() if ln in ("Minimize", "Subject To", "Bounds", "Binaries", "End")]
    rows = {}
    current = None
    in_rows = False
    for ln in text.splitlines():
        if ln == "Subject To":
            in_rows = True
            continue
        if ln == "Bounds":
            in_rows = False
        if not in_rows:
            continue
        m = re.match(r"^ (\w+): (.*)$", ln)
        if m:
            current = m.group(1)
            rows[current] = m.group(2)
        else:
            rows[current] += " " + ln.strip()
    parsed = {}
    for name, body in rows.items():
        m = re.match(r"^(.*) (<=|>=|=) (\S+)$", body)
        terms = re.findall(r"([+-]) (\S+) (x_\d+_\d+)", m.group(1))
        coeffs = {}
        for sign, c, v in terms:
            i, j = map(int, v.split("_")[1:])
            coeffs[(i, j)] = float(c) * (-1 if sign == "-" else 1)
        parsed[name] = (coeffs, m.group(2), float(m.group(3)))
    return sections, parsed


class TestExportLp:
    def test_structure_and_cut_rows(self, tmp_path):
        inst = Instance(cycle(5), 2, 1, tau=0.2)
        model = build_master(inst)
        model.add_cut(SeparatorCut(0, "single", 0, 2, frozenset({1}), 1))
        model.add_cut(SeparatorCut(0, "pair", 2, 4, frozenset({3}), 1))
        path = tmp_path / "m.lp"
        export_lp(model, path)
        text = path.read_text()
        sections, rows = parse_lp(text)
        assert sections == ["Minimize", "Subject To", "Bounds", "Binaries", "End"]
        assert "cut_0" in rows and "cut_1" in rows and "cut_2" not in rows
        assert rows["cut_1"] == ({(0, 2): -1.0, (0, 3): 1.0, (0, 4): -1.0}, ">=", -1.0)

    def test_rows_roundtrip(self, tmp_path):
        inst = Instance(grid(2, 3), 2, 2, tau=0.1)
        model = build_master(inst)
        path = tmp_path / "m.lp"
        export_lp(model, path)
        _, rows = parse_lp(path.read_text())
        for c in model.constraints:
            coeffs, sense, rhs = rows[c.name]
            assert coeffs == {v: w for v, w in c.coeffs.items() if w != 0}
            assert sense == c.sense and rhs == c.rhs

    def test_fixed_variables_listed(self, tmp_path):
        inst = Instance(Graph(4, [(0, 1), (2, 3)]), 2, 1, tau=math.inf)
        path = tmp_path / "m.lp"
        export_lp(build_master(inst), path)
        assert " x_0_2 = 0" in path.read_text()

    def test_deterministic(self, tmp_path):
        inst = Instance(grid(3, 4), 2, 2, tau=math.inf)
        a, b = tmp_path / "a.lp", tmp_path / "b.lp"
        for p in (a, b):
            model = build_master(inst, degree_inequalities=False)
            solve_exact(inst, SolverSettings(degree_inequalities=False), model=model)
            export_lp(model, p)
        assert a.read_bytes() == b.read_bytes()
        assert "cut_0" in a.read_text()
