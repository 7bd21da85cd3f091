import csv
import io
import math

import pytest

from qconnpart.exact import SolverSettings, solve_exact
from qconnpart.graph import Graph
from qconnpart.heuristic import HeuristicSettings, solve_heuristic
from qconnpart.instance import Instance, cycle, grid
from qconnpart.model import Partition
from qconnpart.report import (
    TABLE_COLUMNS,
    RunRecord,
    approximation_gap,
    export_partition_dot,
    geometric_mean_ratio,
    load_records,
    read_partition_dot,
    render_table,
    run_settings_matrix,
    save_records,
    summarize,
    table_rows,
    write_table_csv,
)
from qconnpart.result import SolveResult


class TestMetrics:
    def test_gap(self):
        assert approximation_gap(0.5, 0.65) == pytest.approx(0.30)
        assert approximation_gap(0.7, 0.7) == 0
        assert approximation_gap(0.4, 0.65) == pytest.approx(0.625)

    def test_gap_needs_positive_reference(self):
        with pytest.raises(ValueError):
            approximation_gap(0.0, 1.0)

    def test_geometric_mean(self):
        assert geometric_mean_ratio([(2, 1), (8, 1)]) == pytest.approx(4)
        assert geometric_mean_ratio([(3, 3), (5, 5)]) == pytest.approx(1)
        assert geometric_mean_ratio([(1, 1), (4, 1), (16, 1)]) == pytest.approx(4)

    def test_geometric_mean_errors(self):
        with pytest.raises(ValueError):
            geometric_mean_ratio([(0, 1)])
        with pytest.raises(ValueError):
            geometric_mean_ratio([])


def fake(method, status, objective, lower=None, wall=1.0):
    parts = None
    return SolveResult(status, objective, lower, parts, wall_time=wall, method=method)


def record(name, method, status, objective, lower=None, wall=1.0, tau=0.1):
    return RunRecord(name, method, 2, 2, tau, {}, fake(method, status, objective, lower, wall))


class TestTables:
    def test_markers(self):
        recs = [
            record("a", "exact", "optimal", 2.0, 2.0, 10.0),
            record("a", "heuristic", "feasible", 2.0, None, 1.0),
            record("b", "exact", "feasible", 3.0, 2.5, 20.0),
            record("b", "heuristic", "feasible", 3.5, None, 2.0),
            record("c", "exact", "inconclusive", None, 1.5, 20.0),
            record("c", "heuristic", "inconclusive", None, None, 5.0),
            record("d", "exact", "infeasible", None, None, 0.04),
            record("d", "heuristic", "inconclusive", None, None, 5.0, tau=math.inf),
            record("d", "heuristic", "inconclusive", None, None, 5.0),
        ]
        rows = {r.graph: r.cells() for r in table_rows(recs)}
        assert rows["a"][3:] == ["2.0000", "10.0", "2.0000", "1.0", "-", "10.00"]
        assert rows["b"][3] == "2.5000*" and rows["b"][7] == "0.4000"
        assert rows["c"][3] == "1.5000**" and rows["c"][5] == "N.S." and rows["c"][7] == "N.A."
        assert rows["d"][3] == "inf" and rows["d"][4] == "0.0"

    def test_csv_columns_and_recompute(self, tmp_path):
        recs = [record("a", "exact", "optimal", 2.0, 2.0, 4.0), record("a", "heuristic", "feasible", 2.5, None, 1.0)]
        path = tmp_path / "r.json"
        save_records(recs, path)
        again = load_records(path)
        text = write_table_csv(table_rows(again), tmp_path / "t.csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == TABLE_COLUMNS
        assert rows[1] == table_rows(recs)[0].cells()
        assert rows[1][7] == "0.2500"

    def test_duplicate_records_rejected(self, tmp_path):
        r = record("a", "exact", "optimal", 2.0, 2.0)
        with pytest.raises(ValueError):
            save_records([r, r], tmp_path / "x.json")

    def test_summary(self):
        recs = [
            record("a", "exact", "optimal", 2.0, 2.0, 2.0),
            record("a", "heuristic", "feasible", 2.2, None, 1.0),
            record("b", "exact", "optimal", 1.0, 1.0, 8.0),
            record("b", "heuristic", "feasible", 1.0, None, 1.0),
        ]
        s = summarize(table_rows(recs))
        assert s["time_ratio"] == pytest.approx(4.0)
        assert s["mean_gap"] == pytest.approx(0.05)

    def test_render(self):
        recs = [record("a", "exact", "optimal", 2.0, 2.0), record("a", "heuristic", "feasible", 2.0)]
        out = render_table(table_rows(recs))
        assert out.splitlines()[0].split()[0] == "Graph"

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            RunRecord("a", "guess", 2, 2, 0.1, {}, fake("exact", "optimal", 1.0))

    def test_real_runs(self):
        inst = Instance(grid(4, 4), 2, 2, tau=0.1, name="g44")
        ex = solve_exact(inst)
        he = solve_heuristic(inst, HeuristicSettings(seed=1))
        row = table_rows([RunRecord.from_run(inst, ex), RunRecord.from_run(inst, he)])[0]
        assert row.metrics.approximation_gap >= -1e-9


class TestSettingsMatrix:
    def test_grid(self):
        recs = run_settings_matrix(Instance(grid(3, 4), 2, 2, tau=math.inf))
        assert len(recs) == 4
        objs = {round(r.result.objective, 9) for r in recs}
        assert len(objs) == 1
        assert all(isinstance(r.result.cuts_added, int) for r in recs)
        cells = {(r.settings["root_resilience"], r.settings["cut_mode"]) for r in recs}
        assert cells == {(True, "all"), (True, "one"), (False, "all"), (False, "one")}

    def test_infeasible(self):
        recs = run_settings_matrix(Instance(cycle(6), 2, 2, tau=math.inf))
        assert [r.result.status for r in recs] == ["infeasible"] * 4

    def test_time_limited_cells_allowed(self):
        recs = run_settings_matrix(Instance(grid(4, 4), 2, 2, tau=0.1), time_limit=0.0)
        assert all(r.result.status in ("feasible", "inconclusive", "optimal") for r in recs)


class TestDot:
    def test_cycle_two_parts(self, tmp_path):
        g = cycle(4)
        p = Partition((frozenset({0, 1}), frozenset({2, 3})), (0, 2))
        path = tmp_path / "p.dot"
        export_partition_dot(p, g, path)
        text = path.read_text()
        assert text.count("style=dashed") == 2
        assert text.count("doublecircle") == 2
        assert len({ln.split('fillcolor="')[1][:7] for ln in text.splitlines() if "fillcolor=" in ln}) == 2
        assert read_partition_dot(path) == [0, 0, 1, 1]

    def test_singleton_part(self, tmp_path):
        g = Graph(3, [(0, 1), (1, 2)])
        p = Partition((frozenset({0}), frozenset({1, 2})), (0, 1))
        path = tmp_path / "p.dot"
        export_partition_dot(p, g, path)
        line = next(ln for ln in path.read_text().splitlines() if ln.strip().startswith("0 ["))
        assert "doublecircle" in line

    def test_reexport_identical(self, tmp_path):
        inst = Instance(grid(3, 4), 2, 2, tau=math.inf)
        res = solve_exact(inst)
        a, b = tmp_path / "a.dot", tmp_path / "b.dot"
        export_partition_dot(res.partition, inst.graph, a)
        export_partition_dot(res.partition, inst.graph, b)
        assert a.read_bytes() == b.read_bytes()
        assert read_partition_dot(a) == res.partition.labels(12)


class TestResultJson:
    def test_roundtrip(self):
        inst = Instance(grid(3, 4), 2, 2, tau=math.inf)
        res = solve_exact(inst)
        back = SolveResult.from_dict(__import__("json").loads(res.to_json()))
        assert back.partition == res.partition and back.objective == res.objective

    def test_timings_dropped(self):
        res = solve_heuristic(Instance(grid(4, 4), 2, 2, tau=0.1))
        doc = res.to_dict(timings=False)
        assert "wall_time" not in doc and "stage_times" not in doc and "restarts" in doc

    def test_bad_status(self):
        with pytest.raises(ValueError):
            SolveResult("solved", None, None, None)
