"""Run records, comparison metrics, result tables and partition drawings."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .exact import SolverSettings, solve_exact
from .graph import Graph
from .heuristic import HeuristicSettings, solve_heuristic
from .instance import Instance
from .model import TOL, Partition
from .result import SolveResult

__all__ = [
    "RunRecord",
    "ComparisonMetrics",
    "TableRow",
    "TABLE_COLUMNS",
    "approximation_gap",
    "geometric_mean_ratio",
    "export_partition_dot",
    "read_partition_dot",
    "run_settings_matrix",
    "table_rows",
    "render_table",
    "write_table_csv",
    "save_records",
    "load_records",
    "summarize",
    "compare",
]

TABLE_COLUMNS = (
    "Graph",
    "tau",
    "K",
    "OPT",
    "OPT time (s)",
    "HEUR",
    "HEUR time (s)",
    "Approx. Gap",
    "Heur. time ratio",
)


def _tau_json(tau):
    if tau is None:
        return None
    return "inf" if math.isinf(tau) else tau


def _tau_parse(tau):
    return math.inf if tau == "inf" else tau


@dataclass
class RunRecord:
    instance_name: str
    method: str
    k: int
    q: int
    tau: Optional[float]
    settings: dict
    result: SolveResult
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("exact", "heuristic"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def key(self) -> tuple:
        return (self.instance_name, self.method, self.k, self.q, self.tau, self.seed)

    def to_dict(self, timings: bool = True) -> dict:
        return {
            "instance_name": self.instance_name,
            "method": self.method,
            "k": self.k,
            "q": self.q,
            "tau": _tau_json(self.tau),
            "seed": self.seed,
            "settings": self.settings,
            "result": self.result.to_dict(timings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunRecord":
        return cls(
            instance_name=doc["instance_name"],
            method=doc["method"],
            k=int(doc["k"]),
            q=int(doc["q"]),
            tau=_tau_parse(doc.get("tau")),
            settings=doc.get("settings", {}),
            result=SolveResult.from_dict(doc["result"]),
            seed=int(doc.get("seed", 0)),
        )

    @classmethod
    def from_run(cls, inst: Instance, result: SolveResult, seed: int = 0) -> "RunRecord":
        return cls(inst.name, result.method, inst.k, inst.q, inst.tau, result.settings, result, seed)


def save_records(records, path) -> None:
    keys = [r.key for r in records]
    if len(keys) != len(set(keys)):
        raise ValueError("duplicate (instance, method, k, q, tau, seed) records")
    doc = [r.to_dict() for r in records]
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_records(path) -> list:
    return [RunRecord.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]


# --- metrics -----------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonMetrics:
    approximation_gap: Optional[float]
    time_ratio: Optional[float]
    gap_is_bound: bool = False


def approximation_gap(opt_or_bound: float, heur: float) -> float:
    """(HEUR - OPT) / OPT; pass the exact lower bound when optimality was not proven."""
    if opt_or_bound <= 0:
        raise ValueError("approximation gap needs a positive reference value")
    return (heur - opt_or_bound) / opt_or_bound


def geometric_mean_ratio(pairs) -> float:
    """exp(mean(ln(a / b))) over pairs of positive times."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no time pairs")
    logs = []
    for a, b in pairs:
        if a <= 0 or b <= 0:
            raise ValueError("times must be positive")
        logs.append(math.log(a / b))
    return math.exp(sum(logs) / len(logs))


# --- settings matrix ---------------------------------------------------------


def run_settings_matrix(
    inst: Instance,
    k: Optional[int] = None,
    q: Optional[int] = None,
    tau: Optional[float] = None,
    time_limit: Optional[float] = 300.0,
) -> list:
    """Exact solves for root-resilience on/off x all/one cuts.

    Optimal cells must agree on the objective; other cells are recorded but
    not compared.
    """
    inst = inst.with_params(k=k, q=q, tau=tau)
    records = []
    for rr in (True, False):
        for mode in ("all", "one"):
            settings = SolverSettings(root_resilience=rr, cut_mode=mode, time_limit=time_limit)
            res = solve_exact(inst, settings)
            records.append(RunRecord.from_run(inst, res))
    optimal = [r.result.objective for r in records if r.result.status == "optimal"]
    if optimal and max(optimal) - min(optimal) > 1e-9:
        raise AssertionError(f"settings disagree on the optimum: {optimal}")
    return records


# --- tables ------------------------------------------------------------------


@dataclass
class TableRow:
    graph: str
    tau: Optional[float]
    k: int
    opt_status: str
    opt_value: Optional[float]
    opt_time: float
    heur_status: str
    heur_value: Optional[float]
    heur_time: float
    metrics: ComparisonMetrics = field(default_factory=lambda: ComparisonMetrics(None, None))

    def cells(self) -> list:
        """Rendered cells in table column order."""
        if self.opt_status == "infeasible":
            opt = "inf"
        elif self.opt_status == "optimal":
            opt = _fmt(self.opt_value)
        elif self.opt_status == "feasible":
            opt = _fmt(self.opt_value) + "*"
        else:
            opt = ("" if self.opt_value is None else _fmt(self.opt_value)) + "**"
        heur = "N.S." if self.heur_value is None else _fmt(self.heur_value)
        gap = self.metrics.approximation_gap
        if self.heur_value is None or self.opt_status in ("infeasible", "inconclusive") or gap is None:
            gap_cell = "N.A."
        elif self.opt_status == "optimal" and abs(self.heur_value - self.opt_value) <= TOL * max(1.0, abs(self.opt_value)):
            gap_cell = "-"
        else:
            gap_cell = f"{gap:.4f}"
        ratio = "" if self.metrics.time_ratio is None else f"{self.metrics.time_ratio:.2f}"
        tau = "inf" if self.tau is None or math.isinf(self.tau) else f"{self.tau:g}"
        return [
            self.graph,
            tau,
            str(self.k),
            opt,
            f"{self.opt_time:.1f}",
            heur,
            f"{self.heur_time:.1f}",
            gap_cell,
            ratio,
        ]


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _metrics(exact: SolveResult, heur: SolveResult) -> ComparisonMetrics:
    gap = None
    bound = exact.lower_bound if exact.status != "optimal" else exact.objective
    if heur.objective is not None and exact.status in ("optimal", "feasible") and bound is not None and bound > 0:
        gap = approximation_gap(bound, heur.objective)
    ratio = None
    if exact.wall_time > 0 and heur.wall_time > 0:
        ratio = exact.wall_time / heur.wall_time
    return ComparisonMetrics(gap, ratio, gap_is_bound=exact.status != "optimal")


def table_rows(records) -> list:
    """Pair exact and heuristic records per (instance, k, q, tau) into table rows."""
    groups = {}
    for r in records:
        groups.setdefault((r.instance_name, r.k, r.q, _tau_json(r.tau)), {})[r.method] = r
    rows = []
    for key in sorted(groups, key=lambda t: (t[0], t[1], t[2], str(t[3]))):
        pair = groups[key]
        if "exact" not in pair or "heuristic" not in pair:
            continue
        ex, he = pair["exact"].result, pair["heuristic"].result
        opt_value = ex.objective if ex.status == "optimal" else ex.lower_bound
        rows.append(
            TableRow(
                graph=key[0],
                tau=pair["exact"].tau,
                k=key[1],
                opt_status=ex.status,
                opt_value=opt_value,
                opt_time=ex.wall_time,
                heur_status=he.status,
                heur_value=he.objective,
                heur_time=he.wall_time,
                metrics=_metrics(ex, he),
            )
        )
    return rows


def summarize(rows) -> dict:
    """Mean approximation gap and geometric-mean time ratio over rows where both are defined."""
    gaps = [r.metrics.approximation_gap for r in rows if r.metrics.approximation_gap is not None]
    pairs = [(r.opt_time, r.heur_time) for r in rows if r.opt_time > 0 and r.heur_time > 0]
    return {
        "rows": len(rows),
        "mean_gap": sum(gaps) / len(gaps) if gaps else None,
        "time_ratio": geometric_mean_ratio(pairs) if pairs else None,
    }


def render_table(rows) -> str:
    cells = [list(TABLE_COLUMNS)] + [r.cells() for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(TABLE_COLUMNS))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def write_table_csv(rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for r in rows:
        writer.writerow(r.cells())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def compare(inst: Instance, exact_settings=None, heuristic_settings=None) -> list:
    """Run both methods on ``inst``; returns the two records (exact first)."""
    ex = solve_exact(inst, exact_settings or SolverSettings())
    he = solve_heuristic(inst, heuristic_settings or HeuristicSettings())
    seed = (heuristic_settings or HeuristicSettings()).seed
    return [RunRecord.from_run(inst, ex, seed), RunRecord.from_run(inst, he, seed)]


# --- DOT drawings ------------------------------------------------------------

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)

_NODE = re.compile(r"^\s*(\d+)\s*\[(.*)\]\s*;\s*$")
_PART = re.compile(r"\bpart\s*=\s*(\d+)")


def export_partition_dot(p: Partition, g: Graph, path) -> None:
    """One fill color per part, roots double-circled, edges between parts dashed."""
    labels = p.labels(g.n)
    roots = set(p.roots)
    lines = ["graph partition {", "  node [style=filled];"]
    for v in range(g.n):
        color = PALETTE[labels[v] % len(PALETTE)] if labels[v] >= 0 else "#ffffff"
        shape = "doublecircle" if v in roots else "circle"
        lines.append(f'  {v} [part={labels[v]}, fillcolor="{color}", shape={shape}];')
    for u, v in g.edges:
        style = "" if labels[u] == labels[v] else " [style=dashed]"
        lines.append(f"  {u} -- {v}{style};")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_partition_dot(path) -> list:
    """Part index per vertex from a file written by ``export_partition_dot``."""
    found = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        m = _NODE.match(line)
        if not m:
            continue
        part = _PART.search(m.group(2))
        if part is not None:
            found[int(m.group(1))] = int(part.group(1))
    return [found[v] for v in range(len(found))]
