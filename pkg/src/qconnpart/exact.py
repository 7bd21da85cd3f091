"""Branch-and-cut over the assignment model with lazily separated connectivity cuts.

The search enumerates root sets in ascending label order (one representative
per unordered set), then assigns the remaining vertices to roots depth-first.
Balance, degree rows and every pooled cut are propagated on partial
assignments; complete assignments go through ``separate_parts`` and either
feed new cuts to the global pool or become incumbents.
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .instance import SIZE_TOL, Instance
from .model import (
    TOL,
    MipModel,
    Partition,
    add_degree_inequalities,
    build_hess_model,
    evaluate_compactness,
    make_partition,
    verify_feasible,
)
from .result import SolveResult
from .separation import separate_parts

__all__ = ["SolverSettings", "solve_exact", "export_lp", "build_master"]

_CHECK_EVERY = 128


@dataclass(frozen=True)
class SolverSettings:
    root_resilience: bool = True
    cut_mode: str = "all"
    time_limit: Optional[float] = 3600.0
    seed: int = 0
    node_limit: Optional[int] = None
    degree_inequalities: bool = True

    def __post_init__(self):
        if self.cut_mode not in ("all", "one"):
            raise ValueError("cut_mode must be 'all' or 'one'")

    def to_dict(self) -> dict:
        return asdict(self)


def build_master(inst: Instance, degree_inequalities: bool = True) -> MipModel:
    model = build_hess_model(inst, inst.costs)
    if degree_inequalities:
        add_degree_inequalities(model, inst)
    return model


class _Search:
    def __init__(self, inst: Instance, model: MipModel, settings: SolverSettings):
        g = inst.graph
        self.inst = inst
        self.g = g
        self.model = model
        self.settings = settings
        self.n = g.n
        self.k = inst.k
        self.q = inst.q
        self.lower = model.lower
        self.upper = model.upper
        self.costs = inst.costs
        self.w = np.array(self.costs.w)
        self.wl = self.w.tolist()
        self.p = [float(x) for x in g.weights]
        self.adj = g.adj
        self.degree_rows = model.has_degree_rows
        self.best = math.inf
        self.incumbent: Optional[Partition] = None
        self.open_bounds = []
        self.stopped = False
        self.nodes = 0
        self.sep_time = 0.0
        self.cuts_added = 0
        self.cuts_by_vertex = defaultdict(list)
        for cut in model.cut_pool:
            self._index_cut(cut)
        self.t0 = time.perf_counter()
        self.deadline = None if settings.time_limit is None else self.t0 + settings.time_limit

    # -- bookkeeping --------------------------------------------------------

    def _index_cut(self, cut):
        for v in {cut.a, cut.b} | set(cut.separator):
            self.cuts_by_vertex[v].append(cut)

    def _tick(self):
        self.nodes += 1
        if self.stopped:
            return True
        lim = self.settings.node_limit
        if lim is not None and self.nodes > lim:
            self.stopped = True
        elif self.deadline is not None and self.nodes % _CHECK_EVERY == 0 and time.perf_counter() > self.deadline:
            self.stopped = True
        return self.stopped

    def offer(self, partition: Partition):
        """Accept ``partition`` as incumbent if it is feasible and strictly better."""
        report = verify_feasible(partition, self.inst)
        if not report.passed:
            raise RuntimeError("refusing an infeasible incumbent")
        value = evaluate_compactness(partition, self.costs)
        if value < self.best - TOL:
            self.best = value
            self.incumbent = partition

    # -- root sets ----------------------------------------------------------

    def _root_bound(self, chosen, start):
        need = self.k - len(chosen)
        ncand = self.n - start
        if ncand < need:
            return math.inf
        rows = np.array(list(chosen) + list(range(start, self.n)), dtype=np.int64)
        block = self.w[rows]
        if ncand:
            block = block.copy()
            off = len(chosen)
            block[np.arange(off, off + ncand), np.arange(start, self.n)] = np.inf
        b = block.min(axis=0)
        if chosen:
            b[list(chosen)] = 0.0
        fixed = b[:start].copy()
        if chosen:
            fixed[list(chosen)] = 0.0
        if np.isinf(fixed).any():
            return math.inf
        cand = np.sort(b[start:])
        if need:
            if ncand - need > 0 and np.isinf(cand[: ncand - need]).any():
                return math.inf
            cand = cand[: ncand - need]
        return float(fixed.sum() + cand.sum())

    def run(self):
        if self.degree_rows and any(len(a) < self.q for a in self.adj):
            return
        self._roots([], 0, self._root_bound([], 0))

    def _roots(self, chosen, start, bound):
        if self._tick():
            self.open_bounds.append(bound)
            return
        if bound >= self.best - TOL:
            return
        if len(chosen) == self.k:
            self._assign_roots(chosen, bound)
            return
        children = []
        for r in range(start, self.n):
            if self.degree_rows and len(self.adj[r]) < self.q:
                continue
            nxt = chosen + [r]
            children.append((self._root_bound(nxt, r + 1), r, nxt))
        children.sort(key=lambda c: (c[0], c[1]))
        for b, r, nxt in children:
            if math.isinf(b):
                continue
            self._roots(nxt, r + 1, b)

    # -- assignments --------------------------------------------------------

    def _assign_roots(self, roots, bound):
        n, k, q = self.n, self.k, self.q
        wl, p = self.wl, self.p
        assign = [-1] * n
        ridx = {}
        for t, r in enumerate(roots):
            assign[r] = t
            ridx[r] = t
        size = [p[r] for r in roots]
        count = [1] * k
        free = [j for j in range(n) if j not in ridx]
        options = {}
        best_cost = {}
        spread = {}
        for j in free:
            opts = sorted((wl[r][j], t) for t, r in enumerate(roots) if not math.isinf(wl[r][j]))
            if not opts:
                return
            options[j] = opts
            best_cost[j] = opts[0][0]
            spread[j] = opts[1][0] - opts[0][0] if len(opts) > 1 else math.inf
        order = sorted(free, key=lambda j: (-spread[j], j))
        suffix = [0.0] * (len(order) + 1)
        for i in range(len(order) - 1, -1, -1):
            suffix[i] = suffix[i + 1] + best_cost[order[i]]

        allowed = [[not math.isinf(wl[r][v]) for v in range(n)] for r in roots]
        avail = None
        if self.degree_rows:
            avail = [[0] * k for _ in range(n)]
            for u in range(n):
                for v in self.adj[u]:
                    if assign[v] >= 0:
                        avail[u][assign[v]] += 1
                    else:
                        for t in range(k):
                            if allowed[t][v]:
                                avail[u][t] += 1
            for t, r in enumerate(roots):
                if avail[r][t] < q:
                    return
            for j in free:
                if all(avail[j][t] < q for _, t in options[j]):
                    return

        state = _AssignState(
            roots=roots,
            ridx=ridx,
            assign=assign,
            size=size,
            count=count,
            order=order,
            options=options,
            suffix=suffix,
            allowed=allowed,
            avail=avail,
            unassigned_size=sum(p[j] for j in free),
            unassigned=len(free),
        )
        self._dfs(state, 0, 0.0)

    def _cut_dead(self, cut, st) -> bool:
        t = st.ridx.get(cut.root)
        if t is None:
            return False
        assign = st.assign
        if assign[cut.b] != t:
            return False
        if cut.kind == "pair" and assign[cut.a] != t:
            return False
        support = 0
        for c in cut.separator:
            if assign[c] == t or (assign[c] == -1 and st.allowed[t][c]):
                support += 1
                if support >= cut.q:
                    return False
        return True

    def _place(self, st, j, t):
        """Assign j to part t; return False if propagation finds a dead end (state updated either way)."""
        st.assign[j] = t
        st.size[t] += self.p[j]
        st.count[t] += 1
        st.unassigned -= 1
        st.unassigned_size -= self.p[j]
        ok = st.size[t] <= self.upper + SIZE_TOL
        if ok:
            shortfall = sum(max(0.0, self.lower - s) for s in st.size)
            ok = shortfall <= st.unassigned_size + SIZE_TOL
        if ok and not self.degree_rows:
            need = self.q + 1
            ok = all(c + st.unassigned >= need for c in st.count)
        if self.degree_rows:
            avail = st.avail
            for u in self.adj[j]:
                row = avail[u]
                for t2 in range(self.k):
                    if t2 != t and st.allowed[t2][j]:
                        row[t2] -= 1
            if ok:
                ok = avail[j][t] >= self.q
            if ok:
                for u in self.adj[j]:
                    tu = st.assign[u]
                    if tu >= 0:
                        if avail[u][tu] < self.q:
                            ok = False
                            break
                    elif all(avail[u][t2] < self.q for _, t2 in st.options[u]):
                        ok = False
                        break
        if ok:
            for cut in self.cuts_by_vertex.get(j, ()):
                if self._cut_dead(cut, st):
                    ok = False
                    break
        return ok

    def _unplace(self, st, j, t):
        st.assign[j] = -1
        st.size[t] -= self.p[j]
        st.count[t] -= 1
        st.unassigned += 1
        st.unassigned_size += self.p[j]
        if self.degree_rows:
            avail = st.avail
            for u in self.adj[j]:
                row = avail[u]
                for t2 in range(self.k):
                    if t2 != t and st.allowed[t2][j]:
                        row[t2] += 1

    def _dfs(self, st, pos, fixed):
        bound = fixed + st.suffix[pos]
        if self._tick():
            self.open_bounds.append(bound)
            return
        if bound >= self.best - TOL:
            return
        if pos == len(st.order):
            self._leaf(st, fixed)
            return
        j = st.order[pos]
        seen = len(self.model.cut_pool)
        for cost, t in st.options[j]:
            if st.size[t] + self.p[j] > self.upper + SIZE_TOL:
                continue
            if fixed + cost + st.suffix[pos + 1] >= self.best - TOL and not self.stopped:
                continue
            if self._place(st, j, t):
                self._dfs(st, pos + 1, fixed + cost)
            self._unplace(st, j, t)
            pool = self.model.cut_pool
            if len(pool) > seen:
                dead = any(self._cut_dead(c, st) for c in pool[seen:])
                seen = len(pool)
                if dead:
                    return

    def _leaf(self, st, fixed):
        parts = {r: set() for r in st.roots}
        for v, t in enumerate(st.assign):
            parts[st.roots[t]].add(v)
        t0 = time.perf_counter()
        cuts = separate_parts(self.g, parts, self.q, self.settings.root_resilience, self.settings.cut_mode)
        self.sep_time += time.perf_counter() - t0
        if cuts:
            for cut in cuts:
                if self.model.add_cut(cut):
                    self._index_cut(cut)
                    self.cuts_added += 1
            return
        self.offer(make_partition(parts.values(), self.costs))


@dataclass
class _AssignState:
    roots: list
    ridx: dict
    assign: list
    size: list
    count: list
    order: list
    options: dict
    suffix: list
    allowed: list
    avail: Optional[list]
    unassigned_size: float
    unassigned: int


def solve_exact(
    inst: Instance,
    settings: SolverSettings = SolverSettings(),
    warm_start: Optional[Partition] = None,
    model: Optional[MipModel] = None,
) -> SolveResult:
    """Solve to optimality, or stop at the time/node limit with the best bound found.

    ``model`` may be passed to keep the cut pool for later export; it is built
    from ``inst`` otherwise.
    """
    t0 = time.perf_counter()
    if model is None:
        model = build_master(inst, settings.degree_inequalities)
    search = _Search(inst, model, settings)
    if warm_start is not None:
        search.offer(warm_start)
    search.run()
    wall = time.perf_counter() - t0
    if search.stopped:
        lb = min([search.best] + search.open_bounds)
        status = "feasible" if search.incumbent is not None else "inconclusive"
        lower = None if math.isinf(lb) else lb
    elif search.incumbent is not None:
        status, lower = "optimal", search.best
    else:
        status, lower = "infeasible", None
    return SolveResult(
        status=status,
        objective=None if search.incumbent is None else search.best,
        lower_bound=lower,
        partition=search.incumbent,
        wall_time=wall,
        separation_time=search.sep_time,
        cuts_added=search.cuts_added,
        nodes=search.nodes,
        settings=settings.to_dict(),
        instance_name=inst.name,
        method="exact",
    )


# --- LP export ---------------------------------------------------------------


def _var(v) -> str:
    return f"x_{v[0]}_{v[1]}"


def _num(c: float) -> str:
    return format(float(c), ".17g")


def _terms(coeffs: dict) -> list:
    out = []
    for v in sorted(coeffs):
        c = coeffs[v]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_num(abs(c))} {_var(v)}")
    return out


def _wrap(label: str, terms: list, tail: str = "") -> list:
    if not terms:
        terms = ["0 x_0_0"]
    lines = []
    head = f" {label}:"
    chunk = []
    for term in terms:
        chunk.append(term)
        if len(chunk) == 8:
            lines.append((head if not lines else "   ") + " " + " ".join(chunk))
            chunk = []
    if chunk or not lines:
        lines.append((head if not lines else "   ") + " " + " ".join(chunk))
    if tail:
        lines[-1] += " " + tail
    return lines


def export_lp(model: MipModel, path) -> None:
    """Write the master (objective, rows, pooled cuts, bounds, binaries) in LP format."""
    sense = {"<=": "<=", ">=": ">=", "=": "="}
    lines = [f"\\ {model.name}", "Minimize"]
    lines += _wrap("obj", _terms(model.objective))
    lines.append("Subject To")
    for row in model.constraints:
        lines += _wrap(row.name, _terms(row.coeffs), f"{sense[row.sense]} {_num(row.rhs)}")
    for idx, cut in enumerate(model.cut_pool):
        coeffs, rhs = cut.coefficients()
        lines += _wrap(f"cut_{idx}", _terms(coeffs), f">= {_num(rhs)}")
    lines.append("Bounds")
    for v in sorted(model.fixed_zero):
        lines.append(f" {_var(v)} = 0")
    lines.append("Binaries")
    names = [_var(v) for v in model.variables]
    for i in range(0, len(names), 10):
        lines.append(" " + " ".join(names[i : i + 10]))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
