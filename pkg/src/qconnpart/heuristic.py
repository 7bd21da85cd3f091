"""Ear-construction heuristic for 2-connected balanced partitions.

Four stages run in a fixed order with restarts: construct (2-connected ears
carved out of the graph, the leftover forest split into trees, excess parts
merged), repair (small components hanging off cut vertices are handed to a
neighboring part), balance local search and compactness local search.
Stages signal failure by returning ``None``.
"""

from __future__ import annotations

import math
import random
import time
from collections import Counter, deque
from dataclasses import asdict, dataclass, field
from typing import Optional

from .graph import (
    Graph,
    articulation_points,
    connected_components,
    find_cycle,
    is_q_connected,
    vertex_weighted_path,
)
from .instance import SIZE_TOL, Instance
from .model import TOL, evaluate_compactness, make_partition, verify_feasible
from .result import SolveResult

__all__ = [
    "HeuristicSettings",
    "HeuristicTrace",
    "ear_construction",
    "construct_initial",
    "repair_2connectivity",
    "balance_violation",
    "local_search",
    "solve_heuristic",
]

STAGES = ("construct", "repair", "balance", "compactness")


@dataclass(frozen=True)
class HeuristicSettings:
    seed: int = 0
    time_limit: Optional[float] = 60.0
    max_restarts: int = 1000
    cycling_window: int = 100

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class HeuristicTrace:
    restarts: int = 0
    stage_times: dict = field(default_factory=lambda: {s: 0.0 for s in STAGES})
    reassignment_log: deque = None
    cycling_window: int = 100

    def __post_init__(self):
        if self.reassignment_log is None:
            self.reassignment_log = deque(maxlen=self.cycling_window)

    def record(self, component, source: int, target: int) -> None:
        self.reassignment_log.append((tuple(sorted(component)), source, target))

    def cycling(self) -> bool:
        """Window full and every move in it occurs at least twice within it."""
        log = self.reassignment_log
        if len(log) < log.maxlen:
            return False
        counts = Counter(log)
        return all(c >= 2 for c in counts.values())


# --- construct ---------------------------------------------------------------


def ear_construction(h: Graph, L: float, rng: random.Random, within=None) -> set:
    """Grow a 2-connected vertex set by open ears until its size reaches ``L``.

    Works on ``h[within]`` (all of ``h`` by default). Returns an empty set
    when that subgraph is a forest.
    """
    scope = set(range(h.n)) if within is None else set(within)
    cyc = find_cycle(h, rng, scope)
    if cyc is None:
        return set()
    traversed = set(cyc)
    size = h.size(traversed)
    while size < L - SIZE_TOL:
        rest = scope - traversed
        # u,v-paths avoiding other traversed vertices run through a single
        # component of the untraversed part, so reachability is per component
        reach = {}
        for comp in connected_components(h, rest):
            touch = {w for x in comp for w in h.adj[x] if w in traversed}
            for t in touch:
                reach.setdefault(t, set()).update(touch - {t})
        order = sorted(traversed)
        rng.shuffle(order)
        ear = None
        for u in order:
            targets = reach.get(u)
            if not targets:
                continue
            v = next(v for v in order if v in targets)
            ear = vertex_weighted_path(h, u, v, rest, skip_edge={u, v})
            break
        if ear is None:
            break
        traversed.update(ear)
        size = h.size(traversed)
    return traversed


def _merge_smallest(g: Graph, parts: list) -> bool:
    """Merge the adjacent pair with the smallest combined size; False if none is adjacent."""
    owner = {v: i for i, p in enumerate(parts) for v in p}
    sizes = [g.size(p) for p in parts]
    best = None
    for u, v in g.edges:
        i, j = owner[u], owner[v]
        if i == j:
            continue
        i, j = min(i, j), max(i, j)
        key = (sizes[i] + sizes[j], i, j)
        if best is None or key < best:
            best = key
    if best is None:
        return False
    _, i, j = best
    parts[i] = parts[i] | parts[j]
    del parts[j]
    return True


def construct_initial(g: Graph, k: int, L: float, rng: random.Random) -> Optional[list]:
    """K connected parts, or ``None`` when fewer than K pieces come out (restart)."""
    remaining = set(range(g.n))
    parts = []
    while remaining:
        ear = ear_construction(g, L, rng, remaining)
        if not ear:
            break
        parts.append(ear)
        remaining -= ear
    parts.extend(connected_components(g, remaining))
    if len(parts) < k:
        return None
    while len(parts) > k:
        if not _merge_smallest(g, parts):
            return None
    return parts


# --- repair ------------------------------------------------------------------


def _two_disconnected(g: Graph, parts: list) -> list:
    return [i for i, p in enumerate(parts) if not is_q_connected(g, 2, p)]


def repair_2connectivity(
    g: Graph, parts: list, rng: random.Random, trace: HeuristicTrace, max_moves: Optional[int] = None
) -> Optional[list]:
    """Hand small components off cut vertices to neighboring parts until every part is 2-connected.

    Returns ``None`` (restart) when a component has no neighboring part, when
    a part is too small to have a cut vertex, on cycling, or after
    ``max_moves`` moves.
    """
    parts = [set(p) for p in parts]
    if max_moves is None:
        max_moves = 20 * g.n + trace.cycling_window
    trace.reassignment_log.clear()
    moves = 0
    while True:
        bad = _two_disconnected(g, parts)
        if not bad:
            return parts
        if moves >= max_moves:
            return None
        src = rng.choice(bad)
        part = parts[src]
        cuts = sorted(articulation_points(g, part))
        if not cuts:
            # disconnected or fewer than three vertices
            return None
        c = rng.choice(cuts)
        comps = connected_components(g, part - {c})
        sizes = [g.size(cm) for cm in comps]
        smallest = min(sizes)
        cands = [cm for cm, s in zip(comps, sizes) if s <= smallest + SIZE_TOL]
        comp = rng.choice(cands)
        owner = {v: i for i, p in enumerate(parts) for v in p}
        targets = sorted({owner[w] for x in comp for w in g.adj[x]} - {src})
        if not targets:
            return None
        dst = rng.choice(targets)
        parts[src] -= comp
        parts[dst] |= comp
        trace.record(comp, src, dst)
        moves += 1
        if trace.cycling():
            return None


# --- local search ------------------------------------------------------------


def balance_violation(sizes, L: float, U: float) -> float:
    """Largest overflow above U or shortfall below L, floored at 0."""
    worst = 0.0
    for s in sizes:
        worst = max(worst, s - U, L - s)
    return worst if worst > SIZE_TOL else 0.0


def local_search(
    g: Graph,
    parts: list,
    objective: str,
    inst: Instance,
    rng: random.Random,
    deadline: Optional[float] = None,
) -> list:
    """Flip moves: one boundary vertex to a neighboring part, strict improvement only.

    ``objective`` is ``"balance"`` or ``"compactness"``. Both parts touched
    by a move must stay 2-connected; compactness moves must also keep the
    partition balanced.
    """
    if objective not in ("balance", "compactness"):
        raise ValueError("objective must be 'balance' or 'compactness'")
    parts = [set(p) for p in parts]
    L, U = inst.L, inst.U
    costs = inst.costs
    sizes = [g.size(p) for p in parts]
    part_cost = [costs.part_cost(p)[1] for p in parts]
    while True:
        if deadline is not None and time.perf_counter() > deadline:
            return parts
        bal = balance_violation(sizes, L, U)
        if objective == "balance" and bal == 0.0:
            return parts
        owner = {v: i for i, p in enumerate(parts) for v in p}
        moves = sorted({(u, owner[w]) for u in range(g.n) for w in g.adj[u] if owner[w] != owner[u]})
        rng.shuffle(moves)
        accepted = False
        for u, dst in moves:
            src = owner[u]
            pu = float(g.weights[u])
            new_sizes = list(sizes)
            new_sizes[src] -= pu
            new_sizes[dst] += pu
            new_bal = balance_violation(new_sizes, L, U)
            if objective == "balance":
                if not new_bal < bal - TOL:
                    continue
            else:
                if new_bal > 0.0:
                    continue
                a = costs.part_cost(parts[src] - {u})[1] if len(parts[src]) > 1 else math.inf
                b = costs.part_cost(parts[dst] | {u})[1]
                delta = a + b - part_cost[src] - part_cost[dst]
                if not delta < -TOL:
                    continue
            donor = parts[src] - {u}
            receiver = parts[dst] | {u}
            if not (is_q_connected(g, 2, donor) and is_q_connected(g, 2, receiver)):
                continue
            parts[src], parts[dst] = donor, receiver
            sizes = new_sizes
            part_cost[src] = costs.part_cost(donor)[1]
            part_cost[dst] = costs.part_cost(receiver)[1]
            accepted = True
            break
        if not accepted:
            return parts


# --- driver ------------------------------------------------------------------


def solve_heuristic(inst: Instance, settings: HeuristicSettings = HeuristicSettings()) -> SolveResult:
    """Restart the four stages until one pass yields a balanced 2-proper partition."""
    if inst.q != 2:
        raise ValueError("the ear-construction heuristic handles q = 2 only")
    g = inst.graph
    rng = random.Random(settings.seed)
    trace = HeuristicTrace(cycling_window=settings.cycling_window)
    t0 = time.perf_counter()
    deadline = None if settings.time_limit is None else t0 + settings.time_limit
    found = None

    def timed(stage, fn, *args, **kwargs):
        s = time.perf_counter()
        out = fn(*args, **kwargs)
        trace.stage_times[stage] += time.perf_counter() - s
        return out

    attempt = 0
    while attempt <= settings.max_restarts:
        if deadline is not None and time.perf_counter() > deadline:
            break
        if attempt:
            trace.restarts += 1
        attempt += 1
        parts = timed("construct", construct_initial, g, inst.k, inst.L, rng)
        if parts is None:
            continue
        if _two_disconnected(g, parts):
            parts = timed("repair", repair_2connectivity, g, parts, rng, trace)
            if parts is None:
                continue
        sizes = [g.size(p) for p in parts]
        if balance_violation(sizes, inst.L, inst.U) > 0.0:
            parts = timed("balance", local_search, g, parts, "balance", inst, rng, deadline)
            if balance_violation([g.size(p) for p in parts], inst.L, inst.U) > 0.0:
                continue
        parts = timed("compactness", local_search, g, parts, "compactness", inst, rng, deadline)
        found = make_partition(parts, inst.costs)
        if not verify_feasible(found, inst).passed:
            raise RuntimeError("heuristic produced an infeasible partition")
        break

    wall = time.perf_counter() - t0
    return SolveResult(
        status="feasible" if found is not None else "inconclusive",
        objective=None if found is None else evaluate_compactness(found, inst.costs),
        lower_bound=None,
        partition=found,
        wall_time=wall,
        settings=settings.to_dict(),
        instance_name=inst.name,
        method="heuristic",
        restarts=trace.restarts,
        stage_times=dict(trace.stage_times),
    )
