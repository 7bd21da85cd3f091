"""Assignment model, partitions and their evaluation.

Variables ``x[i, j]`` are indexed root-first: ``x[i, i] = 1`` makes ``i`` a
root and ``x[i, j] = 1`` assigns ``j`` to root ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graph import Graph, is_ab_separator, is_q_connected
from .instance import SIZE_TOL, CostMatrix, Instance

__all__ = [
    "Constraint",
    "MipModel",
    "Partition",
    "FeasibilityReport",
    "build_hess_model",
    "add_degree_inequalities",
    "assignment_from_partition",
    "check_assignment",
    "partition_from_assignment",
    "make_partition",
    "evaluate_compactness",
    "evaluate_balance",
    "verify_feasible",
    "theorem1_oracle",
    "q_proper",
]

TOL = 1e-9


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: dict  # (i, j) -> coefficient
    sense: str  # "<=", "=", ">="
    rhs: float

    def activity(self, x: np.ndarray) -> float:
        return float(sum(c * x[v] for v, c in self.coeffs.items()))

    def satisfied(self, x: np.ndarray, tol: float = TOL) -> bool:
        lhs = self.activity(x)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class MipModel:
    """Binary variables x[i, j], a linear objective, rows and the lazy cut pool."""

    n: int
    k: int
    q: int
    lower: float
    upper: float
    objective: dict
    fixed_zero: frozenset
    constraints: list = field(default_factory=list)
    cut_pool: list = field(default_factory=list)
    has_degree_rows: bool = False
    name: str = "model"

    @property
    def variables(self):
        return [(i, j) for i in range(self.n) for j in range(self.n)]

    def family(self, prefix: str) -> list:
        return [c for c in self.constraints if c.name.startswith(prefix)]

    def add_cut(self, cut) -> bool:
        """Append ``cut`` unless an identical one is already pooled."""
        if cut in self._pool_keys:
            return False
        self._pool_keys.add(cut)
        self.cut_pool.append(cut)
        return True

    def __post_init__(self):
        self._pool_keys = set(self.cut_pool)


def build_hess_model(inst: Instance, costs: CostMatrix) -> MipModel:
    """Objective sum w_ij x_ij with balance, root-count, assignment and root-link rows."""
    n, k = inst.n, inst.k
    if k > n:
        raise ValueError("k exceeds the number of vertices")
    p = inst.graph.weights
    L, U = inst.L, inst.U
    objective = {}
    fixed = set()
    for i in range(n):
        for j in range(n):
            if costs.forbidden[i, j]:
                fixed.add((i, j))
            else:
                objective[(i, j)] = float(costs.w[i, j])
    rows = []
    for i in range(n):
        lo = {(i, j): -float(p[j]) for j in range(n)}
        lo[(i, i)] = lo[(i, i)] + L
        rows.append(Constraint(f"bal_lo_{i}", lo, "<=", 0.0))
        hi = {(i, j): float(p[j]) for j in range(n)}
        hi[(i, i)] = hi[(i, i)] - U
        rows.append(Constraint(f"bal_hi_{i}", hi, "<=", 0.0))
    rows.append(Constraint("roots", {(i, i): 1.0 for i in range(n)}, "=", float(k)))
    for j in range(n):
        rows.append(Constraint(f"assign_{j}", {(i, j): 1.0 for i in range(n)}, "=", 1.0))
    for i in range(n):
        for j in range(n):
            if i != j:
                rows.append(Constraint(f"link_{i}_{j}", {(i, j): 1.0, (i, i): -1.0}, "<=", 0.0))
    return MipModel(n, k, inst.q, L, U, objective, frozenset(fixed), rows, name=inst.name)


def add_degree_inequalities(model: MipModel, inst: Instance) -> None:
    """Rows sum_{j in N(i)} x_rj >= Q x_ri for every vertex i and root r."""
    g = inst.graph
    q = inst.q
    for i in range(model.n):
        for r in range(model.n):
            coeffs = {(r, j): 1.0 for j in g.adj[i]}
            coeffs[(r, i)] = coeffs.get((r, i), 0.0) - q
            model.constraints.append(Constraint(f"deg_{i}_{r}", coeffs, ">=", 0.0))
    model.has_degree_rows = True


# --- partitions --------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Disjoint parts with one root each; parts are kept in order of their smallest vertex."""

    parts: tuple
    roots: tuple

    def __post_init__(self):
        pairs = sorted(zip((frozenset(p) for p in self.parts), self.roots), key=lambda pr: min(pr[0]))
        object.__setattr__(self, "parts", tuple(p for p, _ in pairs))
        object.__setattr__(self, "roots", tuple(int(r) for _, r in pairs))
        for p, r in zip(self.parts, self.roots):
            if r not in p:
                raise ValueError(f"root {r} is not in its part")

    @property
    def k(self) -> int:
        return len(self.parts)

    def labels(self, n: int) -> list:
        """Part index per vertex (-1 when uncovered)."""
        out = [-1] * n
        for idx, part in enumerate(self.parts):
            for v in part:
                out[v] = idx
        return out

    def to_lists(self):
        return [sorted(p) for p in self.parts], list(self.roots)


def make_partition(parts, costs: CostMatrix) -> Partition:
    """Partition with each root chosen by the argmin rule (smallest label on ties)."""
    parts = [frozenset(p) for p in parts]
    if any(not p for p in parts):
        raise ValueError("parts must be nonempty")
    return Partition(tuple(parts), tuple(costs.part_cost(p)[0] for p in parts))


def assignment_from_partition(parts, roots, n: int) -> np.ndarray:
    x = np.zeros((n, n), dtype=np.int8)
    for part, r in zip(parts, roots):
        for j in part:
            x[r, j] = 1
    return x


def check_assignment(x: np.ndarray, k: int | None = None) -> None:
    """Raise ``ValueError`` unless ``x`` is a structurally valid 0/1 assignment."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("assignment must be a square matrix")
    if not np.isin(x, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    diag = np.diag(x)
    if k is not None and int(diag.sum()) != k:
        raise ValueError(f"expected {k} roots, found {int(diag.sum())}")
    if not (x.sum(axis=0) == 1).all():
        raise ValueError("every vertex must be assigned exactly once")
    if (x > diag[:, None]).any():
        raise ValueError("vertex assigned to a non-root")


def partition_from_assignment(x: np.ndarray, costs: CostMatrix) -> Partition:
    check_assignment(x)
    roots = np.flatnonzero(np.diag(x))
    parts = [set(np.flatnonzero(x[r]).tolist()) for r in roots]
    return make_partition(parts, costs)


def evaluate_compactness(p: Partition, costs: CostMatrix) -> float:
    return float(sum(costs.w[r, j] for part, r in zip(p.parts, p.roots) for j in part))


def evaluate_balance(p: Partition, inst: Instance) -> float:
    """Largest overflow above U or shortfall below L over all parts, floored at 0."""
    g = inst.graph
    worst = 0.0
    for part in p.parts:
        s = g.size(part)
        worst = max(worst, s - inst.U, inst.L - s)
    return worst if worst > SIZE_TOL else 0.0


@dataclass(frozen=True)
class FeasibilityReport:
    covers: bool
    disjoint: bool
    part_count_ok: bool
    sizes: tuple
    balanced: tuple
    q_connected: tuple

    @property
    def passed(self) -> bool:
        return (
            self.covers
            and self.disjoint
            and self.part_count_ok
            and all(self.balanced)
            and all(self.q_connected)
        )

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "covers": self.covers,
            "disjoint": self.disjoint,
            "part_count_ok": self.part_count_ok,
            "sizes": list(self.sizes),
            "balanced": list(self.balanced),
            "q_connected": list(self.q_connected),
        }


def verify_feasible(p: Partition, inst: Instance) -> FeasibilityReport:
    g = inst.graph
    seen = [v for part in p.parts for v in part]
    sizes = tuple(g.size(part) for part in p.parts)
    return FeasibilityReport(
        covers=set(seen) == set(range(g.n)),
        disjoint=len(seen) == len(set(seen)),
        part_count_ok=p.k == inst.k,
        sizes=sizes,
        balanced=tuple(inst.L - SIZE_TOL <= s <= inst.U + SIZE_TOL for s in sizes),
        q_connected=tuple(is_q_connected(g, inst.q, part) for part in p.parts),
    )


def theorem1_oracle(p: Partition, g: Graph, q: int) -> bool:
    """Separator characterization of a Q-proper partition by exhaustive enumeration.

    True iff every part has at least ``q + 1`` vertices and every a,b-separator
    of ``g`` for an in-part pair meets the part in at least ``q`` vertices.
    Exponential in ``g.n``; meant for tiny graphs.
    """
    everyone = range(g.n)
    for part in p.parts:
        if len(part) < q + 1:
            return False
        for a, b in combinations(sorted(part), 2):
            others = [v for v in everyone if v != a and v != b]
            for size in range(len(others) + 1):
                for c in combinations(others, size):
                    if len(part.intersection(c)) >= q:
                        continue
                    if is_ab_separator(g, c, a, b):
                        return False
    return True


def q_proper(p: Partition, g: Graph, q: int) -> bool:
    return all(is_q_connected(g, q, part) for part in p.parts)
