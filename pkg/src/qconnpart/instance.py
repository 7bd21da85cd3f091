"""Problem instances: balance bounds, costs, file formats, preprocessing, generators."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import (
    Graph,
    all_pairs_hop_distance,
    connected_components,
    is_q_connected,
    largest_biconnected_block,
    minimum_vertex_cutset,
)

__all__ = [
    "Instance",
    "CostMatrix",
    "InstanceFormatError",
    "build_cost_matrix",
    "load_instance",
    "save_instance",
    "instance_to_dict",
    "instance_from_dict",
    "read_edge_list",
    "preprocess_extract_biconnected",
    "preprocess_raise_connectivity",
    "generate",
    "grid",
    "cycle",
    "complete",
    "random_graph",
    "mycielskian",
]

SIZE_TOL = 1e-9


class InstanceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    """A graph plus K, Q and either a deviation threshold ``tau`` or explicit ``L``/``U``."""

    graph: Graph
    k: int
    q: int
    tau: Optional[float] = None
    bounds: Optional[tuple] = None
    name: str = "instance"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.k > self.graph.n:
            raise ValueError(f"k={self.k} exceeds the vertex count {self.graph.n}")
        if (self.tau is None) == (self.bounds is None):
            raise ValueError("give exactly one of tau or (L, U)")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.bounds is not None:
            lo, hi = self.bounds
            object.__setattr__(self, "bounds", (float(lo), float(hi)))
            if not 0 <= lo <= hi:
                raise ValueError("need 0 <= L <= U")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def average_size(self) -> float:
        return self.graph.size() / self.k

    @property
    def L(self) -> float:
        if self.bounds is not None:
            return self.bounds[0]
        if math.isinf(self.tau):
            return 0.0
        return (1.0 - self.tau) * self.average_size

    @property
    def U(self) -> float:
        if self.bounds is not None:
            return self.bounds[1]
        if math.isinf(self.tau):
            return self.graph.size()
        return (1.0 + self.tau) * self.average_size

    @cached_property
    def distances(self) -> np.ndarray:
        return all_pairs_hop_distance(self.graph)

    @cached_property
    def costs(self) -> "CostMatrix":
        return build_cost_matrix(self)

    def with_params(self, k=None, q=None, tau=None, bounds=None, name=None) -> "Instance":
        if tau is not None and bounds is not None:
            raise ValueError("give tau or bounds, not both")
        if tau is None and bounds is None:
            tau, bounds = self.tau, self.bounds
        return Instance(
            self.graph,
            self.k if k is None else k,
            self.q if q is None else q,
            tau,
            bounds,
            self.name if name is None else name,
        )


@dataclass(frozen=True)
class CostMatrix:
    """``w[i, j] = p_j * d_ij**2 / size(V)``; unreachable pairs hold ``inf`` and are forbidden."""

    w: np.ndarray
    forbidden: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def part_cost(self, part) -> tuple:
        """(root, cost) minimizing the row sum over ``part``; ties go to the smallest label."""
        idx = sorted(part)
        sums = self.w[np.ix_(idx, idx)].sum(axis=1)
        best = int(np.argmin(sums))
        return idx[best], float(sums[best])


def build_cost_matrix(inst: Instance) -> CostMatrix:
    d = inst.distances
    p = inst.graph.weights
    total = inst.graph.size()
    forbidden = ~np.isfinite(d)
    with np.errstate(invalid="ignore"):
        if total > 0:
            w = p[None, :] * np.where(forbidden, 0.0, d) ** 2 / total
        else:
            w = np.zeros_like(d)
    w[forbidden] = np.inf
    w.setflags(write=False)
    forbidden.setflags(write=False)
    return CostMatrix(w, forbidden)


# --- file formats ------------------------------------------------------------


def _tau_to_json(tau):
    return "inf" if math.isinf(tau) else tau


def _tau_from_json(value):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        raise InstanceFormatError(f"bad tau value {value!r}")
    if value is None:
        return math.inf
    return float(value)


def instance_to_dict(inst: Instance) -> dict:
    g = inst.graph
    if inst.tau is not None:
        balance = {"tau": _tau_to_json(inst.tau)}
    else:
        balance = {"L": inst.bounds[0], "U": inst.bounds[1]}
    doc = {
        "name": inst.name,
        "n": g.n,
        "edges": [list(e) for e in g.edges],
        "weights": [float(x) for x in g.weights],
        "k": inst.k,
        "q": inst.q,
        "balance": balance,
    }
    if g.origin is not None:
        doc["origin"] = list(g.origin)
    return doc


def instance_from_dict(doc: dict) -> Instance:
    try:
        n = int(doc["n"])
        edges = [tuple(e) for e in doc.get("edges", [])]
        weights = doc.get("weights")
        graph = Graph(n, edges, weights, doc.get("origin"))
        balance = doc.get("balance", {"tau": "inf"})
        if "tau" in balance:
            tau, bounds = _tau_from_json(balance["tau"]), None
        else:
            tau, bounds = None, (float(balance["L"]), float(balance["U"]))
        return Instance(graph, int(doc["k"]), int(doc["q"]), tau, bounds, str(doc.get("name", "instance")))
    except KeyError as exc:
        raise InstanceFormatError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(str(exc)) from None


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n", encoding="utf-8")


def load_instance(path) -> Instance:
    """Read a JSON instance; a malformed document reports its line number."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}: {exc.msg}") from None
    try:
        return instance_from_dict(doc)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def read_edge_list(path, weights_path=None) -> Graph:
    """Plain edge list: a ``n m`` header, then ``m`` lines ``u v`` (0-based)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InstanceFormatError(f"{path}:1: empty edge list")
    lineno, header = rows[0]
    try:
        n, m = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise InstanceFormatError(f"{path}:{lineno}: expected header 'n m'") from None
    edges = []
    for lineno, parts in rows[1:]:
        try:
            u, v = int(parts[0]), int(parts[1])
        except (IndexError, ValueError):
            raise InstanceFormatError(f"{path}:{lineno}: expected 'u v'") from None
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise InstanceFormatError(f"{path}:{lineno}: invalid edge ({u}, {v})")
        edges.append((u, v))
    if len(edges) != m:
        raise InstanceFormatError(f"{path}: header declares {m} edges, found {len(edges)}")
    weights = None
    if weights_path is not None:
        weights = []
        for i, ln in enumerate(Path(weights_path).read_text(encoding="utf-8").splitlines()):
            if not ln.strip():
                continue
            try:
                weights.append(float(ln))
            except ValueError:
                raise InstanceFormatError(f"{weights_path}:{i + 1}: expected a real number") from None
        if len(weights) != n:
            raise InstanceFormatError(f"{weights_path}: expected {n} weights, found {len(weights)}")
    return Graph(n, edges, weights)


# --- preprocessing -----------------------------------------------------------


def preprocess_extract_biconnected(g: Graph) -> Graph:
    """Largest 2-connected block as a relabeled graph; ``origin`` keeps the old labels."""
    block = largest_biconnected_block(g)
    if len(block) < 3:
        raise ValueError("graph has no 2-connected block with at least 3 vertices")
    return g.induced(block)


def preprocess_raise_connectivity(g: Graph, q: int) -> Graph:
    """Add edges until ``g`` is q-connected.

    Each round takes one cutset smaller than ``q`` and joins every pair of
    components it leaves behind through their smallest-labeled vertices.
    """
    if g.n <= q:
        raise ValueError(f"a graph with {g.n} vertices cannot be {q}-connected")
    while not is_q_connected(g, q):
        _, cut = minimum_vertex_cutset(g)
        rest = set(range(g.n)) - set(cut.vertices)
        comps = connected_components(g, rest)
        added = []
        for c1, c2 in combinations(comps, 2):
            for u in sorted(c1):
                v = next((v for v in sorted(c2) if not g.has_edge(u, v)), None)
                if v is not None:
                    added.append((u, v))
                    break
        g = g.with_edges(added)
    return g


# --- generators --------------------------------------------------------------


def grid(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be positive")
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1))
            if i + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete graph needs at least one vertex")
    return Graph(n, combinations(range(n), 2))


def random_graph(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with pairs drawn in lexicographic order from ``random.Random(seed)``."""
    if n < 1 or not 0 <= p <= 1:
        raise ValueError("need n >= 1 and 0 <= p <= 1")
    rng = random.Random(seed)
    return Graph(n, [(i, j) for i, j in combinations(range(n), 2) if rng.random() < p])


def mycielskian(base: Graph, levels: int = 1) -> Graph:
    """Apply the Mycielski construction ``levels`` times (triangle-freeness is preserved)."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    g = base
    for _ in range(levels):
        n = g.n
        edges = list(g.edges)
        for u, v in g.edges:
            edges.append((u, n + v))
            edges.append((v, n + u))
        edges.extend((n + i, 2 * n) for i in range(n))
        g = Graph(2 * n + 1, edges)
    return g


def generate(kind: str, *params, seed: int = 0) -> Graph:
    """Dispatch by name: grid(r, c), cycle(n), complete(n), random(n, p), mycielskian(cycle_len, levels)."""
    try:
        if kind == "grid":
            return grid(int(params[0]), int(params[1]))
        if kind == "cycle":
            return cycle(int(params[0]))
        if kind == "complete":
            return complete(int(params[0]))
        if kind == "random":
            return random_graph(int(params[0]), float(params[1]), seed)
        if kind == "mycielskian":
            return mycielskian(cycle(int(params[0])), int(params[1]))
    except IndexError:
        raise ValueError(f"missing parameters for {kind}") from None
    raise ValueError(f"unknown generator {kind!r}")
