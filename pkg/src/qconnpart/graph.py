"""Undirected vertex-weighted graphs and the connectivity primitives built on them.

Vertices are the integers ``0..n-1``. Most functions accept an optional
``within`` vertex set and then operate on the induced subgraph ``g[within]``
without relabeling, which is how parts of a partition are inspected.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from . import kernels

__all__ = [
    "Graph",
    "Cutset",
    "neighbors",
    "connected_components",
    "is_connected",
    "all_pairs_hop_distance",
    "minimum_vertex_cutset",
    "minimum_vertex_cutset_for_part",
    "is_q_connected",
    "is_ab_separator",
    "minimal_separator",
    "find_cycle",
    "articulation_points",
    "biconnected_blocks",
    "largest_biconnected_block",
    "is_biconnected",
    "is_forest",
    "vertex_weighted_path",
]


class Graph:
    """Simple undirected graph with nonnegative vertex weights.

    Duplicate edges collapse to one; self-loops and out-of-range endpoints
    raise ``ValueError``. ``origin`` optionally records, for each vertex, its
    label in the graph this one was extracted from.
    """

    __slots__ = ("_n", "_edges", "_adj", "_adj_sets", "_weights", "_origin", "_csr")

    def __init__(self, n: int, edges: Iterable = (), weights=None, origin=None):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        normalized = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            normalized.add((u, v) if u < v else (v, u))
        self._n = n
        self._edges = tuple(sorted(normalized))
        adj = [[] for _ in range(n)]
        for u, v in self._edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self._adj_sets = tuple(frozenset(a) for a in self._adj)
        if weights is None:
            w = np.ones(n)
        else:
            w = np.array(weights, dtype=float).reshape(-1)
            if w.shape[0] != n:
                raise ValueError(f"expected {n} weights, got {w.shape[0]}")
            if np.any(w < 0) or not np.all(np.isfinite(w)):
                raise ValueError("vertex weights must be finite and nonnegative")
        w.setflags(write=False)
        self._weights = w
        if origin is not None:
            origin = tuple(int(o) for o in origin)
            if len(origin) != n:
                raise ValueError("origin must list one label per vertex")
        self._origin = origin
        self._csr = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> tuple:
        return self._edges

    @property
    def adj(self) -> tuple:
        return self._adj

    @property
    def adj_sets(self) -> tuple:
        return self._adj_sets

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def origin(self):
        return self._origin

    @property
    def relabel_map(self) -> Optional[dict]:
        """Original label -> current label, when the graph was extracted from another."""
        if self._origin is None:
            return None
        return {old: new for new, old in enumerate(self._origin)}

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj_sets[u]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def size(self, vertices=None) -> float:
        """Total weight of ``vertices`` (all vertices when omitted)."""
        if vertices is None:
            return float(self._weights.sum())
        return float(sum(self._weights[v] for v in vertices))

    def csr(self):
        if self._csr is None:
            indptr = np.zeros(self._n + 1, dtype=np.int64)
            indptr[1:] = np.cumsum([len(a) for a in self._adj])
            indices = np.fromiter((v for a in self._adj for v in a), dtype=np.int64, count=2 * self.m)
            self._csr = (indptr, indices)
        return self._csr

    def with_edges(self, extra: Iterable) -> "Graph":
        return Graph(self._n, list(self._edges) + list(extra), self._weights, self._origin)

    def induced(self, vertices: Iterable[int]) -> "Graph":
        """Induced subgraph relabeled to ``0..len-1`` in ascending label order."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self._edges if u in index and v in index]
        base = self._origin
        origin = [base[v] for v in keep] if base is not None else keep
        return Graph(len(keep), edges, self._weights[keep], origin)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._n == other._n
            and self._edges == other._edges
            and np.array_equal(self._weights, other._weights)
        )

    def __hash__(self):
        return hash((self._n, self._edges))

    def __repr__(self):
        return f"Graph(n={self._n}, m={self.m})"


@dataclass(frozen=True)
class Cutset:
    vertices: frozenset

    @property
    def size(self) -> int:
        return len(self.vertices)


def _check_vertices(g: Graph, s) -> None:
    for v in s:
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} out of range [0, {g.n})")


def _scope(g: Graph, within):
    return range(g.n) if within is None else within


def neighbors(g: Graph, s: Iterable[int]) -> set:
    """N(s): vertices outside ``s`` adjacent to some vertex of ``s``."""
    s = set(s)
    _check_vertices(g, s)
    out = set()
    for u in s:
        out.update(g.adj[u])
    return out - s


def _bfs(g: Graph, start: int, allowed) -> set:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w not in seen and (allowed is None or w in allowed):
                seen.add(w)
                queue.append(w)
    return seen


def connected_components(g: Graph, within=None) -> list:
    """Components of ``g`` (or ``g[within]``), ordered by smallest vertex."""
    allowed = None if within is None else set(within)
    seen = set()
    comps = []
    for v in sorted(_scope(g, allowed)):
        if v in seen:
            continue
        comp = _bfs(g, v, allowed)
        seen |= comp
        comps.append(comp)
    return comps


def is_connected(g: Graph, within=None) -> bool:
    allowed = None if within is None else set(within)
    scope = _scope(g, allowed)
    if len(scope) == 0:
        return False
    start = next(iter(scope))
    return len(_bfs(g, start, allowed)) == len(scope)


def is_forest(g: Graph, within=None) -> bool:
    """True iff ``g[within]`` contains no cycle (m = n - #components)."""
    allowed = set(_scope(g, within))
    m = sum(1 for u in allowed for w in g.adj[u] if w in allowed) // 2
    return m == len(allowed) - len(connected_components(g, allowed))


def all_pairs_hop_distance(g: Graph) -> np.ndarray:
    """BFS hop counts; ``np.inf`` marks pairs in different components."""
    if g.n == 0:
        return np.zeros((0, 0))
    indptr, indices = g.csr()
    return kernels.bfs_distances(indptr, indices)


# --- vertex connectivity -----------------------------------------------------


def _local_csr(g: Graph, vertices):
    local = {v: i for i, v in enumerate(vertices)}
    adj = [[local[w] for w in g.adj[v] if w in local] for v in vertices]
    indptr = np.zeros(len(vertices) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(a) for a in adj])
    indices = np.fromiter((w for a in adj for w in a), dtype=np.int64, count=int(indptr[-1]))
    rev = kernels.reverse_positions(indptr, indices)
    return adj, indptr, indices, rev


def _pair_cut(csr, s, t, limit):
    """(flow, cut as local indices or None) for non-adjacent local vertices s, t."""
    indptr, indices, rev = csr
    flow, visited = kernels.vertex_flow(indptr, indices, rev, s, t, limit)
    if flow >= limit:
        return flow, None
    n = indptr.shape[0] - 1
    cut = [v for v in range(n) if v != s and v != t and visited[2 * v] and not visited[2 * v + 1]]
    return flow, cut


def _min_cutset_local(vertices, g: Graph, limit=None):
    """Minimum cutset of ``g[vertices]`` (vertices sorted, assumed connected, not complete).

    Schedule: a minimum-degree vertex ``v`` against each non-neighbor, then
    each non-adjacent pair of neighbors of ``v``. With ``limit`` the search
    stops once a cutset smaller than ``limit`` is found.
    """
    adj, indptr, indices, rev = _local_csr(g, vertices)
    csr = (indptr, indices, rev)
    n = len(vertices)
    degrees = [len(a) for a in adj]
    v = min(range(n), key=lambda i: (degrees[i], i))
    nbrs = set(adj[v])
    best = n - 1
    best_cut = None
    for u in range(n):
        if u == v or u in nbrs:
            continue
        k, cut = _pair_cut(csr, v, u, best if limit is None else min(best, limit))
        if cut is not None and k < best:
            best, best_cut = k, cut
            if limit is not None and best < limit:
                return best, best_cut
    for x, y in combinations(sorted(nbrs), 2):
        if y in adj[x]:
            continue
        k, cut = _pair_cut(csr, x, y, best if limit is None else min(best, limit))
        if cut is not None and k < best:
            best, best_cut = k, cut
            if limit is not None and best < limit:
                return best, best_cut
    return best, best_cut


def _is_complete(g: Graph, vertices) -> bool:
    vs = set(vertices)
    k = len(vs)
    return all(len(g.adj_sets[v] & vs) == k - 1 for v in vs)


def _min_cutset(g: Graph, vertices, limit=None):
    vertices = sorted(vertices)
    n = len(vertices)
    if n == 0:
        return 0, Cutset(frozenset())
    if not is_connected(g, vertices):
        return 0, Cutset(frozenset())
    if _is_complete(g, vertices):
        return n - 1, None
    k, cut = _min_cutset_local(vertices, g, limit)
    return k, Cutset(frozenset(vertices[i] for i in cut))


def minimum_vertex_cutset(g: Graph, within=None):
    """Return ``(kappa, cutset)`` for ``g`` or ``g[within]``.

    Complete graphs give ``(n - 1, None)``; disconnected graphs give
    ``(0, Cutset(frozenset()))``. Among equal-size minimum cutsets the first
    found in ascending-label schedule order is returned.
    """
    if within is None:
        within = range(g.n)
    else:
        _check_vertices(g, within)
    return _min_cutset(g, within)


def minimum_vertex_cutset_for_part(g: Graph, part, root: int):
    """Minimum cutset ``D`` of the component of ``g[part]`` that contains ``root``.

    When that component is complete, ``D`` is the component minus the root.
    """
    part = set(part)
    if root not in part:
        raise ValueError(f"root {root} is not in the part")
    comp = _bfs(g, root, part)
    if _is_complete(g, comp):
        return len(comp) - 1, Cutset(frozenset(comp - {root}))
    return _min_cutset(g, comp)


def is_q_connected(g: Graph, q: int, within=None) -> bool:
    """True iff the (sub)graph has at least ``q + 1`` vertices and no cutset smaller than ``q``."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    vertices = sorted(_scope(g, within))
    n = len(vertices)
    if n < q + 1 or n == 0:
        return False
    if q == 0:
        return True
    if not is_connected(g, vertices):
        return False
    if q == 1:
        return True
    if q == 2:
        return not articulation_points(g, vertices)
    if _is_complete(g, vertices):
        return True
    k, _ = _min_cutset_local(vertices, g, limit=q)
    return k >= q


def is_ab_separator(g: Graph, c, a: int, b: int) -> bool:
    """True iff removing ``c`` leaves no a,b-path."""
    c = set(c)
    if a == b:
        raise ValueError("a and b must differ")
    if a in c or b in c:
        raise ValueError("a separator may not contain a or b")
    allowed = set(range(g.n)) - c
    return b not in _bfs(g, a, allowed)


def minimal_separator(g: Graph, s, a: int, b: int) -> set:
    """Inclusion-minimal a,b-separator contained in N(s).

    ``s`` must induce a connected subgraph containing ``b`` with ``a`` outside
    ``s`` and not adjacent to it. The search from ``a`` stops at N(s): a
    vertex of N(s) is collected when reached but never expanded.
    """
    s = set(s)
    if b not in s or a in s:
        raise ValueError("need b in s and a outside s")
    nbr = neighbors(g, s)
    if a in nbr:
        raise ValueError("a must not be adjacent to s")
    seen = {a}
    queue = deque([a])
    found = set()
    while queue:
        u = queue.popleft()
        for w in g.adj[u]:
            if w in seen or w in s:
                continue
            seen.add(w)
            if w in nbr:
                found.add(w)
            else:
                queue.append(w)
    return found


def _shortest_path(g: Graph, u: int, v: int, allowed, skip_edge=None):
    """BFS shortest u,v-path inside ``allowed`` (ties by label order), optional edge removed."""
    prev = {u: None}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for w in g.adj[x]:
            if w in prev or (allowed is not None and w not in allowed):
                continue
            if skip_edge is not None and {x, w} == skip_edge:
                continue
            prev[w] = x
            if w == v:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            queue.append(w)
    return None


def find_cycle(g: Graph, rng, within=None):
    """A cycle (vertex list) through a random edge, or ``None`` if the graph is a forest.

    Edges are tried in random order; for each edge (u, v) a shortest u,v-path
    avoiding that edge closes the cycle.
    """
    allowed = None if within is None else set(within)
    edges = [e for e in g.edges if allowed is None or (e[0] in allowed and e[1] in allowed)]
    rng.shuffle(edges)
    for u, v in edges:
        path = _shortest_path(g, u, v, allowed, skip_edge={u, v})
        if path is not None:
            return path
    return None


def vertex_weighted_path(g: Graph, u: int, v: int, allowed, skip_edge=None):
    """Cheapest u,v-path where cost is the weight of the internal vertices.

    Only vertices in ``allowed`` (plus ``u`` and ``v``) may be used. Returns
    ``None`` when ``v`` is unreachable.
    """
    w = g.weights
    best = {u: 0.0}
    prev = {u: None}
    heap = [(0.0, u)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == v:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        if x != u and x not in allowed:
            continue
        for y in g.adj[x]:
            if y in done or (y != v and y not in allowed):
                continue
            if skip_edge is not None and {x, y} == skip_edge:
                continue
            nd = d + (0.0 if y == v else float(w[y]))
            if y not in best or nd < best[y]:
                best[y] = nd
                prev[y] = x
                heapq.heappush(heap, (nd, y))
    return None


# --- blocks and articulation points ------------------------------------------


def _dfs_blocks(g: Graph, vertices):
    """Iterative Hopcroft-Tarjan over ``g[vertices]``: (articulation points, blocks)."""
    allowed = set(vertices)
    disc = {}
    low = {}
    cuts = set()
    blocks = []
    counter = 0
    for root in sorted(allowed):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        edge_stack = []
        stack = [(root, None, iter(g.adj[root]))]
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for w in it:
                if w not in allowed or w == parent:
                    continue
                if w not in disc:
                    disc[w] = low[w] = counter
                    counter += 1
                    edge_stack.append((u, w))
                    stack.append((w, u, iter(g.adj[w])))
                    advanced = True
                    break
                if disc[w] < disc[u]:
                    edge_stack.append((u, w))
                    low[u] = min(low[u], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent is None:
                continue
            low[parent] = min(low[parent], low[u])
            if low[u] >= disc[parent]:
                if parent == root:
                    root_children += 1
                else:
                    cuts.add(parent)
                block = set()
                while edge_stack:
                    e = edge_stack.pop()
                    block.update(e)
                    if e == (parent, u):
                        break
                blocks.append(block)
        if root_children > 1:
            cuts.add(root)
        if not g.adj[root] or all(w not in allowed for w in g.adj[root]):
            blocks.append({root})
    return cuts, blocks


def articulation_points(g: Graph, within=None) -> set:
    return _dfs_blocks(g, _scope(g, within))[0]


def biconnected_blocks(g: Graph, within=None) -> list:
    """Maximal blocks (2-connected pieces, bridges, isolated vertices)."""
    return _dfs_blocks(g, _scope(g, within))[1]


def is_biconnected(g: Graph, within=None) -> bool:
    return is_q_connected(g, 2, within)


def largest_biconnected_block(g: Graph) -> set:
    """Vertex set of the largest block; ties go to the block with the smallest minimum label."""
    blocks = biconnected_blocks(g)
    if not blocks:
        return set()
    return min(blocks, key=lambda b: (-len(b), min(b)))
