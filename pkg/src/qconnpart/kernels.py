"""Hot inner loops over CSR adjacency arrays.

Every kernel exists twice: a loop version that numba compiles and a fallback
that runs without numba. ``bfs_distances`` and ``vertex_flow`` dispatch on
``_accel.USE_NUMBA``; the ``*_py``/``*_numpy`` and ``*_nb`` names stay
importable so the two paths can be compared directly.
"""

import numpy as np

from . import _accel

__all__ = [
    "bfs_distances",
    "bfs_distances_numpy",
    "vertex_flow",
    "vertex_flow_py",
    "reverse_positions",
]


def _bfs_distances_loops(indptr, indices):
    n = indptr.shape[0] - 1
    dist = np.full((n, n), np.inf)
    queue = np.empty(n, dtype=np.int64)
    for src in range(n):
        row = dist[src]
        row[src] = 0.0
        queue[0] = src
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            dv = row[v] + 1.0
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if row[w] == np.inf:
                    row[w] = dv
                    queue[tail] = w
                    tail += 1
    return dist


def bfs_distances_numpy(indptr, indices):
    """All-pairs hop distances by simultaneous frontier expansion (dense)."""
    n = indptr.shape[0] - 1
    adj = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    adj[rows, indices] = True
    dist = np.full((n, n), np.inf)
    reached = np.eye(n, dtype=bool)
    frontier = reached.copy()
    np.fill_diagonal(dist, 0.0)
    level = 0
    while frontier.any():
        level += 1
        nxt = (frontier.astype(np.uint8) @ adj.astype(np.uint8)).astype(bool) & ~reached
        dist[nxt] = level
        reached |= nxt
        frontier = nxt
    return dist


def _vertex_flow_impl(indptr, indices, rev, s, t, limit):
    # Unit vertex capacities on the split digraph: v_in = 2v, v_out = 2v + 1.
    # Arc codes in prev_arc: -1 internal forward, -2 internal backward,
    # p >= 0 edge arc u_out -> v_in at CSR position p, -(p + 3) its reverse.
    n = indptr.shape[0] - 1
    inner = np.zeros(n, dtype=np.int64)
    eflow = np.zeros(indices.shape[0], dtype=np.int64)
    prev_node = np.full(2 * n, -1, dtype=np.int64)
    prev_arc = np.zeros(2 * n, dtype=np.int64)
    queue = np.empty(2 * n, dtype=np.int64)
    visited = np.zeros(2 * n, dtype=np.bool_)
    start = 2 * s + 1
    target = 2 * t
    flow = 0
    while flow < limit:
        visited[:] = False
        visited[start] = True
        queue[0] = start
        head = 0
        tail = 1
        found = False
        while head < tail and not found:
            x = queue[head]
            head += 1
            v = x // 2
            if x % 2 == 0:
                if v == s or inner[v] == 0:
                    y = x + 1
                    if not visited[y]:
                        visited[y] = True
                        prev_node[y] = x
                        prev_arc[y] = -1
                        queue[tail] = y
                        tail += 1
                for p in range(indptr[v], indptr[v + 1]):
                    q = rev[p]
                    if eflow[q] > 0:
                        y = 2 * indices[p] + 1
                        if not visited[y]:
                            visited[y] = True
                            prev_node[y] = x
                            prev_arc[y] = -(q + 3)
                            queue[tail] = y
                            tail += 1
            else:
                if v != s and v != t and inner[v] > 0:
                    y = x - 1
                    if not visited[y]:
                        visited[y] = True
                        prev_node[y] = x
                        prev_arc[y] = -2
                        queue[tail] = y
                        tail += 1
                for p in range(indptr[v], indptr[v + 1]):
                    y = 2 * indices[p]
                    if not visited[y]:
                        visited[y] = True
                        prev_node[y] = x
                        prev_arc[y] = p
                        queue[tail] = y
                        tail += 1
                        if y == target:
                            found = True
                            break
        if not found:
            break
        y = target
        while y != start:
            a = prev_arc[y]
            if a == -1:
                inner[y // 2] += 1
            elif a == -2:
                inner[y // 2] -= 1
            elif a >= 0:
                eflow[a] += 1
            else:
                eflow[-a - 3] -= 1
            y = prev_node[y]
        flow += 1
    return flow, visited


def reverse_positions(indptr, indices):
    """For each CSR position ``p`` of arc u->v, the position of arc v->u."""
    n = indptr.shape[0] - 1
    lookup = {}
    for u in range(n):
        for p in range(indptr[u], indptr[u + 1]):
            lookup[(u, int(indices[p]))] = p
    rev = np.empty(indices.shape[0], dtype=np.int64)
    for u in range(n):
        for p in range(indptr[u], indptr[u + 1]):
            rev[p] = lookup[(int(indices[p]), u)]
    return rev


vertex_flow_py = _vertex_flow_impl
bfs_distances_loops_py = _bfs_distances_loops

if _accel.HAVE_NUMBA:
    vertex_flow_nb = _accel.njit(_vertex_flow_impl)
    bfs_distances_nb = _accel.njit(_bfs_distances_loops)
else:
    vertex_flow_nb = None
    bfs_distances_nb = None


def vertex_flow(indptr, indices, rev, s, t, limit):
    """Maximum number of internally vertex-disjoint s,t-paths, capped at ``limit``.

    ``s`` and ``t`` must be distinct and non-adjacent. Returns ``(flow, visited)``
    where ``visited`` marks split-graph nodes reachable from ``s_out`` in the
    final residual graph; it encodes a minimum s,t vertex cut only when
    ``flow < limit``.
    """
    if _accel.USE_NUMBA:
        return vertex_flow_nb(indptr, indices, rev, s, t, limit)
    return vertex_flow_py(indptr, indices, rev, s, t, limit)


def bfs_distances(indptr, indices):
    """All-pairs BFS hop counts as a float matrix with ``inf`` for unreachable pairs."""
    if _accel.USE_NUMBA:
        return bfs_distances_nb(indptr, indices)
    return bfs_distances_numpy(indptr, indices)
