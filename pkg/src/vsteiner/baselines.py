"""Sequential reference algorithms: KMB, Mehlhorn and an exact solver.

Everything here is single-threaded and independent of the visitor engine so
it can serve as a cross-check for :mod:`vsteiner.pipeline`.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OracleRefused, SeedsDisconnected
from .graph import Graph
from .pipeline import SteinerTree

EXACT_MAX_SEEDS = 12
EXACT_MAX_VERTICES = 5000


def _seed_list(graph: Graph, seeds) -> list[int]:
    seeds = sorted(set(seeds))
    if not seeds:
        raise DomainError("seed set is empty")
    if seeds[0] < 0 or seeds[-1] >= graph.vertex_count:
        raise DomainError("seed id out of range")
    return seeds


def dijkstra(graph: Graph, source: int) -> tuple[list, list[int]]:
    """Single-source distances and predecessors (``-1`` where unreachable)."""
    n = graph.vertex_count
    dist = [math.inf] * n
    pred = [-1] * n
    dist[source] = 0
    pred[source] = source
    adj = graph.adj
    heap = [(0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


@dataclass
class SeedDistanceGraph:
    seeds: list[int]
    dist: np.ndarray  # |S| x |S|
    pred: list[list[int]]  # predecessor tree of every seed's SSSP

    def path(self, i: int, j: int) -> list[int]:
        """Vertices on the recorded shortest path from seed ``i`` to seed ``j``."""
        pred = self.pred[i]
        s, v = self.seeds[i], self.seeds[j]
        out = [v]
        while v != s:
            v = pred[v]
            out.append(v)
        return out[::-1]


def apsp_seeds(graph: Graph, seeds) -> SeedDistanceGraph:
    """One Dijkstra per seed."""
    seeds = _seed_list(graph, seeds)
    k = len(seeds)
    dist = np.zeros((k, k), dtype=np.int64)
    preds = []
    for i, s in enumerate(seeds):
        d, p = dijkstra(graph, s)
        unreached = [t for t in seeds if d[t] == math.inf]
        if unreached:
            raise SeedsDisconnected(unreached)
        dist[i] = [d[t] for t in seeds]
        preds.append(p)
    return SeedDistanceGraph(seeds, dist, preds)


class _DisjointSet:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        parent.setdefault(x, x)
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def kruskal(edges) -> list[tuple[int, int, int]]:
    """Minimum spanning forest of ``(a, b, w)`` edges, ties by ``(w, a, b)``."""
    ds = _DisjointSet()
    out = []
    for a, b, w in sorted(edges, key=lambda e: (e[2], e[0], e[1])):
        if ds.union(a, b):
            out.append((a, b, w))
    return out


def prune_steiner_leaves(edges, seeds) -> list[tuple[int, int, int]]:
    """Repeatedly drop edges hanging off non-seed leaves."""
    seeds = set(seeds)
    incident: dict[int, set] = {}
    for e in edges:
        incident.setdefault(e[0], set()).add(e)
        incident.setdefault(e[1], set()).add(e)
    alive = set(edges)
    queue = deque(v for v, es in incident.items() if len(es) == 1 and v not in seeds)
    while queue:
        v = queue.popleft()
        if len(incident[v]) != 1:
            continue
        (e,) = incident[v]
        alive.discard(e)
        other = e[1] if e[0] == v else e[0]
        incident[v].clear()
        incident[other].discard(e)
        if len(incident[other]) == 1 and other not in seeds:
            queue.append(other)
    return sorted(alive)


def _finish(graph: Graph, expanded: set, seeds) -> SteinerTree:
    """KMB steps 4-5: MST of the expanded subgraph, then leaf pruning."""
    mst = kruskal(expanded)
    return SteinerTree.from_edges(prune_steiner_leaves(mst, seeds))


def kmb_steiner(graph: Graph, seeds) -> SteinerTree:
    seeds = _seed_list(graph, seeds)
    if len(seeds) == 1:
        return SteinerTree()
    g1 = apsp_seeds(graph, seeds)
    k = len(seeds)
    complete = [(i, j, int(g1.dist[i, j])) for i in range(k) for j in range(i + 1, k)]
    expanded = set()
    for i, j, _ in kruskal(complete):
        path = g1.path(i, j)
        for a, b in zip(path, path[1:]):
            expanded.add((min(a, b), max(a, b), graph.weight(a, b)))
    return _finish(graph, expanded, seeds)


def voronoi_dijkstra(graph: Graph, seeds) -> tuple[list, list[int], list[int]]:
    """Multi-source Dijkstra; labels ordered by ``(dist, src, pred)``.

    Returns ``(dist, src, pred)`` lists with ``inf``/``-1`` for vertices no
    seed reaches.
    """
    n = graph.vertex_count
    dist = [math.inf] * n
    src = [-1] * n
    pred = [-1] * n
    done = [False] * n
    heap = [(0, s, s, s) for s in seeds]
    heapq.heapify(heap)
    adj = graph.adj
    while heap:
        d, s, p, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        dist[v], src[v], pred[v] = d, s, p
        for u, w in adj[v]:
            if not done[u]:
                heapq.heappush(heap, (d + w, s, v, u))
    return dist, src, pred


def mehlhorn_steiner(graph: Graph, seeds) -> SteinerTree:
    seeds = _seed_list(graph, seeds)
    if len(seeds) == 1:
        return SteinerTree()
    dist, src, pred = voronoi_dijkstra(graph, seeds)
    unreached = [s for s in seeds if src[s] != s]
    bridge: dict[tuple[int, int], tuple[int, int, int]] = {}
    for u, v, w in graph.edges():
        su, sv = src[u], src[v]
        if su < 0 or sv < 0 or su == sv:
            continue
        key = (min(su, sv), max(su, sv))
        cand = (dist[u] + w + dist[v], u, v)
        if key not in bridge or cand < bridge[key]:
            bridge[key] = cand
    mst = kruskal((s, t, c[0]) for (s, t), c in bridge.items())
    if len(mst) != len(seeds) - 1:
        ds = _DisjointSet()
        for s, t, _ in mst:
            ds.union(s, t)
        root = ds.find(seeds[0])
        raise SeedsDisconnected(unreached or [s for s in seeds if ds.find(s) != root])
    expanded = set()
    for s, t, _ in mst:
        _, u, v = bridge[(s, t)]
        expanded.add((u, v, graph.weight(u, v)))
        for x in (u, v):
            while pred[x] != x:
                p = pred[x]
                expanded.add((min(p, x), max(p, x), graph.weight(p, x)))
                x = p
    return _finish(graph, expanded, seeds)


def exact_steiner(graph: Graph, seeds) -> tuple[int, SteinerTree]:
    """Optimal Steiner tree by the Dreyfus-Wagner subset dynamic program.

    ``best[mask, v]`` is the cheapest tree spanning the seeds in ``mask``
    plus vertex ``v``. Refuses more than 12 seeds or 5000 vertices.
    """
    seeds = _seed_list(graph, seeds)
    k, n = len(seeds), graph.vertex_count
    if k > EXACT_MAX_SEEDS or n > EXACT_MAX_VERTICES:
        raise OracleRefused(
            f"exact solver limited to {EXACT_MAX_SEEDS} seeds and {EXACT_MAX_VERTICES} "
            f"vertices, got {k} and {n}")
    reach, _ = dijkstra(graph, seeds[0])
    unreached = [s for s in seeds if reach[s] == math.inf]
    if unreached:
        raise SeedsDisconnected(unreached)
    if k == 1:
        return 0, SteinerTree()

    INF = np.int64(1) << np.int64(60)
    full = (1 << k) - 1
    best = np.full((full + 1, n), INF, dtype=np.int64)
    split = np.zeros((full + 1, n), dtype=np.int64)
    via = np.full((full + 1, n), -1, dtype=np.int64)
    adj = graph.adj

    for mask in range(1, full + 1):
        row = best[mask]
        if mask & (mask - 1) == 0:
            row[seeds[mask.bit_length() - 1]] = 0
        else:
            low = mask & -mask
            rest = mask ^ low
            sub = rest
            # every split {A, mask ^ A} once: A always holds the lowest bit
            while True:
                a = sub | low
                if a != mask:
                    cand = best[a] + best[mask ^ a]
                    better = cand < row
                    if better.any():
                        row[better] = cand[better]
                        split[mask][better] = a
                if sub == 0:
                    break
                sub = (sub - 1) & rest
        # relax the merged costs along graph edges
        d = row.tolist()
        vrow = via[mask]
        heap = [(c, v) for v, c in enumerate(d) if c < INF]
        heapq.heapify(heap)
        done = [False] * n
        while heap:
            c, u = heapq.heappop(heap)
            if done[u] or c > d[u]:
                continue
            done[u] = True
            for v, w in adj[u]:
                nc = c + w
                if nc < d[v]:
                    d[v] = nc
                    vrow[v] = u
                    heapq.heappush(heap, (nc, v))
        best[mask] = d

    edges: set = set()
    stack = [(full, seeds[0])]
    while stack:
        mask, v = stack.pop()
        u = int(via[mask, v])
        if u >= 0:
            edges.add((min(u, v), max(u, v), graph.weight(u, v)))
            stack.append((mask, u))
        elif mask & (mask - 1):
            a = int(split[mask, v])
            stack.append((a, v))
            stack.append((mask ^ a, v))
    optimum = int(best[full, seeds[0]])
    tree = SteinerTree.from_edges(edges)
    # the union of an optimal decomposition can only collapse into a tree
    # of the same cost because weights are positive
    assert tree.total_distance == optimum, (tree.total_distance, optimum)
    return optimum, tree
