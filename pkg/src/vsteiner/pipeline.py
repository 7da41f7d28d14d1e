"""Voronoi-cell Steiner tree 2-approximation on the visitor engine.

Phases, in order (labels used in metrics and reports):

1. ``voronoi_cell``: asynchronous multi-source Bellman-Ford labels every
   vertex with its nearest seed ``src``, predecessor ``pred`` and distance.
2. ``local_min_dist_edge``: each partition scans its arcs for the cheapest
   cross-cell edge per seed pair.
3. ``global_min_dist_edge``: min all-reduce of the per-partition maps.
4. ``mst``: sequential Prim on the seed distance graph.
5. ``edge_pruning``: keep only cross-cell edges whose seed pair is an MST edge.
6. ``tree_edge``: visitors walk predecessor chains from every kept edge back
   to the seeds; the union is the Steiner tree.

All ties are broken by total orders so the output does not depend on the
partition count, queue discipline or message interleaving:

* vertex labels compare as ``(dist, src, pred)``,
* cross-cell edges as ``(d, u, v)`` with ``u < v``,
* distance-graph edges as ``(weight, s, t)`` with ``s < t``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

from .engine import (
    Discipline,
    EngineConfig,
    EngineMetrics,
    Visitor,
    all_reduce_min,
    default_budget,
    run_to_quiescence,
)
from .errors import CorruptedStateError, DomainError, GraphFormatError, SeedsDisconnected
from .graph import Graph, PartitionMap

UNSET = -1
INF = math.inf

PHASES = (
    "voronoi_cell",
    "local_min_dist_edge",
    "global_min_dist_edge",
    "mst",
    "edge_pruning",
    "tree_edge",
)


class VertexState(NamedTuple):
    src: int
    pred: int
    dist: float


@dataclass
class VoronoiState:
    """Column storage for per-vertex ``(src, pred, dist)``."""

    src: list[int]
    pred: list[int]
    dist: list

    @classmethod
    def initial(cls, n: int, seeds: Iterable[int]) -> "VoronoiState":
        st = cls([UNSET] * n, [UNSET] * n, [INF] * n)
        for s in seeds:
            st.src[s] = st.pred[s] = s
            st.dist[s] = 0
        return st

    def __getitem__(self, v: int) -> VertexState:
        return VertexState(self.src[v], self.pred[v], self.dist[v])

    def __len__(self) -> int:
        return len(self.src)

    def cell(self, seed: int) -> set[int]:
        return {v for v, s in enumerate(self.src) if s == seed}


class CrossEdge(NamedTuple):
    """Cheapest known bridge between two cells; compares as ``(d, u, v)``."""

    d: int
    u: int
    v: int


CrossCellEdgeMap = dict  # (s, t) with s < t  ->  CrossEdge


@dataclass
class DistanceGraph:
    seeds: list[int]
    edges: list[tuple[int, int, int]]  # (s, t, d) with s < t


@dataclass
class SteinerTree:
    edges: tuple[tuple[int, int, int], ...] = ()
    total_distance: int = 0

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, int]]) -> "SteinerTree":
        canon = {(min(u, v), max(u, v), w) for u, v, w in edges}
        ordered = tuple(sorted(canon))
        return cls(ordered, sum(w for _, _, w in ordered))

    def vertices(self) -> set[int]:
        out = set()
        for u, v, _ in self.edges:
            out.add(u)
            out.add(v)
        return out

    def edge_set(self) -> set[tuple[int, int]]:
        return {(u, v) for u, v, _ in self.edges}

    def to_text(self, seed_count: int) -> str:
        lines = [f"# seeds={seed_count} total_distance={self.total_distance} edges={len(self.edges)}"]
        lines += [f"{u} {v} {w}" for u, v, w in self.edges]
        return "\n".join(lines) + "\n"

    def write(self, out: IO[str], seed_count: int) -> None:
        out.write(self.to_text(seed_count))

    @classmethod
    def read(cls, source: Iterable[str]) -> "SteinerTree":
        edges = []
        for lineno, line in enumerate(source, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("expected 'u v w'", lineno)
            try:
                edges.append(tuple(int(x) for x in parts))
            except ValueError:
                raise GraphFormatError(f"non-integer token in {line!r}", lineno) from None
        return cls.from_edges(edges)


def _check_seeds(graph: Graph, seeds: Iterable[int]) -> list[int]:
    seeds = list(seeds)
    if not seeds:
        raise DomainError("seed set is empty")
    if len(set(seeds)) != len(seeds):
        raise DomainError("seed vertices must be pairwise distinct")
    n = graph.vertex_count
    bad = [s for s in seeds if not 0 <= s < n]
    if bad:
        raise DomainError(f"seed ids out of range: {bad[:5]}")
    return sorted(seeds)


# -- phase 1 ---------------------------------------------------------------

def compute_voronoi_cells(
    graph: Graph,
    seeds: Iterable[int],
    config: EngineConfig = EngineConfig(),
    metrics: EngineMetrics | None = None,
) -> VoronoiState:
    """Label every vertex with its nearest seed.

    A visitor ``(t, r)`` from ``v_p`` is accepted when ``(r, t, v_p)`` is
    lexicographically smaller than the target's current ``(dist, src, pred)``.
    Seeds start at ``(0, s, s)`` and never change cell. Unreachable vertices
    stay ``UNSET`` / ``INF``.
    """
    seeds = _check_seeds(graph, seeds)
    metrics = metrics if metrics is not None else EngineMetrics()
    state = VoronoiState.initial(graph.vertex_count, seeds)
    src, pred, dist, adj = state.src, state.pred, state.dist, graph.adj

    def visit(vj, vp, payload, send):
        t, r = payload
        if r == 0:
            # seed self-activation; any other zero-distance visitor is stale
            if not (vj == t and dist[vj] == 0):
                return
        else:
            d = dist[vj]
            if r > d:
                return
            if r == d:
                s = src[vj]
                if t > s or (t == s and vp >= pred[vj]):
                    return
            src[vj] = t
            pred[vj] = vp
            dist[vj] = r
        for vi, w in adj[vj]:
            nr = r + w
            send(vi, vj, (t, nr), nr)

    initial = [Visitor(s, s, (s, 0), 0) for s in seeds]
    run_to_quiescence(
        graph, config.partition_map(), config.discipline, initial, visit, metrics,
        phase="voronoi_cell", threaded=config.threaded,
        budget=default_budget(graph, config.budget_factor),
    )
    return state


# -- phases 2-3 ------------------------------------------------------------

def local_min_dist_edges(
    graph: Graph,
    state: VoronoiState,
    partitions: PartitionMap,
    metrics: EngineMetrics | None = None,
) -> list[CrossCellEdgeMap]:
    """Per-partition cheapest bridge for every pair of adjacent cells.

    Partition ``p`` scans arcs ``(u, v)`` with ``u`` owned by ``p`` and
    ``u < v``. Reading ``v``'s label when ``v`` lives elsewhere is counted as
    one message. Arcs touching unlabeled vertices are skipped.
    """
    metrics = metrics if metrics is not None else EngineMetrics()
    src, dist, adj = state.src, state.dist, graph.adj
    P = partitions.partition_count
    maps: list[CrossCellEdgeMap] = []
    remote = skipped = 0
    with metrics.timed("local_min_dist_edge") as stats:
        for p in range(P):
            local: CrossCellEdgeMap = {}
            for u in partitions.owned(graph, p):
                su = src[u]
                du = dist[u]
                for v, w in adj[u]:
                    if v <= u:
                        continue
                    if P > 1 and v % P != p:
                        remote += 1
                    sv = src[v]
                    if su == UNSET or sv == UNSET:
                        skipped += 1
                        continue
                    if su == sv:
                        continue
                    cand = CrossEdge(du + w + dist[v], u, v)
                    key = (su, sv) if su < sv else (sv, su)
                    cur = local.get(key)
                    if cur is None or cand < cur:
                        local[key] = cand
            maps.append(local)
        stats.messages_sent += remote
        stats.messages_processed += remote
    metrics.diagnostics["skipped_unlabeled_arcs"] = skipped
    return maps


def global_min_reduce(
    local_maps: list[CrossCellEdgeMap], metrics: EngineMetrics | None = None
) -> CrossCellEdgeMap:
    """Min all-reduce under ``(d, u, v)``; entries shipped count as messages."""
    metrics = metrics if metrics is not None else EngineMetrics()
    with metrics.timed("global_min_dist_edge") as stats:
        result = all_reduce_min(local_maps)
        if len(local_maps) > 1:
            shipped = sum(len(m) for m in local_maps)
            stats.messages_sent += shipped
            stats.messages_processed += shipped
    return result


# -- phases 4-5 ------------------------------------------------------------

def build_distance_graph(global_map: CrossCellEdgeMap, seeds: Iterable[int]) -> DistanceGraph:
    edges = sorted((s, t, e.d) for (s, t), e in global_map.items())
    return DistanceGraph(sorted(seeds), edges)


def mst_prim(dg: DistanceGraph) -> list[tuple[int, int, int]]:
    """Prim's MST from the smallest seed; edges keyed ``(weight, s, t)``.

    Raises SeedsDisconnected naming the seeds the tree cannot reach.
    """
    if not dg.seeds:
        return []
    nbrs: dict[int, list[tuple[int, int, int]]] = {s: [] for s in dg.seeds}
    for s, t, d in dg.edges:
        nbrs[s].append((d, s, t))
        nbrs[t].append((d, s, t))
    start = dg.seeds[0]
    in_tree = {start}
    heap = list(nbrs[start])
    heapq.heapify(heap)
    tree = []
    while heap and len(in_tree) < len(dg.seeds):
        d, s, t = heapq.heappop(heap)
        new = t if s in in_tree else s
        if new in in_tree:
            continue
        in_tree.add(new)
        tree.append((s, t, d))
        for item in nbrs[new]:
            other = item[2] if item[1] == new else item[1]
            if other not in in_tree:
                heapq.heappush(heap, item)
    if len(in_tree) < len(dg.seeds):
        raise SeedsDisconnected(set(dg.seeds) - in_tree)
    return sorted(tree)


def prune_cross_cell_edges(
    global_map: CrossCellEdgeMap, mst_edges: Iterable[tuple[int, int, int]]
) -> CrossCellEdgeMap:
    """Keep exactly the bridges whose seed pair is an MST edge."""
    active = {}
    for s, t, _ in mst_edges:
        entry = global_map.get((s, t))
        if entry is None:
            raise CorruptedStateError(f"MST edge ({s}, {t}) has no cross-cell edge")
        active[(s, t)] = entry
    return active


# -- phase 6 ---------------------------------------------------------------

def trace_tree_edges(
    graph: Graph,
    state: VoronoiState,
    active_map: CrossCellEdgeMap,
    config: EngineConfig = EngineConfig(),
    metrics: EngineMetrics | None = None,
) -> SteinerTree:
    """Union of active bridges and the predecessor paths behind both ends."""
    metrics = metrics if metrics is not None else EngineMetrics()
    parts = config.partition_map()
    P = parts.partition_count
    found: list[set] = [set() for _ in range(P)]
    src, pred, dist = state.src, state.pred, state.dist

    def visit(vj, _sender, _payload, send):
        s = src[vj]
        if vj == s:
            return
        p = pred[vj]
        if s == UNSET or p == UNSET or dist[p] >= dist[vj]:
            raise CorruptedStateError(f"broken predecessor chain at vertex {vj}")
        w = graph.weight(p, vj)
        if w is None:
            raise CorruptedStateError(f"pred({vj}) = {p} is not adjacent to {vj}")
        found[vj % P].add((p, vj, w) if p < vj else (vj, p, w))
        if p != s:
            send(p, vj, None, 0)

    initial = []
    for e in active_map.values():
        w = graph.weight(e.u, e.v)
        if w is None:
            raise CorruptedStateError(f"cross-cell edge ({e.u}, {e.v}) not in graph")
        found[parts.owner(e.u)].add((e.u, e.v, w))
        initial.append(Visitor(e.u, e.u))
        initial.append(Visitor(e.v, e.v))
    run_to_quiescence(
        graph, parts, config.discipline, initial, visit, metrics,
        phase="tree_edge", threaded=config.threaded,
        budget=default_budget(graph, config.budget_factor),
    )
    return SteinerTree.from_edges(set().union(*found))


# -- orchestration ---------------------------------------------------------

def solve_steiner(
    graph: Graph,
    seeds: Iterable[int],
    config: EngineConfig = EngineConfig(),
    metrics: EngineMetrics | None = None,
) -> tuple[SteinerTree, EngineMetrics]:
    """Run all six phases; returns the tree and per-phase metrics."""
    seeds = _check_seeds(graph, seeds)
    metrics = metrics if metrics is not None else EngineMetrics()
    for name in PHASES:
        metrics.phase(name)
    state = compute_voronoi_cells(graph, seeds, config, metrics)
    local = local_min_dist_edges(graph, state, config.partition_map(), metrics)
    global_map = global_min_reduce(local, metrics)
    with metrics.timed("mst"):
        mst = mst_prim(build_distance_graph(global_map, seeds))
    with metrics.timed("edge_pruning"):
        active = prune_cross_cell_edges(global_map, mst)
    tree = trace_tree_edges(graph, state, active, config, metrics)
    return tree, metrics


# -- validation ------------------------------------------------------------

@dataclass
class ValidationReport:
    checks: dict[str, tuple[bool, str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(passed for passed, _ in self.checks.values())

    def failures(self) -> list[str]:
        return [f"{name}: {detail}" for name, (passed, detail) in self.checks.items() if not passed]

    def __str__(self) -> str:
        return "\n".join(
            f"{'PASS' if passed else 'FAIL'} {name}" + (f" ({detail})" if detail else "")
            for name, (passed, detail) in self.checks.items()
        )


def validate_tree(tree: SteinerTree, seeds: Iterable[int], graph: Graph) -> ValidationReport:
    seeds = set(seeds)
    rep = ValidationReport()

    bad = [(u, v, w) for u, v, w in tree.edges if graph.weight(u, v) != w]
    rep.checks["edges_in_graph"] = (not bad, f"{len(bad)} edge(s) absent or mis-weighted" if bad else "")

    verts = tree.vertices()
    if not tree.edges and len(seeds) <= 1:
        verts = set(seeds)

    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cycles = 0
    for u, v, _ in tree.edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            cycles += 1
        else:
            parent[ru] = rv
    rep.checks["acyclic"] = (cycles == 0, f"{cycles} cycle-closing edge(s)" if cycles else "")
    roots = {find(v) for v in verts}
    rep.checks["connected"] = (len(roots) <= 1, f"{len(roots)} components" if len(roots) > 1 else "")

    missing = seeds - verts
    rep.checks["spans_seeds"] = (not missing, f"missing seeds {sorted(missing)[:5]}" if missing else "")

    deg: dict[int, int] = {}
    for u, v, _ in tree.edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    bad_leaves = sorted(v for v, k in deg.items() if k == 1 and v not in seeds)
    rep.checks["leaves_are_seeds"] = (
        not bad_leaves, f"non-seed leaves {bad_leaves[:5]}" if bad_leaves else "")

    total = sum(w for _, _, w in tree.edges)
    rep.checks["total_distance"] = (
        total == tree.total_distance,
        "" if total == tree.total_distance else f"sum {total} != recorded {tree.total_distance}",
    )
    return rep


def config_for(partitions: int = 1, discipline: str | Discipline = Discipline.MIN_PRIORITY,
               threaded: bool = False) -> EngineConfig:
    return EngineConfig(partitions, Discipline(discipline), threaded)
