"""Symmetric weighted graphs in compressed (CSR) form.

Vertex ids are dense ``0..n-1``. ``Graph.labels`` keeps the original id of
every vertex so results can be reported in the input's vocabulary.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import DomainError, GraphFormatError

log = logging.getLogger(__name__)

_I64 = np.int64


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with positive integer weights.

    ``offsets[v]:offsets[v + 1]`` indexes the neighbors of ``v`` in
    ``targets``/``weights``; neighbor lists are sorted by vertex id and every
    undirected edge is stored as two arcs with the same weight.
    """

    offsets: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    labels: np.ndarray

    @property
    def vertex_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        """Number of directed arcs, i.e. ``2|E|``."""
        return len(self.targets)

    def __len__(self) -> int:
        return self.vertex_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def adj(self) -> list[list[tuple[int, int]]]:
        """Per-vertex ``[(neighbor, weight), ...]`` as plain Python lists.

        Hot loops iterate this instead of the numpy arrays; element access on
        numpy arrays from Python is an order of magnitude slower.
        """
        off = self.offsets.tolist()
        tgt = self.targets.tolist()
        wt = self.weights.tolist()
        return [list(zip(tgt[off[v]:off[v + 1]], wt[off[v]:off[v + 1]]))
                for v in range(self.vertex_count)]

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.targets[self.offsets[v]:self.offsets[v + 1]]

    def weight(self, u: int, v: int) -> int | None:
        """Weight of edge ``(u, v)`` or ``None`` when absent."""
        lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
        i = lo + int(np.searchsorted(self.targets[lo:hi], v))
        if i < hi and self.targets[i] == v:
            return int(self.weights[i])
        return None

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Undirected edges ``(u, v, w)`` with ``u < v`` in ascending order."""
        for u, nbrs in enumerate(self.adj):
            for v, w in nbrs:
                if u < v:
                    yield u, v, w

    def edge_array(self) -> np.ndarray:
        """``(m, 3)`` array of undirected edges in canonical order."""
        src = np.repeat(np.arange(self.vertex_count, dtype=_I64), np.diff(self.offsets))
        keep = src < self.targets
        return np.column_stack((src[keep], self.targets[keep], self.weights[keep]))

    def weight_range(self) -> tuple[int, int]:
        if self.edge_count == 0:
            return (0, 0)
        return int(self.weights.min()), int(self.weights.max())


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int, int]] | np.ndarray,
    labels: np.ndarray | None = None,
) -> Graph:
    """Build a symmetric graph on ``n`` vertices from undirected edges.

    Self-loops are dropped, duplicate and reverse records collapse to the
    minimum weight.
    """
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=_I64)
    arr = arr.reshape(-1, 3)
    if arr.size and (arr[:, :2].min() < 0 or arr[:, :2].max() >= n):
        raise DomainError("edge endpoint out of range")
    if arr.size and arr[:, 2].min() < 1:
        raise DomainError("edge weights must be positive integers")
    arr = arr[arr[:, 0] != arr[:, 1]]
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    order = np.lexsort((arr[:, 2], hi, lo))
    lo, hi, w = lo[order], hi[order], arr[order, 2]
    if len(lo):
        first = np.ones(len(lo), dtype=bool)
        first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        lo, hi, w = lo[first], hi[first], w[first]
    src = np.concatenate((lo, hi))
    dst = np.concatenate((hi, lo))
    wts = np.concatenate((w, w))
    order = np.lexsort((dst, src))
    src, dst, wts = src[order], dst[order], wts[order]
    offsets = np.zeros(n + 1, dtype=_I64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    if labels is None:
        labels = np.arange(n, dtype=_I64)
    return Graph(offsets, dst.astype(_I64), wts.astype(_I64), np.asarray(labels, dtype=_I64))


def load_edge_list(
    source: IO[str] | IO[bytes] | Iterable[str],
    has_weights: bool = True,
    vertex_count: int | None = None,
) -> Graph:
    """Parse ``u v [w]`` records into a dense-id symmetric graph.

    With ``has_weights`` false any third column is ignored and every weight
    is 1; otherwise a missing weight also defaults to 1. Original ids are
    relabelled ``0..n-1`` in ascending order and kept in ``Graph.labels``,
    unless ``vertex_count`` is given: then ids are taken as already dense.
    """
    us: list[int] = []
    vs: list[int] = []
    ws: list[int] = []
    loops = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.decode() if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise GraphFormatError("expected 'u v [w]'", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
            w = int(tokens[2]) if has_weights and len(tokens) > 2 else 1
        except ValueError:
            raise GraphFormatError(f"non-integer token in {line!r}", lineno) from None
        if w <= 0:
            raise DomainError(f"line {lineno}: weight must be positive, got {w}")
        if u == v:
            loops += 1
            continue
        us.append(u)
        vs.append(v)
        ws.append(w)
    if loops:
        log.warning("dropped %d self-loop record(s)", loops)
    if vertex_count is not None:
        return from_edges(vertex_count, np.column_stack((us, vs, ws)) if us else np.empty((0, 3)))
    if not us:
        return from_edges(0, np.empty((0, 3), dtype=_I64))
    raw_ids = np.asarray(us + vs, dtype=_I64)
    labels, dense = np.unique(raw_ids, return_inverse=True)
    m = len(us)
    arr = np.column_stack((dense[:m], dense[m:], np.asarray(ws, dtype=_I64)))
    return from_edges(len(labels), arr, labels)


def write_edge_list(graph: Graph, out: IO[str], header: str | None = None) -> None:
    """Write each undirected edge once as ``u v w`` (dense ids).

    The first line records the vertex count so isolated vertices survive a
    round trip through :func:`read_graph`.
    """
    out.write(f"# vertices={graph.vertex_count} arcs={graph.edge_count}\n")
    if header:
        for line in header.splitlines():
            out.write(f"# {line}\n")
    for u, v, w in graph.edge_array().tolist():
        out.write(f"{u} {v} {w}\n")


def read_graph(path) -> Graph:
    """Read a file written by :func:`write_edge_list` (plus ``.labels`` sidecar)."""
    with open(path) as fh:
        lines = fh.readlines()
    n = None
    if lines and lines[0].startswith("# vertices="):
        n = int(lines[0].split()[1].split("=")[1])
    graph = load_edge_list(lines, has_weights=True, vertex_count=n)
    try:
        with open(f"{path}.labels") as fh:
            labels = np.loadtxt(fh, dtype=_I64, ndmin=2)
    except FileNotFoundError:
        return graph
    full = np.arange(graph.vertex_count, dtype=_I64)
    if len(labels):
        full[labels[:, 0]] = labels[:, 1]
    return Graph(graph.offsets, graph.targets, graph.weights, full)


def write_labels(graph: Graph, out: IO[str]) -> None:
    out.write("# dense original\n")
    for i, lab in enumerate(graph.labels.tolist()):
        out.write(f"{i} {lab}\n")


def synthesize_weights(graph: Graph, w_min: int, w_max: int, rng_seed: int) -> Graph:
    """Replace weights with uniform draws from ``[w_min, w_max]``.

    One draw per undirected edge, in ascending ``(u, v)`` order, so the
    result depends only on topology and the arguments.
    """
    if w_min < 1:
        raise DomainError("w_min must be >= 1")
    if w_max < w_min:
        raise DomainError("w_max must be >= w_min")
    edges = graph.edge_array()
    rng = np.random.default_rng(rng_seed)
    edges[:, 2] = rng.integers(w_min, w_max + 1, size=len(edges), dtype=_I64)
    return from_edges(graph.vertex_count, edges, graph.labels)


def bfs_levels(graph: Graph, root: int) -> list[int]:
    """Hop distance from ``root``; ``-1`` for unreachable vertices."""
    level = [-1] * graph.vertex_count
    level[root] = 0
    adj = graph.adj
    queue = deque([root])
    while queue:
        u = queue.popleft()
        nl = level[u] + 1
        for v, _ in adj[u]:
            if level[v] < 0:
                level[v] = nl
                queue.append(v)
    return level


def connected_components(graph: Graph) -> list[list[int]]:
    """Components as ascending vertex lists, ordered by their smallest vertex."""
    seen = [False] * graph.vertex_count
    adj = graph.adj
    comps = []
    for root in range(graph.vertex_count):
        if seen[root]:
            continue
        seen[root] = True
        comp = [root]
        stack = [root]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comp.sort()
        comps.append(comp)
    return comps


def largest_connected_component(graph: Graph) -> set[int]:
    """Vertex set of the largest component; ties go to the smallest vertex id."""
    best: list[int] = []
    for comp in connected_components(graph):
        if len(comp) > len(best):
            best = comp
    return set(best)


def induced_subgraph(graph: Graph, vertices: Iterable[int]) -> Graph:
    """Subgraph on ``vertices`` renumbered densely; labels carried through."""
    keep = np.array(sorted(set(vertices)), dtype=_I64)
    remap = np.full(graph.vertex_count, -1, dtype=_I64)
    remap[keep] = np.arange(len(keep), dtype=_I64)
    edges = graph.edge_array()
    mask = (remap[edges[:, 0]] >= 0) & (remap[edges[:, 1]] >= 0)
    edges = edges[mask]
    edges[:, 0] = remap[edges[:, 0]]
    edges[:, 1] = remap[edges[:, 1]]
    return from_edges(len(keep), edges, graph.labels[keep])


@dataclass(frozen=True)
class PartitionMap:
    """Modulo ownership: vertex ``v`` lives on partition ``v % partition_count``."""

    partition_count: int

    def __post_init__(self):
        if self.partition_count < 1:
            raise DomainError("partition_count must be >= 1")

    def owner(self, v: int) -> int:
        return v % self.partition_count

    def owned(self, graph: Graph, p: int) -> range:
        return range(p, graph.vertex_count, self.partition_count)


def make_partition_map(graph: Graph, partition_count: int) -> PartitionMap:
    return PartitionMap(partition_count)


def summarize(graph: Graph) -> dict:
    """Dataset row: vertex/arc counts, degree stats and weight range."""
    deg = np.diff(graph.offsets)
    lo, hi = graph.weight_range()
    n = graph.vertex_count
    return {
        "vertices": n,
        "arcs": graph.edge_count,
        "max_degree": int(deg.max()) if n else 0,
        "avg_degree": round(float(deg.mean()), 2) if n else 0.0,
        "weight_min": lo,
        "weight_max": hi,
    }


# -- generators ------------------------------------------------------------

def random_connected_graph(
    n: int, m: int, w_min: int, w_max: int, rng: np.random.Generator
) -> Graph:
    """Random spanning tree plus extra random edges, ``m`` edges in total
    (fewer if the complete graph is smaller)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    m = min(max(m, n - 1), n * (n - 1) // 2)
    perm = rng.permutation(n)
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        a, b = int(perm[i]), int(perm[j])
        edges.add((min(a, b), max(a, b)))
    while len(edges) < m:
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    ordered = sorted(edges)
    ws = rng.integers(w_min, w_max + 1, size=len(ordered))
    return from_edges(n, [(a, b, int(w)) for (a, b), w in zip(ordered, ws)])


def scale_free_graph(
    n: int, attach: int, w_min: int, w_max: int, rng: np.random.Generator
) -> Graph:
    """Barabasi-Albert preferential attachment; average degree ~ ``2 * attach``."""
    if attach < 1 or n <= attach:
        raise DomainError("need n > attach >= 1")
    # endpoint pool: each vertex appears once per incident edge
    pool = list(range(attach))
    edges = []
    for v in range(attach, n):
        chosen: set[int] = set()
        while len(chosen) < attach:
            idx = rng.integers(0, len(pool), size=attach - len(chosen))
            chosen.update(pool[i] for i in idx.tolist())
        for u in chosen:
            edges.append((u, v))
            pool.append(u)
            pool.append(v)
    arr = np.asarray(edges, dtype=_I64)
    w = rng.integers(w_min, w_max + 1, size=len(arr), dtype=_I64)
    return from_edges(n, np.column_stack((arr, w)))
