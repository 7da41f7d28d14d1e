"""Seed (terminal) selection strategies.

All strategies draw from the largest connected component, use hop-count BFS
levels (weights are ignored on purpose) and are deterministic per
``rng_seed``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

import numpy as np

from .errors import DomainError, GraphFormatError
from .graph import Graph, bfs_levels, largest_connected_component


class Strategy(str, Enum):
    BFS_LEVEL = "bfs_level"
    UNIFORM_RANDOM = "uniform"
    ECCENTRIC = "eccentric"
    PROXIMATE = "proximate"


@dataclass(frozen=True)
class SeedSpec:
    strategy: Strategy
    count: int
    rng_seed: int = 0


def _component(graph: Graph, count: int) -> list[int]:
    if count < 1:
        raise DomainError("seed count must be >= 1")
    comp = sorted(largest_connected_component(graph))
    if count > len(comp):
        raise DomainError(
            f"requested {count} seeds but the largest component has {len(comp)} vertices")
    return comp


def largest_remainder(sizes: list[int], total: int) -> list[int]:
    """Split ``total`` proportionally to ``sizes`` (Hamilton's method).

    Leftover units go to the largest fractional remainders; ties favour the
    larger group, then the earlier one.
    """
    whole = sum(sizes)
    exact = [total * s / whole for s in sizes]
    quota = [int(q) for q in exact]
    order = sorted(range(len(sizes)), key=lambda i: (-(exact[i] - quota[i]), -sizes[i], i))
    for i in order[: total - sum(quota)]:
        quota[i] += 1
    return quota


def select_bfs_level(graph: Graph, spec: SeedSpec) -> list[int]:
    """Sample each BFS level of the largest component in proportion to its size."""
    comp = _component(graph, spec.count)
    level = bfs_levels(graph, comp[0])
    by_level: dict[int, list[int]] = {}
    for v in comp:
        by_level.setdefault(level[v], []).append(v)
    levels = [by_level[i] for i in sorted(by_level)]
    quotas = largest_remainder([len(lv) for lv in levels], spec.count)
    rng = np.random.default_rng(spec.rng_seed)
    chosen = []
    for members, q in zip(levels, quotas):
        if q:
            chosen.extend(rng.choice(members, size=q, replace=False).tolist())
    return sorted(chosen)


def select_uniform_random(graph: Graph, spec: SeedSpec) -> list[int]:
    comp = _component(graph, spec.count)
    rng = np.random.default_rng(spec.rng_seed)
    return sorted(rng.choice(comp, size=spec.count, replace=False).tolist())


def _k_bfs(graph: Graph, spec: SeedSpec, farthest: bool, start: int | None) -> list[int]:
    comp = _component(graph, spec.count)
    if start is None:
        start = int(np.random.default_rng(spec.rng_seed).choice(comp))
    elif start not in set(comp):
        raise DomainError(f"start vertex {start} is not in the largest component")
    chosen = [start]
    total = np.zeros(graph.vertex_count, dtype=np.int64)
    candidates = np.asarray(comp, dtype=np.int64)
    free = np.ones(len(candidates), dtype=bool)
    free[np.searchsorted(candidates, start)] = False
    while len(chosen) < spec.count:
        total += np.asarray(bfs_levels(graph, chosen[-1]), dtype=np.int64)
        scores = total[candidates]
        # argmax/argmin return the first hit; candidates ascend, so ties go to the smallest id
        if farthest:
            i = int(np.argmax(np.where(free, scores, -1)))
        else:
            i = int(np.argmin(np.where(free, scores, np.iinfo(np.int64).max)))
        free[i] = False
        chosen.append(int(candidates[i]))
    return chosen


def select_eccentric(graph: Graph, spec: SeedSpec, start: int | None = None) -> list[int]:
    """k-BFS: each next seed maximizes the summed BFS level to earlier seeds.

    Returned in selection order.
    """
    return _k_bfs(graph, spec, True, start)


def select_proximate(graph: Graph, spec: SeedSpec, start: int | None = None) -> list[int]:
    """k-BFS with argmin: each next seed is closest (in summed hops) to the earlier ones."""
    return _k_bfs(graph, spec, False, start)


_SELECTORS = {
    Strategy.BFS_LEVEL: select_bfs_level,
    Strategy.UNIFORM_RANDOM: select_uniform_random,
    Strategy.ECCENTRIC: select_eccentric,
    Strategy.PROXIMATE: select_proximate,
}


def select_seeds(graph: Graph, spec: SeedSpec) -> list[int]:
    return _SELECTORS[Strategy(spec.strategy)](graph, spec)


def write_seeds(seeds: Iterable[int], out: IO[str], spec: SeedSpec | None = None) -> None:
    if spec is not None:
        out.write(f"# strategy={Strategy(spec.strategy).value} count={spec.count} "
                  f"rng_seed={spec.rng_seed}\n")
    for s in seeds:
        out.write(f"{s}\n")


def read_seeds(source: Iterable[str]) -> list[int]:
    seeds = []
    for lineno, line in enumerate(source, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            seeds.append(int(line))
        except ValueError:
            raise GraphFormatError(f"expected a vertex id, got {line!r}", lineno) from None
    return seeds
