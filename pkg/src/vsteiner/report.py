"""Run reports (JSON) and the algorithm dispatch shared by CLI commands."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

from .baselines import exact_steiner, kmb_steiner, mehlhorn_steiner
from .engine import EngineConfig, EngineMetrics
from .graph import Graph
from .pipeline import PHASES, SteinerTree, solve_steiner

SCHEMA_VERSION = 1
ALGORITHMS = ("voronoi", "kmb", "mehlhorn", "exact")


@dataclass
class RunReport:
    algorithm: str
    graph_summary: dict
    seed_count: int
    phase_metrics: dict[str, dict]
    tree_summary: dict
    wall_time_ms: float
    ratio: float | None = None
    config: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema_version')!r}")
        return cls(**data)


def run_algorithm(
    name: str, graph: Graph, seeds: list[int], config: EngineConfig = EngineConfig()
) -> tuple[SteinerTree, EngineMetrics | None, float]:
    """Solve with ``name``; returns ``(tree, phase metrics or None, seconds)``."""
    t0 = time.perf_counter()
    metrics = None
    if name == "voronoi":
        tree, metrics = solve_steiner(graph, seeds, config)
    elif name == "kmb":
        tree = kmb_steiner(graph, seeds)
    elif name == "mehlhorn":
        tree = mehlhorn_steiner(graph, seeds)
    elif name == "exact":
        _, tree = exact_steiner(graph, seeds)
    else:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return tree, metrics, time.perf_counter() - t0


def phase_record(metrics: EngineMetrics | None) -> dict[str, dict]:
    if metrics is None:
        return {}
    record = metrics.to_record()
    return {name: record[name] for name in PHASES if name in record}
