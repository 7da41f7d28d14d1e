"""Voronoi-cell Steiner tree approximation on a partitioned visitor engine."""

from .baselines import apsp_seeds, exact_steiner, kmb_steiner, mehlhorn_steiner
from .engine import Discipline, EngineConfig, EngineMetrics, Visitor, run_to_quiescence
from .errors import (
    DomainError,
    GraphFormatError,
    OracleRefused,
    SeedsDisconnected,
    SteinerError,
)
from .graph import Graph, PartitionMap, from_edges, load_edge_list, synthesize_weights
from .pipeline import SteinerTree, compute_voronoi_cells, solve_steiner, validate_tree
from .seedsel import SeedSpec, Strategy, select_seeds

__version__ = "0.1.0"

__all__ = [
    "Discipline", "DomainError", "EngineConfig", "EngineMetrics", "Graph", "GraphFormatError",
    "OracleRefused", "PartitionMap", "SeedSpec", "SeedsDisconnected", "SteinerError",
    "SteinerTree", "Strategy", "Visitor", "apsp_seeds", "compute_voronoi_cells", "exact_steiner",
    "from_edges", "kmb_steiner", "load_edge_list", "mehlhorn_steiner", "run_to_quiescence",
    "select_seeds", "solve_steiner", "synthesize_weights", "validate_tree",
]
