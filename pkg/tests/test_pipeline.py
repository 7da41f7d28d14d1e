import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vsteiner.baselines import apsp_seeds, kruskal
from vsteiner.engine import Discipline, EngineConfig, EngineMetrics
from vsteiner.errors import CorruptedStateError, DomainError, SeedsDisconnected
from vsteiner.graph import PartitionMap, from_edges
from vsteiner.pipeline import (
    PHASES,
    UNSET,
    CrossEdge,
    DistanceGraph,
    SteinerTree,
    VoronoiState,
    build_distance_graph,
    compute_voronoi_cells,
    global_min_reduce,
    local_min_dist_edges,
    mst_prim,
    prune_cross_cell_edges,
    solve_steiner,
    trace_tree_edges,
    validate_tree,
)

from conftest import nx_voronoi, path_graph, random_instance, star_graph

CONFIGS = [EngineConfig(P, d) for P in (1, 2, 4, 8) for d in Discipline]


def full_map(graph, state, P=1):
    return global_min_reduce(local_min_dist_edges(graph, state, PartitionMap(P)))


# -- Voronoi cells -----------------------------------------------------------

@pytest.mark.parametrize("config", CONFIGS[:4] + [EngineConfig(3, Discipline.FIFO, threaded=True)])
def test_voronoi_path(config):
    st_ = compute_voronoi_cells(path_graph(), [0, 3], config)
    assert st_.cell(0) == {0, 1} and st_.cell(3) == {2, 3}
    assert st_.dist == [0, 1, 1, 0]
    assert st_.pred == [0, 0, 3, 3]


def test_voronoi_single_seed_is_sssp():
    g = from_edges(5, [(0, 1, 4), (0, 2, 1), (2, 1, 1), (1, 3, 2), (3, 4, 7)])
    st_ = compute_voronoi_cells(g, [0])
    assert st_.dist == [0, 2, 1, 4, 11]
    assert set(st_.src) == {0}


def test_voronoi_tie_goes_to_smaller_seed():
    # 3 - 0 - 5 - 1 - 7 : vertex 5 is two hops from both seeds
    g = from_edges(8, [(3, 0, 1), (0, 5, 1), (5, 1, 1), (1, 7, 1)])
    for config in CONFIGS:
        st_ = compute_voronoi_cells(g, [7, 3], config)
        assert st_[5].src == 3 and st_[5].dist == 2


def test_voronoi_unreachable_stays_unset():
    g = from_edges(5, [(0, 1, 1), (3, 4, 1)])
    st_ = compute_voronoi_cells(g, [0])
    assert st_[3] == (UNSET, UNSET, math.inf)


@pytest.mark.parametrize("seed", range(25))
def test_voronoi_matches_dijkstra_oracle(seed):
    g, seeds = random_instance(np.random.default_rng(seed), n_hi=50)
    dist, src = nx_voronoi(g, seeds)
    for config in CONFIGS:
        st_ = compute_voronoi_cells(g, seeds, config)
        assert st_.dist == dist and st_.src == src
        for v in range(g.vertex_count):
            if v in seeds:
                assert st_[v] == (v, v, 0)
            else:
                p = st_.pred[v]
                assert g.weight(p, v) is not None
                assert st_.dist[v] == st_.dist[p] + g.weight(p, v)
                assert st_.src[p] == st_.src[v]


def test_voronoi_rejects_bad_seeds():
    with pytest.raises(DomainError):
        compute_voronoi_cells(path_graph(), [])
    with pytest.raises(DomainError):
        compute_voronoi_cells(path_graph(), [1, 1])
    with pytest.raises(DomainError):
        compute_voronoi_cells(path_graph(), [9])


# -- cross-cell edges ----------------------------------------------------------

def test_local_min_path():
    g = path_graph()
    st_ = compute_voronoi_cells(g, [0, 3])
    maps = local_min_dist_edges(g, st_, PartitionMap(1))
    assert maps == [{(0, 3): CrossEdge(3, 1, 2)}]


def test_local_min_single_cell_is_empty():
    g = path_graph()
    st_ = compute_voronoi_cells(g, [1])
    assert local_min_dist_edges(g, st_, PartitionMap(2)) == [{}, {}]


def test_local_min_keeps_cheapest_bridge():
    # seeds 0 and 5; bridges (1,3) with d_N 1+5+1=7 and (2,4) with 1+7+1=9
    g = from_edges(6, [(0, 1, 1), (0, 2, 1), (1, 3, 5), (2, 4, 7), (3, 5, 1), (4, 5, 1)])
    st_ = compute_voronoi_cells(g, [0, 5])
    assert full_map(g, st_) == {(0, 5): CrossEdge(7, 1, 3)}


def test_local_min_counts_unlabeled_arcs():
    g = from_edges(5, [(0, 1, 1), (3, 4, 1)])
    st_ = compute_voronoi_cells(g, [0, 1])
    m = EngineMetrics()
    local_min_dist_edges(g, st_, PartitionMap(1), m)
    assert m.diagnostics["skipped_unlabeled_arcs"] == 1


def test_global_min_reduce():
    a = {(0, 1): CrossEdge(5, 2, 3)}
    b = {(0, 1): CrossEdge(4, 6, 7)}
    assert global_min_reduce([a, b]) == {(0, 1): CrossEdge(4, 6, 7)}
    assert global_min_reduce([a, {(1, 2): CrossEdge(1, 0, 1)}]) == {
        (0, 1): CrossEdge(5, 2, 3), (1, 2): CrossEdge(1, 0, 1)}
    tie = global_min_reduce([{(0, 1): CrossEdge(3, 2, 9)}, {(0, 1): CrossEdge(3, 1, 9)}])
    assert tie[(0, 1)] == CrossEdge(3, 1, 9)


@pytest.mark.parametrize("seed", range(10))
def test_cross_map_invariants_and_partition_invariance(seed):
    g, seeds = random_instance(np.random.default_rng(100 + seed))
    st_ = compute_voronoi_cells(g, seeds)
    ref = full_map(g, st_, 1)
    for P in (2, 4, 8):
        assert full_map(g, st_, P) == ref
    apsp = apsp_seeds(g, seeds)
    idx = {s: i for i, s in enumerate(apsp.seeds)}
    for (s, t), e in ref.items():
        assert s < t and e.u < e.v
        assert {st_.src[e.u], st_.src[e.v]} == {s, t}
        assert e.d == st_.dist[e.u] + g.weight(e.u, e.v) + st_.dist[e.v]
        assert e.d >= apsp.dist[idx[s], idx[t]]


# -- distance graph / MST / pruning -------------------------------------------

def test_distance_graph_from_path():
    g = path_graph()
    st_ = compute_voronoi_cells(g, [0, 3])
    dg = build_distance_graph(full_map(g, st_), [0, 3])
    assert dg.edges == [(0, 3, 3)]


def test_distance_graph_edge_bound(rng):
    g, seeds = random_instance(rng)
    dg = build_distance_graph(full_map(g, compute_voronoi_cells(g, seeds)), seeds)
    k = len(seeds)
    assert len(dg.edges) <= k * (k - 1) // 2


def test_mst_prim_triangle_and_pair():
    dg = DistanceGraph([0, 1, 2], [(0, 1, 1), (1, 2, 2), (0, 2, 3)])
    assert sorted(d for *_, d in mst_prim(dg)) == [1, 2]
    assert mst_prim(DistanceGraph([4, 9], [(4, 9, 6)])) == [(4, 9, 6)]


def test_mst_prim_tie_break():
    # {01, 02} and {01, 12} both weigh 3; (2, 0, 2) < (2, 1, 2)
    dg = DistanceGraph([0, 1, 2], [(0, 1, 1), (0, 2, 2), (1, 2, 2)])
    assert mst_prim(dg) == [(0, 1, 1), (0, 2, 2)]
    # same answer when Prim starts next to the other candidate
    dg = DistanceGraph([0, 1, 2], [(0, 1, 2), (0, 2, 1), (1, 2, 2)])
    assert mst_prim(dg) == [(0, 1, 2), (0, 2, 1)]


def test_mst_prim_disconnected():
    with pytest.raises(SeedsDisconnected) as err:
        mst_prim(DistanceGraph([0, 1, 2, 3], [(0, 1, 1)]))
    assert err.value.unreached == [2, 3]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_mst_prim_matches_kruskal(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 9))
    edges = [(s, t, int(rng.integers(1, 5))) for s in range(k) for t in range(s + 1, k)]
    assert mst_prim(DistanceGraph(list(range(k)), edges)) == sorted(kruskal(edges))


def test_prune():
    m = {(0, 1): CrossEdge(1, 0, 1), (0, 2): CrossEdge(2, 0, 2), (1, 2): CrossEdge(3, 1, 2)}
    assert prune_cross_cell_edges(m, [(0, 1, 1), (0, 2, 2)]) == {
        (0, 1): CrossEdge(1, 0, 1), (0, 2): CrossEdge(2, 0, 2)}
    two = {(0, 1): CrossEdge(1, 0, 1)}
    assert prune_cross_cell_edges(two, [(0, 1, 1)]) == two
    with pytest.raises(CorruptedStateError):
        prune_cross_cell_edges(two, [(0, 2, 5)])


@pytest.mark.parametrize("seed", range(10))
def test_pruned_size_is_seeds_minus_one(seed):
    g, seeds = random_instance(np.random.default_rng(200 + seed))
    gm = full_map(g, compute_voronoi_cells(g, seeds))
    assert len(prune_cross_cell_edges(gm, mst_prim(build_distance_graph(gm, seeds)))) == len(seeds) - 1


# -- tracing / end to end -----------------------------------------------------

def test_trace_path():
    g = path_graph()
    st_ = compute_voronoi_cells(g, [0, 3])
    tree = trace_tree_edges(g, st_, {(0, 3): CrossEdge(3, 1, 2)})
    assert tree.edges == ((0, 1, 1), (1, 2, 1), (2, 3, 1)) and tree.total_distance == 3


def test_trace_detects_corrupt_pred():
    g = path_graph()
    st_ = VoronoiState([0, 0, 3, 3], [0, 2, 1, 3], [0, 1, 1, 0])
    with pytest.raises(CorruptedStateError):
        trace_tree_edges(g, st_, {(0, 3): CrossEdge(3, 1, 2)})


def test_star_tree():
    tree, _ = solve_steiner(star_graph(), [1, 2, 3])
    assert tree.total_distance == 3 and tree.vertices() == {0, 1, 2, 3}


def test_single_seed_empty_tree():
    tree, metrics = solve_steiner(path_graph(), [2])
    assert tree == SteinerTree() and tree.total_distance == 0
    assert set(metrics.phases) == set(PHASES)


def test_adjacent_seeds_use_direct_edge():
    g = from_edges(4, [(0, 1, 2), (0, 2, 1), (2, 3, 1), (3, 1, 1)])
    tree, _ = solve_steiner(g, [0, 1])
    assert tree.edges == ((0, 1, 2),)


def test_solve_path_and_phase_names():
    tree, metrics = solve_steiner(path_graph(), [0, 3])
    assert tree.total_distance == 3
    assert tuple(metrics.to_record()) == PHASES
    for rec in metrics.to_record().values():
        assert rec["messages_sent"] == rec["messages_processed"]


def test_solve_disconnected_seeds():
    g = from_edges(4, [(0, 1, 1), (2, 3, 1)])
    with pytest.raises(SeedsDisconnected):
        solve_steiner(g, [0, 3])


@pytest.mark.parametrize("seed", range(20))
def test_solve_invariants(seed):
    g, seeds = random_instance(np.random.default_rng(300 + seed))
    ref = None
    for config in CONFIGS:
        tree, _ = solve_steiner(g, seeds, config)
        assert validate_tree(tree, seeds, g).ok
        assert len(tree.edges) <= g.vertex_count - 1
        text = tree.to_text(len(seeds))
        ref = ref or text
        assert text == ref


def test_tree_text_round_trip(rng):
    g, seeds = random_instance(rng)
    tree, _ = solve_steiner(g, seeds)
    text = tree.to_text(len(seeds))
    assert text.startswith(f"# seeds={len(seeds)} total_distance={tree.total_distance}")
    assert SteinerTree.read(io.StringIO(text)) == tree


# -- validation ----------------------------------------------------------------

def test_validate_valid_and_broken_trees():
    g = path_graph(5)
    good = SteinerTree.from_edges([(0, 1, 1), (1, 2, 1)])
    assert validate_tree(good, [0, 2], g).ok
    leaf = validate_tree(good, [0, 1], g)
    assert not leaf.checks["leaves_are_seeds"][0] and leaf.checks["spans_seeds"][0]
    missing = validate_tree(good, [0, 2, 4], g)
    assert not missing.checks["spans_seeds"][0]
    wrong_weight = validate_tree(SteinerTree.from_edges([(0, 1, 9)]), [0, 1], g)
    assert not wrong_weight.checks["edges_in_graph"][0]
    split = validate_tree(SteinerTree.from_edges([(0, 1, 1), (3, 4, 1)]), [0, 1, 3, 4], g)
    assert not split.checks["connected"][0]
    bad_total = SteinerTree(((0, 1, 1),), 5)
    assert not validate_tree(bad_total, [0, 1], g).checks["total_distance"][0]


def test_validate_cycle():
    g = from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    tri = SteinerTree.from_edges([(0, 1, 1), (1, 2, 1), (0, 2, 1)])
    rep = validate_tree(tri, [0, 1, 2], g)
    assert not rep.checks["acyclic"][0] and not rep.ok
    assert "FAIL acyclic" in str(rep)
