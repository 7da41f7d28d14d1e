"""``vsteiner`` command-line interface.

Exit codes (stable):

====  ==========================================
0     success
1     internal / engine error
2     usage or domain error (bad flags, too many seeds, ...)
3     I/O or parse error
4     seed vertices are not connected
5     exact solver refused the instance (size guard)
6     produced tree failed validation
====  ==========================================
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import statistics
import sys
from pathlib import Path

import numpy as np

from . import graph as gc
from .baselines import exact_steiner
from .engine import Discipline, EngineConfig
from .errors import (
    CorruptedStateError,
    DomainError,
    EngineError,
    GraphFormatError,
    OracleRefused,
    SeedsDisconnected,
    SteinerError,
)
from .pipeline import PHASES, validate_tree
from .report import ALGORITHMS, RunReport, phase_record, run_algorithm
from .seedsel import SeedSpec, Strategy, read_seeds, select_seeds, write_seeds

log = logging.getLogger("vsteiner")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DISCONNECTED = 4
EXIT_ORACLE_REFUSED = 5
EXIT_VALIDATION = 6


class ValidationFailed(SteinerError):
    pass


def _weight_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(choices):
    def parse(text: str) -> list[str]:
        names = [x.strip() for x in text.split(",") if x.strip()]
        bad = [x for x in names if x not in choices]
        if bad or not names:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(choices)}; got {text!r}")
        return names
    return parse


def _load(graph_path: str, seeds_path: str):
    graph = gc.read_graph(graph_path)
    with open(seeds_path) as fh:
        seeds = read_seeds(fh)
    return graph, seeds


def _tree_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _ratio(graph, seeds, total: int) -> float | None:
    opt, _ = exact_steiner(graph, seeds)
    return 1.0 if opt == 0 else total / opt


# -- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.rng_seed)
    lo, hi = args.weights
    if args.kind == "scale-free":
        graph = gc.scale_free_graph(args.vertices, args.attach, lo, hi, rng)
    else:
        graph = gc.random_connected_graph(args.vertices, args.edges, lo, hi, rng)
    with open(args.output, "w") as out:
        gc.write_edge_list(graph, out, header=f"generated kind={args.kind} rng_seed={args.rng_seed}")
    _print_summary(graph)
    return EXIT_OK


def _print_summary(graph) -> None:
    s = gc.summarize(graph)
    print(f"vertices={s['vertices']} arcs={s['arcs']} max_degree={s['max_degree']} "
          f"avg_degree={s['avg_degree']} weights=[{s['weight_min']}, {s['weight_max']}]")


def cmd_prepare(args) -> int:
    with open(args.input, "rb") as fh:
        graph = gc.load_edge_list(fh, has_weights=not args.unweighted)
    if args.lcc:
        graph = gc.induced_subgraph(graph, gc.largest_connected_component(graph))
    if args.weights is not None:
        graph = gc.synthesize_weights(graph, *args.weights, rng_seed=args.rng_seed)
    with open(args.output, "w") as out:
        gc.write_edge_list(graph, out)
    with open(f"{args.output}.labels", "w") as out:
        gc.write_labels(graph, out)
    _print_summary(graph)
    return EXIT_OK


def cmd_seeds(args) -> int:
    graph = gc.read_graph(args.graph)
    spec = SeedSpec(Strategy(args.strategy), args.count, args.rng_seed)
    seeds = select_seeds(graph, spec)
    with open(args.output, "w") as out:
        write_seeds(seeds, out, spec)
    print(f"wrote {len(seeds)} seeds to {args.output}")
    return EXIT_OK


def _config(args, partitions=None, discipline=None) -> EngineConfig:
    return EngineConfig(
        partitions if partitions is not None else args.partitions,
        Discipline(discipline if discipline is not None else args.discipline),
        getattr(args, "threaded", False),
    )


def cmd_solve(args) -> int:
    graph, seeds = _load(args.graph, args.seeds)
    config = _config(args)
    tree, metrics, seconds = run_algorithm(args.algo, graph, seeds, config)
    validation = validate_tree(tree, seeds, graph)
    ratio = None
    if args.algo == "exact":
        ratio = 1.0
    elif args.ratio:
        ratio = _ratio(graph, seeds, tree.total_distance)
    report = RunReport(
        algorithm=args.algo,
        graph_summary=gc.summarize(graph),
        seed_count=len(seeds),
        phase_metrics=phase_record(metrics),
        tree_summary={"edges": len(tree.edges), "total_distance": tree.total_distance},
        wall_time_ms=round(seconds * 1000.0, 3),
        ratio=ratio,
        config={"partitions": config.partitions, "discipline": config.discipline.value,
                "threaded": config.threaded, "graph": args.graph, "seeds": args.seeds},
    )
    if args.tree:
        Path(args.tree).write_text(tree.to_text(len(seeds)))
    text = report.to_json()
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    if not validation.ok:
        raise ValidationFailed("; ".join(validation.failures()))
    print(f"{args.algo}: D={tree.total_distance} edges={len(tree.edges)}"
          + (f" ratio={ratio:.4f}" if ratio is not None else ""), file=sys.stderr)
    return EXIT_OK


def _open_csv(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_compare(args) -> int:
    graph, seeds = _load(args.graph, args.seeds)
    config = _config(args)
    optimum = None
    if "exact" in args.algos or args.ratio:
        optimum, _ = exact_steiner(graph, seeds)
    fields = ["algorithm", "repetitions", "total_distance", "tree_edges", "ratio", "median_total_ms"]
    fields += [f"median_{p}_ms" for p in PHASES] + [f"messages_{p}" for p in PHASES]
    out = _open_csv(args.output)
    try:
        writer = csv.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        for algo in args.algos:
            totals, phase_ms, phase_msgs = [], {p: [] for p in PHASES}, {p: [] for p in PHASES}
            tree = None
            for _ in range(args.repetitions):
                tree, metrics, seconds = run_algorithm(algo, graph, seeds, config)
                if not validate_tree(tree, seeds, graph).ok:
                    raise ValidationFailed(f"{algo} produced an invalid tree")
                totals.append(seconds * 1000.0)
                for name, rec in phase_record(metrics).items():
                    phase_ms[name].append(rec["wall_time_ms"])
                    phase_msgs[name].append(rec["messages_sent"])
            row = {
                "algorithm": algo,
                "repetitions": args.repetitions,
                "total_distance": tree.total_distance,
                "tree_edges": len(tree.edges),
                "ratio": "" if optimum is None else f"{tree.total_distance / optimum if optimum else 1.0:.6f}",
                "median_total_ms": f"{statistics.median(totals):.3f}",
            }
            for p in PHASES:
                row[f"median_{p}_ms"] = f"{statistics.median(phase_ms[p]):.3f}" if phase_ms[p] else ""
                row[f"messages_{p}"] = int(statistics.median(phase_msgs[p])) if phase_msgs[p] else ""
            writer.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_msgbench(args) -> int:
    graph, seeds = _load(args.graph, args.seeds)
    fields = ["partitions", "discipline", "total_distance", "tree_edges", "tree_sha256",
              "fifo_priority_ratio"]
    fields += [f"messages_{p}" for p in PHASES] + [f"{p}_ms" for p in PHASES]
    out = _open_csv(args.output)
    digests = set()
    try:
        writer = csv.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        for partitions in args.partitions_list:
            rows = {}
            for disc in args.disciplines:
                config = _config(args, partitions, disc)
                tree, metrics, _ = run_algorithm("voronoi", graph, seeds, config)
                if not validate_tree(tree, seeds, graph).ok:
                    raise ValidationFailed(f"invalid tree at partitions={partitions} {disc}")
                digest = _tree_digest(tree.to_text(len(seeds)))
                digests.add(digest)
                record = phase_record(metrics)
                row = {"partitions": partitions, "discipline": disc,
                       "total_distance": tree.total_distance, "tree_edges": len(tree.edges),
                       "tree_sha256": digest, "fifo_priority_ratio": ""}
                for p in PHASES:
                    row[f"messages_{p}"] = record[p]["messages_sent"]
                    row[f"{p}_ms"] = record[p]["wall_time_ms"]
                rows[disc] = row
            if "fifo" in rows and "priority" in rows:
                fifo = rows["fifo"]["messages_voronoi_cell"]
                prio = rows["priority"]["messages_voronoi_cell"]
                ratio = f"{fifo / prio:.4f}" if prio else ""
                for row in rows.values():
                    row["fifo_priority_ratio"] = ratio
            for row in rows.values():
                writer.writerow(row)
            out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    if len(digests) > 1:
        print("warning: tree differs across grid cells", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsteiner", description="Voronoi-cell Steiner tree approximation toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic connected graph")
    p.add_argument("output")
    p.add_argument("--kind", choices=("random", "scale-free"), default="random")
    p.add_argument("--vertices", type=int, default=1000)
    p.add_argument("--edges", type=int, default=3000, help="edge count (random kind)")
    p.add_argument("--attach", type=int, default=8, help="edges per new vertex (scale-free kind)")
    p.add_argument("--weights", type=_weight_range, default=(1, 100), metavar="LO:HI")
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("prepare", help="symmetrize, weight and relabel an edge list")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--weights", type=_weight_range, default=None, metavar="LO:HI",
                   help="replace weights with uniform draws from [LO, HI]")
    p.add_argument("--unweighted", action="store_true", help="ignore a third column")
    p.add_argument("--lcc", action="store_true", help="keep only the largest component")
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("seeds", help="select seed vertices")
    p.add_argument("graph")
    p.add_argument("output")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="bfs_level")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_seeds)

    def engine_flags(p):
        p.add_argument("--partitions", type=int, default=1)
        p.add_argument("--discipline", choices=[d.value for d in Discipline], default="priority")
        p.add_argument("--threaded", action="store_true", help="one worker thread per partition")

    p = sub.add_parser("solve", help="compute a Steiner tree")
    p.add_argument("graph")
    p.add_argument("seeds")
    p.add_argument("--algo", choices=ALGORITHMS, default="voronoi")
    engine_flags(p)
    p.add_argument("--report", help="JSON report path (stdout if omitted)")
    p.add_argument("--tree", help="tree edge-list path")
    p.add_argument("--ratio", action="store_true", help="also run the exact solver")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several algorithms, emit CSV")
    p.add_argument("graph")
    p.add_argument("seeds")
    p.add_argument("--algos", type=_name_list(ALGORITHMS), default=["voronoi", "mehlhorn", "kmb"])
    p.add_argument("--repetitions", type=int, default=3)
    engine_flags(p)
    p.add_argument("--ratio", action="store_true", help="ratio column against the exact solver")
    p.add_argument("--output", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("msgbench", help="message counts over partitions x disciplines")
    p.add_argument("graph")
    p.add_argument("seeds")
    p.add_argument("--partitions-list", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--disciplines", type=_name_list([d.value for d in Discipline]),
                   default=["fifo", "priority"])
    p.add_argument("--threaded", action="store_true")
    p.add_argument("--output", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_msgbench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SeedsDisconnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except OracleRefused as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORACLE_REFUSED
    except ValidationFailed as exc:
        print(f"error: tree validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (GraphFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineError, CorruptedStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
