import csv
import json

import pytest

from vsteiner.cli import (
    EXIT_DISCONNECTED,
    EXIT_IO,
    EXIT_ORACLE_REFUSED,
    EXIT_OK,
    EXIT_USAGE,
    main,
)
from vsteiner.pipeline import PHASES, SteinerTree
from vsteiner.report import RunReport


@pytest.fixture
def path_files(tmp_path):
    raw = tmp_path / "raw.txt"
    raw.write_text("10 11 1\n11 12 1\n12 13 1\n")
    graph = tmp_path / "g.txt"
    assert main(["prepare", str(raw), str(graph)]) == EXIT_OK
    seeds = tmp_path / "s.txt"
    seeds.write_text("0\n3\n")
    return graph, seeds


def test_prepare_summary_and_labels(tmp_path, capsys):
    raw = tmp_path / "raw.txt"
    raw.write_text("5 7\n7 9\n")
    out = tmp_path / "g.txt"
    assert main(["prepare", str(raw), str(out), "--weights", "7:7", "--rng-seed", "3"]) == EXIT_OK
    summary = capsys.readouterr().out
    assert "arcs=4" in summary and "weights=[7, 7]" in summary
    assert out.read_text().splitlines()[1:] == ["0 1 7", "1 2 7"]
    assert (tmp_path / "g.txt.labels").read_text().splitlines()[1:] == ["0 5", "1 7", "2 9"]


def test_prepare_is_byte_identical(tmp_path):
    raw = tmp_path / "raw.txt"
    raw.write_text("\n".join(f"{i} {i + 1}" for i in range(50)) + "\n")
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for out in (a, b):
        assert main(["prepare", str(raw), str(out), "--weights", "1:100", "--rng-seed", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_prepare_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\nfoo bar\n")
    assert main(["prepare", str(bad), str(tmp_path / "o.txt")]) == EXIT_IO
    assert main(["prepare", str(tmp_path / "missing.txt"), str(tmp_path / "o.txt")]) == EXIT_IO


def test_seeds_command(tmp_path, path_files):
    graph, _ = path_files
    out = tmp_path / "seeds.txt"
    args = ["seeds", str(graph), str(out), "--strategy", "uniform", "--count", "3", "--rng-seed", "2"]
    assert main(args) == EXIT_OK
    first = out.read_text()
    assert len([x for x in first.splitlines() if not x.startswith("#")]) == 3
    assert main(args) == EXIT_OK and out.read_text() == first
    args[args.index("3")] = "5"
    assert main(args) == EXIT_USAGE


def test_solve_voronoi_and_exact(tmp_path, path_files):
    graph, seeds = path_files
    rep, tree = tmp_path / "r.json", tmp_path / "t.txt"
    assert main(["solve", str(graph), str(seeds), "--report", str(rep), "--tree", str(tree)]) == 0
    report = RunReport.from_json(rep.read_text())
    assert report.tree_summary["total_distance"] == 3 and report.ratio is None
    assert set(report.phase_metrics) == set(PHASES)
    assert RunReport.from_json(report.to_json()) == report
    assert SteinerTree.read(tree.read_text().splitlines()).total_distance == 3

    assert main(["solve", str(graph), str(seeds), "--algo", "exact", "--report", str(rep)]) == 0
    exact = json.loads(rep.read_text())
    assert exact["tree_summary"]["total_distance"] == 3 and exact["ratio"] == 1.0
    assert exact["schema_version"] == 1


def test_solve_ratio_flag(tmp_path, path_files):
    graph, seeds = path_files
    rep = tmp_path / "r.json"
    assert main(["solve", str(graph), str(seeds), "--algo", "kmb", "--ratio", "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["ratio"] == 1.0


def test_solve_disciplines_write_identical_trees(tmp_path):
    g = tmp_path / "g.txt"
    assert main(["generate", str(g), "--vertices", "300", "--edges", "900", "--rng-seed", "1"]) == 0
    s = tmp_path / "s.txt"
    assert main(["seeds", str(g), str(s), "--count", "12", "--rng-seed", "1"]) == 0
    trees = []
    for disc, parts in (("fifo", "1"), ("priority", "1"), ("fifo", "4"), ("priority", "8")):
        t = tmp_path / f"t_{disc}_{parts}.txt"
        assert main(["solve", str(g), str(s), "--discipline", disc, "--partitions", parts,
                     "--tree", str(t), "--report", str(tmp_path / "r.json")]) == 0
        trees.append(t.read_bytes())
    assert len(set(trees)) == 1


def test_solve_exit_codes(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("# vertices=4 arcs=4\n0 1 1\n2 3 1\n")
    s = tmp_path / "s.txt"
    s.write_text("0\n3\n")
    assert main(["solve", str(g), str(s), "--report", str(tmp_path / "r.json")]) == EXIT_DISCONNECTED
    big = tmp_path / "big.txt"
    big.write_text("".join(f"{i} {i + 1} 1\n" for i in range(20)))
    many = tmp_path / "many.txt"
    many.write_text("".join(f"{i}\n" for i in range(13)))
    code = main(["solve", str(big), str(many), "--algo", "exact", "--report", str(tmp_path / "r.json")])
    assert code == EXIT_ORACLE_REFUSED
    assert main(["solve", str(tmp_path / "nope.txt"), str(s)]) == EXIT_IO
    with pytest.raises(SystemExit) as err:
        main(["solve", str(g), str(s), "--algo", "bogus"])
    assert err.value.code == EXIT_USAGE


def test_compare_csv(tmp_path, path_files):
    graph, seeds = path_files
    out = tmp_path / "c.csv"
    assert main(["compare", str(graph), str(seeds), "--algos", "voronoi,mehlhorn,exact",
                 "--repetitions", "1", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["algorithm"] for r in rows] == ["voronoi", "mehlhorn", "exact"]
    assert {r["total_distance"] for r in rows} == {"3"}
    assert all(r["ratio"] == "1.000000" for r in rows)
    assert rows[0]["messages_voronoi_cell"] != "" and rows[1]["messages_voronoi_cell"] == ""


def test_compare_without_exact_leaves_ratio_empty(tmp_path, path_files):
    graph, seeds = path_files
    out = tmp_path / "c.csv"
    assert main(["compare", str(graph), str(seeds), "--algos", "voronoi,mehlhorn",
                 "--repetitions", "2", "--output", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 and rows[0]["total_distance"] == rows[1]["total_distance"]
    assert rows[0]["ratio"] == ""


def test_msgbench_grid(tmp_path):
    g = tmp_path / "g.txt"
    assert main(["generate", str(g), "--kind", "scale-free", "--vertices", "400", "--attach", "3",
                 "--weights", "1:500", "--rng-seed", "2"]) == 0
    s = tmp_path / "s.txt"
    assert main(["seeds", str(g), str(s), "--count", "10"]) == 0
    out = tmp_path / "m.csv"
    assert main(["msgbench", str(g), str(s), "--partitions-list", "1,2,4",
                 "--output", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert {r["discipline"] for r in rows} == {"fifo", "priority"}
    assert len({r["tree_sha256"] for r in rows}) == 1
    assert all(float(r["fifo_priority_ratio"]) > 0 for r in rows)

    single = tmp_path / "one.csv"
    assert main(["msgbench", str(g), str(s), "--partitions-list", "2", "--disciplines", "priority",
                 "--output", str(single)]) == EXIT_OK
    rows = list(csv.DictReader(single.open()))
    assert len(rows) == 1 and rows[0]["fifo_priority_ratio"] == ""
