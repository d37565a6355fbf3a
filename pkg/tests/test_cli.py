import csv
import io
import json
import subprocess
import sys

import pytest

from lotbnb.cli import EXIT_AUDIT_FAIL, EXIT_INCOMPLETE, EXIT_OK, EXIT_USAGE, SWEEP_FIELDS, main
from lotbnb.lotsizing import hard_instance, read_instance


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def fields(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


@pytest.fixture
def hard(tmp_path):
    def make(n):
        path = tmp_path / f"hard{n}.json"
        assert run("generate", "--n", str(n), "--out", str(path))[0] == EXIT_OK
        return path
    return make


def test_generate(hard):
    path = hard(3)
    assert json.loads(path.read_text()) == {"n": 3, "p": [3, 2, 1], "f": [1, 1, 1], "d": [1, 1, 1]}
    assert read_instance(hard(1)) == hard_instance(1)
    assert read_instance(hard(7)) == hard_instance(7)


def test_generate_unwritable(tmp_path):
    code, _ = run("generate", "--n", "3", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == EXIT_USAGE


def test_solve_dp_brute_bnb(hard, tmp_path):
    path = hard(10)
    code, text = run("solve", str(path), "--method", "dp")
    assert code == EXIT_OK and fields(text)["value"] == "65"
    code, text = run("solve", str(path), "--method", "brute")
    assert code == EXIT_OK and fields(text)["value"] == "65"
    tree = tmp_path / "tree.jsonl"
    code, text = run("solve", str(path), "--method", "bnb", "--rule", "most-fractional",
                     "--tree-out", str(tree))
    info = fields(text)
    assert code == EXIT_OK
    assert info["value"] == "65"
    assert int(info["leaves"]) >= 16
    assert tree.read_text().splitlines()[-1].startswith('{"type": "summary"')


def test_solve_node_cap(hard):
    code, text = run("solve", str(hard(8)), "--method", "bnb", "--node-cap", "5")
    assert code == EXIT_INCOMPLETE
    assert "incomplete" in text


def test_solve_bad_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 1, "p": [0.5], "f": [1], "d": [1]}')
    assert run("solve", str(bad))[0] == EXIT_USAGE
    assert run("solve", str(tmp_path / "nope.json"))[0] == EXIT_USAGE
    assert run("solve")[0] == EXIT_USAGE
    assert run("solve", str(bad), "--rule", "bogus")[0] == EXIT_USAGE


def test_audit_pass(hard, tmp_path):
    path = hard(8)
    tree = tmp_path / "t8.jsonl"
    assert run("solve", str(path), "--method", "bnb", "--tree-out", str(tree))[0] == EXIT_OK
    code, text = run("audit", str(path), str(tree))
    info = fields(text)
    assert code == EXIT_OK
    assert info["result"] == "PASS"
    assert int(info["leaves"]) >= 8


def test_audit_truncated_and_mismatch(hard, tmp_path):
    path = hard(6)
    tree = tmp_path / "t6.jsonl"
    run("solve", str(path), "--method", "bnb", "--tree-out", str(tree))
    lines = tree.read_text().splitlines()
    cut = tmp_path / "cut.jsonl"
    cut.write_text("\n".join(lines[: len(lines) // 2]) + "\n")
    code, text = run("audit", str(path), str(cut))
    assert code == EXIT_INCOMPLETE and "incomplete" in text
    assert run("audit", str(hard(5)), str(tree))[0] == EXIT_USAGE


def test_audit_fabricated_tree(hard, tmp_path):
    fake = tmp_path / "fake.jsonl"
    fake.write_text(
        '{"type": "header", "n": 4}\n'
        '{"type": "node", "id": 0, "parent": null, "constraints": [], '
        '"status": "integral-leaf", "bound": "14"}\n'
        '{"type": "summary", "complete": true, "incumbent": "14"}\n')
    code, text = run("audit", str(hard(4)), str(fake))
    info = fields(text)
    assert code == EXIT_AUDIT_FAIL
    assert info["result"] == "FAIL"
    assert info["witness_u"] == "(1, 1, 0, 1)"
    assert info["witness_v"] == "(1, 1, 1, 1)"
    assert info["witness_objective"] == "27/2"


def test_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run("sweep", "--n", "2..12", "--rule", "most-fractional", "--out", str(out))[0] == EXIT_OK
    first = out.read_bytes()
    rows = list(csv.DictReader(io.StringIO(first.decode())))
    assert tuple(rows[0].keys()) == SWEEP_FIELDS
    assert len(rows) == 11
    assert all(r["bound_satisfied"] == "true" for r in rows)
    leaves = [int(r["leaves"]) for r in rows]
    bounds = [int(r["bound"]) for r in rows]
    assert leaves == sorted(leaves)
    assert all(l >= b for l, b in zip(leaves, bounds))
    assert bounds == [1, 2, 2, 3, 4, 6, 8, 12, 16, 23, 32]
    for r in rows:
        assert "." not in r["opt"]
    run("sweep", "--n", "2..12", "--rule", "most-fractional", "--out", str(out))
    assert out.read_bytes() == first


def test_sweep_records_failures_and_sorts(tmp_path):
    out = tmp_path / "s.csv"
    code, _ = run("sweep", "--n", "6,3", "--rule", "random-split", "--seed", "2", "--seed", "1",
                  "--selection", "depth-first", "--node-cap", "5", "--out", str(out))
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [(r["n"], r["seed"]) for r in rows] == [("3", "2"), ("3", "1"), ("6", "2"), ("6", "1")]
    assert rows[-1]["bound_satisfied"] == "incomplete"


def test_sweep_timing_column(tmp_path):
    out = tmp_path / "t.csv"
    run("sweep", "--n", "3", "--timing", "--out", str(out))
    row = next(csv.DictReader(out.open()))
    assert row["wall_time_ms"].isdigit()


def test_module_entry_point_exit_codes(tmp_path):
    path = tmp_path / "h4.json"
    fake = tmp_path / "fake.jsonl"
    subprocess.run([sys.executable, "-m", "lotbnb", "generate", "--n", "4", "--out", str(path)],
                   check=True, capture_output=True)
    fake.write_text('{"type": "header", "n": 4}\n'
                    '{"type": "node", "id": 0, "parent": null, "constraints": [], '
                    '"status": "pruned-by-bound", "bound": "14"}\n'
                    '{"type": "summary", "complete": true, "incumbent": "14"}\n')
    proc = subprocess.run([sys.executable, "-m", "lotbnb", "audit", str(path), str(fake)],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_AUDIT_FAIL
    assert "witness_yhat: (1, 1, 1/2, 1)" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "lotbnb", "bogus"], capture_output=True)
    assert proc.returncode == EXIT_USAGE
