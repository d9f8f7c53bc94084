from __future__ import annotations

import csv
import io

import pytest

from hypermatch.cli import main
from hypermatch.driver import SCAN_HEADER
from hypermatch.generators import gen_complete, gen_h0
from hypermatch.textio import parse_instance, save_instance


@pytest.fixture
def h0_file(tmp_path):
    path = tmp_path / "h0.txt"
    save_instance(gen_h0(3, 9), path)
    return path


@pytest.fixture
def k36_file(tmp_path):
    path = tmp_path / "k36.txt"
    save_instance(gen_complete(3, 6), path)
    return path


def run(capsys, *argv):
    code = main(list(map(str, argv)))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_header_and_determinism(capsys):
    code, a, _ = run(capsys, "gen", "--kind", "random", "--k", "3", "--n", "4", "--p", "0.5", "--seed", "3")
    assert code == 0
    assert a.startswith("# genspec: kind=random k=3 n=4 p=0.5 seed=3")
    _, b, _ = run(capsys, "--seed", "3", "gen", "--kind", "random", "--k", "3", "--n", "4", "--p", "0.5")
    assert a == b
    H, _ = parse_instance(a)
    assert H.k == 3


def test_gen_out(tmp_path, capsys):
    out = tmp_path / "x.txt"
    assert run(capsys, "gen", "--kind", "h0", "--k", "3", "--n", "9", "--out", out)[0] == 0
    assert parse_instance(out.read_text())[0].edges == gen_h0(3, 9).edges


def test_nu_and_codegree(h0_file, capsys):
    code, out, _ = run(capsys, "nu", h0_file)
    assert code == 0 and out.startswith("nu: 6 (exact)")
    code, out, _ = run(capsys, "codegree", h0_file, "--format", "csv")
    assert code == 0 and out == "l,min_degree\n2,2\n"


def test_nu_budget_is_finding(tmp_path, capsys):
    path = tmp_path / "k.txt"
    save_instance(gen_complete(3, 8), path)
    assert run(capsys, "nu", path, "--budget", "0")[0] in (0, 2)


def test_solve_exit_codes(h0_file, k36_file, capsys):
    code, out, _ = run(capsys, "solve", h0_file, "--format", "csv")
    assert code == 2
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["size"] == "6" and rows[0]["route"] == "oracle_fallback"
    code, out, _ = run(capsys, "solve", k36_file, "--route", "nonextremal")
    assert code == 0 and "route: nonextremal" in out


def test_solve_deterministic(k36_file, capsys):
    a = run(capsys, "solve", k36_file)[1]
    assert a == run(capsys, "solve", k36_file)[1]


def test_check_theorem_grid_and_dumps(tmp_path, capsys):
    code, out, _ = run(
        capsys, "check-theorem", "--kind", "codegree_floor", "--k", "3", "--n", "6",
        "--seeds", "0-4", "--d-min", "auto", "--dump-dir", tmp_path / "dumps",
    )
    assert code in (0, 2)
    assert "tally:" in out


def test_check_theorem_file(h0_file, capsys):
    code, out, _ = run(capsys, "check-theorem", h0_file)
    assert code == 0 and "hypothesis-false" in out


def test_scan(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "--kind", "h0", "--n", "6-9", "--out", out)
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(SCAN_HEADER)
    assert len(text.splitlines()) == 5
    run(capsys, "scan", "--kind", "h0", "--n", "6-9", "--out", tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_text() == text


def test_verify_absorbing(tmp_path, capsys):
    path = tmp_path / "k38.txt"
    save_instance(gen_complete(3, 8), path)
    counts = tmp_path / "counts.csv"
    code, out, _ = run(
        capsys, "verify-absorbing", path, "--c", "0.3333", "--t", "1", "--size-cap", "8",
        "--seed", "2", "--out", counts,
    )
    assert code == 0 and "certified: yes" in out
    rows = list(csv.DictReader(io.StringIO(counts.read_text())))
    assert rows and all(int(r["count"]) >= 1 for r in rows)


def test_verify_absorbing_unavailable(h0_file, capsys):
    code, _, err = run(capsys, "verify-absorbing", h0_file, "--c", "0.2", "--t", "30", "--retries", "3")
    assert code == 2


def test_input_errors(tmp_path, capsys):
    assert run(capsys, "solve", tmp_path / "missing.txt")[0] == 1
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2 2 2\n0 0 0\n0 0 0\n")
    assert run(capsys, "nu", bad)[0] == 1
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 1
    assert run(capsys, "scan")[0] == 1
