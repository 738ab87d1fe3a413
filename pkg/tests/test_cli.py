import csv
import io
import shutil
import subprocess
import sys

import pytest

from fskolem.cli import CSV_COLUMNS, main

from conftest import FIXTURES


@pytest.fixture
def gold(tmp_path):
    path = tmp_path / "golden.qdimacs"
    shutil.copy(FIXTURES / "golden.qdimacs", path)
    return path


def kv(line):
    return dict(tok.split("=", 1) for tok in line.split() if "=" in tok)


def read_bench(text):
    lines = text.splitlines()
    assert lines[0] == "# fskolem bench csv v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_synth_cegar_golden(gold, capsys):
    assert main(["synth", str(gold), "--verify", "exhaustive"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["status"] == "ok" and out["iterations"] == "1" and out["verified"] == "yes"
    aag = gold.parent / "golden.skolem.aag"
    assert out["output"] == str(aag)
    assert aag.read_text().startswith("aag ")


def test_synth_mono_dot_to_stdout(gold, capsys):
    assert main(["synth", str(gold), "--engine", "mono", "--emit", "dot", "-o", "-"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("digraph")
    assert "status=ok" in out and "engine=mono" in out


def test_synth_fctr_input(tmp_path, capsys):
    path = tmp_path / "ex.fctr"
    shutil.copy(FIXTURES / "golden.fctr", path)
    assert main(["synth", str(path), "--verify", "sat", "-o", str(tmp_path / "v.aag")]) == 0
    assert "o0 x1" in (tmp_path / "v.aag").read_text()


def test_verify_round_trip(gold, capsys):
    vec = gold.parent / "v.aag"
    assert main(["synth", str(gold), "-o", str(vec)]) == 0
    capsys.readouterr()
    assert main(["verify", str(gold), str(vec)]) == 0
    line = capsys.readouterr().out
    assert line.startswith("PASS") and "exhaustive=pass" in line


def test_verify_corrupted_vector(gold, tmp_path, capsys):
    # psi for x2 replaced by constant TRUE
    good = tmp_path / "good.aag"
    main(["synth", str(gold), "-o", str(good)])
    lines = good.read_text().splitlines()
    M, I, L, O, A = map(int, lines[0].split()[1:])
    lines[1 + I + 1] = "1"
    bad = tmp_path / "bad.aag"
    bad.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["verify", str(gold), str(bad)]) == 4
    assert capsys.readouterr().out.startswith("FAIL")


def test_verify_name_mismatch(gold, tmp_path, capsys):
    vec = tmp_path / "v.aag"
    vec.write_text("aag 0 0 0 1 0\n1\no0 nobody\n")
    assert main(["verify", str(gold), str(vec)]) == 1
    assert "reason=name-mismatch" in capsys.readouterr().out


def test_verify_empty_x(tmp_path, capsys):
    inst = tmp_path / "nox.qdimacs"
    inst.write_text("p cnf 2 1\na 1 2 0\n1 2 0\n")
    vec = tmp_path / "nox.aag"
    vec.write_text("aag 0 0 0 0 0\n")
    assert main(["verify", str(inst), str(vec)]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.qdimacs"
    bad.write_text("p cnf 2 1\n1 7 0\n")
    assert main(["synth", str(bad)]) == 2
    out = capsys.readouterr().out
    assert "reason=parse-error" in out and "line 2" in out
    assert main(["synth", str(tmp_path / "missing.qdimacs")]) == 2


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["synth"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["synth", "x.qdimacs", "--engine", "nope"])
    assert info.value.code == 1


def test_budget_exit_code(gold, capsys):
    assert main(["synth", str(gold), "--budget-time", "0"]) == 3
    assert "reason=timeout" in capsys.readouterr().out
    assert main(["synth", str(gold), "--budget-iterations", "0"]) == 3
    assert "reason=budget" in capsys.readouterr().out


def test_oracle_error_exit_code(gold, capsys):
    assert main(["synth", str(gold), "--solver", "/nonexistent/solver"]) == 1
    assert "reason=oracle-error" in capsys.readouterr().out


@pytest.fixture
def bench_dir(tmp_path):
    d = tmp_path / "suite"
    d.mkdir()
    shutil.copy(FIXTURES / "golden.qdimacs", d / "golden.qdimacs")
    shutil.copy(FIXTURES / "ten_vars.qdimacs", d / "ten_vars.qdimacs")
    (d / "notes.txt").write_text("ignored")
    return d


def test_bench_two_instances(bench_dir, tmp_path, capsys):
    out = tmp_path / "b.csv"
    scatter = tmp_path / "s.csv"
    assert main(["bench", str(bench_dir), "--verify", "exhaustive", "--out", str(out), "--scatter", str(scatter)]) == 0
    rows = read_bench(out.read_text())
    assert len(rows) == 4
    assert list(rows[0]) == CSV_COLUMNS
    assert all(r["status"] == "ok" for r in rows)
    ex = {r["engine"]: r for r in rows if r["instance"] == "golden.qdimacs"}
    assert ex["cegar"]["refinements"] == "1" and ex["mono"]["refinements"] == "0"
    assert ex["cegar"]["n"] == "2" and ex["cegar"]["m"] == "3" and ex["cegar"]["r"] == "3"
    srows = list(csv.DictReader(io.StringIO(scatter.read_text())))
    assert len(srows) == 2 and srows[0]["mono_status"] == "ok"


def test_bench_timeout_row(bench_dir, capsys):
    assert main(["bench", str(bench_dir), "--engine", "cegar", "--budget-time", "0"]) == 0
    rows = read_bench(capsys.readouterr().out)
    assert [r["status"] for r in rows] == ["timeout", "timeout"]


def test_bench_parse_error_row(bench_dir, capsys):
    (bench_dir / "broken.qdimacs").write_text("p cnf 1 1\n")
    assert main(["bench", str(bench_dir), "--engine", "mono"]) == 0
    rows = read_bench(capsys.readouterr().out)
    assert {r["instance"]: r["status"] for r in rows}["broken.qdimacs"] == "parse-error"


def test_bench_deterministic_without_timing(bench_dir, capsys):
    args = ["bench", str(bench_dir), "--random", "5", "--seed", "3", "--omit-timing"]
    main(args)
    first = capsys.readouterr().out
    main(args + ["--jobs", "2"])
    assert capsys.readouterr().out == first
    assert len(read_bench(first)) == 14


def test_bench_missing_dir(tmp_path, capsys):
    assert main(["bench", str(tmp_path / "none")]) == 1


def test_module_entry_point(gold):
    proc = subprocess.run(
        [sys.executable, "-m", "fskolem", "synth", str(gold), "-o", "-"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("aag ")
