import json

import pytest

from conftest import make_diamond
from snip.cli import main
from snip.instances import save


@pytest.fixture
def diamond_file(tmp_path):
    path = tmp_path / "diamond.json"
    save(make_diamond(), path)
    return str(path)


def test_solve_each_algorithm(diamond_file, capsys):
    for alg in ("def", "cdef", "benders", "path"):
        rc = main(["solve", "--alg", alg, "--instance", diamond_file])
        out = capsys.readouterr().out.strip()
        fields = out.split("\t")
        assert rc == 0
        assert len(fields) == 11
        assert fields[2] == "optimal"
        assert float(fields[3]) == pytest.approx(0.63, abs=1e-9)


def test_solve_writes_out_file(diamond_file, tmp_path):
    out = tmp_path / "row.tsv"
    rc = main(["solve", "--alg", "cdef", "--instance", diamond_file, "--out", str(out)])
    assert rc == 0
    assert out.read_text().count("\t") == 10


def test_solve_missing_instance(tmp_path, capsys):
    rc = main(["solve", "--alg", "cdef", "--instance", str(tmp_path / "nope.json")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_bad_flag_exits_1(diamond_file, capsys):
    assert main(["solve", "--alg", "nope", "--instance", diamond_file]) == 1
    assert main(["solve"]) == 1
    capsys.readouterr()


def test_time_limit_zero(diamond_file, capsys):
    rc = main(
        ["solve", "--alg", "path", "--instance", diamond_file, "--time-limit", "0"]
    )
    out = capsys.readouterr().out
    assert rc == 2
    assert out.split("\t")[2] == "limit"


def test_generate_reproducible(tmp_path, capsys):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    args = ["generate", "--rows", "3", "--cols", "3", "--seed", "5", "--out"]
    assert main(args + [a]) == 0
    assert main(args + [b]) == 0
    capsys.readouterr()
    assert open(a).read() == open(b).read()
    doc = json.load(open(a))
    assert set(doc) == {"nodes", "arcs", "scenarios", "budget"}


def test_generate_zero_regime(tmp_path, capsys):
    out = str(tmp_path / "z.json")
    rc = main(
        ["generate", "--rows", "3", "--cols", "3", "--q-mode", "zero", "--out", out]
    )
    capsys.readouterr()
    assert rc == 0
    doc = json.load(open(out))
    assert all(a.get("q", 0.0) == 0.0 for a in doc["arcs"])


def test_generate_bad_grid(tmp_path, capsys):
    rc = main(
        ["generate", "--rows", "1", "--cols", "9", "--out", str(tmp_path / "x.json")]
    )
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_bench_agreement(diamond_file, tmp_path, capsys):
    rc = main(["bench", "--instances", diamond_file, "--budgets", "1,2"])
    out = capsys.readouterr().out
    assert rc == 0
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert lines[0].startswith("instance\talg\tstatus")
    assert len(lines) == 1 + 8  # header + 4 algorithms x 2 budgets
    assert "mean_time_solved" in out


def test_bench_empty_glob(tmp_path, capsys):
    rc = main(["bench", "--instances", str(tmp_path / "*.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.splitlines()[0].startswith("instance")


def test_bench_time_limit_zero(diamond_file, capsys):
    rc = main(["bench", "--instances", diamond_file, "--time-limit", "0"])
    out = capsys.readouterr().out
    rows = [ln for ln in out.splitlines() if ln and not ln.startswith(("#", "instance"))]
    assert rows and all(ln.split("\t")[2] == "limit" for ln in rows)
    assert rc == 0
