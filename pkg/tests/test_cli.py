import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from polyfalconer.cli import main


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def _run(*args, out="out"):
        res = runner.invoke(main, ["--out", str(tmp_path / out), *args])
        return res, tmp_path / out

    return _run


def load(path):
    return json.loads(path.read_text())


def test_norm(run):
    res, out = run("norm", "--slopes", "0,1,inf")
    assert res.exit_code == 0, res.output
    doc = load(out / "norm.json")
    assert doc["K"] == 3 and "K=3" in res.output
    assert (out / "manifest_norm.json").exists()


def test_norm_duplicate(run):
    res, _ = run("norm", "--slopes", "0,0")
    assert res.exit_code == 2


def test_norm_normalize(run):
    res, out = run("norm", "--slopes", "0,1,inf,13/8", "--normalize", "0,1,2")
    assert res.exit_code == 0, res.output
    assert load(out / "norm.json")["slopes"][:3] == ["0", "1", "inf"]


def test_gen_lattice(run):
    res, out = run("gen", "lattice", "--K", "4", "--N", "3", "--t", "1/100", "--seed", "7")
    assert res.exit_code == 0, res.output
    assert load(out / "set.json")["n"] == 81
    cert = load(out / "cert.json")
    assert Fraction(cert["min_distance"]) >= Fraction(1, 900)
    assert (out / "points.csv").read_text().count("\n") == 82


def test_gen_power(run):
    res, out = run("gen", "power", "--gamma", "13/8", "--L", "2", "--N", "2")
    assert res.exit_code == 0, res.output
    assert load(out / "set.json")["n"] == 16


def test_gen_power_collision(run):
    res, _ = run("gen", "power", "--gamma", "1/2", "--L", "2", "--N", "3")
    assert res.exit_code == 3
    assert "RepresentationCollision" in res.output


def test_gen_exhausted_and_budget(run):
    res, _ = run("gen", "lattice", "--K", "4", "--N", "2", "--t", "1000000", "--max-tries", "1")
    assert res.exit_code == 3
    res, _ = run("gen", "lattice", "--K", "4", "--N", "3", "--budget-points", "10")
    assert res.exit_code == 4


def test_decimal_rejected(run):
    res, _ = run("gen", "lattice", "--K", "4", "--N", "2", "--t", "0.5")
    assert res.exit_code != 0 and "p/q" in res.output


@pytest.mark.parametrize("args,margin,passed", [
    (["--gamma", "3/2", "--L", "2", "--bounds", "2", "--eps", "1"], "1/2", True),
    (["--gamma", "1/2", "--L", "2", "--bounds", "2"], "0", False),
    (["--gamma", "3/2", "--L", "1", "--bounds", "1"], "1", True),
])
def test_km(run, args, margin, passed):
    res, out = run("km", *args)
    assert res.exit_code == 0, res.output
    doc = load(out / "km.json")
    assert doc["reports"][0]["margin"] == margin and doc["passed"] is passed


def test_km_rhs(run):
    _, out = run("km", "--gamma", "3/2", "--L", "2", "--bounds", "2", "--eps", "1")
    assert load(out / "km.json")["reports"][0]["rhs"] == "1/16"


def test_build_c_quarter_infeasible(run):
    res, _ = run("build", "--mode", "theorem1", "--K", "4", "--N", "2", "--depth", "3", "--c", "1/4")
    assert res.exit_code == 6
    assert "27/32" in res.output


def test_build_auto_c(run):
    res, out = run("build", "--mode", "theorem1", "--K", "4", "--N", "2", "--depth", "3")
    assert res.exit_code == 0, res.output
    doc = load(out / "decay.json")
    assert doc["holds"] is True
    bounds = [Fraction(r["bound"]) for r in doc["levels"]]
    assert all(b <= a / 2 for a, b in zip(bounds, bounds[1:]))
    assert all(Fraction(r["total_length"]) <= Fraction(r["bound"]) for r in doc["levels"])
    for j in range(4):
        assert (out / f"stage_{j}.json").exists()
    assert (out / "dimension.csv").read_text().startswith("j,estimate,target")


def test_build_depth_zero(run):
    res, out = run("build", "--depth", "0")
    assert res.exit_code == 0, res.output
    doc = load(out / "decay.json")
    assert doc["stage0_cover"] == [["0", doc["c0_bound"]]]
    assert (out / "cover_0.csv").read_text() == f"lo,hi\n0,{doc['c0_bound']}\n"


def test_build_theorem4(run):
    res, out = run("build", "--mode", "theorem4", "--gamma", "13/8", "--L", "2", "--N", "2", "--depth", "2")
    assert res.exit_code == 0, res.output
    doc = load(out / "decay.json")
    assert doc["eps"] == ["1/3", "1/4"]
    assert doc["holds"] is True


def test_build_growing(run):
    res, out = run("build", "--K", "3", "--growing", "--depth", "2")
    assert res.exit_code == 0, res.output
    sched = load(out / "schedule.json")
    assert [lv["n"] for lv in sched["levels"]] == [8, 64]


def test_report(run, tmp_path):
    run("build", "--depth", "2", out="b")
    run("km", "--gamma", "3/2", "--L", "2", "--bounds", "2", out="k")
    run("gen", "power", "--gamma", "13/8", "--L", "2", "--N", "2", out="g")
    files = [str(tmp_path / "b" / "decay.json"), str(tmp_path / "k" / "km.json"), str(tmp_path / "g" / "cert.json")]
    res, out = run("report", *files, out="r")
    assert res.exit_code == 0, res.output
    agg = load(out / "aggregate.json")
    assert sorted(agg["inputs"]) == sorted(files)
    rows = (out / "plot_data.csv").read_text().splitlines()
    assert rows[0] == "source,j,estimate,total_length,bound" and len(rows) == 3
    again, out2 = run("report", *files, out="r2")
    assert (out / "aggregate.json").read_bytes() == (out2 / "aggregate.json").read_bytes()
    assert load(out / "manifest_report.json")["files"] == load(out2 / "manifest_report.json")["files"]


def test_report_missing(run, tmp_path):
    res, _ = run("report", str(tmp_path / "nope.json"))
    assert res.exit_code == 5


def test_global_flags_after_subcommand(run, tmp_path):
    res, _ = run("km", "--gamma", "3/2", "--L", "1", "--bounds", "1", "--out", str(tmp_path / "late"))
    assert res.exit_code == 0
    assert (tmp_path / "late" / "km.json").exists()
