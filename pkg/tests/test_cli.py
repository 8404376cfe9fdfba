import json
import subprocess
import sys

import pytest

from fraclab import __version__
from fraclab.cli import EXIT_DOMAIN, EXIT_RESOURCE, EXIT_USAGE, run


@pytest.fixture(autouse=True)
def _threads(monkeypatch):
    # run() exports --threads; keep that from leaking between tests
    monkeypatch.setenv("FRACLAB_THREADS", "1")


def _out(capsys, argv, code=0):
    assert run(argv) == code
    return capsys.readouterr()


def test_bounds_example(capsys):
    out = _out(capsys, ["bounds", "--s", "2", "--alpha", "1", "--beta", "1", "--gamma", "0", "--d", "2"])
    assert out.out == "thm1_bound=1.5 x*=0.5\n"


def test_classify_example(capsys):
    assert _out(capsys, ["classify", "--poly", "x^2-2"]).out == "garsia_reciprocal lambda≈0.70711\n"
    assert _out(capsys, ["classify", "--poly", "x^2-x-1"]).out.startswith("pisot_reciprocal lambda≈0.61803")
    assert _out(capsys, ["classify", "--lambda", "0.55"]).out.startswith("unclassified")


def test_boxdim_csv(capsys, tmp_path):
    csv = tmp_path / "out.csv"
    out = _out(capsys, ["boxdim", "--preset", "bernoulli_comb", "--lambda", "1/2", "--m", "2:9", "--csv", str(csv)])
    assert out.out.startswith("dim_est≈")
    lines = csv.read_text().splitlines()
    assert lines[0] == "m,delta,count,log2count"
    assert [int(r.split(",")[2]) for r in lines[1:]] == [2 ** (m + 1) + m * 2 ** (m - 1) for m in range(2, 10)]


def test_boxdim_deterministic(capsys, tmp_path):
    files = []
    for i, threads in enumerate(("1", "4")):
        path = tmp_path / f"{i}.csv"
        _out(capsys, ["boxdim", "--preset", "bernoulli_comb", "--lambda", "0.6", "--m", "3:10",
                      "--threads", threads, "--csv", str(path)])
        files.append(path.read_bytes())
    assert files[0] == files[1]


def test_render_svg(capsys, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        out = _out(capsys, ["render", "--preset", "bernoulli_comb", "--lambda", "0.6", "--m", "7", "--out", str(path)])
        assert out.out.startswith("points=")
    ta, tb = a.read_text(), b.read_text()
    # only the version comment may differ between releases
    assert ta.splitlines()[1] == f"<!-- fraclab {__version__} -->"
    assert ta == tb and "<svg" in ta and "<path" in ta
    _out(capsys, ["render", "--preset", "bernoulli_comb", "--lambda", "0.6", "--m", "7", "--level", "2",
                  "--out", str(a)])
    assert a.read_text() != tb


def test_separation(capsys, tmp_path):
    csv = tmp_path / "sep.csv"
    out = _out(capsys, ["separation", "--lambda-poly", "x^2-x-1", "--n", "1:6", "--csv", str(csv)])
    assert "collision=yes" in out.out
    assert csv.read_text().splitlines()[0] == "n,count_A,min_gap,scaled_gap,well_separated"
    out = _out(capsys, ["separation", "--lambda-poly", "x^2-2", "--n", "3:3"])
    assert out.out == "min_scaled_gap=0.485281374239 at n=3 collision=no\n"


def test_overlaps_and_wsp(capsys, tmp_path):
    js = tmp_path / "ov.json"
    out = _out(capsys, ["overlaps", "--preset", "bernoulli_comb", "--lambda-poly", "x^2-x-1", "--max-len", "3",
                        "--json", str(js)])
    assert out.out == "overlap_pairs=1 011~100\n"
    doc = json.loads(js.read_text())
    assert doc["mode"] == "exact" and doc["pairs"] == [[[0, 1, 1], [1, 0, 0]]]
    out = _out(capsys, ["wsp", "--preset", "bernoulli_comb", "--lambda", "0.6", "--max-len", "4"])
    assert "float mode" in out.err and out.out.startswith("wsp_min=")


def test_sphere(capsys, tmp_path):
    csv = tmp_path / "orbit.csv"
    out = _out(capsys, ["sphere", "--n-max", "4", "--m", "6", "--csv", str(csv)])
    assert out.out.startswith("epsilon_hat=") and "counts=1,3,9,27,81" in out.out
    assert csv.read_text().splitlines()[0] == "n,count,log2count"
    out = _out(capsys, ["sphere", "--n-max", "6", "--commuting"])
    assert out.out.startswith("epsilon_hat=")


def test_scan(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        out = _out(capsys, ["scan", "--samples", "2", "--n-max", "9", "--seed", "3", "--csv", str(path)])
        assert out.out == "passing=2/2\n"
    assert a.read_bytes() == b.read_bytes()


DRY = [
    ["classify", "--poly", "x^2-2"],
    ["render", "--preset", "bernoulli_comb", "--lambda", "0.6", "--out", "x.svg"],
    ["boxdim", "--preset", "bernoulli_comb", "--lambda-poly", "x^2-2"],
    ["bounds", "--s", "2", "--alpha", "1", "--beta", "1", "--gamma", "0", "--d", "2"],
    ["separation", "--lambda", "0.6"],
    ["overlaps", "--preset", "bernoulli_comb", "--lambda-poly", "x^2-x-1"],
    ["wsp", "--preset", "bernoulli_comb", "--lambda-poly", "x^2-x-1"],
    ["sphere", "--c", "0.95"],
    ["scan"],
]


@pytest.mark.parametrize("argv", DRY, ids=[a[0] for a in DRY])
def test_dry_run(capsys, tmp_path, monkeypatch, argv):
    monkeypatch.chdir(tmp_path)
    out = _out(capsys, argv + ["--dry-run"])
    assert out.out.startswith("plan: ")
    assert list(tmp_path.iterdir()) == []


def test_usage_errors(capsys):
    for argv in ([], ["nope"], ["bounds", "--bogus"], ["boxdim", "--m", "9:3", "--preset", "bernoulli_comb"]):
        assert run(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_domain_errors(capsys, tmp_path):
    cases = [
        ["bounds", "--s", "1", "--alpha", "2", "--beta", "0", "--gamma", "0", "--d", "2"],
        ["bounds", "--s", "1"],
        ["boxdim", "--preset", "bernoulli_comb", "--lambda", "1.5"],
        ["boxdim", "--lambda", "0.6"],
        ["classify", "--poly", "x^2+y"],
        ["overlaps", "--preset", "bernoulli_comb", "--lambda", "0.6", "--mode", "exact"],
        ["boxdim", "--preset", "bernoulli_comb", "--lambda", "0.6", "--csv", str(tmp_path / "no" / "x.csv")],
        ["boxdim", "--config", str(tmp_path / "missing.json")],
    ]
    for argv in cases:
        assert run(argv) == EXIT_DOMAIN, argv
    assert "error:" in capsys.readouterr().err


def test_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("FRACLAB_THREADS", "many")
    assert run(["boxdim", "--preset", "bernoulli_comb", "--lambda", "0.6", "--m", "3:8"]) == EXIT_DOMAIN


def test_resource_error(capsys):
    argv = ["overlaps", "--preset", "bernoulli_comb", "--lambda-poly", "x^2-x-1", "--max-len", "30"]
    assert run(argv) == EXIT_RESOURCE
    assert "resource error" in capsys.readouterr().err


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "sys.json"
    cfg.write_text(json.dumps({"preset": {"name": "bernoulli_comb", "params": {"lambda": "1/2"}}}))
    out = _out(capsys, ["boxdim", "--config", str(cfg), "--m", "2:8"])
    assert out.out.startswith("dim_est≈")
    bounds = tmp_path / "b.json"
    bounds.write_text(json.dumps({"s": 2, "alpha": 1, "beta": 1, "gamma": 0, "d": 2}))
    report = tmp_path / "r.json"
    out = _out(capsys, ["bounds", "--config", str(bounds), "--json", str(report)])
    assert out.out == "thm1_bound=1.5 x*=0.5\n"
    assert json.loads(report.read_text())["value"] == 1.5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fraclab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
