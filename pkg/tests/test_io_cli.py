import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vkde import cli
from vkde.errors import DataError
from vkde.io import format_float, load_sample, read_csv, write_csv, write_sample


def test_load_examples(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("1\n2\n3\n")
    s = load_sample(p)
    assert (s.n, s.dim) == (3, 1)
    p.write_text("# header\n1,2\n\n3 4\n")
    s = load_sample(p)
    assert (s.n, s.dim) == (2, 2)
    p.write_text("1\nabc\n")
    with pytest.raises(DataError, match=":2:"):
        load_sample(p)
    p.write_text("# nothing\n")
    with pytest.raises(DataError):
        load_sample(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(DataError, match=":2:"):
        load_sample(p)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=50))
def test_sample_round_trip(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("rt") / "s.csv"
    write_sample(p, np.array(values))
    back = load_sample(p)
    assert np.array_equal(np.sort(back.x), np.sort(values))
    write_sample(p, back)
    assert np.array_equal(load_sample(p).data, back.data)


@given(st.floats(allow_nan=False))
def test_float_format_round_trips(x):
    assert float(format_float(x)) == x


def test_csv_round_trip(tmp_path):
    cols = {"t": np.array([0.1, 1 / 3]), "fhat": np.array([math.pi, 1e-300])}
    write_csv(tmp_path / "x.csv", cols)
    assert (tmp_path / "x.csv").read_text().splitlines()[0] == "t,fhat"
    back = read_csv(tmp_path / "x.csv")
    assert np.array_equal(back["fhat"], cols["fhat"])


@pytest.fixture
def data_file(tmp_path):
    p = tmp_path / "d.csv"
    write_sample(p, np.random.default_rng(0).standard_normal(300))
    return p


def test_estimate_auto_and_manifest(tmp_path, data_file):
    out = tmp_path / "o"
    rc = cli.main(["estimate", "--data", str(data_file), "--h1", "auto", "--estimator", "plugin-vkde",
                   "--out", str(out), "--grid-points", "64"])
    assert rc == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["h1"] == pytest.approx(300 ** -0.2)
    assert (out / "est.csv").read_text().splitlines()[0] == "t,fhat"
    # rerun from the manifest alone
    out2 = tmp_path / "o2"
    assert cli.main(["estimate", "--config", str(out / "manifest.json"), "--out", str(out2)]) == 0
    assert (out / "est.csv").read_bytes() == (out2 / "est.csv").read_bytes()


def test_flag_overrides_config(tmp_path, data_file):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"data": str(data_file), "estimator": "classical", "h": 0.2, "grid_points": 16}))
    out = tmp_path / "o"
    assert cli.main(["estimate", "--config", str(cfg), "--h", "0.7", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["h"] == 0.7


def test_h1_auto_resolves_rate(capsys):
    assert cli.main(["diagnose", "--h1", "auto", "--n", "10000"]) == 0
    lines = dict(line.split(",") for line in capsys.readouterr().out.splitlines())
    assert float(lines["h1"]) == pytest.approx(10000 ** -0.2, rel=1e-15)


def test_exit_codes(tmp_path, data_file, capsys):
    assert cli.main(["estimate"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1\nabc\n")
    assert cli.main(["estimate", "--data", str(bad)]) == 3
    assert cli.main(["estimate", "--data", str(tmp_path / "missing.csv")]) == 3
    assert cli.main(["bandwidth", "--model", "cauchy", "--c", "0.05"]) == 4
    assert cli.main(["diagnose", "--n", "100", "--h1", "1.5"]) == 2
    assert cli.main(["estimate", "--data", str(data_file), "--estimator", "ideal-vkde"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text('{"unknown_key": 1}')
    assert cli.main(["moments", "--config", str(cfg)]) == 2
    assert cli.main(["nonsense"]) == 2


def test_diagnose_output(capsys):
    assert cli.main(["diagnose", "--n", "50000"]) == 0
    lines = dict(line.split(",") for line in capsys.readouterr().out.splitlines())
    n = 50000
    assert float(lines["U"]) == pytest.approx(math.sqrt(math.log(n**0.2) / n**0.8) + n**-0.4)


def test_bandwidth_output(tmp_path, capsys):
    assert cli.main(["bandwidth", "--model", "normal", "--c", "0.3", "--n", "5000", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    h_paper = float(text.split("h_paper,")[1].split()[0])
    h_exact = float(text.split("h_exact,")[1].split()[0])
    assert h_exact / h_paper == pytest.approx((1 / 8) ** (1 / 9), abs=1e-12)
    assert read_csv(tmp_path / "imse.csv")["h"].size == 41


def test_moments_command(capsys):
    assert cli.main(["moments", "--kernel", "biweight", "--dim", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["dim"] == 2 and abs(data["tau"]["0,0"] - 1) < 1e-12


def test_simulate_is_byte_reproducible(tmp_path):
    args = ["simulate", "--experiment", "figure1", "--M", "1", "--n", "1500", "--seed", "9"]
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"models": ["pareto"], "mode_points": 32, "tail_points": 64}))
    assert cli.main(args + ["--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["simulate", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    for name in ("records.csv", "summary.json", "plot_pareto_mode.csv", "plot_pareto_tail.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    header = (tmp_path / "a" / "plot_pareto_tail.csv").read_text().splitlines()[0]
    assert header == "t,f_true,kde,vkde"


def test_simulate_svg(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"models": ["cauchy"], "mode_points": 32, "tail_points": 64}))
    rc = cli.main(["simulate", "--experiment", "figure1", "--M", "1", "--n", "800", "--config", str(cfg),
                   "--svg", "--out", str(tmp_path / "s")])
    assert rc == 0 and (tmp_path / "s" / "plot_cauchy_tail.svg").exists()
