import io
import json
import math

import numpy as np
import pytest

from extremeqr import cli
from extremeqr.conditional import Sample, local_window, quantile_estimate
from extremeqr.errors import DataError
from extremeqr.io import format_value, parse_value, read_dataset, read_rows, rows_to_text
from extremeqr.kernel import triweight
from extremeqr.pickands import RPConfig, extrapolate, rp_gamma
from extremeqr.selection import select_k_separate


def write_csv(path, xs, ys, header="x,y"):
    lines = [header] + [f"{float(x)!r},{float(y)!r}" for x, y in zip(xs, ys)]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def parse(out):
    return read_rows(io.StringIO(out))


@pytest.fixture
def pareto_data(tmp_path):
    rng = np.random.default_rng(7)
    x = rng.uniform(size=400)
    y = rng.pareto(2.0, size=400) + 1.0
    return write_csv(tmp_path / "d.csv", x, y), Sample(x, y)


def test_format_round_trip():
    for v in (0.1, 1 / 3, -2.5e-300, 7, 12345678901234567):
        assert parse_value(format_value(v)) == v
    assert format_value(math.nan) == "" and parse_value("") is None
    assert parse_value("ok") == "ok"


def test_read_dataset_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,z\n1,2\n")
    with pytest.raises(DataError, match="'y'"):
        read_dataset(str(p))
    p.write_text("x,y\n1,2\n3,abc\n")
    with pytest.raises(DataError, match="line 3"):
        read_dataset(str(p))
    p.write_text("# comment\nx2,y,x1\n1,2,3\n4,5,6\n")
    s = read_dataset(str(p))
    assert s.p == 2 and s.xs[0].tolist() == [3.0, 1.0]


def test_fit_matches_library(tmp_path, capsys):
    xs, ys = [0.1, 0.2, 0.3, 0.45, 0.5], [3.0, 1.0, 4.0, 1.5, 9.0]
    path = write_csv(tmp_path / "five.csv", xs, ys)
    code, out, err = run(["fit", "--data", path, "--x-grid", "0.3", "--beta", "0.3",
                          "--h", "0.25"], capsys)
    assert code == 0 and "flagged: 0" in err
    config, cols, rows = parse(out)
    assert config["h"] == 0.25 and "out" not in config
    expected = quantile_estimate(Sample(xs, ys), triweight(), 0.25, 0.3, 0.3)
    assert rows[0]["q_hat"] == expected and rows[0]["status"] == "ok"


def test_fit_flags_empty_window(tmp_path, capsys):
    path = write_csv(tmp_path / "d.csv", [0.0, 0.1, 0.2], [1.0, 2.0, 3.0])
    code, out, err = run(["fit", "--data", path, "--x-grid", "0.1,5", "--h", "0.5"], capsys)
    assert code == 0 and "flagged: 1" in err
    _, _, rows = parse(out)
    assert rows[1]["q_hat"] is None and rows[1]["status"] != "ok"


def test_fit_missing_y_and_bad_config(tmp_path, capsys):
    p = tmp_path / "noy.csv"
    p.write_text("x,z\n1,2\n")
    code, _, err = run(["fit", "--data", p], capsys)
    assert code == 2 and "'y'" in err
    path = write_csv(tmp_path / "d.csv", [0.0, 0.1, 0.2], [1.0, 2.0, 3.0])
    code, _, err = run(["fit", "--data", path, "--h", "-1"], capsys)
    assert code == 1 and "h" in err
    code, _, err = run(["fit", "--bogus"], capsys)
    assert code == 1


def test_extreme_beta_equals_alpha(pareto_data, capsys):
    path, s = pareto_data
    code, out, _ = run(["extreme", "--data", path, "--x-grid", "0.3,0.6", "--beta", "0.1",
                        "--alpha", "0.1", "--h", "0.3"], capsys)
    assert code == 0
    _, _, rows = parse(out)
    for row in rows:
        assert row["RP"] == row["RQ"]


def test_extreme_pareto_close_to_truth(pareto_data, capsys):
    path, s = pareto_data
    code, out, _ = run(["extreme", "--data", path, "--x-grid", "0.5", "--beta", "0.01",
                        "--alpha", "0.2", "--h", "0.5", "--k", "60"], capsys)
    assert code == 0
    _, _, [row] = parse(out)
    cfg = RPConfig(alpha=0.2)
    assert row["RP"] == pytest.approx(extrapolate(rp_gamma(s, cfg, triweight(), 0.5, 0.5), 0.01))
    truth = 0.01 ** -0.5
    assert abs(row["RP"] / truth - 1) < 0.5 and abs(row["GP"] / truth - 1) < 0.5


def test_extreme_k_zero_is_config_error(pareto_data, capsys):
    code, _, err = run(["extreme", "--data", pareto_data[0], "--alpha", "0.1", "--k", "0"], capsys)
    assert code == 1 and "k" in err


def test_select_singleton_grid(pareto_data, capsys):
    code, out, _ = run(["select", "--data", pareto_data[0], "--select", "cv", "--h-grid", "0.2",
                        "--x-grid", "0.2,0.8"], capsys)
    assert code == 0
    _, _, rows = parse(out)
    assert [r["h"] for r in rows] == [0.2, 0.2]


def test_select_constant_data(tmp_path, capsys):
    x = np.linspace(0, 1, 60)
    path = write_csv(tmp_path / "c.csv", x, np.full(60, 2.0))
    code, out, _ = run(["select", "--data", path, "--x-grid", "0.5", "--h", "0.3"], capsys)
    assert code == 2  # every point degenerate: spacings of a constant sample collapse


def test_select_separate_matches_brute_force(tmp_path, capsys):
    import naive
    rng = np.random.default_rng(2)
    x, y = rng.uniform(size=30), rng.standard_t(3, size=30)
    path = write_csv(tmp_path / "s.csv", x, y)
    code, out, _ = run(["select", "--data", path, "--x-grid", "0.5", "--h", "0.6",
                        "--beta", "0.05"], capsys)
    _, _, [row] = parse(out)
    s, K = Sample(x, y), triweight()
    win = local_window(s, K, 0.6, 0.5)
    ks = list(range(1, win.n_star))
    vals = []
    for k in ks:
        cfg = RPConfig(alpha=k / win.n_star)
        est = rp_gamma(s, cfg, K, 0.6, 0.5)
        vals.append(math.nan if est.degenerate or cfg.alpha < 0.05 else extrapolate(est, 0.05))
    k_ref, score_ref = naive.select_k(vals, ks, math.isqrt(win.n_star))
    if k_ref is None:
        assert code == 2
    else:
        assert code == 0 and row["k"] == k_ref
        assert row["score"] == pytest.approx(score_ref, rel=1e-9)


def test_simulate_truth_table_and_json(tmp_path, capsys):
    code, out, _ = run(["simulate", "--scenario", "beta", "--estimator", "truth,gamma_truth",
                        "--beta", "0.01", "--reps", "2", "--L", "10", "--h-points", "3"], capsys)
    assert code == 0
    _, cols, rows = parse(out)
    assert cols[:9] == ["scenario", "estimator", "beta", "J", "r", "reps", "mse", "bias",
                        "failed_reps"]
    assert all(r["mse"] == 0 and r["bias"] == 0 for r in rows)
    code, out, _ = run(["simulate", "--scenario", "beta", "--estimator", "truth",
                        "--beta", "0.01", "--reps", "2", "--L", "10", "--format", "json"], capsys)
    payload = json.loads(out)
    assert payload["rows"][0]["mse"] == 0


def test_simulate_paper_table(capsys):
    code, out, _ = run(["simulate", "--scenario", "gaussian", "--estimator", "gamma_RP1,gamma_RP2",
                        "--J", "3,4", "--reps", "2", "--n", "100", "--L", "8", "--h-points", "4",
                        "--paper-table"], capsys)
    assert code == 0
    _, cols, rows = parse(out)
    assert cols == ["J", "r", "gamma_RP1_mse", "gamma_RP1_bias", "gamma_RP2_mse",
                    "gamma_RP2_bias"]
    assert [r["J"] for r in rows] == [3, 4]
    assert rows[0]["gamma_RP1_mse"] == rows[0]["gamma_RP2_mse"]


def test_simulate_unknown_scenario(capsys):
    code, _, err = run(["simulate", "--scenario", "cauchy"], capsys)
    assert code == 1 and "gaussian" in err


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nreps = 2\nL = 5\nscenario = beta\nestimator = truth\nbeta = 0.2\n")
    code, out, _ = run(["simulate", "--config", cfg, "--L", "4"], capsys)
    assert code == 0
    config, _, rows = parse(out)
    assert config["L"] == "4" and config["reps"] == "2" and rows[0]["scenario"] == "beta"
    cfg.write_text("bogus = 1\n")
    code, _, err = run(["simulate", "--config", cfg], capsys)
    assert code == 1 and "bogus" in err


def test_rows_to_text_round_trip():
    rows = [{"a": 0.1 + 0.2, "b": None, "c": "ok"}, {"a": -1e-310, "b": 3, "c": "x"}]
    config, cols, back = read_rows(io.StringIO(rows_to_text(["a", "b", "c"], rows, {"k": 1})))
    assert config == {"k": 1} and back == rows


def test_plot_option(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    png = tmp_path / "fig.png"
    path = write_csv(tmp_path / "d.csv", np.linspace(0, 1, 50), np.linspace(1, 3, 50) ** 2)
    code, out, _ = run(["fit", "--data", path, "--h", "0.3", "--plot", png], capsys)
    assert code == 0 and png.stat().st_size > 0
    assert out.startswith("# config: ")
