import json

import pytest

from dpreg.cli import MECHANISM_NAMES, RESULTS_HEADER, VERIFY_HEADER, main


def write_csv(tmp_path, rows, header="x,y", name="data.csv"):
    path = tmp_path / name
    path.write_text("\n".join([header] + [f"{x},{y}" for x, y in rows]) + "\n")
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


LINE_ROWS = [(0.0, 0.2), (0.5, 0.45), (1.0, 0.7)]


def test_fit_recovers_line_at_huge_budget(tmp_path, capsys):
    path = write_csv(tmp_path, LINE_ROWS)
    code, out, err = run(capsys, ["fit", path, "--epsilon", "1e6", "--seed", "3"])
    assert code == 0 and err == ""
    res = json.loads(out)
    assert res["mechanism"] == "dp_rss"
    assert res["fallback"] is False
    assert abs(res["alpha_hat"] - 0.5) < 1e-2
    assert abs(res["beta_hat"] - 0.2) < 1e-2


def test_fit_runs_every_mechanism(tmp_path, capsys):
    path = write_csv(tmp_path, LINE_ROWS)
    for mechanism in MECHANISM_NAMES:
        argv = ["fit", path, "--mechanism", mechanism, "--epsilon", "2.0"]
        if mechanism == "dp_rss_poly":
            argv += ["--degree", "2"]
        code, out, _ = run(capsys, argv)
        assert code == 0
        res = json.loads(out)
        assert res["mechanism"] == mechanism
        assert "fallback" in res
        if mechanism == "dp_rss_poly":
            assert res["degree"] == 2
            assert len(res["coeffs"]) == 3


def test_fit_empty_dataset_reports_fallback(tmp_path, capsys):
    path = write_csv(tmp_path, [])
    code, out, _ = run(capsys, ["fit", path, "--epsilon", "1.0", "--seed", "1"])
    assert code == 0
    res = json.loads(out)
    assert res["fallback"] is True
    assert res["alpha_hat"] == 0.0
    assert res["beta_hat"] == 0.5


def test_fit_rescales_raw_data_with_bounds(tmp_path, capsys):
    path = write_csv(tmp_path, [(0.0, 20.0), (5.0, 45.0), (10.0, 70.0)])
    code, out, _ = run(capsys, [
        "fit", path, "--epsilon", "1e9", "--seed", "2",
        "--x-min", "0", "--x-max", "10", "--y-min", "0", "--y-max", "100",
    ])
    assert code == 0
    res = json.loads(out)
    assert abs(res["alpha_hat"] - 5.0) < 1e-2
    assert abs(res["beta_hat"] - 20.0) < 1e-2


def test_fit_polynomial_recovers_quadratic(tmp_path, capsys):
    rows = [(x / 20.0, 0.25 * (x / 20.0) ** 2 + 0.25 * (x / 20.0) + 0.2)
            for x in range(21)]
    path = write_csv(tmp_path, rows)
    code, out, _ = run(capsys, [
        "fit", path, "--mechanism", "dp_rss_poly", "--degree", "2",
        "--epsilon", "1e9",
    ])
    assert code == 0
    res = json.loads(out)
    for got, want in zip(res["coeffs"], (0.25, 0.25, 0.2)):
        assert abs(got - want) < 1e-3


def test_fit_stdout_is_deterministic(tmp_path, capsys):
    path = write_csv(tmp_path, LINE_ROWS)
    argv = ["fit", path, "--epsilon", "0.5", "--seed", "11"]
    _, first, _ = run(capsys, argv)
    _, second, _ = run(capsys, argv)
    assert first == second
    _, other, _ = run(capsys, ["fit", path, "--epsilon", "0.5", "--seed", "12"])
    assert other != first


@pytest.mark.parametrize("rows, header, fragment", [
    ([(0.1, 0.2), ("0.5", "abc")], "x,y", "line 3"),
    ([(0.1, 0.2)], "a,b", "header"),
    ([(1.5, 0.2)], "x,y", "--x-min"),
])
def test_fit_input_errors(tmp_path, capsys, rows, header, fragment):
    path = write_csv(tmp_path, rows, header=header)
    code, out, err = run(capsys, ["fit", path, "--epsilon", "1.0"])
    assert code == 2
    assert fragment in err


def test_fit_flag_misuse(tmp_path, capsys):
    path = write_csv(tmp_path, LINE_ROWS)
    cases = [
        (["fit", path, "--epsilon", "0"], "positive"),
        (["fit", path, "--epsilon", "1", "--degree", "2"], "--degree"),
        (["fit", path, "--mechanism", "dp_rss_poly", "--epsilon", "1"], "--degree"),
        (["fit", path, "--mechanism", "dp_rss_poly", "--degree", "2",
          "--epsilon", "1", "--x-min", "0", "--x-max", "1", "--y-min", "0",
          "--y-max", "1"], "unit square"),
        (["fit", path, "--epsilon", "1", "--x-min", "0"], "together"),
        (["fit", str(tmp_path / "missing.csv"), "--epsilon", "1"], "cannot read"),
    ]
    for argv, fragment in cases:
        code, _, err = run(capsys, argv)
        assert code == 2, argv
        assert fragment in err, argv
    # argparse rejects unknown mechanisms on its own
    code, _, err = run(capsys, ["fit", path, "--mechanism", "ols", "--epsilon", "1"])
    assert code == 2
    assert "invalid choice" in err


def experiment_config(tmp_path, **overrides):
    cfg = {
        "n": 60, "alpha": 0.5, "beta": 0.2, "sigma": 0.05, "seed": 3,
        "epsilons": [0.5, 1.0], "iterations": 3,
        "methods": ["dp_rss", "dp_theil_sen", "dp_ss"],
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_experiment_writes_csv_and_manifest(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    config = experiment_config(tmp_path)
    out_path = tmp_path / "results.csv"
    code, _, err = run(capsys, ["experiment", config, "--output", str(out_path)])
    assert code == 0 and err == ""

    lines = out_path.read_text().splitlines()
    assert lines[0] == RESULTS_HEADER
    assert len(lines) == 7
    methods = [line.split(",")[0] for line in lines[1:]]
    assert methods == ["dp_rss"] * 2 + ["dp_ss"] * 2 + ["dp_theil_sen"] * 2
    assert [line.split(",")[1] for line in lines[1:]] == ["0.5", "1"] * 3

    manifest = json.loads((tmp_path / "results.csv.manifest.json").read_text())
    assert manifest["command"] == "experiment"
    assert manifest["seed"] == 3
    assert manifest["budget"] is None
    assert manifest["mechanism"] is None
    assert manifest["timestamp"] == "2023-11-14T22:13:20+00:00"
    assert manifest["output_paths"] == [str(out_path)]

    # rerunning reproduces both files byte for byte
    first_csv = out_path.read_bytes()
    first_manifest = (tmp_path / "results.csv.manifest.json").read_bytes()
    assert main(["experiment", config, "--output", str(out_path)]) == 0
    capsys.readouterr()
    assert out_path.read_bytes() == first_csv
    assert (tmp_path / "results.csv.manifest.json").read_bytes() == first_manifest


def test_experiment_single_iteration_writes_na(tmp_path, capsys):
    config = experiment_config(tmp_path, iterations=1, methods=["dp_rss"],
                               epsilons=[1.0])
    out_path = tmp_path / "one.csv"
    code, _, _ = run(capsys, ["experiment", config, "--output", str(out_path)])
    assert code == 0
    row = out_path.read_text().splitlines()[1].split(",")
    assert row[3] == "NA" and row[5] == "NA"   # std columns
    assert row[2] != "NA"


@pytest.mark.parametrize("overrides, fragment", [
    ({"budget": 1.0}, "unknown config key"),
    ({"methods": ["ols"]}, "unknown method"),
    ({"epsilons": [1.0, 0.5]}, "increasing"),
    ({"n": 10.5}, "positive integer"),
    ({"fresh_data_per_iteration": "yes"}, "true or false"),
])
def test_experiment_config_errors(tmp_path, capsys, overrides, fragment):
    config = experiment_config(tmp_path, **overrides)
    code, _, err = run(capsys, ["experiment", config, "--output",
                                str(tmp_path / "x.csv")])
    assert code == 2
    assert fragment in err


def test_experiment_missing_key_and_bad_json(tmp_path, capsys):
    cfg = {"n": 50}
    path = tmp_path / "partial.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, ["experiment", str(path), "--output",
                                str(tmp_path / "x.csv")])
    assert code == 2 and "missing config key" in err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, ["experiment", str(bad), "--output",
                                str(tmp_path / "x.csv")])
    assert code == 2 and "invalid JSON" in err


def test_verify_prints_table(capsys):
    code, out, err = run(capsys, ["verify", "--epsilon", "1.0",
                                  "--trials", "100000", "--seed", "5"])
    assert code == 0 and err == ""
    lines = out.splitlines()
    assert lines[0] == VERIFY_HEADER
    assert len(lines) == 11
    first = lines[1].split(",")
    assert first[0] == "n" and first[1] == "dp_rss"
    assert float(first[3]) == 12.0
    for a, b in zip(lines[1::2], lines[2::2]):
        fa, fb = a.split(","), b.split(",")
        assert fa[0] == fb[0]
        assert float(fa[4]) < 0.05 and float(fb[4]) < 0.05
        assert fa[5] == fb[5]  # shared improvement ratio per statistic


def test_verify_epsilon_scales_theory(capsys):
    code, out, _ = run(capsys, ["verify", "--epsilon", "2.0",
                                "--trials", "100000", "--seed", "5"])
    assert code == 0
    first = out.splitlines()[1].split(",")
    assert float(first[3]) == 3.0  # 12 / epsilon^2


def test_verify_rejects_small_trial_counts(capsys):
    code, _, err = run(capsys, ["verify", "--epsilon", "1.0", "--trials", "999"])
    assert code == 2
    assert "at least 100000" in err


def test_verify_output_file_with_manifest(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    out_path = tmp_path / "variances.csv"
    argv = ["verify", "--epsilon", "1.0", "--trials", "100000",
            "--output", str(out_path)]
    code, out, _ = run(capsys, argv)
    assert code == 0 and out == ""
    assert out_path.read_text().splitlines()[0] == VERIFY_HEADER
    manifest = json.loads((tmp_path / "variances.csv.manifest.json").read_text())
    assert manifest["command"] == "verify"
    assert manifest["budget"] == 1.0
    first = out_path.read_bytes()
    assert main(argv) == 0
    capsys.readouterr()
    assert out_path.read_bytes() == first
