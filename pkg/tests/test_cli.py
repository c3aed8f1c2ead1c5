import json

import spiderlab.cli as cli
from spiderlab.verify import Failure


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def csv_rows(text):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_simulate_seed_horizon(capsys):
    code, out, err = run_cli(capsys, "simulate", "--model", "uniform:0.5", "--n", "1",
                             "--replicates", "10", "--seed", "3", "--format", "csv")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["index", "n", "p", "replicates", "mean", "variance"]
    by_index = {row["index"]: row for row in rows}
    assert by_index["zagreb"]["mean"] == "12.0"
    assert by_index["zagreb"]["variance"] == "0.0"
    assert by_index["gini"]["mean"] == "0.25"
    assert "resolved config" in err and '"master_seed": 3' in err


def test_simulate_json_summary(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--model", "preferential", "--n", "5",
                           "--replicates", "64", "--seed", "8")
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["model"] == "preferential"
    assert payload["config"]["master_seed"] == 8
    assert payload["stats"]["leaves"]["count"] == 64
    assert payload["spot_checks"] == 1


def test_simulate_preferential_equals_uniform_half(capsys):
    args = ["--n", "400", "--replicates", "300", "--seed", "77", "--format", "csv"]
    code_a, out_a, _ = run_cli(capsys, "simulate", "--model", "preferential", *args)
    code_b, out_b, _ = run_cli(capsys, "simulate", "--model", "uniform:0.5", *args)
    assert code_a == code_b == 0
    assert out_a == out_b


def test_simulate_reruns_byte_identical(capsys):
    args = ["simulate", "--model", "uniform:0.3", "--n", "50", "--replicates", "500",
            "--seed", "123456"]
    code_a, out_a, _ = run_cli(capsys, *args)
    code_b, out_b, _ = run_cli(capsys, *args)
    assert code_a == code_b == 0
    assert out_a == out_b


def test_simulate_missing_n_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "simulate", "--model", "uniform:0.5")
    assert code == 2
    assert "'n'" in err


def test_simulate_missing_model_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "simulate", "--n", "10")
    assert code == 2
    assert "'model'" in err


def test_simulate_unknown_index_is_usage_error(capsys):
    code, _, err = run_cli(capsys, "simulate", "--model", "uniform:0.5", "--n", "5",
                           "--indices", "wiener")
    assert code == 2
    assert "wiener" in err


def test_simulate_bad_model_probability(capsys):
    code, _, err = run_cli(capsys, "simulate", "--model", "uniform:1.0", "--n", "5")
    assert code == 2


def test_simulate_synthesizes_and_echoes_seed(capsys):
    code, out_a, err = run_cli(capsys, "simulate", "--model", "uniform:0.5", "--n", "3",
                               "--replicates", "20", "--format", "csv")
    assert code == 0
    resolved = json.loads(err.split("resolved config: ", 1)[1])
    seed = resolved["master_seed"]
    code, out_b, _ = run_cli(capsys, "simulate", "--model", "uniform:0.5", "--n", "3",
                             "--replicates", "20", "--format", "csv", "--seed", str(seed))
    assert code == 0
    assert out_a == out_b


def test_simulate_config_file_and_flag_override(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "model": "uniform:0.5", "horizon": 4, "replicates": 25,
        "master_seed": 9, "indices": ["zagreb", "gini"], "clt_shift": 0.0,
    }))
    code, out, _ = run_cli(capsys, "simulate", "--config", str(config))
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["horizon"] == 4
    assert payload["config"]["indices"] == ["zagreb", "gini"]
    # flags override file values
    code, out, _ = run_cli(capsys, "simulate", "--config", str(config), "--n", "6")
    assert code == 0
    assert json.loads(out)["config"]["horizon"] == 6


def test_out_file_written(capsys, tmp_path):
    target = tmp_path / "summary.csv"
    code, out, _ = run_cli(capsys, "simulate", "--model", "uniform:0.5", "--n", "2",
                           "--replicates", "10", "--seed", "1", "--format", "csv",
                           "--out", str(target))
    assert code == 0
    assert out == ""
    header, rows = csv_rows(target.read_text())
    assert header[0] == "index"
    assert len(rows) == 7


def test_exact_hoover_rational(capsys):
    code, out, _ = run_cli(capsys, "exact", "--index", "hoover", "--n", "10",
                           "--p", "1/2", "--oracle", "--format", "csv")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["index", "n", "p", "mean", "variance",
                      "oracle_mean", "oracle_variance", "match"]
    assert rows[0]["mean"] == "55/208"
    assert rows[0]["match"] == "True"
    assert rows[0]["oracle_mean"] == "55/208"


def test_exact_zagreb_seed_row(capsys):
    code, out, _ = run_cli(capsys, "exact", "--index", "zagreb", "--n", "1", "--p", "0.7",
                           "--format", "csv")
    assert code == 0
    _, rows = csv_rows(out)
    assert rows[0]["mean"] == "12.0"
    assert rows[0]["variance"] == "0.0"
    assert rows[0]["oracle_mean"] == ""  # column present, empty without --oracle


def test_exact_oracle_matches_over_range(capsys):
    code, out, _ = run_cli(capsys, "exact", "--index", "gini", "--n-range", "1:9:2",
                           "--p", "2/5", "--oracle", "--format", "csv")
    assert code == 0
    _, rows = csv_rows(out)
    assert [row["n"] for row in rows] == ["1", "3", "5", "7", "9"]
    assert all(row["match"] == "True" for row in rows)


def test_exact_json_rows(capsys):
    code, out, _ = run_cli(capsys, "exact", "--index", "leaves", "--n", "12", "--p", "1/4")
    assert code == 0
    payload = json.loads(out)
    assert payload["rows"][0]["mean"] == "23/4"


def test_exact_unknown_index(capsys):
    code, _, err = run_cli(capsys, "exact", "--index", "wiener", "--n", "4", "--p", "0.5")
    assert code == 2
    assert "wiener" in err


def test_exact_requires_exact_formulas(capsys):
    code, _, err = run_cli(capsys, "exact", "--index", "generalized_zagreb:5",
                           "--n", "4", "--p", "0.5")
    assert code == 2
    assert "asymptotics" in err


def test_verify_quick_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--level", "quick", "--seed", "4")
    assert code == 0
    assert "all suites passed" in out


def test_verify_reports_failures_with_witness(capsys, monkeypatch):
    fake = Failure("catalog-oracle", "zagreb", {"n": 3, "p": "1/2"},
                   "variance formula 1 != oracle 2")
    monkeypatch.setattr(cli, "run_level", lambda level, master_seed: ([fake], {"level": level}))
    code, out, _ = run_cli(capsys, "verify", "--level", "quick")
    assert code == 3
    assert "zagreb" in out and "n=3" in out and "p=1/2" in out


def test_clt_table(capsys):
    code, out, _ = run_cli(capsys, "clt", "--index", "leaves", "--n", "200,800",
                           "--p", "0.5", "--replicates", "2000", "--seed", "6",
                           "--format", "csv")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["index", "n", "p", "mean", "var", "ks",
                      "exceedance", "r_mean_error", "limit"]
    assert [row["n"] for row in rows] == ["200", "800"]
    assert all(row["exceedance"] == "" for row in rows)
    assert all(0.0 < float(row["ks"]) < 0.2 for row in rows)


def test_clt_requires_normalizer(capsys):
    code, _, err = run_cli(capsys, "clt", "--index", "gini", "--n", "100", "--p", "0.5")
    assert code == 2
    assert "CLT" in err


def test_converge_table(capsys):
    code, out, _ = run_cli(capsys, "converge", "--index", "hoover", "--model", "preferential",
                           "--n-grid", "100,400", "--replicates", "800", "--seed", "2",
                           "--format", "csv")
    assert code == 0
    header, rows = csv_rows(out)
    assert header == ["index", "n", "p", "mean", "var", "ks",
                      "exceedance", "r_mean_error", "limit"]
    assert all(row["limit"] == "0.25" for row in rows)
    assert all(row["ks"] == "" for row in rows)
    assert all(row["p"] == "0.5" for row in rows)


def test_converge_requires_limit(capsys):
    code, _, err = run_cli(capsys, "converge", "--index", "leaves", "--p", "0.5")
    assert code == 2
    assert "limit" in err


def test_unknown_subcommand_usage(capsys):
    assert cli.main(["frobnicate"]) == 2


def test_csv_schema_stability(capsys):
    # oracle columns exist with and without --oracle; diagnostics share one schema
    code, out_plain, _ = run_cli(capsys, "exact", "--index", "zagreb", "--n", "2",
                                 "--p", "0.5", "--format", "csv")
    code2, out_oracle, _ = run_cli(capsys, "exact", "--index", "zagreb", "--n", "2",
                                   "--p", "0.5", "--oracle", "--format", "csv")
    assert code == code2 == 0
    assert out_plain.splitlines()[0] == out_oracle.splitlines()[0]
