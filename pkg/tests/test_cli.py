"""Command line interface: reports, determinism, config merging, exit codes."""

import csv
import io
import json

import numpy as np
import pytest

from predsub import generate_mmsb, main, predsub_estimate, sample_adjacency, save_edge_list
from predsub._sampling import child_seed


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture(scope="module")
def edge_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("graphs")
    model = generate_mmsb(300, 3, 0.5, seed=180, p=2)
    g1 = sample_adjacency(model, seed=181)
    g2 = sample_adjacency(model, seed=182)
    p1, p2 = root / "g1.txt", root / "g2.txt"
    save_edge_list(g1, p1)
    save_edge_list(g2, p2)
    return str(p1), str(p2), g1


# ---------------------------------------------------------------------------
# report shape and determinism


def test_simulate_estimate_report_shape(capsys):
    rep = run_json(
        capsys, "simulate-estimate", "--n", "200", "--d", "2", "--rho", "0.5",
        "--method", "predsub", "--m", "60", "--reps", "2", "--seed", "1",
    )
    assert rep["command"] == "simulate-estimate"
    assert rep["artifact_version"]
    assert len(rep["records"]) == 2
    assert {"replicate", "relative_frobenius_error"} <= set(rep["records"][0])
    # aggregates recompute from records
    errs = [r["relative_frobenius_error"] for r in rep["records"]]
    assert rep["aggregates"]["mean_relative_frobenius_error"] == pytest.approx(
        sum(errs) / len(errs)
    )
    assert "timings" in rep


def test_derived_m_echoed_when_a_given(capsys):
    rep = run_json(
        capsys, "simulate-estimate", "--n", "400", "--d", "2", "--rho", "0.5",
        "--method", "predsub", "--a", "2.0", "--reps", "1", "--seed", "2",
    )
    assert rep["derived"]["m"] == 216  # ceil((ln 400)^3)
    assert rep["config"]["a"] == 2.0


def test_no_timings_removes_the_section(capsys):
    args = ("simulate-estimate", "--n", "150", "--d", "2", "--rho", "0.5",
            "--method", "ase", "--reps", "1", "--seed", "3")
    with_timings = run_json(capsys, *args)
    without = run_json(capsys, *args, "--no-timings")
    assert "timings" in with_timings
    assert "timings" not in without


def test_reports_byte_identical_across_runs_and_threads(capsys):
    args = ("simulate-test", "--n", "200", "--d", "2", "--rho", "0.5", "--p", "2",
            "--m", "80", "--b", "8", "--reps", "2", "--epsilon", "0",
            "--seed", "4", "--no-timings")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    _, out3, _ = run_cli(capsys, *args, "--threads", "2")
    assert out1 == out2 == out3


def test_csv_one_row_per_replicate(capsys):
    code, out, err = run_cli(
        capsys, "simulate-test", "--n", "200", "--d", "2", "--rho", "0.5",
        "--p", "2", "--m", "80", "--b", "5", "--reps", "2",
        "--epsilon", "0,0.4", "--seed", "5", "--format", "csv",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4  # 2 reps x 2 epsilons
    assert {"epsilon", "p_value", "reject", "replicate"} <= set(rows[0])


def test_output_file(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "simulate-estimate", "--n", "150", "--d", "2", "--rho", "0.5",
        "--method", "ase", "--reps", "1", "--seed", "6", "--output", str(out_path),
    )
    assert code == 0
    assert out == ""
    assert json.loads(out_path.read_text())["command"] == "simulate-estimate"


# ---------------------------------------------------------------------------
# config files and validation


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "n": 200, "d": 2, "rho": 0.5, "method": "predsub", "m": 60,
        "reps": 1, "seed": 7,
    }))
    rep = run_json(capsys, "simulate-estimate", "--config", str(cfg), "--reps", "3")
    assert rep["config"]["reps"] == 3   # flag wins
    assert rep["config"]["n"] == 200    # file value kept
    assert len(rep["records"]) == 3


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 100, "bogus": 1}))
    code, _, err = run_cli(capsys, "simulate-estimate", "--config", str(cfg),
                           "--seed", "8")
    assert code == 1
    assert "bogus" in err


def test_seed_is_mandatory(capsys):
    code, _, err = run_cli(
        capsys, "simulate-estimate", "--n", "100", "--d", "2", "--rho", "0.5",
        "--method", "ase", "--reps", "1",
    )
    assert code == 1
    assert "seed" in err


def test_missing_model_params_rejected(capsys):
    code, _, err = run_cli(capsys, "simulate-estimate", "--seed", "9",
                           "--method", "ase", "--reps", "1")
    assert code == 1
    assert "--n" in err


# ---------------------------------------------------------------------------
# behavior flags


def test_noiseless_mode_is_exact(capsys):
    rep = run_json(
        capsys, "simulate-estimate", "--n", "150", "--d", "3", "--rho", "0.5",
        "--method", "predsub", "--m", "100", "--reps", "1", "--seed", "10",
        "--noiseless",
    )
    assert rep["records"][0]["relative_frobenius_error"] <= 1e-8


def test_self_test_mode_p_one(capsys):
    rep = run_json(
        capsys, "simulate-test", "--n", "200", "--d", "2", "--rho", "0.5",
        "--p", "2", "--m", "70", "--b", "6", "--reps", "3", "--epsilon", "0",
        "--seed", "11", "--self-test",
    )
    assert [r["p_value"] for r in rep["records"]] == [1.0, 1.0, 1.0]
    assert rep["aggregates"]["by_epsilon"]["0.0"]["rejection_rate"] == 0.0


def test_simulate_estimate_puresub(capsys):
    rep = run_json(
        capsys, "simulate-estimate", "--n", "300", "--d", "2", "--rho", "0.5",
        "--method", "puresub", "--m", "100", "--reps", "2", "--seed", "12",
    )
    assert len(rep["records"]) == 2
    assert all(r["relative_frobenius_error"] < 1.0 for r in rep["records"])


# ---------------------------------------------------------------------------
# file workflows


def test_estimate_from_file_matches_in_memory(tmp_path, capsys, edge_files):
    path1, _, g1 = edge_files
    npy = tmp_path / "x.npy"
    rep = run_json(
        capsys, "estimate", "--input", path1, "--d", "3", "--method", "predsub",
        "--m", "90", "--seed", "13", "--save-embedding", str(npy),
    )
    assert rep["records"][0]["n"] == g1.n
    from_cli = np.load(npy)
    direct = predsub_estimate(g1, 90, 3, seed=child_seed(13, 30))
    assert np.array_equal(from_cli, direct.embedding.X)


def test_estimate_ase_method(capsys, edge_files):
    path1, _, _ = edge_files
    rep = run_json(capsys, "estimate", "--input", path1, "--d", "3",
                   "--method", "ase", "--seed", "14")
    rec = rep["records"][0]
    assert rec["p_hat"] + rec["q_hat"] == 3


def test_test_command_reports_pvalue(capsys, edge_files):
    path1, path2, _ = edge_files
    rep = run_json(
        capsys, "test", "--input", path1, "--input2", path2, "--d", "3",
        "--m", "100", "--b", "10", "--seed", "15",
    )
    rec = rep["records"][0]
    assert 0.0 <= rec["p_value"] <= 1.0
    assert rec["p_value"] * 10 == round(rec["p_value"] * 10)
    assert rec["n_common"] == 300
    assert "ratio_frobenius" in rep["aggregates"]["normalizers"]
    assert len(rep["aggregates"]["boot"]) == 10


def test_test_command_min_degree_intersection(capsys, edge_files):
    path1, path2, _ = edge_files
    rep = run_json(
        capsys, "test", "--input", path1, "--input2", path2, "--d", "3",
        "--m", "50", "--b", "4", "--seed", "16", "--min-degree", "2",
    )
    assert rep["records"][0]["n_common"] <= 300


def test_malformed_edge_list_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n2 zzz\n")
    code, _, err = run_cli(capsys, "estimate", "--input", str(bad), "--d", "2",
                           "--m", "10", "--seed", "17")
    assert code == 1
    assert "bad.txt:2:" in err


def test_missing_input_rejected(capsys):
    code, _, err = run_cli(capsys, "estimate", "--d", "2", "--m", "10", "--seed", "18")
    assert code == 1
    assert "--input" in err


# ---------------------------------------------------------------------------
# diagnostics command


def test_diagnostics_selected_checks(capsys):
    rep = run_json(
        capsys, "diagnostics", "--n", "300", "--d", "2", "--rho", "0.5",
        "--m", "80", "--seed", "19", "--checks", "coherence,assumptions",
    )
    diag = rep["aggregates"]["diagnostics"]
    assert set(diag) == {"coherence", "assumptions"}
    assert diag["coherence"]["value"] > 1.0
    assert isinstance(diag["assumptions"]["flags"]["full_rank"], bool)


def test_diagnostics_unknown_check(capsys):
    code, _, err = run_cli(capsys, "diagnostics", "--n", "300", "--d", "2",
                           "--rho", "0.5", "--seed", "20", "--checks", "zzz")
    assert code == 1
    assert "zzz" in err


def test_diagnostics_error_curve(capsys):
    rep = run_json(
        capsys, "diagnostics", "--n", "400", "--d", "2", "--rho", "0.5",
        "--seed", "21", "--checks", "error_curve", "--m-grid", "40,120",
        "--reps", "2",
    )
    curve = rep["aggregates"]["diagnostics"]["error_curve"]
    assert curve["curves"]["relative_frobenius_mean"]["x"] == [40.0, 120.0]
