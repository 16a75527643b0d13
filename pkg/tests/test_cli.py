import json
import subprocess
import sys

import numpy as np
import pytest

from ffconsensus import io
from ffconsensus.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main


def test_synthesize_writes_gains(tmp_path, capsys):
    assert main(["synthesize", "paper_sec4", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "rho(A_c)" in out and "gap" in out
    data = json.loads((tmp_path / "paper_sec4_synthesis.json").read_text())
    assert set(data) >= {"P", "K", "K_i", "L_i", "summary"}
    assert len(data["L_i"]) == 3


def test_malformed_json_exit_status(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["synthesize", str(bad), "--out", str(tmp_path)]) == EXIT_ERROR
    assert "ScenarioParseError" in capsys.readouterr().err


def test_infeasible_feedforward_names_agent(tmp_path, capsys):
    assert main(["synthesize", "feedforward_infeasible", "--out", str(tmp_path)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "FeedforwardInfeasibleError" in err and "agent 1" in err


def test_run_all_emits_three_traces_and_comparison(tmp_path, capsys):
    assert main(["run", "paper_sec4", "--mode", "all", "--out", str(tmp_path)]) == EXIT_OK
    for kind in ("distributed", "centralized", "baseline"):
        header, data = io.read_csv(tmp_path / f"paper_sec4_{kind}.csv")
        manifest = json.loads((tmp_path / f"paper_sec4_{kind}.columns.json").read_text())
        assert manifest["columns"] == header and data.shape[0] == 61
    cmp = json.loads((tmp_path / "paper_sec4_comparison.json").read_text())
    assert {"consensus_step_proposed", "consensus_step_baseline", "rho_proposed", "rho_baseline"} <= set(cmp)


def test_report_recomputable_from_trace(tmp_path):
    main(["run", "paper_sec4", "--mode", "centralized", "--out", str(tmp_path)])
    rep = json.loads((tmp_path / "paper_sec4_centralized.report.json").read_text())
    header, data = io.read_csv(tmp_path / "paper_sec4_centralized.csv")
    dev = data[:, header.index("deviation")]
    assert dev[-1] == pytest.approx(rep["metrics"]["final_deviation"], rel=1e-15)
    E = data[:, [i for i, h in enumerate(header) if h.startswith("E[")]]
    ub = data[:, [i for i, h in enumerate(header) if h.startswith("u_fb")]]
    J = float(np.sum(E[:-1] ** 2) + np.sum(ub[:-1] ** 2))  # Q = R_i = I
    assert J == pytest.approx(rep["costs"]["J_sim"]["0"], rel=1e-12)


def test_horizon_zero_single_row(tmp_path):
    assert main(["run", "paper_sec4", "--mode", "centralized", "--horizon", "0", "--out", str(tmp_path)]) == EXIT_OK
    _, data = io.read_csv(tmp_path / "paper_sec4_centralized.csv")
    assert data.shape[0] == 1
    rep = json.loads((tmp_path / "paper_sec4_centralized.report.json").read_text())
    assert rep["costs"]["J_sim"]["0"] == 0.0


def test_centralized_cost_matches_riccati_value(tmp_path):
    main(["run", "paper_sec4", "--mode", "centralized", "--out", str(tmp_path)])
    costs = json.loads((tmp_path / "paper_sec4_centralized.report.json").read_text())["costs"]
    assert abs(costs["J_sim"]["0"] - costs["J_star"]["0"]) <= 1e-6 + costs["truncation_bound"]


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("FFCONSENSUS_OUT", str(tmp_path / "envout"))
    assert main(["run", "homogeneous", "--horizon", "5"]) == EXIT_OK
    assert (tmp_path / "envout" / "homogeneous_distributed.csv").exists()


def test_deterministic_reports(tmp_path):
    for d in ("a", "b"):
        main(["run", "output_mixed", "--out", str(tmp_path / d)])
    for name in ("output_mixed_distributed.report.json", "output_mixed_distributed.csv"):
        a = (tmp_path / "a" / name).read_text().replace(str(tmp_path / "a"), "")
        b = (tmp_path / "b" / name).read_text().replace(str(tmp_path / "b"), "")
        assert a == b


def test_verify_passes_on_reference_scenario(capsys):
    assert main(["verify", "paper_sec4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out


def test_verify_homogeneous(capsys):
    assert main(["verify", "homogeneous", "--skip-kernels"]) == EXIT_OK


def test_verify_uncontrollable_fails_cleanly(capsys):
    assert main(["verify", "uncontrollable", "--skip-kernels"]) == EXIT_FAILED
    assert "NonStabilizableError" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ffconsensus.cli", "synthesize", "homogeneous", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert "rho(A_bar_c)" in proc.stdout
