import csv
import json
import subprocess
import sys

import pytest

from microgrid_planner import datasets
from microgrid_planner.cli import main
from microgrid_planner.serialize import read_json, write_json


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["ingest", str(datasets.data_path("solar")), "--type", "solar", "--out", str(d / "s.csv")]) == 0
    assert main(["ingest", str(datasets.data_path("coastal")), "--type", "wind", "--out", str(d / "w.csv")]) == 0
    assert main(["scenarios", "build", "--solar", str(d / "s.csv"), "--wind", str(d / "w.csv"),
                 "--out", str(d / "all.json")]) == 0
    assert main(["scenarios", "reduce", str(d / "all.json"), "--keep", "4", "--out", str(d / "red.json")]) == 0
    assert main(["default-config", "--out", str(d / "cfg.json")]) == 0
    return d


def test_scenario_files(work):
    assert len(read_json(work / "all.json")["scenarios"]) == datasets.N_DAYS
    red = read_json(work / "red.json")["scenarios"]
    assert len(red) == 4
    assert abs(sum(s["pi"] for s in red) - 1) <= 1e-9


def test_invest_and_sweep(work):
    args = ["invest", "--spec", str(work / "cfg.json"), "--scenarios", str(work / "red.json"),
            "--out", str(work / "inv.json"), "--sweep", str(work / "bs.csv")]
    assert main(args) == 0
    assert main(args[:-4] + ["--out", str(work / "inv0.json"), "--no-demand-response"]) == 0
    assert read_json(work / "inv.json")["overall_cost"] <= read_json(work / "inv0.json")["overall_cost"]
    rows = list(csv.reader(open(work / "bs.csv")))
    assert rows[0] == ["B", "alpha_s", "alpha_w", "alpha_e", "overall_cost"] and len(rows) == 8


def test_robust_invest(work):
    assert main(["robust-invest", "--spec", str(work / "cfg.json"), "--scenarios", str(work / "red.json"),
                 "--error-pct", "10", "--out", str(work / "r.json"), "--sweep", str(work / "es.csv"),
                 "--sweep-pcts", "0,10"]) == 0
    rows = list(csv.reader(open(work / "es.csv")))
    assert rows[0] == ["pct", "investment_expense", "overall_cost"] and len(rows) == 3


@pytest.mark.parametrize("mode", ["central", "decentralized"])
def test_dispatch(work, mode):
    cfg = read_json(work / "cfg.json")
    cfg["portfolio"].update(alpha_s=200.0, alpha_w=300.0, alpha_e=400.0)
    cfg.pop("schema_version")
    write_json(cfg, work / "cfg2.json")
    out = work / f"d_{mode}.json"
    rc = main(["dispatch", "--scenario", str(work / "red.json"), "--index", "1", "--spec", str(work / "cfg2.json"),
               "--mode", mode, "--out", str(out), "--trace", str(work / "t.csv")])
    assert rc == 0
    assert read_json(out)["solution"]["converged"]
    if mode == "decentralized":
        assert next(csv.reader(open(work / "t.csv"))) == ["k", "price_delta", "objective"]


def test_exit_codes(work, tmp_path):
    cfg = read_json(work / "cfg.json")
    cfg.pop("schema_version")
    cfg["microgrid"]["users"][0]["total"] = 1e6
    write_json(cfg, tmp_path / "bad.json")
    base = ["dispatch", "--scenario", str(work / "red.json"), "--out", str(tmp_path / "o.json")]
    assert main(base + ["--spec", str(tmp_path / "bad.json")]) == 2

    cfg = read_json(work / "cfg.json")
    cfg.pop("schema_version")
    cfg["portfolio"].update(alpha_s=200.0, alpha_w=300.0, alpha_e=400.0)
    cfg["solver"].update(max_iter=1, tol=1e-12)
    write_json(cfg, tmp_path / "slow.json")
    assert main(base + ["--spec", str(tmp_path / "slow.json"), "--mode", "decentralized"]) == 3

    (tmp_path / "v.json").write_text(json.dumps({"schema_version": 99}))
    assert main(base + ["--spec", str(tmp_path / "v.json")]) == 1
    assert main(["ingest", str(tmp_path / "missing.csv"), "--type", "solar", "--out", str(tmp_path / "x")]) == 1


def test_report_and_module_entry(tmp_path):
    env_run = subprocess.run(
        [sys.executable, "-m", "microgrid_planner", "report", "--out", str(tmp_path / "r"), "--keep", "3",
         "--no-decentralized"],
        capture_output=True, text=True, env={"MICROGRID_LOG_LEVEL": "INFO", "PATH": ""},
    )
    assert env_run.returncode == 0, env_run.stderr
    assert "stage ingest" in env_run.stderr
    summary = read_json(tmp_path / "r" / "summary.json")
    assert summary["n_scenarios"] == 3
    assert main(["report", "--config", str(tmp_path / "r" / "run_config.json"), "--out", str(tmp_path / "r2")]) == 0
    assert (tmp_path / "r" / "investment.json").read_bytes() == (tmp_path / "r2" / "investment.json").read_bytes()
