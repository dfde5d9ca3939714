"""Command-line interface: argument handling, config precedence, output
files, exit codes, and byte-level determinism."""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from scenerywalk.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, _grid_spec, build_parser, main


def run(args):
    return main(args)


# ---------- parsing ----------


def test_grid_spec_pow2():
    assert _grid_spec("pow2:4:7") == [16, 32, 64, 128]
    assert _grid_spec("16,64,256") == [16, 64, 256]
    with pytest.raises(ValueError):
        _grid_spec("pow2:7:4")
    with pytest.raises(ValueError):
        _grid_spec("pow2:abc:4")
    with pytest.raises(ValueError):
        _grid_spec("1,two,3")


def test_parser_knows_all_subcommands():
    ap = build_parser()
    minimal = {"simulate": ["--n", "8"], "oracle": ["--n", "2"]}
    for cmd in ("simulate", "survival", "range", "ks", "oracle", "verify"):
        args = ap.parse_args([cmd] + minimal.get(cmd, []))
        assert args.command == cmd


def test_common_flags_present():
    ap = build_parser()
    args = ap.parse_args([
        "survival", "--config", "x.ini", "--seed", "9", "--replicas", "32",
        "--threads", "2", "--out", "dir",
    ])
    assert (args.config, args.seed, args.replicas, args.threads, args.out) == (
        "x.ini", 9, 32, 2, "dir")


# ---------- exit codes ----------


def test_zero_replicas_is_usage_error(tmp_path):
    rc = run(["survival", "--replicas", "0", "--grid", "pow2:4:7",
              "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE


def test_bad_grid_is_usage_error(tmp_path):
    rc = run(["survival", "--grid", "pow2:9:2", "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE


def test_unknown_model_is_usage_error(tmp_path):
    # argparse rejects the choice itself and exits with the usage status
    with pytest.raises(SystemExit) as exc:
        run(["simulate", "--model", "bogus", "--n", "8",
             "--out", str(tmp_path / "o")])
    assert exc.value.code == EXIT_USAGE


def test_missing_config_is_usage_error(tmp_path):
    rc = run(["survival", "--config", str(tmp_path / "none.ini"),
              "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE


def test_oracle_budget_violation_is_usage_error(tmp_path):
    rc = run(["oracle", "--n", "30", "--out", str(tmp_path / "o")])
    assert rc == EXIT_USAGE


# ---------- oracle command ----------


def test_oracle_two_step_table(tmp_path):
    out = tmp_path / "oracle"
    rc = run(["oracle", "--n", "2", "--out", str(out)])
    assert rc == EXIT_OK
    lines = (out / "exact.csv").read_text().splitlines()
    assert lines[0] == "quantity,index,value,stderr,provenance"
    table = {(r.split(",")[0], r.split(",")[1]): r.split(",")[2:] for r in lines[1:]}
    assert table[("e_range", "2")] == ["5/2", "0", "exact"]
    assert table[("survival", "1")][0] == "1"
    assert table[("survival", "2")][0] == "1/2"
    assert table[("e_v", "2")][0] == "2"
    assert table[("mass", "2")][0] == "1"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["identity_gap"] == 0.0
    assert summary["arithmetic"] == "rational"
    assert (out / "config.ini").exists()


def test_oracle_mdm_and_dp(tmp_path):
    out = tmp_path / "om"
    rc = run(["oracle", "--model", "mdm", "--n", "2", "--out", str(out)])
    assert rc == EXIT_OK
    text = (out / "exact.csv").read_text()
    assert "return_prob,2,2/9,0,exact" in text
    out2 = tmp_path / "odp"
    rc = run(["oracle", "--n", "2", "--dp-nmax", "16", "--out", str(out2)])
    assert rc == EXIT_OK
    dp = (out2 / "dp_table.csv").read_text().splitlines()
    assert dp[0] == "k,p_return,e_v"
    assert len(dp) == 18  # k = 0..16


# ---------- simulate command ----------


def test_simulate_ensemble_and_oracle(tmp_path):
    out = tmp_path / "sim"
    rc = run(["simulate", "--n", "8", "--replicas", "512", "--mode", "both",
              "--out", str(out)])
    assert rc == EXIT_OK
    ens = (out / "ensemble.csv").read_text().splitlines()
    assert ens[0] == "column,mean,stderr,count"
    assert (out / "exact.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["replicas"] == 512
    assert summary["mode"] == "both"
    assert summary["oracle_arithmetic"] == "rational"
    # MC mean within 5 sigma of the exact value it sits next to
    assert abs(summary["mean_range"] - summary["oracle_e_range"]) < (
        5 * summary["range_stderr"])


def test_simulate_per_replica_rows(tmp_path):
    out = tmp_path / "simr"
    rc = run(["simulate", "--n", "16", "--replicas", "64", "--per-replica",
              "--out", str(out)])
    assert rc == EXIT_OK
    rows = (out / "replicas.csv").read_text().splitlines()
    assert rows[0] == "replica,n,range,censored,t0,z_max,z_min,z_final"
    assert len(rows) == 65
    for line in rows[1:]:
        _, n, rng, cens, t0, zmax, zmin, zfin = line.split(",")
        assert 1 <= int(rng) <= int(n) + 1
        # range of a +-1 scenery walk is the contiguous span
        assert int(rng) == int(zmax) - int(zmin) + 1
        assert (cens, t0 == "") in {("0", False), ("1", True)}
        if cens == "0":
            assert 1 <= int(t0) <= int(n)


def test_simulate_mdm(tmp_path):
    out = tmp_path / "simm"
    rc = run(["simulate", "--model", "mdm", "--n", "16", "--replicas", "128",
              "--per-replica", "--out", str(out)])
    assert rc == EXIT_OK
    rows = (out / "replicas.csv").read_text().splitlines()
    assert rows[0] == "replica,n,x_max,x_min,range1,censored,t0,origin_2n"


def test_simulate_mdm_ensemble(tmp_path):
    out = tmp_path / "simme"
    rc = run(["simulate", "--model", "mdm", "--n", "64", "--replicas", "256",
              "--out", str(out)])
    assert rc == EXIT_OK
    rows = (out / "ensemble.csv").read_text().splitlines()
    assert rows[0] == ("n,survival,survival_stderr,mean_range1,range1_stderr,"
                       "full_range_over_n,full_range_stderr,return_freq,"
                       "return_stderr,replicas")
    assert len(rows) == 2
    vals = rows[1].split(",")
    assert vals[0] == "64" and vals[-1] == "256"
    assert 0.0 < float(vals[1]) < 1.0          # survival at a finite horizon
    assert 0.0 < float(vals[5]) <= 1.0 + 1.0 / 64.0   # sites per step
    summary = json.loads((out / "summary.json").read_text())
    assert summary["survival"] == float(vals[1])
    assert summary["return_freq"] == float(vals[7])


def test_simulate_real_scenery(tmp_path):
    out = tmp_path / "simg"
    rc = run(["simulate", "--scenery", "gaussian", "--n", "32",
              "--replicas", "128", "--per-replica", "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    # continuous scenery: no distinct-value range, no exact return time
    assert "mean_width" in summary
    assert "mean_range" not in summary and "survival" not in summary
    rows = (out / "replicas.csv").read_text().splitlines()
    assert rows[0] == "replica,n,z_max,z_min,z_final"


# ---------- survival / range / ks ----------


def test_survival_outputs(tmp_path):
    out = tmp_path / "surv"
    rc = run(["survival", "--grid", "pow2:4:9", "--replicas", "4096",
              "--seed", "3", "--out", str(out)])
    assert rc == EXIT_OK
    table = (out / "table.csv").read_text().splitlines()
    assert table[0] == "n,survival,stderr,replicas"
    assert len(table) == 7
    plot = (out / "plot_data.csv").read_text().splitlines()
    assert plot[0] == "x,y,yerr"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["expected_exponent"] == -0.25
    assert "exponent_ci95" in summary
    assert (out / "survival.png").stat().st_size > 1000


def test_range_outputs(tmp_path):
    out = tmp_path / "rng"
    rc = run(["range", "--grid", "pow2:4:9", "--replicas", "512",
              "--seed", "3", "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["expected_exponent"] == 0.75
    assert summary["fluctuation_exponent"] == 0.75
    assert summary["ratio_at_max"] > 0
    assert (out / "range.png").exists()


def test_ks_outputs(tmp_path):
    out = tmp_path / "ks"
    rc = run(["ks", "--m-list", "64,256,1024", "--replicas", "256",
              "--estimator", "normalized-rwrs", "--out", str(out)])
    assert rc == EXIT_OK
    table = (out / "table.csv").read_text().splitlines()
    assert table[0] == ("estimator_id,m,replicas,sup_mean,sup_stderr,"
                        "supminf_mean,supminf_stderr")
    # three resolutions plus one extrapolated record
    assert len(table) == 5
    assert any("extrapolated" in r for r in table[1:])
    summary = json.loads((out / "summary.json").read_text())
    assert "kappa_hat" in summary


def test_mdm_survival_run(tmp_path):
    out = tmp_path / "msurv"
    rc = run(["survival", "--model", "mdm", "--grid", "pow2:4:9",
              "--replicas", "4096", "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert "amplitude" in summary


# ---------- config precedence ----------


def test_config_file_applies(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nseed = 5\nreplicas = 256\n\n[model]\nmodel = mdm\np = 0.4\n")
    out = tmp_path / "o1"
    rc = run(["survival", "--config", str(ini), "--grid", "pow2:4:8",
              "--out", str(out)])
    assert rc in (EXIT_OK, EXIT_FAIL)  # tiny grid may miss the exponent box
    echoed = (out / "config.ini").read_text()
    assert "seed = 5" in echoed
    assert "replicas = 256" in echoed
    assert "p = 0.4" in echoed


def test_cli_overrides_config(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nseed = 5\n")
    out = tmp_path / "o2"
    run(["survival", "--config", str(ini), "--seed", "7", "--grid", "pow2:4:8",
         "--replicas", "128", "--out", str(out)])
    assert "seed = 7" in (out / "config.ini").read_text()


def test_command_section_beats_run_section(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nreplicas = 64\n\n[survival]\nreplicas = 128\n")
    out = tmp_path / "o3"
    run(["survival", "--config", str(ini), "--grid", "pow2:4:8", "--out", str(out)])
    assert "replicas = 128" in (out / "config.ini").read_text()


# ---------- determinism ----------


def test_identical_config_gives_identical_bytes(tmp_path):
    args = ["survival", "--grid", "pow2:4:9", "--replicas", "1024", "--seed", "11"]
    out1 = tmp_path / "a" / "run"
    out2 = tmp_path / "b" / "run"
    # same relative out path inside the echoed config: rename afterwards
    rc1 = run(args + ["--out", str(out1)])
    rc2 = run(args + ["--out", str(out2)])
    assert rc1 == rc2 == EXIT_OK
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        a = (out1 / name).read_bytes()
        b = (out2 / name).read_bytes()
        if name == "config.ini":
            # differs only by the out path itself
            a = a.replace(str(out1).encode(), b"")
            b = b.replace(str(out2).encode(), b"")
        assert a == b, name


def test_verify_single_fast_criterion(tmp_path, capsys):
    out = tmp_path / "verify"
    rc = run(["verify", "--fast", "--criteria", "2", "--out", str(out)])
    assert rc == EXIT_OK
    printed = capsys.readouterr().out
    assert "[PASS] criterion 2" in printed
    acc = (out / "acceptance.csv").read_text().splitlines()
    assert acc[0].startswith("criterion,")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["failed"] == 0
    assert summary["passed"] == 1
    assert summary["criteria"]["2"]["passed"] is True
