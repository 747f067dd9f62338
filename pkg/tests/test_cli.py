"""End-to-end command line behavior: configs, exit codes, output streams."""

import subprocess
import sys

import numpy as np
import pytest

from burkholder import cli
from burkholder.errors import ConfigError
from burkholder.harness import random_vectors, save_sequence


def _cfg(tmp_path, text, name="cfg.txt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_config_types_comments_and_blanks(tmp_path):
    path = _cfg(tmp_path, "# full-line comment\n\n"
                          "n = 5\n"
                          "B=0.5  # trailing comment\n"
                          "family = matrix\n")
    cfg = cli.parse_config(path)
    assert cfg == {"n": 5, "B": 0.5, "family": "matrix"}
    assert isinstance(cfg["n"], int) and isinstance(cfg["B"], float)


def test_parse_config_rejects_malformed_lines(tmp_path):
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        cli.parse_config(_cfg(tmp_path, "just words\n"))
    with pytest.raises(ConfigError, match="unknown config key"):
        cli.parse_config(_cfg(tmp_path, "wibble = 3\n"))
    with pytest.raises(ConfigError, match="bad value for n"):
        cli.parse_config(_cfg(tmp_path, "n = abc\n"))
    with pytest.raises(ConfigError, match="cannot read config"):
        cli.parse_config(str(tmp_path / "missing.txt"))


def test_run_writes_csv_to_stdout_and_summary_to_stderr(tmp_path, capsys):
    path = _cfg(tmp_path, "family = adagrad\nd = 3\nn = 8\nseed = 3\n")
    assert cli.main(["run", "--config", path]) == 0
    out, err = capsys.readouterr()
    lines = out.splitlines()
    assert lines[0] == "round,loss,cum_loss,comp_loss,regret,bound,potential"
    assert len(lines) == 10  # header + round 0 + 8 rounds
    assert "family=adagrad strategy=linearized rounds=8 seed=3" in err
    assert "certificate V=" in err and "-> pass" in err
    assert cli.main(["run", "--config", path]) == 0
    again, _ = capsys.readouterr()
    assert again == out  # byte-identical replay


def test_run_with_out_file_prints_summary_on_stdout(tmp_path, capsys):
    path = _cfg(tmp_path, "family = adagrad\nd = 2\nn = 5\n")
    dest = tmp_path / "report.csv"
    assert cli.main(["run", "--config", path, "--out", str(dest)]) == 0
    out, err = capsys.readouterr()
    assert "certificate" in out and err == ""
    text = dest.read_text()
    assert text.startswith("round,loss")
    assert len(text.splitlines()) == 7


def test_run_randomized_reports_its_slack(tmp_path, capsys):
    path = _cfg(tmp_path, "family = adagrad\nd = 3\nn = 15\n"
                          "strategy = randomized\neps1 = 0.2\neps2 = 0.2\n")
    assert cli.main(["run", "--config", path]) == 0
    _, err = capsys.readouterr()
    assert "randomized_slack=" in err


def test_run_configuration_errors_exit_2(tmp_path, capsys):
    missing_n = _cfg(tmp_path, "family = adagrad\nd = 3\n", "a.txt")
    assert cli.main(["run", "--config", missing_n]) == 2
    squared_pf = _cfg(tmp_path, "family = param_free\nd = 3\nn = 5\n"
                                "loss = squared\n", "b.txt")
    assert cli.main(["run", "--config", squared_pf]) == 2
    undercharged = _cfg(tmp_path, "family = matrix\nd1 = 3\nd2 = 2\n"
                                  "eta = 0.5\nc = 0.5\nn = 5\n", "c.txt")
    assert cli.main(["run", "--config", undercharged]) == 2
    vaw_linearized = _cfg(tmp_path, "family = vaw\nd = 3\nn = 5\n"
                                    "loss = squared\nstrategy = linearized\n",
                          "d.txt")
    assert cli.main(["run", "--config", vaw_linearized]) == 2
    mismatch = _cfg(tmp_path, "family = param_free\nd = 3\nn = 5\n"
                              "sequence = matrix_completion\nd1 = 3\nd2 = 2\n",
                    "e.txt")
    assert cli.main(["run", "--config", mismatch]) == 2
    capsys.readouterr()


def test_run_from_a_data_csv(tmp_path, capsys):
    seq = random_vectors(20, 3, rng=np.random.default_rng(7))
    data = tmp_path / "seq.csv"
    save_sequence(seq, data)
    path = _cfg(tmp_path, f"family = adagrad\nd = 3\nn = 10\n"
                          f"data_csv = {data}\n")
    assert cli.main(["run", "--config", path]) == 0
    out, err = capsys.readouterr()
    assert "rounds=10" in err
    too_many = _cfg(tmp_path, f"family = adagrad\nd = 3\nn = 999\n"
                              f"data_csv = {data}\n", "big.txt")
    assert cli.main(["run", "--config", too_many]) == 2
    _, err = capsys.readouterr()
    assert "exceeds" in err


def test_verify_p1_covers_the_catalog(capsys):
    assert cli.main(["verify", "--suite", "p1"]) == 0
    out, _ = capsys.readouterr()
    lines = [l for l in out.splitlines() if l]
    assert len(lines) == 7
    assert all(l.startswith("pass ") and ".p1_start" in l for l in lines)
    names = {l.split()[1].split(".")[0] for l in lines}
    assert {"matrix", "vaw", "meta", "param_free_l2"} <= names


def test_verify_scopes_to_a_configured_family(tmp_path, capsys):
    path = _cfg(tmp_path, "family = adagrad\nd = 4\n")
    assert cli.main(["verify", "--config", path, "--suite", "p2",
                     "--trials", "50"]) == 0
    out, _ = capsys.readouterr()
    lines = [l for l in out.splitlines() if l]
    assert len(lines) == 1
    assert lines[0].startswith("pass adagrad.p2_dominates_bound")
    assert "checks=50" in lines[0]


def test_verify_negative_control_fails_loudly(capsys):
    assert cli.main(["verify", "--negative-control", "--suite", "p1",
                     "--trials", "50"]) == 1
    out, _ = capsys.readouterr()
    assert "FAIL matrix_undercharged.p1_start" in out
    assert "witness:" in out


def test_verify_negative_control_rejects_sign_sum_suites(capsys):
    assert cli.main(["verify", "--negative-control", "--suite",
                     "khintchine"]) == 2
    _, err = capsys.readouterr()
    assert "negative control" in err


def test_verify_necessity_and_its_negative_control(capsys):
    assert cli.main(["verify", "--suite", "necessity", "--seed", "1"]) == 0
    out, _ = capsys.readouterr()
    assert "pass matrix.necessity_lower_bound" in out
    assert cli.main(["verify", "--suite", "necessity", "--seed", "1",
                     "--negative-control"]) == 1
    out, _ = capsys.readouterr()
    assert "FAIL matrix.necessity_lower_bound" in out


def test_verify_out_file_mirrors_stdout(tmp_path, capsys):
    dest = tmp_path / "verify.txt"
    assert cli.main(["verify", "--suite", "p1", "--out", str(dest)]) == 0
    out, _ = capsys.readouterr()
    assert dest.read_text() == out


def test_compare_randomized_against_linearized(tmp_path, capsys):
    path = _cfg(tmp_path, "family = matrix\nd1 = 3\nd2 = 2\neta = 0.5\n"
                          "n = 12\nloss = absolute\neps1 = 0.3\neps2 = 0.3\n"
                          "seed = 5\n")
    assert cli.main(["compare", "--config", path, "--trials", "2"]) == 0
    out, _ = capsys.readouterr()
    assert "strategy=linearized mean_loss=" in out
    assert "strategy=randomized mean_expected_loss=" in out
    assert "gap=" in out and "slack=" in out
    assert "vs linearized -> pass" in out


def test_compare_falls_back_to_a_convex_baseline(tmp_path, capsys):
    path = _cfg(tmp_path, "family = matrix\nd1 = 3\nd2 = 2\neta = 0.5\n"
                          "n = 10\nloss = absolute\neps1 = 0.3\neps2 = 0.3\n")
    assert cli.main(["compare", "--config", path, "--trials", "2",
                     "--strategies", "randomized,convex"]) == 0
    out, _ = capsys.readouterr()
    assert "vs convex" in out


def test_compare_rejects_unknown_strategies(tmp_path, capsys):
    path = _cfg(tmp_path, "family = adagrad\nd = 2\nn = 5\n")
    assert cli.main(["compare", "--config", path, "--strategies",
                     "sorcery"]) == 2
    _, err = capsys.readouterr()
    assert "unknown strategy" in err


def test_no_arguments_is_a_usage_error(capsys):
    assert cli.main([]) == 2
    capsys.readouterr()


def test_module_entry_point_runs_in_a_subprocess():
    proc = subprocess.run([sys.executable, "-m", "burkholder.cli", "verify",
                           "--suite", "p1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "pass" in proc.stdout
