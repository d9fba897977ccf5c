import csv
import json
import subprocess
import sys

import pytest

from martingale_collapse import cli, stochastic
from martingale_collapse.cli import main, parse_config, run_command

ENSEMBLE = ["ensemble", "--x0", "0.3", "--noise", "double-or-nothing", "--n", "2000", "--seed", "42"]



# -- parsing -----------------------------------------------------------------

def test_parse_ensemble_example():
    cfg = parse_config(["ensemble", "--x0", "0.3", "--noise", "double-or-nothing", "--n", "100000", "--seed", "42"])
    assert (cfg.command, cfg.x0, cfg.noise, cfg.n, cfg.seed) == ("ensemble", 0.3, "double-or-nothing", 100000, 42)


def test_parse_bounds_example():
    cfg = parse_config(["bounds", "--preset", "kaon"])
    assert cfg.command == "bounds" and cfg.preset == "kaon" and cfg.rule == "both"


@pytest.mark.parametrize(
    "argv, code",
    [
        (["ensemble", "--x0", "1.5", "--noise", "double-or-nothing"], cli.EXIT_INVALID),
        (["ensemble", "--x0", "0.3"], cli.EXIT_MISSING),
        (["ensemble", "--noise", "double-or-nothing"], cli.EXIT_MISSING),
        (["ensemble", "--x0", "abc", "--noise", "double-or-nothing"], cli.EXIT_TYPE),
        (["ensemble", "--x0", "0.3", "--noise", "double-or-nothing", "--n", "1.5"], cli.EXIT_TYPE),
        (["ensemble", "--x0", "0.3", "--noise", "fixed-stake"], cli.EXIT_MISSING),
        (["ensemble", "--x0", "0.3", "--noise", "fixed-stake", "--stake", "0.7"], cli.EXIT_INVALID),
        (["ensemble", "--x0", "0.3", "--noise", "coin"], cli.EXIT_INVALID),
        (["bounds"], cli.EXIT_MISSING),
        (["bounds", "--preset", "custom", "--tau", "1e-8"], cli.EXIT_MISSING),
        (["evolve", "--x0", "0.5", "--sign", "2"], cli.EXIT_INVALID),
        (["evolve", "--x0", "0.5", "--E1", "0"], cli.EXIT_INVALID),
        (["ensemble", "--bogus", "1"], cli.EXIT_USAGE),
        ([], cli.EXIT_USAGE),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    err = capsys.readouterr().err
    assert err


def test_error_message_names_the_field(capsys):
    main(["ensemble", "--x0", "1.5", "--noise", "double-or-nothing"])
    assert "x0" in capsys.readouterr().err
    main(["ensemble", "--x0", "0.3", "--noise", "fixed-stake"])
    assert "stake" in capsys.readouterr().err


def test_exit_codes_are_distinct():
    codes = [cli.EXIT_USAGE, cli.EXIT_MISSING, cli.EXIT_TYPE, cli.EXIT_INVALID, cli.EXIT_CONFIG_UNREADABLE,
             cli.EXIT_NUMERICAL, cli.EXIT_IO, cli.EXIT_VERIFY_FAILED]
    assert len(set(codes)) == len(codes) and cli.EXIT_OK not in codes


def test_config_file_precedence(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# ensemble settings\nx0 = 0.25\nnoise = fixed-stake\nstake = 0.05\ndump-count = 3\nn = 500  # small\n")
    cfg = parse_config(["ensemble", "--config", str(conf), "--n", "700"])
    assert cfg.x0 == 0.25 and cfg.noise == "fixed-stake" and cfg.stake == 0.05
    assert cfg.dump_count == 3
    assert cfg.n == 700  # flag wins


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.conf"
    bad.write_text("x0 = 0.3\ncolour = blue\n")
    assert main(["ensemble", "--config", str(bad)]) == cli.EXIT_INVALID
    assert "colour" in capsys.readouterr().err
    assert main(["ensemble", "--config", str(tmp_path / "missing.conf")]) == cli.EXIT_CONFIG_UNREADABLE
    typed = tmp_path / "typed.conf"
    typed.write_text("x0 = 0.3\nnoise = double-or-nothing\nseed = lots\n")
    assert main(["ensemble", "--config", str(typed)]) == cli.EXIT_TYPE


def test_help_documents_every_flag():
    parser = cli.build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, p in sub.choices.items():
        for action in p._actions:
            if action.option_strings and action.dest != "help":
                assert action.help, f"{name} {action.option_strings} has no help"
    assert "exit codes" in parser.format_help()


# -- running -----------------------------------------------------------------

def test_evolve_table():
    rep = run_command(parse_config(["evolve", "--x0", "0.5", "--t-max", "1", "--samples", "11"]))
    row = rep.rows[-1]
    cols = dict(zip(rep.columns, row))
    assert cols["t_over_tau_c"] == 1.0
    assert cols["x_closed_form"] == pytest.approx(0.26894142136999512, rel=1e-14)
    assert cols["x_numeric"] == pytest.approx(0.268941421369995, abs=1e-10)
    assert cols["t_s"] == pytest.approx(rep.results["collapse"]["tau_c_s"])


def test_evolve_negative_sign_grows():
    rep = run_command(parse_config(["evolve", "--x0", "0.3", "--t-max", "2", "--sign", "-1"]))
    x = [r[rep.columns.index("x_numeric")] for r in rep.rows]
    assert all(b > a for a, b in zip(x, x[1:]))


def test_bounds_report():
    rep = run_command(parse_config(["bounds", "--preset", "b-meson"]))
    ratios = {r[2]: r[rep.columns.index("ratio_8pi_epsilon_over_planck")] for r in rep.rows if r[0] == "bound"}
    assert ratios["sqrt2"] == pytest.approx(3.1297835187305547, rel=1e-12)
    assert ratios["bare"] == pytest.approx(1.5648917593652771, rel=1e-12)
    gammas = [r[rep.columns.index("gamma")] for r in rep.rows if r[0] == "prediction"]
    assert gammas == pytest.approx([2.5e-5, 2.5e-5], rel=1e-12)


def test_bounds_custom():
    rep = run_command(parse_config(["bounds", "--preset", "custom", "--tau", "5e-8", "--delta", "0.2",
                                    "--gamma", "2e-3", "--gamma-c", "0.5"]))
    assert rep.results["bounds"][0]["tau_c_min_s"] == pytest.approx(1.25e-5)


def test_ensemble_csv_schema(tmp_path):
    out = tmp_path / "e.csv"
    assert main(ENSEMBLE + ["--output", str(out), "--quiet"]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][:5] == ["n", "frac_to_one", "stderr", "mean_plays", "mean_time_over_tau_c"]
    assert len(rows) == 2
    rec = dict(zip(rows[0], rows[1]))
    assert rec["n"] == "2000" and rec["master_seed"] == "42"
    assert rec["rng_algorithm"] == "splitmix64-counter/top-bit-coin/v1"
    assert 0.2 < float(rec["frac_to_one"]) < 0.4


def test_ensemble_json_report(tmp_path):
    out = tmp_path / "e.json"
    assert main(ENSEMBLE + ["--format", "json", "--output", str(out), "--quiet"]) == 0
    doc = json.loads(out.read_text())
    assert list(doc)[:6] == ["command", "version", "config", "constants", "rng_algorithm", "results"]
    assert doc["config"]["x0"] == 0.3 and doc["config"]["seed"] == 42
    assert doc["constants"]["hbar_gev_s"] == 6.582119e-25
    assert "timestamp" in doc
    assert doc["results"]["exact_mean_plays"] == 2.0


def test_json_nan_for_single_trajectory(tmp_path):
    out = tmp_path / "one.json"
    assert main(["ensemble", "--x0", "0.3", "--noise", "double-or-nothing", "--n", "1", "--format", "json",
                 "--output", str(out), "--quiet"]) == 0
    res = json.loads(out.read_text())["results"]
    assert res["stderr_defined"] is False and res["frac_to_one_stderr"] is None


def test_byte_identical_reruns(tmp_path):
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        for path, workers in ((a, "1"), (b, "4")):
            assert main(ENSEMBLE + ["--format", fmt, "--output", str(path), "--no-timestamp", "--quiet",
                                    "--workers", workers]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_echoed_config_reproduces_results(tmp_path):
    first = tmp_path / "first.json"
    main(ENSEMBLE + ["--noise", "fixed-stake", "--stake", "0.1", "--format", "json", "--output", str(first), "--quiet"])
    doc = json.loads(first.read_text())
    conf = tmp_path / "echo.conf"
    conf.write_text("".join(f"{k} = {v}\n" for k, v in doc["config"].items() if k != "command" and v is not None))
    second = tmp_path / "second.json"
    assert main([doc["command"], "--config", str(conf), "--output", str(second), "--quiet"]) == 0
    assert json.loads(second.read_text())["results"] == doc["results"]


def test_trajectory_dump(tmp_path):
    dump = tmp_path / "traj.csv"
    assert main(ENSEMBLE + ["--dump", str(dump), "--dump-count", "2", "--quiet"]) == 0
    rows = list(csv.reader(dump.open()))
    assert rows[0] == ["play", "time_s", "x", "sign"]
    body = rows[1:]
    assert body[0][0] == "0" and float(body[0][2]) == 0.3
    assert sum(r[0] == "0" for r in body) == 2
    assert all(r[3] in ("1", "-1", "0") for r in body)


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["bounds", "--preset", "kaon", "--quiet"]) == 0
    assert (tmp_path / "bounds.csv").exists()
    assert main(["bounds", "--preset", "kaon", "--quiet", "--output", "k.json", "--format", "json"]) == 0
    assert json.loads((tmp_path / "k.json").read_text())["command"] == "bounds"


def test_io_failure_exit_code(tmp_path, capsys):
    target = tmp_path / "no" / "such" / "dir" / "out.csv"
    assert main(["bounds", "--preset", "kaon", "--output", str(target)]) == cli.EXIT_IO
    captured = capsys.readouterr()
    assert str(target) in captured.err
    assert "kaon" not in captured.out


def test_numerical_failure_exit_code(capsys, monkeypatch):
    # a 1e-2 stake needs ~2500 plays; shrink the cap so the walk runs away quickly
    monkeypatch.setattr(stochastic, "MAX_PLAYS_FIXED_STAKE", 100)
    code = main(["ensemble", "--x0", "0.5", "--noise", "fixed-stake", "--stake", "1e-2", "--n", "8"])
    assert code == cli.EXIT_NUMERICAL


def test_stdout_summary(capsys):
    assert main(["bounds", "--preset", "kaon"]) == 0
    out = capsys.readouterr().out
    assert "8 pi eps_min/E_p = 3.1297835187305547" in out


def test_verify_command(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--format", "json", "--output", str(out), "--quiet"]) == 0
    res = json.loads(out.read_text())["results"]
    assert res["all_passed"] and res["total"] == 12


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "martingale_collapse", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "ensemble" in proc.stdout
