"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``.
"""

import json
import time

import numpy as np
import pytest

from martingale_collapse import checks, cli, stochastic


def report(number, name, passed, detail, seconds=None):
    timing = "" if seconds is None else f" [{seconds:.2f} s]"
    return f"criterion {number:>2} {name}: {'PASS' if passed else 'FAIL'}{timing} | {detail}"


@pytest.fixture
def announce(capsys):
    def _announce(line):
        with capsys.disabled():
            print("\n" + line)
    return _announce


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def run_check(number, name, fn, announce, budget=None):
    (passed, detail), seconds = timed(fn)
    in_budget = budget is None or seconds < budget
    if budget is not None:
        detail += f"; runtime {seconds:.2f} s (budget {budget} s)"
    announce(report(number, name, passed and in_budget, detail, seconds))
    assert passed, detail
    assert in_budget, detail


def test_criterion_01_born_rule(announce):
    run_check(1, "born rule", checks.check_born_rule, announce, budget=10.0)


def test_criterion_02_game_length(announce):
    run_check(2, "game length", checks.check_game_length, announce)


def test_criterion_03_total_collapse_time(announce):
    run_check(3, "total collapse time", checks.check_total_time, announce)


def test_criterion_04_closed_form_vs_integrator(announce):
    run_check(4, "closed form vs integrator", checks.check_closed_form, announce)


def test_criterion_05_entropy_arrow(announce):
    run_check(5, "entropy arrow", checks.check_entropy_arrow, announce)


@pytest.mark.xfail(strict=True, reason="a finite sample mean of x(1-x) is not monotone; see decisions ledger")
def test_criterion_05_literal_sample_mean_every_run(announce):
    failures = {}
    for model in (stochastic.NoiseModel(stochastic.DOUBLE_OR_NOTHING), stochastic.NoiseModel(stochastic.FIXED_STAKE, 0.1)):
        bad = 0
        for seed in range(10):
            e = stochastic.simulate_ensemble(model, 0.3, 1.0, 10_000, seed).mean_entanglement
            bad += not np.all(np.diff(e)[e[:-1] > 0] < 0)
        failures[model.kind] = bad
    ok = not any(failures.values())
    announce(report(5, "entropy arrow, literal raw sample mean", ok,
                    f"runs with a play-over-play rise out of 10: {failures} (expected failure)"))
    assert ok


def test_criterion_06_determinant_identity(announce):
    run_check(6, "determinant identity", checks.check_det_identity, announce)


def test_criterion_07_gradient_consistency(announce):
    run_check(7, "expanded vs geometric equation", checks.check_gradient_consistency, announce)


def test_criterion_08_determinant_invariance(announce):
    run_check(8, "determinant invariance", checks.check_det_invariance, announce)


def test_criterion_09_kaon_bound(announce, tmp_path, capsys):
    out = tmp_path / "kaon.json"
    start = time.perf_counter()
    code = cli.main(["bounds", "--preset", "kaon", "--format", "json", "--output", str(out)])
    seconds = time.perf_counter() - start
    printed = capsys.readouterr().out
    bounds = json.loads(out.read_text())["results"]["bounds"]
    ratios = {b["dispersion_rule"]: b["ratio_8pi_epsilon_over_planck"] for b in bounds}
    ok = code == 0 and set(ratios) == {"sqrt2", "bare"} and all(0.5 <= r <= 5.0 for r in ratios.values())
    shown = all(repr(r) in printed for r in ratios.values())
    announce(report(9, "kaon bound", ok and shown and seconds < 1.0,
                    f"8 pi eps_min/E_p = {ratios}; printed exactly: {shown}", seconds))
    assert ok and shown
    assert seconds < 1.0


def test_criterion_10_b_meson_prediction(announce):
    run_check(10, "B-meson prediction", checks.check_b_prediction, announce, budget=1.0)


def test_criterion_11_energy_conservation(announce):
    run_check(11, "ensemble energy conservation", checks.check_energy_conservation, announce)


@pytest.mark.parametrize("noise", [["--noise", "double-or-nothing"], ["--noise", "fixed-stake", "--stake", "0.05"]])
def test_criterion_12_reproducibility(noise, announce, tmp_path):
    digests = {}
    for fmt in ("csv", "json"):
        files = []
        for k in range(2):
            path = tmp_path / f"run{k}.{fmt}"
            dump = tmp_path / f"dump{k}.csv"
            argv = ["ensemble", "--x0", "0.3", *noise, "--n", "20000", "--seed", "42", "--format", fmt,
                    "--output", str(path), "--dump", str(dump), "--dump-count", "3", "--no-timestamp", "--quiet"]
            assert cli.main(argv) == 0
            files.append((path.read_bytes(), dump.read_bytes()))
        digests[fmt] = files[0] == files[1]
    ok = all(digests.values())
    announce(report(12, f"reproducibility ({noise[1]})", ok, f"byte-identical reruns: {digests}"))
    assert ok
