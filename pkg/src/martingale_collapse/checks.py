"""Self-test suite run by ``martingale-collapse verify``.

Each check reproduces one of the model's claimed properties at full size
and returns a :class:`CheckResult`; nothing here raises on failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import dynamics, phenomenology, qstate, stochastic
from .qstate import PopulationState

N_BIG = 100_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _don() -> stochastic.NoiseModel:
    return stochastic.NoiseModel(stochastic.DOUBLE_OR_NOTHING)


def check_born_rule(seed: int = 20240101) -> tuple[bool, str]:
    parts, ok = [], True
    for x0 in (0.1, 0.3, 0.5, 0.7):
        s = stochastic.ensemble_run(_don(), x0, 1.0, N_BIG, seed)
        tol = 5 * math.sqrt(x0 * (1 - x0) / N_BIG)
        ok &= abs(s.frac_to_one - x0) < tol
        parts.append(f"x0={x0}: {s.frac_to_one:.5f} (tol {tol:.4f})")
    return ok, "; ".join(parts)


def check_game_length(seed: int = 7) -> tuple[bool, str]:
    half = stochastic.simulate_ensemble(_don(), 0.5, 1.0, 10_000, seed)
    s3 = stochastic.ensemble_run(_don(), 0.3, 1.0, N_BIG, seed)
    s25 = stochastic.ensemble_run(_don(), 0.25, 1.0, N_BIG, seed)
    ok = bool(np.all(half.n_plays == 1))
    ok &= abs(s3.mean_plays - 2.0) <= 0.05
    ok &= abs(s25.mean_plays - 1.5) <= 0.05
    exact = float(stochastic.expected_plays_double_or_nothing(0.25))
    return ok, f"x0=0.5 all one play={bool(np.all(half.n_plays == 1))}; x0=0.3: {s3.mean_plays:.4f}; x0=0.25: {s25.mean_plays:.4f} (exact {exact})"


def check_total_time(seed: int = 11) -> tuple[bool, str]:
    half = stochastic.run_double_or_nothing(0.5, 1.0, seed)
    s3 = stochastic.ensemble_run(_don(), 0.3, 1.0, N_BIG, seed)
    ok = half.total_time == 2.0 and 1.5 <= s3.mean_time_over_tau_c <= 3.0
    return ok, f"x0=0.5: {half.total_time} tau_c; x0=0.3: {s3.mean_time_over_tau_c:.4f} tau_c"


def check_closed_form() -> tuple[bool, str]:
    t = np.linspace(0.0, 10.0, 1000)
    x, y = dynamics.integrate_population(PopulationState(0.5, 0.5), 1.0, 1, t)
    dev = float(np.max(np.abs(x - dynamics.closed_form_x(0.5, t, 1.0))))
    drift = float(np.max(np.abs(x + y - 1.0)))
    return dev < 1e-8 and drift < 1e-10, f"max |x - closed form| = {dev:.3e}; max |x + y - 1| = {drift:.3e}"


def check_entropy_arrow(seed: int = 3) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, 1000)
    d = rng.uniform(0, 1, 1000) * np.minimum(x, 1 - x)
    worst = max(abs(stochastic.avg_entanglement_change(a, b) + b * b) for a, b in zip(x, d))
    ok = worst < 1e-12
    raw_monotone = 0
    for k, (model, x0) in enumerate([(_don(), 0.3), (_don(), 0.1), (stochastic.NoiseModel("fixed-stake", 0.1), 0.3)]):
        rec = stochastic.simulate_ensemble(model, x0, 1.0, 10_000, seed + k)
        ok &= bool(np.all(rec.branch_mean_entanglement < rec.mean_entanglement[:-1]))
        exact = stochastic.exact_mean_entanglement(model, x0, 30)
        ok &= bool(np.all(np.diff(exact) < 0))
        e = rec.mean_entanglement
        raw_monotone += bool(np.all(np.diff(e)[e[:-1] > 0] < 0))
    return ok, (
        f"max |change + delta^2| = {worst:.2e}; branch-averaged ensemble mean strictly decreasing in every run; "
        f"raw sample mean monotone in {raw_monotone}/3 runs (not asserted)"
    )


def check_det_identity(seed: int = 5) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        mag = rng.uniform(0, 10, (2, 2))
        a = mag * np.exp(2j * np.pi * rng.uniform(size=(2, 2)))
        nu = complex(*rng.uniform(-1, 1, 2))
        worst = max(worst, dynamics.det_identity_residual(a, nu))
    return worst < 1e-12, f"max residual = {worst:.2e}"


def check_gradient_consistency(seed: int = 8) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        psi = qstate.random_psi(rng)
        H = dynamics.Hamiltonian2(rng.uniform(0.1, 2.0))
        eta = rng.uniform(0.05, 1.0)
        sign = int(rng.choice([1, -1]))
        a = dynamics.nonlinear_rhs(psi, H, eta, sign)
        g = dynamics.geometric_rhs(psi, H, eta, sign, step=1e-5)
        worst = max(worst, float(np.linalg.norm(a - g) / np.linalg.norm(a)))
    return worst < 1e-6, f"max relative deviation = {worst:.2e}"


def check_det_invariance(seed: int = 9) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(1000):
        psi = qstate.random_psi(rng)
        u = unitary_group.rvs(2, random_state=rng)
        v = unitary_group.rvs(2, random_state=rng)
        worst = max(worst, abs(qstate.entanglement_det(qstate.transform(psi, u, v)) - qstate.entanglement_det(psi)))
    return worst < 1e-12, f"max |E(U psi V^+) - E(psi)| = {worst:.2e}"


def check_kaon_bound() -> tuple[bool, str]:
    parts, ok = [], True
    for rule in phenomenology.DISPERSION_RULES:
        r = phenomenology.kaon_bound(dispersion_rule=rule)
        ok &= 0.5 <= r.planck_ratio_8pi <= 5.0
        parts.append(f"{rule}: 8 pi eps_min/E_p = {r.planck_ratio_8pi!r}")
    return ok, "; ".join(parts)


def check_b_prediction() -> tuple[bool, str]:
    p = phenomenology.b_meson_prediction()
    return 0.5e-5 <= p.gamma <= 5e-5, f"gamma_B = {p.gamma!r}"


def check_energy_conservation(seed: int = 13) -> tuple[bool, str]:
    parts, ok = [], True
    for model in (_don(), stochastic.NoiseModel("fixed-stake", 0.1)):
        rec = stochastic.simulate_ensemble(model, 0.3, 1.0, N_BIG, seed)
        mean = float(np.mean(rec.x_final))
        se = float(np.std(rec.x_final, ddof=1) / math.sqrt(rec.n))
        ok &= abs(mean - 0.3) < 5 * se
        parts.append(f"{model.kind}: mean x_final = {mean:.5f} (5 se = {5 * se:.4f})")
    return ok, "; ".join(parts)


def check_reproducibility() -> tuple[bool, str]:
    import tempfile
    from pathlib import Path

    from . import cli

    with tempfile.TemporaryDirectory() as tmp:
        digests = []
        for k in range(2):
            for fmt in ("csv", "json"):
                path = Path(tmp) / f"run{k}.{fmt}"
                cfg = cli.parse_config(["ensemble", "--x0", "0.3", "--noise", "double-or-nothing", "--n", "20000", "--seed", "42",
                                        "--format", fmt, "--output", str(path), "--no-timestamp", "--quiet"])
                cli.emit_report(cli.run_command(cfg), cfg)
                digests.append(path.read_bytes())
    ok = digests[0] == digests[2] and digests[1] == digests[3]
    return ok, "csv and json outputs byte-identical across two runs" if ok else "outputs differ"


CHECKS = [
    ("born_rule", check_born_rule),
    ("game_length", check_game_length),
    ("total_collapse_time", check_total_time),
    ("closed_form_vs_integrator", check_closed_form),
    ("entropy_arrow", check_entropy_arrow),
    ("determinant_identity", check_det_identity),
    ("gradient_consistency", check_gradient_consistency),
    ("determinant_invariance", check_det_invariance),
    ("kaon_bound", check_kaon_bound),
    ("b_meson_prediction", check_b_prediction),
    ("ensemble_energy_conservation", check_energy_conservation),
    ("reproducibility", check_reproducibility),
]


def run_all() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
