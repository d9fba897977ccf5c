"""Command-line interface.

Usage::

    martingale-collapse evolve --x0 0.5 --t-max 1
    martingale-collapse ensemble --x0 0.3 --noise double-or-nothing --n 100000 --seed 42
    martingale-collapse bounds --preset kaon
    martingale-collapse verify

Settings are resolved as built-in defaults < ``--config FILE`` < command
line flags. The config file holds one ``key = value`` pair per line (keys
are flag names without the leading dashes; ``-`` and ``_`` are
interchangeable; ``#`` starts a comment). Unknown keys are rejected.

If ``MARTINGALE_COLLAPSE_OUTPUT_DIR`` is set, relative output paths are
resolved against it and a report file is written even without ``--output``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, checks, dynamics, phenomenology, qstate, stochastic
from .qstate import PopulationState

OUTPUT_DIR_ENV = "MARTINGALE_COLLAPSE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2  # argparse: unknown flag, missing subcommand
EXIT_MISSING = 3
EXIT_TYPE = 4
EXIT_INVALID = 5
EXIT_CONFIG_UNREADABLE = 6
EXIT_NUMERICAL = 7
EXIT_IO = 8
EXIT_VERIFY_FAILED = 9

COMMANDS = ("evolve", "ensemble", "bounds", "verify")

EXIT_CODES_HELP = f"""exit codes:
  {EXIT_OK}  success
  {EXIT_USAGE}  usage error (unknown flag, no command)
  {EXIT_MISSING}  missing required setting
  {EXIT_TYPE}  setting has the wrong type
  {EXIT_INVALID}  setting out of range, unknown config key or bad combination
  {EXIT_CONFIG_UNREADABLE}  config file unreadable
  {EXIT_NUMERICAL}  numerical failure (runaway walk, integrator error)
  {EXIT_IO}  output could not be written
  {EXIT_VERIFY_FAILED}  verify found a failing property
"""


class ConfigError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class RunConfig:
    command: str
    # state and collapse scale
    x0: float | None = None
    epsilon: float = phenomenology.PLANCK_ENERGY_GEV  # GeV
    E1: float = 0.2  # GeV
    E2: float = 0.0  # GeV
    dispersion_rule: str = "linear"
    # evolve
    t_max: float = 10.0  # units of tau_c
    samples: int = 101
    sign: int = 1
    # ensemble
    noise: str | None = None
    stake: float | None = None
    n: int = 10_000
    seed: int = 0
    workers: int = 1
    dump: str | None = None
    dump_count: int = 1
    # bounds
    preset: str | None = None
    rule: str = "both"
    tau: float | None = None  # s
    delta: float | None = None  # GeV
    gamma: float | None = None
    gamma_c: float | None = None
    planck_energy: float = phenomenology.PLANCK_ENERGY_GEV  # GeV
    # output
    output: str | None = None
    format: str = "csv"
    timestamp: bool = True
    quiet: bool = False

    @property
    def collapse_parameters(self) -> dynamics.CollapseParameters:
        return dynamics.CollapseParameters(self.epsilon, self.E1, self.E2, self.dispersion_rule)

    @property
    def noise_model(self) -> stochastic.NoiseModel:
        return stochastic.NoiseModel(self.noise, self.stake if self.noise == stochastic.FIXED_STAKE else None, self.seed)

    @property
    def constants(self) -> phenomenology.PhysicalConstants:
        return phenomenology.PhysicalConstants(planck_energy=self.planck_energy)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_SETTINGS = [f.name for f in fields(RunConfig) if f.name != "command"]
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}

# keys that only matter for some commands are still accepted everywhere
_CHOICES = {
    "dispersion_rule": dynamics.DISPERSION_RULES,
    "noise": stochastic.NOISE_KINDS,
    "preset": phenomenology.PRESETS,
    "rule": ("both", *phenomenology.DISPERSION_RULES),
    "format": ("csv", "json"),
}


def _convert(key: str, raw):
    if not isinstance(raw, str):
        return raw
    kind = _FIELD_TYPES[key]
    text = raw.strip()
    try:
        if "bool" in kind:
            low = text.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError
        if "int" in kind:
            return int(text, 0)
        if "float" in kind:
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.split(' ')[0]}", EXIT_TYPE) from None
    return text


def read_config_file(path: str) -> dict:
    """Parse a ``key = value`` config file into a dict of raw strings."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}", EXIT_CONFIG_UNREADABLE) from None
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}", EXIT_INVALID)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}", EXIT_INVALID)
        values[key] = value
    return values


def _require(cfg: RunConfig, *names: str):
    for name in names:
        if getattr(cfg, name) is None:
            raise ConfigError(f"{cfg.command}: missing required setting {name!r} (--{name.replace('_', '-')})", EXIT_MISSING)


def _invalid(message: str):
    raise ConfigError(message, EXIT_INVALID)


def validate(cfg: RunConfig) -> RunConfig:
    """Check the settings ``cfg.command`` depends on; raise :class:`ConfigError`."""
    for key, allowed in _CHOICES.items():
        value = getattr(cfg, key)
        if value is not None and value not in allowed:
            _invalid(f"{key}: {value!r} is not one of {', '.join(allowed)}")
    if cfg.command in ("evolve", "ensemble"):
        _require(cfg, "x0")
        if not 0.0 <= cfg.x0 <= 1.0 or (cfg.command == "ensemble" and cfg.x0 in (0.0, 1.0)):
            _invalid(f"x0: {cfg.x0!r} outside the allowed range ({'(0, 1)' if cfg.command == 'ensemble' else '[0, 1]'})")
        if not cfg.epsilon > 0:
            _invalid(f"epsilon: must be positive, got {cfg.epsilon!r}")
        if cfg.E1 < 0 or cfg.E2 < 0 or cfg.E1 + cfg.E2 == 0:
            _invalid(f"E1, E2: need non-negative energies with E1 + E2 > 0, got {cfg.E1!r}, {cfg.E2!r}")
    if cfg.command == "evolve":
        if not cfg.t_max > 0:
            _invalid(f"t_max: must be positive, got {cfg.t_max!r}")
        if cfg.samples < 2:
            _invalid(f"samples: need at least 2, got {cfg.samples!r}")
        if cfg.sign not in (1, -1):
            _invalid(f"sign: must be 1 or -1, got {cfg.sign!r}")
    if cfg.command == "ensemble":
        _require(cfg, "noise")
        if cfg.noise == stochastic.FIXED_STAKE:
            _require(cfg, "stake")
            if not 0.0 < cfg.stake <= 0.5:
                _invalid(f"stake: must lie in (0, 1/2], got {cfg.stake!r}")
        if cfg.n < 1:
            _invalid(f"n: must be at least 1, got {cfg.n!r}")
        if not 0 <= cfg.seed < 2**64:
            _invalid(f"seed: must fit in 64 unsigned bits, got {cfg.seed!r}")
        if cfg.workers < 1 or cfg.dump_count < 1:
            _invalid("workers and dump_count must be at least 1")
    if cfg.command == "bounds":
        _require(cfg, "preset")
        if cfg.preset == "custom":
            _require(cfg, "tau", "delta", "gamma", "gamma_c")
            if not (cfg.tau > 0 and cfg.delta > 0 and 0 <= cfg.gamma <= 1 and 0 < cfg.gamma_c <= 1):
                _invalid("custom bound: need tau > 0, delta > 0, 0 <= gamma <= 1, 0 < gamma_c <= 1")
        if not cfg.planck_energy > 0:
            _invalid(f"planck_energy: must be positive, got {cfg.planck_energy!r}")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="martingale-collapse",
        description="Stochastic nonlinear collapse of two-level entangled states.",
        epilog=EXIT_CODES_HELP + f"\nenvironment:\n  {OUTPUT_DIR_ENV}  default directory for report files",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p):
        p.add_argument("--config", metavar="FILE", help="key = value settings file (flags take precedence)")
        p.add_argument("--output", "-o", help="report file path (relative paths honour $%s)" % OUTPUT_DIR_ENV)
        p.add_argument("--format", help="report format: csv (default) or json")
        p.add_argument("--no-timestamp", dest="timestamp", action="store_const", const="false",
                       help="omit the generation timestamp so reruns are byte-identical")
        p.add_argument("--quiet", action="store_const", const="true", help="no summary on stdout")

    def physics(p):
        p.add_argument("--x0", help="initial population |alpha|^2")
        p.add_argument("--epsilon", help="collapse energy scale in GeV (default 1.22e19)")
        p.add_argument("--E1", help="level energy of particle 1 in GeV (default 0.2)")
        p.add_argument("--E2", help="level energy of particle 2 in GeV (default 0)")
        p.add_argument("--dispersion-rule", help="how dispersions add: linear (default) or quadrature")

    ev = sub.add_parser("evolve", help="deterministic population decay: closed form and RK4 side by side")
    physics(ev)
    ev.add_argument("--t-max", help="end time in units of tau_c (default 10)")
    ev.add_argument("--samples", help="number of sample times, including 0 and t-max (default 101)")
    ev.add_argument("--sign", help="+1: x decays (default), -1: x grows")
    common(ev)

    en = sub.add_parser("ensemble", help="Monte Carlo ensemble of collapse games")
    physics(en)
    en.add_argument("--noise", help="fixed-stake or double-or-nothing")
    en.add_argument("--stake", help="stake per play for fixed-stake noise, in (0, 1/2]")
    en.add_argument("--n", help="number of trajectories (default 10000)")
    en.add_argument("--seed", help="64-bit master seed (default 0)")
    en.add_argument("--workers", help="worker threads; results do not depend on it (default 1)")
    en.add_argument("--dump", metavar="FILE", help="write per-play records play,time_s,x,sign of the first trajectories")
    en.add_argument("--dump-count", help="how many trajectories to dump (default 1)")
    common(en)

    bo = sub.add_parser("bounds", help="CP-violation lower bound on epsilon and the B-meson prediction")
    bo.add_argument("--preset", help="kaon, b-meson or custom")
    bo.add_argument("--rule", help="dispersion from quark splitting: sqrt2, bare or both (default)")
    bo.add_argument("--tau", help="custom: lifetime in s")
    bo.add_argument("--delta", help="custom: dispersion in GeV")
    bo.add_argument("--gamma", help="custom: observed branching ratio")
    bo.add_argument("--gamma-c", help="custom: branching ratio after collapse")
    bo.add_argument("--planck-energy", help="Planck energy in GeV (default 1.22e19)")
    common(bo)

    ve = sub.add_parser("verify", help="run the full property suite and report pass/fail per property")
    common(ve)
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    """Turn command line arguments (plus an optional config file) into a validated :class:`RunConfig`.

    Raises :class:`ConfigError` for bad settings and ``SystemExit`` for
    usage errors caught by argparse.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    merged = read_config_file(args.config) if args.config else {}
    merged.update(flags)
    values = {key: _convert(key, raw) for key, raw in merged.items()}
    return validate(RunConfig(command=args.command, **values))


# -- running -----------------------------------------------------------------


@dataclass
class Report:
    command: str
    config: dict
    constants: dict
    results: dict
    columns: list[str]
    rows: list[list]
    summary: list[str] = field(default_factory=list)
    rng_algorithm: str | None = None
    version: str = __version__
    timestamp: str | None = None

    def as_dict(self) -> dict:
        out = {
            "command": self.command,
            "version": self.version,
            "config": self.config,
            "constants": self.constants,
            "rng_algorithm": self.rng_algorithm,
            "results": self.results,
            "table": {"columns": self.columns, "rows": self.rows},
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out


def _physics_echo(cfg: RunConfig) -> dict:
    p = cfg.collapse_parameters
    return {
        "epsilon_gev": cfg.epsilon,
        "E1_gev": cfg.E1,
        "E2_gev": cfg.E2,
        "dispersion_rule": cfg.dispersion_rule,
        "delta_gev": p.delta,
        "tau_c_s": p.tau_c,
        "eta": p.eta,
    }


def _run_evolve(cfg: RunConfig) -> Report:
    params = cfg.collapse_parameters
    tau_c = params.tau_c
    t = np.linspace(0.0, cfg.t_max, cfg.samples)
    x_num, y_num = dynamics.integrate_population(PopulationState.from_x(cfg.x0), 1.0, cfg.sign, t)
    x_exact = dynamics.closed_form_x(cfg.x0, cfg.sign * t, 1.0)
    x_clip = np.clip(x_num, 0.0, 1.0)
    entropy = qstate.entanglement_entropy(x_clip)
    columns = ["t_over_tau_c", "t_s", "x_closed_form", "x_numeric", "y_numeric", "abs_deviation",
               "entanglement_det", "entanglement_entropy", "energy_gev"]
    rows = [
        [float(t[i]), float(t[i] * tau_c), float(x_exact[i]), float(x_num[i]), float(y_num[i]),
         float(abs(x_num[i] - x_exact[i])), float(x_num[i] * y_num[i]), float(entropy[i]),
         float(cfg.E1 * (x_num[i] - y_num[i]))]
        for i in range(t.size)
    ]
    max_dev = float(np.max(np.abs(x_num - x_exact)))
    results = {
        "collapse": _physics_echo(cfg),
        "max_abs_deviation": max_dev,
        "x_at_t_max": float(x_num[-1]),
    }
    summary = [
        f"tau_c = {tau_c:.6g} s (epsilon {cfg.epsilon:.4g} GeV, delta {params.delta:.4g} GeV)",
        f"x(t_max = {cfg.t_max:g} tau_c) = {x_num[-1]:.9f} numeric, {x_exact[-1]:.9f} closed form",
        f"max |numeric - closed form| = {max_dev:.3e}",
    ]
    return Report("evolve", {}, {}, results, columns, rows, summary)


def _dump_trajectories(cfg: RunConfig, tau_c: float):
    path = _resolve_path(cfg.dump)
    model = cfg.noise_model
    with _open_output(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["play", "time_s", "x", "sign"])
        for i in range(min(cfg.dump_count, cfg.n)):
            traj = stochastic.run_trajectory(model, cfg.x0, tau_c, stochastic.trajectory_seed(cfg.seed, i))
            for play, time_s, x, sign in traj.rows():
                writer.writerow([play, repr(time_s), repr(x), sign])


def _run_ensemble(cfg: RunConfig) -> Report:
    params = cfg.collapse_parameters
    tau_c = params.tau_c
    model = cfg.noise_model
    s = stochastic.ensemble_run(model, cfg.x0, tau_c, cfg.n, cfg.seed, energy=cfg.E1, workers=cfg.workers)
    if cfg.dump:
        _dump_trajectories(cfg, tau_c)
    results = {
        "collapse": _physics_echo(cfg),
        "n_trajectories": s.n_trajectories,
        "stderr_defined": s.stderr_defined,
        "frac_to_one": s.frac_to_one,
        "frac_to_one_stderr": s.frac_to_one_stderr,
        "mean_plays": s.mean_plays,
        "mean_plays_stderr": s.mean_plays_stderr,
        "mean_total_time_s": s.mean_total_time,
        "mean_total_time_stderr_s": s.mean_total_time_stderr,
        "mean_time_over_tau_c": s.mean_time_over_tau_c,
        "mean_time_over_tau_c_stderr": s.mean_time_over_tau_c_stderr,
        "mean_energy_drift_gev": s.mean_energy_drift,
        "mean_energy_drift_stderr_gev": s.mean_energy_drift_stderr,
        "uncertainty_ratio": s.uncertainty_ratio,
    }
    if model.kind == stochastic.DOUBLE_OR_NOTHING:
        results["exact_mean_plays"] = float(stochastic.expected_plays_double_or_nothing(cfg.x0))
        results["exact_mean_time_over_tau_c"] = stochastic.expected_time_double_or_nothing(cfg.x0)
    columns = ["n", "frac_to_one", "stderr", "mean_plays", "mean_time_over_tau_c",
               "mean_plays_stderr", "mean_time_over_tau_c_stderr", "mean_total_time_s",
               "mean_energy_drift_gev", "mean_energy_drift_stderr_gev", "uncertainty_ratio",
               "x0", "noise", "stake", "tau_c_s", "epsilon_gev", "E1_gev", "E2_gev", "dispersion_rule",
               "master_seed", "rng_algorithm"]
    rows = [[s.n_trajectories, s.frac_to_one, s.frac_to_one_stderr, s.mean_plays, s.mean_time_over_tau_c,
             s.mean_plays_stderr, s.mean_time_over_tau_c_stderr, s.mean_total_time,
             s.mean_energy_drift, s.mean_energy_drift_stderr, s.uncertainty_ratio,
             cfg.x0, model.kind, model.stake, tau_c, cfg.epsilon, cfg.E1, cfg.E2, cfg.dispersion_rule,
             cfg.seed, s.rng_algorithm]]
    summary = [
        f"{s.n_trajectories} trajectories, {model.kind}, x0 = {cfg.x0}",
        f"fraction collapsed to x = 1: {s.frac_to_one:.5f} +- {s.frac_to_one_stderr:.5f}",
        f"mean plays: {s.mean_plays:.4f} +- {s.mean_plays_stderr:.4f}",
        f"mean total time: {s.mean_time_over_tau_c:.4f} tau_c = {s.mean_total_time:.4g} s (tau_c = {tau_c:.4g} s)",
        f"mean energy drift: {s.mean_energy_drift:.3g} +- {s.mean_energy_drift_stderr:.3g} GeV",
    ]
    return Report("ensemble", {}, {}, results, columns, rows, summary, rng_algorithm=s.rng_algorithm)


_BOUND_COLUMNS = ["kind", "label", "dispersion_rule", "delta_gev", "tau_s", "gamma", "gamma_c", "tau_c_s",
                  "epsilon_gev", "epsilon_over_planck", "ratio_8pi_epsilon_over_planck",
                  "ratio_8pi_rounded_planck", "hbar_gev_s", "planck_energy_gev"]


def _bound_row(r: phenomenology.BoundResult) -> list:
    i, c = r.inputs, r.constants
    rounded = 8 * math.pi * r.epsilon_min / phenomenology.PLANCK_ENERGY_ROUNDED_GEV
    return ["bound", i.label, r.dispersion_rule or "", i.delta, i.tau, i.gamma, i.gamma_c, r.tau_c_min,
            r.epsilon_min, r.epsilon_over_planck, r.planck_ratio_8pi, rounded, c.hbar, c.planck_energy]


def _prediction_row(p: phenomenology.BranchingPrediction, c: phenomenology.PhysicalConstants) -> list:
    tau_c = dynamics.collapse_time(p.epsilon, p.delta, c.hbar)
    return ["prediction", p.label, p.dispersion_rule, p.delta, p.tau, p.gamma, p.gamma_c, tau_c,
            p.epsilon, p.epsilon / c.planck_energy, 8 * math.pi * p.epsilon / c.planck_energy,
            8 * math.pi * p.epsilon / phenomenology.PLANCK_ENERGY_ROUNDED_GEV, c.hbar, c.planck_energy]


def _run_bounds(cfg: RunConfig) -> Report:
    const = cfg.constants
    rules = list(phenomenology.DISPERSION_RULES) if cfg.rule == "both" else [cfg.rule]
    rows, results, summary = [], {}, []
    if cfg.preset == "custom":
        inputs = phenomenology.BoundInputs(cfg.tau, cfg.delta, cfg.gamma, cfg.gamma_c, "custom")
        r = phenomenology.epsilon_lower_bound(inputs, const)
        rows.append(_bound_row(r))
        results["bounds"] = [r.as_dict()]
        summary.append(f"custom: epsilon >= {phenomenology.sig2(r.epsilon_min)} GeV "
                       f"(8 pi eps/E_p = {r.planck_ratio_8pi!r})")
    else:
        kaon = [phenomenology.kaon_bound(const, rule) for rule in rules]
        rows += [_bound_row(r) for r in kaon]
        results["preset_values"] = {"kaon": dict(phenomenology.KAON)}
        results["bounds"] = [r.as_dict() for r in kaon]
        for r in kaon:
            summary.append(f"kaon [{r.dispersion_rule}]: tau_c >= {phenomenology.sig2(r.tau_c_min)} s, "
                           f"epsilon >= {phenomenology.sig2(r.epsilon_min)} GeV, "
                           f"8 pi eps_min/E_p = {r.planck_ratio_8pi!r}")
        if cfg.preset == "b-meson":
            preds = [phenomenology.b_meson_prediction(const, rule) for rule in rules]
            rows += [_prediction_row(p, const) for p in preds]
            results["preset_values"]["b-meson"] = dict(phenomenology.B_MESON)
            results["predictions"] = [p.as_dict() for p in preds]
            for p in preds:
                summary.append(f"b-meson [{p.dispersion_rule}]: gamma = {phenomenology.sig2(p.gamma)} ({p.gamma!r})")
    return Report("bounds", {}, {}, results, list(_BOUND_COLUMNS), rows, summary)


def _run_verify(cfg: RunConfig) -> Report:
    outcomes = checks.run_all()
    rows = [[c.name, "pass" if c.passed else "FAIL", c.detail, round(c.seconds, 3)] for c in outcomes]
    summary = [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in outcomes]
    passed = sum(c.passed for c in outcomes)
    summary.append(f"{passed}/{len(outcomes)} properties pass")
    results = {"passed": passed, "total": len(outcomes), "all_passed": passed == len(outcomes),
               "checks": [asdict(c) for c in outcomes]}
    return Report("verify", {}, {}, results, ["property", "status", "detail", "seconds"], rows, summary)


_RUNNERS = {"evolve": _run_evolve, "ensemble": _run_ensemble, "bounds": _run_bounds, "verify": _run_verify}


def run_command(cfg: RunConfig) -> Report:
    """Dispatch ``cfg.command`` and assemble its :class:`Report`."""
    report = _RUNNERS[cfg.command](cfg)
    # paths, display switches and the worker count do not affect results
    report.config = {k: v for k, v in asdict(cfg).items() if k not in ("output", "dump", "quiet", "timestamp", "workers")}
    report.constants = {**cfg.constants.as_dict(), "planck_energy_rounded_gev": phenomenology.PLANCK_ENERGY_ROUNDED_GEV}
    if cfg.timestamp:
        report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


# -- output ------------------------------------------------------------------


def _resolve_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _open_output(path: Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def _json_safe(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.floating, np.integer)):
        return _json_safe(value.item())
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def render(report: Report, fmt: str) -> str:
    """Serialize ``report`` as CSV (table only) or JSON (everything)."""
    if fmt == "json":
        return json.dumps(_json_safe(report.as_dict()), indent=2) + "\n"
    buf = io.StringIO(newline="")
    writer = csv.writer(buf)
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def emit_report(report: Report, cfg: RunConfig) -> Path | None:
    """Write the report file, if one is requested, then print the summary."""
    target = cfg.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = f"{report.command}.{cfg.format}"
    path = None
    if target is not None:
        path = _resolve_path(target)
        with _open_output(path) as fh:
            fh.write(render(report, cfg.format))
    if not cfg.quiet:
        print(f"martingale-collapse {report.command} (v{report.version})")
        for line in report.summary:
            print("  " + line)
        if path is not None:
            print(f"  wrote {path}")
    return path


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = run_command(cfg)
        emit_report(report, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, RuntimeError, dynamics.IntegratorConfigError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.command == "verify" and not report.results["all_passed"]:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
