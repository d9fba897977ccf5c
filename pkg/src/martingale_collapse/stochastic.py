"""Random-sign noise: the fixed-stake walk and the double-or-nothing game.

Each play moves weight ``stake`` between the two branches, the direction
set by a fair coin (``+1``: x wins). A play with stake ``d`` taken from
state ``(x, y)`` lasts ``d tau_c / (x y)``, which inverts the differential
relation ``d = x y dt / tau_c`` of the deterministic equations. Under
double-or-nothing the weaker branch stakes everything, so a play lasts
``tau_c / max(x, y)``.

Random numbers come from SplitMix64 used as a counter-based generator: the
``k``-th coin of the trajectory with seed ``s`` is the top bit of
``mix64(s + k * golden)``, and trajectory ``i`` of an ensemble has seed
``mix64(master + (i + 1) * golden)``. Coins therefore depend only on
``(master_seed, index, play)``, never on batch layout or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qstate import PopulationState
from .units import HBAR_GEV_S

RNG_ALGORITHM = "splitmix64-counter/top-bit-coin/v1"

FIXED_STAKE = "fixed-stake"
DOUBLE_OR_NOTHING = "double-or-nothing"
NOISE_KINDS = (FIXED_STAKE, DOUBLE_OR_NOTHING)

MAX_PLAYS_FIXED_STAKE = 10**7
MAX_PLAYS_DOUBLE_OR_NOTHING = 200

# Trajectories per batch. Fixed, so reductions do not depend on the worker count.
CHUNK_SIZE = 8192

# A stake within this relative distance of the weaker fortune counts as all of it.
_CLAMP_RTOL = 1e-9

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TOP = np.uint64(63)


class RunawayWalkError(RuntimeError):
    """The walk did not reach a boundary within the play cap."""


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def splitmix64(seed, index) -> np.ndarray:
    """``index``-th output (1-based) of SplitMix64 started at ``seed``; vectorized."""
    seed = np.asarray(seed, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(seed + index * _GOLDEN)


def trajectory_seeds(master_seed: int, n: int, start: int = 0) -> np.ndarray:
    """Seeds of trajectories ``start .. start + n - 1`` of an ensemble."""
    master = np.uint64(int(master_seed) % 2**64)
    return splitmix64(master, np.arange(start + 1, start + n + 1, dtype=np.uint64))


def trajectory_seed(master_seed: int, index: int) -> int:
    return int(trajectory_seeds(master_seed, 1, start=index)[0])


def coins(seeds, play: int) -> np.ndarray:
    """Fair +-1 coins of play ``play`` (1-based) for each trajectory seed."""
    bits = splitmix64(seeds, play) >> _TOP
    return np.where(bits == 1, 1.0, -1.0)


@dataclass(frozen=True)
class NoiseModel:
    """Which game is played. ``stake`` is used by the fixed-stake walk only."""

    kind: str = DOUBLE_OR_NOTHING
    stake: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; expected one of {NOISE_KINDS}")
        if self.kind == FIXED_STAKE:
            if self.stake is None or not 0.0 < self.stake <= 0.5:
                raise ValueError(f"fixed-stake noise needs 0 < stake <= 1/2, got {self.stake!r}")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError(f"rng_seed must fit in 64 unsigned bits, got {self.rng_seed!r}")

    @property
    def max_plays(self) -> int:
        return MAX_PLAYS_FIXED_STAKE if self.kind == FIXED_STAKE else MAX_PLAYS_DOUBLE_OR_NOTHING


# -- single plays -------------------------------------------------------------


def _stake(kind: str, x, y, delta):
    weaker = np.minimum(x, y)
    if kind == DOUBLE_OR_NOTHING:
        return weaker
    return np.where(weaker < delta * (1.0 + _CLAMP_RTOL), weaker, delta)


def _play(kind: str, x, y, delta, coin):
    """Vectorized play. Returns ``(x, y, stake)``; wiped-out branches end exactly at 0/1."""
    stake = _stake(kind, x, y, delta)
    x_new = x + coin * stake
    y_new = y - coin * stake
    x_out = np.where(x_new <= 0.0, 0.0, np.where(y_new <= 0.0, 1.0, x_new))
    y_out = np.where(x_new <= 0.0, 1.0, np.where(y_new <= 0.0, 0.0, y_new))
    return x_out, y_out, stake


def _check_coin(coin) -> float:
    if coin not in (1, -1):
        raise ValueError(f"coin must be +1 or -1, got {coin!r}")
    return float(coin)


def step_fixed_stake(p: PopulationState, delta: float, coin: int) -> PopulationState:
    """One fixed-stake play: ``x += coin * stake``, ``y -= coin * stake``.

    The stake is ``delta`` unless that exceeds the weaker fortune, in which
    case the weaker branch stakes everything and a loss absorbs it.
    """
    if not delta > 0:
        raise ValueError(f"stake must be positive, got {delta!r}")
    x, y, _ = _play(FIXED_STAKE, p.x, p.y, delta, _check_coin(coin))
    return PopulationState(float(x), float(y))


def step_double_or_nothing(p: PopulationState, tau_c: float, coin: int) -> tuple[PopulationState, float]:
    """One double-or-nothing play and its duration ``tau_c / max(x, y)``."""
    if not 0.0 < p.x < 1.0:
        raise ValueError(f"play needs 0 < x < 1, got x={p.x!r}")
    x, y, stake = _play(DOUBLE_OR_NOTHING, p.x, p.y, 0.0, _check_coin(coin))
    return PopulationState(float(x), float(y)), float(stake) * tau_c / (p.x * p.y)


def avg_entanglement_change(x: float, delta: float) -> float:
    """Mean change of ``x (1 - x)`` over the two outcomes of a stake ``delta``.

    Algebraically ``-delta**2``: every play lowers the average entanglement.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if delta < 0 or delta > min(x, 1.0 - x) * (1.0 + 1e-12):
        raise ValueError(f"stake {delta!r} not admissible at x={x!r} (need 0 <= delta <= min(x, 1-x))")
    win = (x + delta) * (1.0 - x - delta)
    loss = (x - delta) * (1.0 - x + delta)
    return 0.5 * (win + loss) - x * (1.0 - x)


def double_or_nothing_stake(x: float) -> float:
    """Largest admissible stake ``min(x, 1 - x)``; it maximizes the entanglement loss."""
    return min(x, 1.0 - x)


# -- exact expectations ------------------------------------------------------


def _doubling_orbit(x0):
    """Yield the double-or-nothing continuation orbit of ``x0`` as Fractions.

    Stops after yielding 1/2 (the game then ends surely) or when the orbit
    cycles (it never reaches 1/2).
    """
    x = Fraction(x0)
    if not 0 < x < 1:
        raise ValueError(f"x0 must lie strictly inside (0, 1), got {x0!r}")
    seen = set()
    while x not in seen:
        yield x
        if x == Fraction(1, 2):
            return
        seen.add(x)
        x = 2 * x if x < Fraction(1, 2) else 2 * x - 1


def expected_plays_double_or_nothing(x0) -> Fraction:
    """Exact mean game length from the recurrence ``L(x) = 1 + L(next)/2``, ``L(1/2) = 1``.

    Equal to 2 unless the orbit reaches 1/2 after ``m`` plays, in which
    case it is ``2 - 2**-m``. Floats are taken at their exact binary value.
    """
    orbit = list(_doubling_orbit(x0))
    if orbit[-1] == Fraction(1, 2):
        return 2 - Fraction(1, 2 ** (len(orbit) - 1))
    return Fraction(2)


def expected_time_double_or_nothing(x0, tau_c: float = 1.0, terms: int = 200) -> float:
    """Mean total collapse time, ``sum_k 2**-k tau_c / max(x_k, 1 - x_k)`` over the orbit."""
    x = Fraction(x0)
    if not 0 < x < 1:
        raise ValueError(f"x0 must lie strictly inside (0, 1), got {x0!r}")
    total = 0.0
    weight = 1.0
    half = Fraction(1, 2)
    for _ in range(terms):
        total += weight / float(max(x, 1 - x))
        if x == half:
            break
        weight *= 0.5
        x = 2 * x if x < half else 2 * x - 1
    return total * tau_c


def exact_mean_entanglement(model: NoiseModel, x0: float, plays: int) -> np.ndarray:
    """Expected ``x (1 - x)`` after 0..``plays`` plays, by propagating both outcomes.

    The distribution over states is carried exactly (as weights on the
    reachable x values), so this is the infinite-ensemble mean.
    """
    _validate_run(x0, 1.0)
    delta = model.stake if model.kind == FIXED_STAKE else 0.0
    dist = {float(x0): 1.0}
    out = [x0 * (1.0 - x0)]
    for _ in range(plays):
        nxt: dict[float, float] = {}
        for x, w in dist.items():
            for c in (1.0, -1.0):
                xn, yn, _ = _play(model.kind, x, 1.0 - x, delta, c)
                if xn > 0.0 and yn > 0.0:
                    nxt[float(xn)] = nxt.get(float(xn), 0.0) + 0.5 * w
        dist = nxt
        out.append(sum(w * x * (1.0 - x) for x, w in dist.items()))
    return np.array(out)


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """One game, recorded after every play.

    ``times`` are cumulative (s), ``xs`` the x value after each play and
    ``signs`` the coins. The final x is exactly 0 or 1.
    """

    x0: float
    tau_c: float
    times: np.ndarray
    xs: np.ndarray
    signs: np.ndarray

    @property
    def n_plays(self) -> int:
        return int(self.xs.size)

    @property
    def total_time(self) -> float:
        return float(self.times[-1])

    @property
    def outcome(self) -> int:
        """1 if the state collapsed onto x = 1, else 0."""
        return int(self.xs[-1] == 1.0)

    def rows(self):
        """``(play, time_s, x, sign)`` rows, starting with play 0 at the initial state."""
        yield 0, 0.0, self.x0, 0
        for k in range(self.n_plays):
            yield k + 1, float(self.times[k]), float(self.xs[k]), int(self.signs[k])


@dataclass
class _Batch:
    x_final: np.ndarray
    y_final: np.ndarray
    n_plays: np.ndarray
    total_time: np.ndarray
    entanglement_sums: np.ndarray  # sum over trajectories of x(1-x), per completed round
    branch_sums: np.ndarray  # same sum averaged over both outcomes of each round's coins
    path: list | None = None


def _run_batch(kind: str, delta: float, x0: float, tau_c: float, seeds: np.ndarray, max_plays: int, record: bool = False) -> _Batch:
    n = seeds.size
    x = np.full(n, float(x0))
    y = np.full(n, 1.0 - float(x0))
    plays = np.zeros(n, dtype=np.int64)
    elapsed = np.zeros(n)
    active = np.ones(n, dtype=bool)
    ent = [float(np.sum(x * y))]
    branch = []
    path = [] if record else None
    k = 0
    while active.any():
        k += 1
        if k > max_plays:
            raise RunawayWalkError(
                f"{int(active.sum())} of {n} trajectories still running after {max_plays} plays "
                f"({kind}, x0={x0!r}, stake={delta!r})"
            )
        idx = np.flatnonzero(active)
        xa, ya = x[idx], y[idx]
        coin = coins(seeds[idx], k)
        xn, yn, stake = _play(kind, xa, ya, delta, coin)
        branch.append(float(np.sum(xa * ya - stake * stake)))
        elapsed[idx] += stake * tau_c / (xa * ya)
        plays[idx] = k
        x[idx], y[idx] = xn, yn
        active[idx] = (xn > 0.0) & (yn > 0.0)
        ent.append(float(np.sum(x * y)))
        if record:
            path.append((elapsed[0], x[0], coin[0]))
    return _Batch(x, y, plays, elapsed, np.array(ent), np.array(branch), path)


def _validate_run(x0: float, tau_c: float):
    if not 0.0 < x0 < 1.0:
        raise ValueError(f"x0 must lie strictly inside (0, 1), got {x0!r}")
    if not tau_c > 0:
        raise ValueError(f"tau_c must be positive, got {tau_c!r}")


def _trajectory(kind, delta, x0, tau_c, seed, max_plays) -> Trajectory:
    _validate_run(x0, tau_c)
    seeds = np.array([int(seed) % 2**64], dtype=np.uint64)
    batch = _run_batch(kind, delta, x0, tau_c, seeds, max_plays, record=True)
    times, xs, signs = (np.array(col) for col in zip(*batch.path))
    return Trajectory(float(x0), float(tau_c), times, xs, signs.astype(int))


def run_fixed_stake(x0: float, delta: float, tau_c: float, seed: int, max_plays: int = MAX_PLAYS_FIXED_STAKE) -> Trajectory:
    """Play the fixed-stake walk from ``x0`` until one branch is wiped out.

    The expected number of plays grows like ``x0 (1 - x0) / delta**2``;
    small stakes hit ``max_plays`` and raise :class:`RunawayWalkError`.
    """
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"stake must lie in (0, 1/2], got {delta!r}")
    return _trajectory(FIXED_STAKE, delta, x0, tau_c, seed, max_plays)


def run_double_or_nothing(x0: float, tau_c: float, seed: int, max_plays: int = MAX_PLAYS_DOUBLE_OR_NOTHING) -> Trajectory:
    """Play double-or-nothing from ``x0`` to termination.

    Every play ends the game with probability at least 1/2, so hitting the
    cap means the coin source is broken.
    """
    return _trajectory(DOUBLE_OR_NOTHING, 0.0, x0, tau_c, seed, max_plays)


def run_trajectory(model: NoiseModel, x0: float, tau_c: float, seed: int) -> Trajectory:
    if model.kind == FIXED_STAKE:
        return run_fixed_stake(x0, model.stake, tau_c, seed)
    return run_double_or_nothing(x0, tau_c, seed)


# -- ensembles ---------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleRecord:
    """Per-trajectory results of an ensemble, indexed by trajectory number."""

    model: NoiseModel
    x0: float
    tau_c: float
    master_seed: int
    energy: float
    x_final: np.ndarray
    n_plays: np.ndarray
    total_time: np.ndarray
    mean_entanglement: np.ndarray  # ensemble mean of x(1-x) after 0, 1, 2, ... plays
    branch_mean_entanglement: np.ndarray  # entry k: two-outcome average after play k + 1

    @property
    def n(self) -> int:
        return int(self.x_final.size)

    @property
    def energy_drift(self) -> np.ndarray:
        """Change of ``E (x - y)`` between the initial and final diagonal states."""
        y_final = 1.0 - self.x_final
        return self.energy * ((self.x_final - y_final) - (self.x0 - (1.0 - self.x0)))


def simulate_ensemble(model: NoiseModel, x0: float, tau_c: float, n: int, master_seed: int | None = None, energy: float = 1.0, workers: int = 1) -> EnsembleRecord:
    """Run ``n`` independent games; trajectory ``i`` uses ``trajectory_seed(master_seed, i)``.

    Work is split into fixed-size chunks, optionally spread over ``workers``
    threads. Results are identical for any worker count.
    """
    _validate_run(x0, tau_c)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    master = model.rng_seed if master_seed is None else master_seed
    delta = model.stake if model.kind == FIXED_STAKE else 0.0
    starts = range(0, n, CHUNK_SIZE)

    def run_chunk(start):
        seeds = trajectory_seeds(master, min(CHUNK_SIZE, n - start), start)
        return _run_batch(model.kind, delta, x0, tau_c, seeds, model.max_plays)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run_chunk, starts))
    else:
        batches = [run_chunk(s) for s in starts]

    rounds = max(b.entanglement_sums.size for b in batches)
    ent = np.zeros(rounds)
    branch = np.zeros(rounds - 1)
    for b in batches:
        ent[: b.entanglement_sums.size] += b.entanglement_sums
        branch[: b.branch_sums.size] += b.branch_sums
    return EnsembleRecord(
        model=model,
        x0=float(x0),
        tau_c=float(tau_c),
        master_seed=int(master),
        energy=float(energy),
        x_final=np.concatenate([b.x_final for b in batches]),
        n_plays=np.concatenate([b.n_plays for b in batches]),
        total_time=np.concatenate([b.total_time for b in batches]),
        mean_entanglement=ent / n,
        branch_mean_entanglement=branch / n,
    )


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


@dataclass(frozen=True)
class EnsembleSummary:
    """Aggregate statistics of an ensemble. Standard errors are ``std / sqrt(n)``.

    With a single trajectory the standard errors are NaN and
    ``stderr_defined`` is False.
    """

    model: NoiseModel
    x0: float
    tau_c: float
    master_seed: int
    energy: float
    n_trajectories: int
    frac_to_one: float
    frac_to_one_stderr: float
    mean_plays: float
    mean_plays_stderr: float
    mean_total_time: float
    mean_total_time_stderr: float
    mean_energy_drift: float
    mean_energy_drift_stderr: float
    uncertainty_ratio: float
    rng_algorithm: str = RNG_ALGORITHM

    @property
    def stderr_defined(self) -> bool:
        return self.n_trajectories > 1

    @property
    def mean_time_over_tau_c(self) -> float:
        return self.mean_total_time / self.tau_c

    @property
    def mean_time_over_tau_c_stderr(self) -> float:
        return self.mean_total_time_stderr / self.tau_c


def summarize(record: EnsembleRecord, hbar: float = HBAR_GEV_S) -> EnsembleSummary:
    """Reduce an :class:`EnsembleRecord`.

    ``uncertainty_ratio`` is ``mean(|energy drift|) * 2 tau_c / hbar``, the
    energy-time product of the collapse in units of hbar. Reported, not judged.
    """
    to_one = (record.x_final == 1.0).astype(float)
    frac, frac_se = _mean_stderr(to_one)
    plays, plays_se = _mean_stderr(record.n_plays.astype(float))
    t, t_se = _mean_stderr(record.total_time)
    drift = record.energy_drift
    d, d_se = _mean_stderr(drift)
    return EnsembleSummary(
        model=record.model,
        x0=record.x0,
        tau_c=record.tau_c,
        master_seed=record.master_seed,
        energy=record.energy,
        n_trajectories=record.n,
        frac_to_one=frac,
        frac_to_one_stderr=frac_se,
        mean_plays=plays,
        mean_plays_stderr=plays_se,
        mean_total_time=t,
        mean_total_time_stderr=t_se,
        mean_energy_drift=d,
        mean_energy_drift_stderr=d_se,
        uncertainty_ratio=float(np.mean(np.abs(drift))) * 2.0 * record.tau_c / hbar,
    )


def ensemble_run(model: NoiseModel, x0: float, tau_c: float, n: int, master_seed: int | None = None, energy: float = 1.0, workers: int = 1) -> EnsembleSummary:
    """Simulate and summarize ``n`` games (see :func:`simulate_ensemble`)."""
    return summarize(simulate_ensemble(model, x0, tau_c, n, master_seed, energy, workers))
