"""Collapse as a fair game: outcome frequencies follow the Born rule.

Each play moves population between the two branches with a fair coin, so
x is a martingale and the walk is absorbed at 1 with probability x0. This
script runs both noise models and compares with the exact answers.
"""

from martingale_collapse.stochastic import (
    DOUBLE_OR_NOTHING,
    FIXED_STAKE,
    NoiseModel,
    ensemble_run,
    expected_plays_double_or_nothing,
    expected_time_double_or_nothing,
    run_double_or_nothing,
)

N = 100_000
SEED = 2024

print("double-or-nothing: the weaker branch stakes everything")
print(f"{'x0':>5} {'P(x->1)':>9} {'+-':>7} {'plays':>7} {'exact':>7} {'T/tau_c':>8} {'exact':>7}")
for x0 in (0.1, 0.25, 0.3, 0.5, 0.7):
    s = ensemble_run(NoiseModel(DOUBLE_OR_NOTHING), x0, 1.0, N, SEED)
    print(f"{x0:5.2f} {s.frac_to_one:9.4f} {s.frac_to_one_stderr:7.4f} {s.mean_plays:7.3f} "
          f"{float(expected_plays_double_or_nothing(x0)):7.3f} {s.mean_time_over_tau_c:8.3f} "
          f"{expected_time_double_or_nothing(x0):7.3f}")

print("\nfixed stake 0.05: a slow gambler's ruin, same Born-rule odds")
for x0 in (0.1, 0.3, 0.5):
    s = ensemble_run(NoiseModel(FIXED_STAKE, 0.05), x0, 1.0, N // 10, SEED)
    print(f"x0 = {x0}: P(x->1) = {s.frac_to_one:.4f} +- {s.frac_to_one_stderr:.4f}, "
          f"mean plays {s.mean_plays:.1f} (x0 y0 / stake^2 = {x0 * (1 - x0) / 0.05**2:.1f})")

print("\none double-or-nothing trajectory from x0 = 0.3:")
for play, t, x, sign in run_double_or_nothing(0.3, 1.0, seed=13).rows():
    print(f"  play {play}: t = {t:.3f} tau_c, x = {x:.3f}, coin {sign:+d}")
