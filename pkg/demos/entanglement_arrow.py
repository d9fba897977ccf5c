"""Entanglement only goes down, on average.

A play with stake d changes x(1 - x) by -d^2 averaged over the two coin
outcomes. Here we check that identity, then watch the mean of x(1 - x)
over an ensemble fall play by play next to the exact expectation.
"""

import numpy as np
from scipy.stats import unitary_group

from martingale_collapse.qstate import entanglement_det, random_psi, transform
from martingale_collapse.stochastic import (
    DOUBLE_OR_NOTHING,
    NoiseModel,
    avg_entanglement_change,
    exact_mean_entanglement,
    simulate_ensemble,
)

rng = np.random.default_rng(1)
psi = random_psi(rng)
u, v = unitary_group.rvs(2, random_state=rng), unitary_group.rvs(2, random_state=rng)
print(f"|det psi|^2 = {entanglement_det(psi):.12f}, after local unitaries {entanglement_det(transform(psi, u, v)):.12f}")

for x, d in [(0.5, 0.1), (0.3, 0.3), (0.2, 0.05)]:
    print(f"x = {x}, stake {d}: mean change {avg_entanglement_change(x, d):+.4f} (-d^2 = {-d * d:+.4f})")

model = NoiseModel(DOUBLE_OR_NOTHING)
rec = simulate_ensemble(model, 0.3, 1.0, 10_000, master_seed=3)
exact = exact_mean_entanglement(model, 0.3, 8)
print("\nplay  sample mean  exact mean")
for k in range(8):
    sample = rec.mean_entanglement[k] if k < rec.mean_entanglement.size else 0.0
    print(f"{k:4d}  {sample:11.6f}  {exact[k]:10.6f}")
print("(a finite sample can tick up once only a few games are left; the expectation never does)")
