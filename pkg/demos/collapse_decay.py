"""Deterministic decay of an entangled pair toward its stronger branch.

Starts from x = 0.5 (and x = 0.3), integrates dx/dt = -x y / tau_c with RK4
and prints the logistic closed form next to it, along with the
entanglement determinant x y and the entropy x log x + y log y.
"""

import numpy as np

from martingale_collapse.dynamics import CollapseParameters, closed_form_x, integrate_population
from martingale_collapse.qstate import PopulationState, entanglement_entropy

params = CollapseParameters(epsilon=1.22e19, E1=0.2)  # 200 MeV level spacing, Planck-scale epsilon
print(f"delta = {params.delta:.4f} GeV, tau_c = {params.tau_c:.3e} s")

t = np.linspace(0.0, 6.0, 13)  # units of tau_c
for x0 in (0.5, 0.3):
    x, y = integrate_population(PopulationState.from_x(x0), 1.0, 1, t)
    exact = closed_form_x(x0, t, 1.0)
    print(f"\nx0 = {x0}")
    print(f"{'t/tau_c':>8} {'x (RK4)':>12} {'x (exact)':>12} {'x y':>10} {'S':>10}")
    for row in zip(t, x, exact, x * y, entanglement_entropy(np.clip(x, 0, 1))):
        print("{:8.2f} {:12.9f} {:12.9f} {:10.6f} {:10.6f}".format(*row))

# the weaker branch dies exponentially at late times: x ~ (x0 / y0) e^{-t / tau_c}
late = closed_form_x(0.5, np.array([20.0]), 1.0)[0]
print(f"\nx(20 tau_c) = {late:.3e}  vs  e^-20 = {np.exp(-20):.3e}")
