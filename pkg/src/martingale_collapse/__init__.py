"""Nonlinear stochastic collapse of two-level entangled states.

Modules
-------
qstate
    States, the psi-matrix map and the entanglement measures.
dynamics
    Fixed-sign nonlinear evolution, population equations, collapse time.
stochastic
    Fixed-stake and double-or-nothing noise, trajectories and ensembles.
phenomenology
    CP-violation bound on the collapse scale and the B-meson prediction.
cli
    ``martingale-collapse`` command line front end.
"""

__version__ = "0.1.0"
