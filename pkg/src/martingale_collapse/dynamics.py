"""Deterministic nonlinear evolution at a fixed noise sign.

Two equivalent right-hand sides are provided for ``hbar dpsi/dt``:

* :func:`nonlinear_rhs`, the expanded form
  ``-i H psi + s eta Det(psi^dagger psi) H psi^dagger^-1``, evaluated through
  the adjugate identity ``Det(psi^dagger psi) psi^dagger^-1 = det(psi) adj(psi^dagger)``
  so that it stays polynomial (finite at collapsed states);
* :func:`geometric_rhs`, the generating form
  ``epsilon (-s) sigma d/dpsi* Det(1 + s i eta psi^dagger psi)``, differentiated
  numerically. It is the independent check on the first.

For the diagonal states the nonlinear term reduces to the logistic
population equations ``dx/dt = -+ x y / tau_c`` handled by
:func:`population_rhs` and friends.

Sign conventions
----------------
``sign`` passed to the psi-level functions is the sign of the nonlinear
term in the expanded form. With the Wirtinger derivative
(``d/dpsi* = (d/dRe + i d/dIm) / 2``) this corresponds to the generating form
with prefactor ``-sign * sigma`` and ``nu = +sign * i * eta``. ``sign = +1``
drives ``|psi_11|^2`` *up*. The population functions use the opposite,
"as printed" orientation: ``sign = +1`` means ``dx/dt = -x y / tau_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import PopulationState, adjugate2, as_psi, det2
from .units import HBAR_GEV_S

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)

DISPERSION_RULES = ("linear", "quadrature")


class IntegratorConfigError(ValueError):
    """Bad step size or time span for the fixed-step integrator."""


class NumericalDifferentiationError(FloatingPointError):
    """Finite-difference step too small to resolve the perturbation."""


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return int(sign)


@dataclass(frozen=True)
class Hamiltonian2:
    """One-particle Hamiltonian ``H = E sigma_z`` (levels at ``+-E``, GeV)."""

    E: float

    @property
    def matrix(self) -> np.ndarray:
        return self.E * SIGMA_Z


def total_dispersion(E1: float, E2: float = 0.0, rule: str = "linear") -> float:
    """Dispersion driving collapse from the level energies of both particles.

    A single particle with ``H = E sigma_z`` contributes ``E sqrt(2)``.
    Contributions from the two particles add (they never cancel):

    * ``"linear"`` (default): ``sqrt(2) (E1 + E2)``
    * ``"quadrature"``: ``sqrt(2 (E1^2 + E2^2))``
    """
    if E1 < 0 or E2 < 0:
        raise ValueError(f"level energies must be non-negative, got E1={E1!r}, E2={E2!r}")
    if rule == "linear":
        return math.sqrt(2.0) * (E1 + E2)
    if rule == "quadrature":
        return math.sqrt(2.0 * (E1 * E1 + E2 * E2))
    raise ValueError(f"unknown dispersion rule {rule!r}; expected one of {DISPERSION_RULES}")


def collapse_time(epsilon: float, delta: float, hbar: float = HBAR_GEV_S) -> float:
    """Collapse time ``hbar epsilon / delta^2`` in seconds.

    Returns ``math.inf`` when ``delta == 0``: with no dispersion nothing
    collapses.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if delta < 0:
        raise ValueError(f"delta must be non-negative, got {delta!r}")
    if delta == 0:
        return math.inf
    return hbar * epsilon / (delta * delta)


@dataclass(frozen=True)
class CollapseParameters:
    """The universal scale ``epsilon`` plus the level energies of one scenario.

    Energies in GeV. ``E2 = 0`` means the second particle has no dispersion.
    """

    epsilon: float
    E1: float
    E2: float = 0.0
    dispersion_rule: str = "linear"
    hbar: float = field(default=HBAR_GEV_S, repr=False)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        # validates E1, E2 and the rule
        total_dispersion(self.E1, self.E2, self.dispersion_rule)

    @property
    def delta(self) -> float:
        return total_dispersion(self.E1, self.E2, self.dispersion_rule)

    @property
    def tau_c(self) -> float:
        return collapse_time(self.epsilon, self.delta, self.hbar)

    @property
    def eta(self) -> float:
        """Nonlinearity strength ``E1 / epsilon`` of particle 1."""
        return self.E1 / self.epsilon

    @property
    def eta2(self) -> float:
        return self.E2 / self.epsilon


def nonlinear_term(psi, H: Hamiltonian2, eta: float, sign: int) -> np.ndarray:
    """``s eta det(psi) H adj(psi^dagger)``, the collapse part of ``hbar dpsi/dt``."""
    psi = as_psi(psi)
    sign = _check_sign(sign)
    return sign * eta * det2(psi) * (H.matrix @ adjugate2(psi.conj().T))


def nonlinear_rhs(psi, H: Hamiltonian2, eta: float, sign: int) -> np.ndarray:
    """``hbar dpsi/dt`` in expanded form: linear Schroedinger term plus collapse term.

    Regular everywhere; at product states (``det psi = 0``) only the linear
    term survives.
    """
    psi = as_psi(psi)
    return -1j * (H.matrix @ psi) + nonlinear_term(psi, H, eta, sign)


def wirtinger_gradient(f, psi, step: float = 1e-5) -> np.ndarray:
    """Central-difference ``df/dpsi*`` for a scalar ``f`` of a complex matrix.

    Uses ``d/dpsi* = (d/dRe psi + i d/dIm psi) / 2`` entry by entry. ``f`` may
    be complex valued.
    """
    psi = as_psi(psi)
    scale = max(1.0, float(np.max(np.abs(psi))))
    if not step > 0 or step < 64 * np.finfo(float).eps * scale:
        raise NumericalDifferentiationError(
            f"finite-difference step {step!r} is below the resolution of entries of size {scale:.3g}"
        )
    grad = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[j, k] = step
            d_re = (f(psi + e) - f(psi - e)) / (2 * step)
            d_im = (f(psi + 1j * e) - f(psi - 1j * e)) / (2 * step)
            grad[j, k] = 0.5 * (d_re + 1j * d_im)
    return grad


def geometric_rhs(psi, H: Hamiltonian2, eta: float, sign: int, step: float = 1e-5) -> np.ndarray:
    """``hbar dpsi/dt`` from the determinant generating function, by finite differences.

    Evaluates ``epsilon (-s) sigma d/dpsi* Det(1 + s i eta psi^dagger psi)`` with
    ``epsilon = E / eta``. At ``eta = 0`` the generating function degenerates;
    the limit is the plain geometric Schroedinger form
    ``-i H d|psi|^2/dpsi*``, which is what gets differentiated there.
    """
    psi = as_psi(psi)
    sign = _check_sign(sign)
    if eta == 0:
        grad = wirtinger_gradient(lambda p: np.vdot(p, p).real, psi, step)
        return -1j * (H.matrix @ grad)

    nu = sign * 1j * eta
    eye = np.eye(2, dtype=complex)

    def generator(p):
        return det2(eye + nu * (p.conj().T @ p))

    grad = wirtinger_gradient(generator, psi, step)
    epsilon = H.E / eta
    return epsilon * (-sign) * (SIGMA_Z @ grad)


def det_identity_residual(a, nu: complex) -> float:
    """``|Det(I + nu A) - (1 + nu Tr A + nu^2 Det A)|`` for a 2x2 matrix ``A``.

    ``Det(I + nu A)`` goes through LAPACK so the two sides are computed
    independently.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError(f"A must be 2x2, got shape {a.shape}")
    lhs = np.linalg.det(np.eye(2) + nu * a)
    rhs = 1.0 + nu * np.trace(a) + nu * nu * det2(a)
    return float(abs(lhs - rhs))


def energy_expectation(psi, H: Hamiltonian2) -> float:
    """``Tr(psi^dagger H psi)``; equals ``E (x - y)`` for diagonal ``psi``."""
    psi = as_psi(psi)
    return float(np.trace(psi.conj().T @ H.matrix @ psi).real)


def population_rhs(p: PopulationState, tau_c: float, sign: int = 1) -> tuple[float, float]:
    """``(dx/dt, dy/dt) = (-s x y / tau_c, +s x y / tau_c)``."""
    sign = _check_sign(sign)
    if not tau_c > 0:
        raise ValueError(f"tau_c must be positive, got {tau_c!r}")
    rate = sign * p.x * p.y / tau_c
    return -rate, rate


def closed_form_x(x0: float, t, tau_c: float):
    """Exact solution ``x0 / (x0 + (1 - x0) exp(t / tau_c))`` of the sign +1 equations.

    At ``x0 = 1/2`` this is ``1 / (1 + exp(t / tau_c))``. Vectorized in ``t``;
    negative ``t`` gives the sign -1 solution.
    """
    if not 0.0 <= x0 <= 1.0:
        raise ValueError(f"x0 must lie in [0, 1], got {x0!r}")
    if not tau_c > 0:
        raise ValueError(f"tau_c must be positive, got {tau_c!r}")
    t = np.asarray(t, dtype=float)
    if x0 == 0.0:
        out = np.zeros_like(t)
    else:
        with np.errstate(over="ignore"):
            out = 1.0 / (1.0 + (1.0 - x0) / x0 * np.exp(t / tau_c))
    return float(out) if out.ndim == 0 else out


def _resolve_step(tau_c: float, step: float | None) -> float:
    max_step = tau_c / 100.0
    if step is None:
        return max_step
    if not step > 0 or step > max_step * (1 + 1e-12):
        raise IntegratorConfigError(f"step must lie in (0, tau_c/100 = {max_step:.6g}], got {step!r}")
    return step


def _rk4(f, y, t_span: float, h_max: float):
    n = max(1, math.ceil(t_span / h_max - 1e-9))
    h = t_span / n
    for _ in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def integrate_population(p0: PopulationState, tau_c: float, sign: int, times, step: float | None = None):
    """Classical RK4 solution of the population equations at the sorted ``times``.

    Returns ``(x, y)`` arrays. Between consecutive sample times the step is
    at most ``step`` (default ``tau_c / 100``).
    """
    sign = _check_sign(sign)
    if not tau_c > 0:
        raise ValueError(f"tau_c must be positive, got {tau_c!r}")
    h = _resolve_step(tau_c, step)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise IntegratorConfigError("times must be a non-negative, non-decreasing 1-d sequence")
    rate = sign / tau_c

    def f(z):
        flow = rate * z[0] * z[1]
        return np.array([-flow, flow])

    z = np.array([p0.x, p0.y])
    out = np.empty((times.size, 2))
    t_prev = 0.0
    for i, t in enumerate(times):
        if t > t_prev:
            z = _rk4(f, z, t - t_prev, h)
            t_prev = t
        out[i] = z
    return out[:, 0], out[:, 1]


def evolve_population(p0: PopulationState, tau_c: float, sign: int, t: float, step: float | None = None) -> PopulationState:
    """Populations after time ``t`` (RK4, see :func:`integrate_population`)."""
    if t < 0:
        raise IntegratorConfigError(f"t must be non-negative, got {t!r}")
    x, y = integrate_population(p0, tau_c, sign, [t], step)
    x, y = float(x[0]), float(y[0])
    # RK4 keeps x + y to roundoff; clip the roundoff-level excursions at the fixed points
    return PopulationState(min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0))


def evolve_psi(psi0, H: Hamiltonian2, eta: float, sign: int, t: float, hbar: float = HBAR_GEV_S, steps_per_tau: int = 100) -> np.ndarray:
    """Evolve ``psi`` by the expanded equation for time ``t`` at fixed sign.

    Works in the interaction picture ``psi = exp(-i H t / hbar) phi``. Because
    ``H`` is traceless the determinant and the adjugate factor are invariant
    under that rotation, so ``phi`` obeys the collapse term alone and the
    linear part is applied exactly at the end. With ``eta = 0`` the moduli of
    the entries are therefore untouched.
    """
    psi0 = as_psi(psi0)
    sign = _check_sign(sign)
    if t < 0:
        raise IntegratorConfigError(f"t must be non-negative, got {t!r}")
    phi = psi0.copy()
    rate = abs(eta * H.E)
    if rate > 0 and t > 0:
        # 1/tau_c for one particle is 2 eta E / hbar
        h_max = hbar / (2.0 * rate) / steps_per_tau
        phi = _rk4(lambda p: nonlinear_term(p, H, eta, sign) / hbar, phi, t, h_max)
    rotation = np.diag(np.exp(-1j * np.array([H.E, -H.E]) * t / hbar))
    return rotation @ phi
