"""Two-level x two-level entangled pure states and their entanglement measures.

A state ``sum_jk psi_jk |j,1>|k,2>`` is carried as the 2x2 complex matrix
``psi`` (rows index particle 1, columns particle 2). One-particle unitaries
act as ``psi -> U psi V^dagger``, so any function of ``psi^dagger psi`` that
is also unitarily invariant measures entanglement. For 2x2 matrices the only
independent ones are the trace (the norm) and the determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12


class InvalidStateError(ValueError):
    """Raised for amplitudes or matrices that cannot describe a physical state."""


def _as_complex(value) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidStateError(f"amplitude {value!r} is not finite")
    return z


@dataclass(frozen=True)
class EntangledState:
    """Normalized state ``alpha |a,1>|a',2> + beta |b,1>|b',2>``.

    Use :func:`make_entangled` to build one from unnormalized amplitudes.
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_complex(self.alpha))
        object.__setattr__(self, "beta", _as_complex(self.beta))
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @property
    def x(self) -> float:
        """Population ``|alpha|^2``."""
        return abs(self.alpha) ** 2

    @property
    def y(self) -> float:
        """Population ``|beta|^2``."""
        return abs(self.beta) ** 2

    def populations(self) -> PopulationState:
        return PopulationState(self.x, 1.0 - self.x)


@dataclass(frozen=True)
class PopulationState:
    """Branch weights ``(x, y) = (|alpha|^2, |beta|^2)`` with ``x + y = 1``."""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidStateError(f"non-finite populations ({self.x!r}, {self.y!r})")
        if x < 0.0 or y < 0.0:
            raise InvalidStateError(f"negative population in ({x!r}, {y!r})")
        if abs(x + y - 1.0) > NORM_TOL:
            raise InvalidStateError(f"x + y = {x + y!r}, expected 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_x(cls, x: float) -> PopulationState:
        return cls(x, 1.0 - x)

    @property
    def terminal(self) -> bool:
        return self.x == 0.0 or self.y == 0.0


def make_entangled(alpha, beta) -> EntangledState:
    """Normalize ``(alpha, beta)`` into an :class:`EntangledState`.

    The common scale is divided out, so relative magnitude and relative
    phase are preserved.

    >>> s = make_entangled(2, 2j)
    >>> round(s.x, 12), s.beta / s.alpha
    (0.5, 1j)
    """
    a, b = _as_complex(alpha), _as_complex(beta)
    # hypot avoids overflow for huge amplitudes
    norm = math.hypot(abs(a), abs(b))
    if norm == 0.0:
        raise InvalidStateError("both amplitudes are zero")
    return EntangledState(a / norm, b / norm)


def kaon_long_state() -> EntangledState:
    """The K_L quark-model state, ``alpha = 1/sqrt(2) = -beta``."""
    return make_entangled(1.0, -1.0)


def to_psi_matrix(state: EntangledState) -> np.ndarray:
    """Matrix form of ``state``; the two branches sit on the diagonal."""
    return np.diag(np.array([state.alpha, state.beta], dtype=complex))


def as_psi(psi) -> np.ndarray:
    """Validate and return ``psi`` as a finite 2x2 complex array."""
    arr = np.asarray(psi, dtype=complex)
    if arr.shape != (2, 2):
        raise InvalidStateError(f"psi must be 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("psi has non-finite entries")
    return arr


def det2(m: np.ndarray) -> complex:
    """Determinant of a 2x2 matrix, written out."""
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def adjugate2(m: np.ndarray) -> np.ndarray:
    """Adjugate of a 2x2 matrix, ``adj(m) m = det(m) I``."""
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex)


def entanglement_det(psi) -> float:
    """Determinant entanglement measure ``Det(psi^dagger psi)``.

    Computed as ``|det psi|^2`` rather than forming ``psi^dagger psi``. It is
    zero exactly for product states and ``x (1 - x)`` for diagonal ``psi``.
    """
    psi = as_psi(psi)
    return abs(det2(psi)) ** 2


def entanglement_entropy(x):
    """Entropy of entanglement ``S(x) = x log x + (1 - x) log(1 - x)``.

    Natural log, ``0 log 0 = 0``. ``S <= 0``, vanishing on product states;
    it is minus the von Neumann entropy of either reduced density matrix.
    Accepts scalars or arrays.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(xs < 0.0) or np.any(xs > 1.0):
        raise ValueError(f"entanglement_entropy needs 0 <= x <= 1, got {x!r}")
    s = xlogy(xs, xs) + xlogy(1.0 - xs, 1.0 - xs)
    return float(s) if s.ndim == 0 else s


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.shape == (2, 2) and np.allclose(u.conj().T @ u, np.eye(2), rtol=0.0, atol=tol)


def transform(psi, u, v) -> np.ndarray:
    """Apply ``U (x) V`` to the state, i.e. return ``U psi V^dagger``."""
    psi = as_psi(psi)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if not is_unitary(u):
        raise ValueError("U is not a 2x2 unitary")
    if not is_unitary(v):
        raise ValueError("V is not a 2x2 unitary")
    return u @ psi @ v.conj().T


def reduced_density(psi, particle: int) -> np.ndarray:
    """Reduced density matrix of ``particle`` (1 or 2).

    Particle 1 gives ``psi psi^dagger``; particle 2 gives ``psi^dagger psi``
    (equal to ``(psi^T psi^*)^T``, i.e. the same spectrum as the textbook
    partial trace).
    """
    psi = as_psi(psi)
    if particle == 1:
        return psi @ psi.conj().T
    if particle == 2:
        return psi.conj().T @ psi
    raise ValueError(f"particle must be 1 or 2, got {particle!r}")


def von_neumann_entropy(rho) -> float:
    """``-Tr(rho log rho)`` in nats, from the eigenvalues of Hermitian ``rho``."""
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    w = np.clip(w, 0.0, None)
    return float(-np.sum(xlogy(w, w)))


def random_psi(rng: np.random.Generator) -> np.ndarray:
    """Normalized 2x2 ``psi`` with i.i.d. complex Gaussian entries."""
    m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return m / np.linalg.norm(m)
