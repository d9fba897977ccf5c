"""Lower bound on the collapse scale from CP violation, and the B-meson prediction.

An unstable entangled state of lifetime ``tau`` that would violate a
symmetry with branching ratio ``gamma_c`` after collapsing, but is observed
to do so only with ``gamma``, cannot collapse faster than
``tau_c >= gamma_c tau / gamma``. Through ``tau_c = hbar epsilon / delta^2``
this bounds ``epsilon`` from below. Saturating the bound (all of the
observed violation coming from collapse) fixes ``epsilon`` and with it the
violation expected in other systems.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

from .units import HBAR_GEV_S

PLANCK_ENERGY_GEV = 1.22e19
PLANCK_ENERGY_ROUNDED_GEV = 1e19

# dispersion rules for a quark mass splitting dm: "sqrt2" -> sqrt(2) dm, "bare" -> dm
DISPERSION_RULES = {"sqrt2": math.sqrt(2.0), "bare": 1.0}

KAON = {
    "label": "kaon",
    "mass_splitting_gev": 0.2,  # s-d quark mass difference
    "tau": 5e-8,  # K_L lifetime, s
    "gamma": 2e-3,
    "gamma_c": 0.5,
}

B_MESON = {
    "label": "b-meson",
    "mass_splitting_gev": 5.0,  # b-d quark mass difference
    "tau": 1e-12,  # s
    "gamma_c": 0.5,
}

PRESETS = ("kaon", "b-meson", "custom")


class UnphysicalSaturationWarning(UserWarning):
    """A predicted branching ratio exceeds 1."""


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR_GEV_S  # GeV s
    planck_energy: float = PLANCK_ENERGY_GEV  # GeV

    def __post_init__(self):
        if not (self.hbar > 0 and self.planck_energy > 0):
            raise ValueError(f"constants must be positive, got {self!r}")

    def as_dict(self) -> dict:
        return {"hbar_gev_s": self.hbar, "planck_energy_gev": self.planck_energy}


ROUNDED_CONSTANTS = PhysicalConstants(planck_energy=PLANCK_ENERGY_ROUNDED_GEV)


@dataclass(frozen=True)
class BoundInputs:
    """Lifetime ``tau`` (s), dispersion ``delta`` (GeV) and the two branching ratios."""

    tau: float
    delta: float
    gamma: float
    gamma_c: float
    label: str = "custom"

    def __post_init__(self):
        if not (self.tau > 0 and self.delta > 0):
            raise ValueError(f"tau and delta must be positive, got tau={self.tau!r}, delta={self.delta!r}")
        if not (0 <= self.gamma <= 1 and 0 < self.gamma_c <= 1):
            raise ValueError(f"need 0 <= gamma <= 1 and 0 < gamma_c <= 1, got {self.gamma!r}, {self.gamma_c!r}")
        if self.gamma >= self.gamma_c:
            warnings.warn(
                f"gamma={self.gamma!r} >= gamma_c={self.gamma_c!r}: the bound is not informative",
                stacklevel=3,
            )


@dataclass(frozen=True)
class BoundResult:
    inputs: BoundInputs
    constants: PhysicalConstants
    tau_c_min: float  # s
    epsilon_min: float  # GeV
    dispersion_rule: str | None = None

    @property
    def epsilon_over_planck(self) -> float:
        return self.epsilon_min / self.constants.planck_energy

    @property
    def planck_ratio_8pi(self) -> float:
        """``8 pi epsilon_min / E_p``; of order one if the bound sits at ``E_p / 8 pi``."""
        return 8.0 * math.pi * self.epsilon_over_planck

    def as_dict(self) -> dict:
        return {
            "label": self.inputs.label,
            "dispersion_rule": self.dispersion_rule,
            "inputs": asdict(self.inputs),
            "constants": self.constants.as_dict(),
            "tau_c_min_s": self.tau_c_min,
            "epsilon_min_gev": self.epsilon_min,
            "epsilon_over_planck": self.epsilon_over_planck,
            "ratio_8pi_epsilon_over_planck": self.planck_ratio_8pi,
        }


def epsilon_lower_bound(inputs: BoundInputs, constants: PhysicalConstants = PhysicalConstants()) -> BoundResult:
    """Smallest ``epsilon`` compatible with the observed violation.

    ``tau_c_min = gamma_c tau / gamma`` and ``epsilon_min = delta^2 tau_c_min / hbar``,
    i.e. ``epsilon_min / delta = (tau delta / hbar)(gamma_c / gamma)``. With
    ``gamma = 0`` both are infinite.
    """
    if inputs.gamma == 0:
        return BoundResult(inputs, constants, math.inf, math.inf)
    tau_c_min = inputs.gamma_c * inputs.tau / inputs.gamma
    epsilon_min = inputs.delta**2 * tau_c_min / constants.hbar
    return BoundResult(inputs, constants, tau_c_min, epsilon_min)


def saturation_epsilon(inputs: BoundInputs, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """The ``epsilon`` at which the bound holds with equality."""
    return epsilon_lower_bound(inputs, constants).epsilon_min


def predict_branching(delta: float, tau: float, gamma_c: float, epsilon: float, constants: PhysicalConstants = PhysicalConstants()) -> float:
    """Violation expected from collapse alone, ``gamma_c tau delta^2 / (hbar epsilon)``.

    Equivalently ``gamma_c tau / tau_c``. Values above 1 trigger an
    :class:`UnphysicalSaturationWarning`.
    """
    if not (delta > 0 and tau > 0 and epsilon > 0 and gamma_c >= 0):
        raise ValueError("delta, tau, epsilon must be positive and gamma_c non-negative")
    if math.isinf(epsilon):
        return 0.0
    gamma = gamma_c * tau * delta**2 / (constants.hbar * epsilon)
    if gamma > 1:
        warnings.warn(f"predicted branching ratio {gamma:.3g} exceeds 1", UnphysicalSaturationWarning, stacklevel=2)
    return gamma


def dispersion_from_splitting(mass_splitting: float, rule: str = "sqrt2") -> float:
    try:
        return DISPERSION_RULES[rule] * mass_splitting
    except KeyError:
        raise ValueError(f"unknown dispersion rule {rule!r}; expected one of {sorted(DISPERSION_RULES)}") from None


def kaon_inputs(rule: str = "sqrt2") -> BoundInputs:
    return BoundInputs(
        tau=KAON["tau"],
        delta=dispersion_from_splitting(KAON["mass_splitting_gev"], rule),
        gamma=KAON["gamma"],
        gamma_c=KAON["gamma_c"],
        label="kaon",
    )


def kaon_bound(constants: PhysicalConstants = PhysicalConstants(), dispersion_rule: str = "sqrt2") -> BoundResult:
    """Bound from K_L: 200 MeV splitting, 5e-8 s lifetime, gamma_c = 0.5, gamma = 2e-3."""
    return replace(epsilon_lower_bound(kaon_inputs(dispersion_rule), constants), dispersion_rule=dispersion_rule)


@dataclass(frozen=True)
class BranchingPrediction:
    label: str
    dispersion_rule: str
    delta: float  # GeV
    tau: float  # s
    gamma_c: float
    epsilon: float  # GeV, the saturating value used
    gamma: float

    def as_dict(self) -> dict:
        return asdict(self)


def b_meson_prediction(
    constants: PhysicalConstants = PhysicalConstants(),
    dispersion_rule: str = "sqrt2",
    epsilon: float | None = None,
) -> BranchingPrediction:
    """B-system branching ratio with ``epsilon`` saturated by the kaon bound.

    The same dispersion rule is applied to the kaon and B splittings unless
    ``epsilon`` is passed explicitly.
    """
    if epsilon is None:
        epsilon = saturation_epsilon(kaon_inputs(dispersion_rule), constants)
    delta = dispersion_from_splitting(B_MESON["mass_splitting_gev"], dispersion_rule)
    gamma = predict_branching(delta, B_MESON["tau"], B_MESON["gamma_c"], epsilon, constants)
    return BranchingPrediction("b-meson", dispersion_rule, delta, B_MESON["tau"], B_MESON["gamma_c"], epsilon, gamma)


def sig2(value: float) -> str:
    """Two significant figures, for the human-readable summaries."""
    return f"{value:.2g}" if math.isfinite(value) else str(value)
