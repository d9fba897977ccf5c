"""Energy and time units.

Everything inside the package works in GeV for energies and seconds for
times. The helpers here only exist at the edges (CLI input, reports).
"""

from __future__ import annotations

#: Reduced Planck constant in GeV s.
HBAR_GEV_S = 6.582119e-25

GEV = 1.0
MEV = 1e-3
KEV = 1e-6
EV = 1e-9

_ENERGY_UNITS = {"GeV": GEV, "MeV": MEV, "keV": KEV, "eV": EV}


def to_gev(value: float, unit: str) -> float:
    """Convert ``value`` expressed in ``unit`` to GeV."""
    try:
        scale = _ENERGY_UNITS[unit]
    except KeyError:
        raise ValueError(f"unknown energy unit {unit!r}; expected one of {sorted(_ENERGY_UNITS)}") from None
    return value * scale


def from_gev(value: float, unit: str) -> float:
    """Convert ``value`` in GeV to ``unit``."""
    try:
        scale = _ENERGY_UNITS[unit]
    except KeyError:
        raise ValueError(f"unknown energy unit {unit!r}; expected one of {sorted(_ENERGY_UNITS)}") from None
    return value / scale
