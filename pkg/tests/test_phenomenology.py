import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from martingale_collapse import units
from martingale_collapse.dynamics import collapse_time
from martingale_collapse.phenomenology import (
    ROUNDED_CONSTANTS,
    BoundInputs,
    PhysicalConstants,
    UnphysicalSaturationWarning,
    b_meson_prediction,
    dispersion_from_splitting,
    epsilon_lower_bound,
    kaon_bound,
    kaon_inputs,
    predict_branching,
    saturation_epsilon,
)

HBAR = 6.582119e-25
EP = 1.22e19


def test_kaon_bound_values():
    r = kaon_bound()
    assert r.tau_c_min == pytest.approx(1.25e-5, rel=1e-15)
    # (0.2 sqrt 2)^2 * 1.25e-5 / hbar, done by hand
    assert r.epsilon_min == pytest.approx(0.08 * 1.25e-5 / HBAR, rel=1e-14)
    assert r.epsilon_min == pytest.approx(1.519267579331215e18, rel=1e-12)
    assert r.planck_ratio_8pi == pytest.approx(3.1297835187305547, rel=1e-12)
    bare = kaon_bound(dispersion_rule="bare")
    assert bare.epsilon_min == pytest.approx(7.596337896656077e17, rel=1e-12)
    assert bare.planck_ratio_8pi == pytest.approx(1.5648917593652771, rel=1e-12)
    for res in (r, bare):
        assert 0.5 <= res.planck_ratio_8pi <= 5.0


def test_kaon_bound_consistent_with_collapse_time():
    r = kaon_bound()
    assert collapse_time(r.epsilon_min, r.inputs.delta, HBAR) == pytest.approx(r.tau_c_min, rel=1e-14)


def test_rounded_planck_energy_only_moves_the_ratio():
    a, b = kaon_bound(), kaon_bound(ROUNDED_CONSTANTS)
    assert a.epsilon_min == b.epsilon_min
    assert b.planck_ratio_8pi == pytest.approx(a.planck_ratio_8pi * 1.22, rel=1e-14)


@pytest.mark.parametrize("rule", ["sqrt2", "bare"])
def test_b_meson_prediction(rule):
    p = b_meson_prediction(dispersion_rule=rule)
    # rule factors cancel: gamma_c tau_B (5/0.2)^2 gamma_K / (gamma_c tau_K)
    assert p.gamma == pytest.approx(1e-12 * 625 * 2e-3 / 5e-8, rel=1e-12)
    assert p.gamma == pytest.approx(2.5e-5, rel=1e-12)
    assert 0.5e-5 <= p.gamma <= 5e-5


def test_saturation_round_trip():
    inp = kaon_inputs()
    eps = saturation_epsilon(inp)
    gamma = predict_branching(inp.delta, inp.tau, inp.gamma_c, eps)
    assert gamma == pytest.approx(inp.gamma, rel=1e-12)


@given(
    st.floats(1e-12, 1e-6),
    st.floats(1e-3, 10.0),
    st.floats(1e-6, 1e-2),
)
def test_round_trip_property(tau, delta, gamma):
    inp = BoundInputs(tau, delta, gamma, 0.5)
    eps = saturation_epsilon(inp)
    assert predict_branching(delta, tau, 0.5, eps) == pytest.approx(gamma, rel=1e-12)


def test_homogeneity():
    base = epsilon_lower_bound(BoundInputs(5e-8, 0.3, 2e-3, 0.5)).epsilon_min
    assert epsilon_lower_bound(BoundInputs(1e-7, 0.3, 2e-3, 0.5)).epsilon_min == pytest.approx(2 * base, rel=1e-14)
    assert epsilon_lower_bound(BoundInputs(5e-8, 0.6, 2e-3, 0.5)).epsilon_min == pytest.approx(4 * base, rel=1e-14)
    assert epsilon_lower_bound(BoundInputs(5e-8, 0.3, 4e-3, 0.5)).epsilon_min == pytest.approx(base / 2, rel=1e-14)
    assert epsilon_lower_bound(BoundInputs(5e-8, 0.3, 2e-3, 1.0)).epsilon_min == pytest.approx(2 * base, rel=1e-14)


def test_zero_violation_gives_infinite_bound():
    r = epsilon_lower_bound(BoundInputs(5e-8, 0.3, 0.0, 0.5))
    assert math.isinf(r.epsilon_min) and math.isinf(r.tau_c_min)
    assert predict_branching(0.3, 5e-8, 0.5, math.inf) == 0.0


def test_bound_input_validation():
    with pytest.raises(ValueError):
        BoundInputs(-1.0, 0.3, 2e-3, 0.5)
    with pytest.raises(ValueError):
        BoundInputs(1.0, 0.0, 2e-3, 0.5)
    with pytest.raises(ValueError):
        BoundInputs(1.0, 0.3, 1.5, 0.5)
    with pytest.warns(UserWarning):
        BoundInputs(1.0, 0.3, 0.6, 0.5)


def test_unphysical_saturation_warns():
    with pytest.warns(UnphysicalSaturationWarning):
        g = predict_branching(5.0, 1.0, 0.5, 1e10)
    assert g > 1
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        predict_branching(0.3, 5e-8, 0.5, 1e18)


def test_dispersion_rules():
    assert dispersion_from_splitting(0.2) == pytest.approx(0.2 * math.sqrt(2))
    assert dispersion_from_splitting(0.2, "bare") == 0.2
    with pytest.raises(ValueError):
        dispersion_from_splitting(0.2, "cubic")


def test_constants_validation_and_dict():
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=0.0)
    d = kaon_bound().as_dict()
    assert d["constants"] == {"hbar_gev_s": HBAR, "planck_energy_gev": EP}
    assert d["label"] == "kaon" and d["dispersion_rule"] == "sqrt2"


@pytest.mark.parametrize("unit", ["GeV", "MeV", "keV", "eV"])
@given(v=st.floats(1e-30, 1e30))
def test_unit_round_trip(unit, v):
    assert units.from_gev(units.to_gev(v, unit), unit) == pytest.approx(v, rel=1e-15)


def test_unit_values():
    assert units.to_gev(200.0, "MeV") == pytest.approx(0.2, rel=1e-15)
    with pytest.raises(ValueError):
        units.to_gev(1.0, "furlong")
