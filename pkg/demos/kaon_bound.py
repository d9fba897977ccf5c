"""How slowly must kaons collapse? A bound on epsilon and a B-meson forecast.

If the K_L state collapsed before decaying, it would violate CP in a fair
fraction gamma_c of decays. The observed 2e-3 caps the collapse rate, which
bounds epsilon from below. Taking that bound as an equality predicts the
violation from collapse in B mesons.
"""

from martingale_collapse.phenomenology import (
    ROUNDED_CONSTANTS,
    PhysicalConstants,
    b_meson_prediction,
    kaon_bound,
)

for constants in (PhysicalConstants(), ROUNDED_CONSTANTS):
    print(f"E_p = {constants.planck_energy:.3g} GeV")
    for rule in ("sqrt2", "bare"):
        r = kaon_bound(constants, rule)
        b = b_meson_prediction(constants, rule)
        print(f"  [{rule:5}] tau_c >= {r.tau_c_min:.3g} s, epsilon >= {r.epsilon_min:.3e} GeV, "
              f"8 pi eps/E_p = {r.planck_ratio_8pi:.3f}, B-meson gamma = {b.gamma:.2e}")
