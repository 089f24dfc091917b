import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plasmonbie.errors import ConditionWarning, ConfigurationError
from plasmonbie.resonance import (Drude, Material, assemble_A, checked_correction_3d_sphere,
                                  correction_2d, correction_3d_sphere, correction_matrices_2d,
                                  correction_operator_2d, drude_mu, find_resonances, lambda_of,
                                  negative_window, planar_correction, sphere_correction,
                                  tau_static, track_eigenvalue, wavenumber)

from conftest import spectrum

FIXED = Material(eps_c=1.5, mu_c_fixed=-2.5 + 0.4j)


def test_drude_values():
    d = Drude(1.0, 0.8, 1.0, 20.0)
    # frozen from 1 - 0.8 w^2 / (w^2 - 1 + i w / 20) at w = 2
    assert drude_mu(2.0, d) == pytest.approx(1 - 3.2 / (3 + 0.1j), rel=1e-14)
    assert Material(drude=d).mu_c(2.0) == drude_mu(2.0, d)
    assert drude_mu(0.5, Drude()) == 1.0


def test_drude_validation():
    with pytest.raises(ConfigurationError):
        Drude(filling=1.2)
    with pytest.raises(ConfigurationError):
        Drude(tau=-1.0)
    with pytest.raises(ConfigurationError):
        Material(eps_m=0.0)


@settings(max_examples=50, deadline=None)
@given(F=st.floats(0.05, 0.95), w0=st.floats(0.0, 2.0), tau=st.floats(1.0, 1e4),
       w=st.floats(0.01, 5.0))
def test_negative_window_matches_real_part(F, w0, tau, w):
    d = Drude(1.0, F, w0, tau)
    re = drude_mu(w, d).real
    if abs(re) > 1e-9:
        assert bool(negative_window(w, d)) == (re < 0)


@settings(max_examples=50, deadline=None)
@given(re=st.floats(-10, 10), im=st.floats(0, 10))
def test_contrast_round_trip(re, im):
    mu = complex(re, im)
    if abs(mu - 1) < 1e-3 or abs(mu + 1) < 1e-6 or abs(mu) < 1e-3:
        return
    lam = lambda_of(mu, 1.0)
    # invert lambda = (1 + mu)/(2(1 - mu))
    assert (2 * lam - 1) / (2 * lam + 1) == pytest.approx(mu, rel=1e-9, abs=1e-9)
    # tau_j vanishes exactly when lambda = lambda_j
    assert abs(tau_static(lam, mu, 1.0)) < 1e-9 * (1 + abs(1 / mu))


def test_contrast_edge_cases():
    with pytest.raises(ZeroDivisionError):
        lambda_of(1.0, 1.0)
    with pytest.warns(ConditionWarning):
        assert lambda_of(-1.0, 1.0) == 0


def test_wavenumber_branch():
    k = wavenumber(1.0, 1.0, -2.0 + 0.1j)
    assert k.imag >= 0
    assert k**2 == pytest.approx(-2.0 + 0.1j)


def test_sphere_correction_closed_form():
    # unit sphere dipole: geometric parts -2/15 (eps) and -4/15 (mu)
    c = correction_3d_sphere()
    assert c.eps_part == pytest.approx(-2 / 15, abs=1e-6)
    assert c.mu_part == pytest.approx(-4 / 15, abs=1e-6)
    assert checked_correction_3d_sphere().kind == "3d-sphere"


def test_quasi_static_resonance_is_root_of_contrast():
    mat = Material(drude=Drude(1.0, 0.8, 1.0, 20.0))
    (r,) = find_resonances(mat, [1 / 6], (1.1, 3.0))
    assert lambda_of(mat.mu_c(r.omega_qs), 1.0).real == pytest.approx(1 / 6, abs=1e-12)
    assert r.shift == 0.0
    assert r.min_tau_over_omega3 > 0
    with pytest.raises(ConfigurationError):
        find_resonances(mat, [1 / 6], (2.0, 1.0))


def test_resonance_shift_scales_like_delta_squared():
    coef = checked_correction_3d_sphere()
    mat = Material(drude=Drude(1.0, 0.8, 1.0, 20.0))
    deltas = [0.02, 0.04, 0.08]
    shifts = []
    for d in deltas:
        (r,) = find_resonances(mat, [1 / 6], (1.1, 3.0), sphere_correction(coef, mat, d), d)
        shifts.append(abs(r.shift))
    slope = np.polyfit(np.log(deltas), np.log(shifts), 1)[0]
    assert abs(slope - 2.0) < 0.1


def test_planar_correction_callable():
    bs = spectrum("ellipse", 128)
    coef = correction_2d(1, bs)
    f = planar_correction(coef, FIXED, 0.1)
    w = 0.05
    assert f(w) == pytest.approx((w * 0.1) ** 2 * np.log(w * 0.1) * coef.value(FIXED, FIXED.mu_c(w)))


def test_correction_matrix_routes_agree():
    bs = spectrum("ellipse", 128)
    RK, RS = correction_matrices_2d(bs)
    mu = FIXED.mu_c(0)
    C = correction_operator_2d(bs, FIXED, mu)
    d = bs.data
    for j in (1, 2, 3):
        phi = d.eigenvectors[:, j - 1]
        a = phi @ d.gram @ (C @ phi)
        b = correction_2d(j, bs, FIXED, mu, (RK, RS))
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_tracked_eigenvalue_expansion():
    bs = spectrum("ellipse", 128)
    mu = FIXED.mu_c(0)
    omegas = [1e-2, 3e-3, 1e-3]
    for j in (1, 2):
        t0 = tau_static(bs.data.eigenvalues[j - 1], mu, 1.0)
        t1 = correction_2d(j, bs, FIXED, mu)
        errs = []
        for w in omegas:
            ev, overlap = track_eigenvalue(assemble_A(bs.grid, FIXED, w), bs.data, j)
            assert overlap > 0.99
            errs.append(abs(ev - t0 - w**2 * np.log(w) * t1))
        assert np.polyfit(np.log(omegas), np.log(errs), 1)[0] >= 1.8
