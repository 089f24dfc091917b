import numpy as np
import pytest

from plasmonbie.errors import ConfigurationError, PrecisionError
from plasmonbie.geometry2d import discretize, make_disk, make_ellipse
from plasmonbie.polarization import contracted_N_direct, polarization_direct
from plasmonbie.resonance import Material
from plasmonbie.scatcoef import (W1_matrix, cylindrical_wave, decay_constant, helmholtz_system,
                                 plane_wave_synthesis_check, psi_leading, scattering_coefficients,
                                 solve_psi_m, solve_psi_m_reduced)

from conftest import spectrum

MAT = Material(eps_c=1.5, mu_c_fixed=-2.5 + 0.4j)
OMEGAS = [1e-2, 3e-3, 1e-3]


def test_cylindrical_wave_gradient_by_finite_differences():
    g = discretize(make_ellipse(2.0, 1.0), 32)
    k, m, h = 1.3, 2, 1e-6
    from scipy.special import jv
    f = lambda P: jv(m, k * np.hypot(*P.T)) * np.exp(1j * m * np.arctan2(P[:, 1], P[:, 0]))
    _, dn = cylindrical_wave(g, k, m)
    fd = (f(g.points + h * g.normals) - f(g.points - h * g.normals)) / (2 * h)
    assert np.allclose(dn, fd, atol=1e-8)


def test_origin_must_be_inside():
    g = discretize(make_disk(0.5, center=(2.0, 0.0)), 32)
    with pytest.raises(ConfigurationError):
        helmholtz_system(g, MAT, 0.1)


def test_condition_limit():
    g = discretize(make_disk(1.0), 32)
    with pytest.raises(PrecisionError):
        helmholtz_system(g, MAT, 0.1, cond_limit=1.0)


def test_reduced_form_agrees(ellipse128):
    sys_ = helmholtz_system(ellipse128.grid, MAT, 1e-2)
    for m in (-1, 0, 2):
        a = solve_psi_m(ellipse128.grid, MAT, 1e-2, m, sys_)
        b = solve_psi_m_reduced(sys_, m)
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-10


def test_disk_selection_rule():
    g = discretize(make_disk(1.0), 128)
    W = scattering_coefficients(g, MAT, 1e-2)
    off = max(abs(w) for (n, m), w in W.W.items() if n != m)
    assert off < 1e-10
    assert abs(W[(1, 1)]) > 1e-6
    assert decay_constant(W) > 0


def test_disk_first_order_closed_form():
    # disk of radius 1: N++ = 0, N+- = 2 pi / lambda, so W_11 ~ (k^2/4) 2 pi / lambda
    g = discretize(make_disk(1.0), 128)
    lam = (1 + MAT.mu_c(0)) / (2 * (1 - MAT.mu_c(0)))
    w = 1e-3
    W = scattering_coefficients(g, MAT, w, n_max=1)
    ref = w**2 / 4 * 2 * np.pi / lam
    assert abs(W[(1, 1)] - ref) / abs(ref) < 1e-3


def test_scattering_link_relative_slope(ellipse128):
    g, ops = ellipse128.grid, ellipse128.ops
    lam = (1 + MAT.mu_c(0)) / (2 * (1 - MAT.mu_c(0)))
    Npp, Npm, _, _ = contracted_N_direct(g, ops, lam)
    M = polarization_direct(g, ops, lam).M
    rel_a, rel_b, rel_w = [], [], []
    for w in OMEGAS:
        W = scattering_coefficients(g, MAT, w, n_max=1)
        k = MAT.k_m(w)
        rel_a.append(abs(W[(-1, 1)] + k**2 / 4 * Npp) / abs(k**2 / 4 * Npp))
        rel_b.append(abs(W[(1, 1)] - k**2 / 4 * Npm) / abs(k**2 / 4 * Npm))
        rel_w.append(np.abs(W1_matrix(W) + k**2 * M).max() / np.abs(k**2 * M).max())
    for errs in (rel_a, rel_b, rel_w):
        slope = np.polyfit(np.log(OMEGAS), np.log(errs), 1)[0]
        assert 1.6 <= slope <= 2.2


def test_leading_density(ellipse128):
    errs = []
    for w in OMEGAS:
        full = solve_psi_m(ellipse128.grid, MAT, w, 1)
        errs.append(np.linalg.norm(full - psi_leading(ellipse128, MAT, w, 1)) / np.linalg.norm(full))
    assert errs[-1] < 1e-3
    assert np.polyfit(np.log(OMEGAS), np.log(errs), 1)[0] > 1.6
    with pytest.raises(ConfigurationError):
        psi_leading(ellipse128, MAT, 1e-2, 2)


def test_plane_wave_synthesis(ellipse128):
    assert plane_wave_synthesis_check(ellipse128.grid, MAT, 1e-2) < 1e-10
    assert plane_wave_synthesis_check(ellipse128.grid, MAT, 1e-1, theta_d=0.3) < 1e-10


def test_rows_are_sorted(ellipse128):
    W = scattering_coefficients(ellipse128.grid, MAT, 1e-2, n_max=1)
    rows = W.rows()
    assert len(rows) == 9 and rows[0][:2] == (-1, -1)
