import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plasmonbie.errors import ConfigurationError, DegeneracyError
from plasmonbie.geometry2d import make_disk, make_ellipse
from plasmonbie.spectral import (boundary_spectrum, is_simple, project_PJ, require_simple,
                                 self_adjointness_residual)

from conftest import spectrum


def ellipse_oracle(a, b, count):
    # +-(1/2) ((a-b)/(a+b))^j, each sign once
    r = (a - b) / (a + b)
    out = []
    for j in range(1, count // 2 + 1):
        out += [0.5 * r**j, -0.5 * r**j]
    return np.array(out)


def test_ellipse_spectrum_leading_values(ellipse256):
    lam = ellipse256.data.eigenvalues
    assert np.abs(lam[:6] - ellipse_oracle(2, 1, 6)).max() < 1e-10
    assert lam[0] == pytest.approx(0.16666666666666663, abs=1e-12)


def test_h_star_orthonormality(ellipse256):
    d = ellipse256.data
    G = d.eigenvectors.T @ d.gram @ d.eigenvectors
    assert np.abs(G - np.eye(d.n_modes)).max() < 1e-9
    # every nonstatic mode has zero mean
    assert np.abs(ellipse256.grid.weights @ d.eigenvectors).max() < 1e-9


def test_eigenpair_residual(ellipse256):
    d, K = ellipse256.data, ellipse256.ops.Kstar.matrix
    for j in (1, 2, 5):
        lam, v = d.mode(j)
        assert np.linalg.norm(K @ v - lam * v) / np.linalg.norm(v) < 1e-8
    lam0, v0 = d.mode(0)
    assert lam0 == pytest.approx(0.5, abs=1e-10)


def test_self_adjointness(ellipse256):
    assert self_adjointness_residual(ellipse256.ops.Kstar, ellipse256.data.gram) < 1e-8


def test_disk_spectrum_is_zero_except_static():
    bs = spectrum("disk", 64)
    assert np.abs(bs.data.eigenvalues).max() < 1e-12
    assert not is_simple(bs.data, 1)
    with pytest.raises(DegeneracyError):
        require_simple(bs.data, 1)


def test_ordering_and_sign_convention(ellipse256):
    lam = ellipse256.data.eigenvalues
    assert np.all(np.diff(np.abs(lam)) <= 1e-10)
    for c in range(6):
        col = ellipse256.data.eigenvectors[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        assert col[nz[0]] > 0


def test_projection_is_idempotent(ellipse256, rng):
    d = ellipse256.data
    psi = rng.standard_normal(ellipse256.grid.N)
    p = project_PJ(d, [1, 3], psi)
    assert np.allclose(project_PJ(d, [1, 3], p), p, atol=1e-12)
    assert np.allclose(project_PJ(d, [], psi), 0)
    with pytest.raises(ConfigurationError):
        project_PJ(d, [0, 1], psi)


def test_arrays_frozen(ellipse256):
    with pytest.raises(ValueError):
        ellipse256.data.eigenvalues[0] = 0.0


@settings(max_examples=8, deadline=None)
@given(a=st.floats(1.2, 3.0), rot=st.floats(0, np.pi), s=st.floats(0.5, 2.0))
def test_spectrum_invariant_under_rigid_motion_and_scaling(a, rot, s):
    lam = boundary_spectrum(make_ellipse(a * s, s, (0.2, -0.1), rot), 128).data.eigenvalues
    assert np.abs(lam[:4] - ellipse_oracle(a, 1, 4)).max() < 1e-8


def test_spectrum_symmetric_in_two_dimensions():
    # nonzero eigenvalues of K* in 2D come in +- pairs
    lam = spectrum("star", 256).data.eigenvalues
    big = lam[np.abs(lam) > 1e-6]
    assert np.allclose(np.sort(big), np.sort(-big), atol=1e-9)
