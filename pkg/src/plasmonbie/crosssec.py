"""Far field, orientation-averaged cross-sections and enhancement bounds.

Conventions: the scattered field behaves like -exp(i k r)/(4 pi r) A(xhat) with
A(xhat) = -k^2 xhat . M d, so the extinction cross-section for incidence d is
-(1/k) Im A(d), whose average over d is (k/3) Im Tr M.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimensionError
from .polarization import PolarizationTensor, ellipsoid_polarization, ellipsoid_volume, \
    polarization_spectral, s_factors
from .resonance import lambda_of
from .spherequad import lebedev26


def _matrix(M):
    return M.M if isinstance(M, PolarizationTensor) else np.asarray(M)


def _unit(v, name):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if abs(n - 1) > 1e-12:
        warnings.warn(f"{name} is not a unit vector; normalizing", UserWarning, stacklevel=3)
        v = v / n
    return v


def far_field_amplitude(M, k_m, d, xhat):
    d, xhat = _unit(d, "d"), _unit(xhat, "xhat")
    return complex(-k_m**2 * xhat @ _matrix(M) @ d)


@dataclass(frozen=True)
class CrossSections:
    q_ext: float
    q_s: float
    q_a: float
    k_m: float
    absorption_negative: bool      # Q_a < -1e-12 |Q_ext|, reported not asserted


def averaged_cross_sections(M, k_m):
    Mm = _matrix(M)
    if Mm.shape != (3, 3):
        raise UnsupportedDimensionError("orientation averaging is defined for 3x3 tensors only")
    tr = np.trace(Mm)
    q_ext = float(k_m / 3 * tr.imag)
    q_s = float(k_m**4 * 16 * np.pi / 9 * abs(tr) ** 2)
    q_a = q_ext - q_s
    return CrossSections(q_ext, q_s, q_a, float(k_m), bool(q_a < -1e-12 * abs(q_ext)))


def optical_theorem_check(M, k_m):
    """|average over d of -(1/k) Im A(d) - (k/3) Im Tr M| using the 26-point rule."""
    Mm = _matrix(M)
    pts, wts = lebedev26()
    forward = np.array([far_field_amplitude(Mm, k_m, d, d) for d in pts])
    avg = float(np.sum(wts * (-forward.imag / k_m)))
    return abs(avg - k_m / 3 * np.trace(Mm).imag)


def _parts(lam):
    lam = complex(lam)
    return lam.real, abs(lam.imag)


def bound_general(lam, volume, d):
    lp, lpp = _parts(lam)
    if lpp == 0:
        return np.inf
    den = lpp**2 + 4 * lp**2
    return ((d * volume * (lp**2 + 0.25) + 2 * lp * (d - 2) * volume / 2) / (lpp * den)
            + d * lpp * volume / den)


def bound_ellipse(lam, volume):
    lp, lpp = _parts(lam)
    if lpp == 0:
        return np.inf
    den = lpp**2 + 4 * lp**2
    return volume * 4 * lp**2 / (lpp * den) + 2 * lpp * volume / den


def bound_ellipsoid(lam, volume, s):
    lp, lpp = _parts(lam)
    if lpp == 0:
        return np.inf
    den = lpp**2 + 4 * lp**2
    s2 = float(np.sum(np.square(s)))
    return volume * (3 * lp**2 + lp - 0.25 + s2) / (lpp * den) + 3 * lpp * volume / den


SWEEP_COLUMNS_2D = ("omega", "lam_re", "lam_im", "abs_im_tr_M",
                    "bound_general", "bound_ellipse", "bound_ellipsoid")
SWEEP_COLUMNS_3D = ("omega", "lam_re", "lam_im", "q_ext", "q_s", "q_a",
                    "bound_general", "bound_ellipse", "bound_ellipsoid")


def enhancement_sweep(mat, shape, omegas, delta=1.0):
    """Rows over omega for D = delta * B.

    ``shape`` is either SpectralWeights of a 2D curve or a tuple (p1, p2, p3) of
    ellipsoid semi-axes.  Returns (columns, rows).  In 2D only |Im Tr M| is
    tabulated; the ellipsoid bound column is NaN for curves and the ellipse
    bound column is NaN for ellipsoids.
    """
    rows = []
    if isinstance(shape, tuple):
        p = np.asarray(shape, float) * delta
        vol = ellipsoid_volume(*p)
        s = s_factors(*p)
        for w in omegas:
            lam = lambda_of(mat.mu_c(w), mat.mu_m)
            cs = averaged_cross_sections(ellipsoid_polarization(*p, lam), mat.k_m(w))
            rows.append((w, lam.real, lam.imag, cs.q_ext, cs.q_s, cs.q_a,
                         bound_general(lam, vol, 3), np.nan, bound_ellipsoid(lam, vol, s)))
        return SWEEP_COLUMNS_3D, np.array(rows, dtype=float)
    vol = shape.area * delta**2
    for w in omegas:
        lam = lambda_of(mat.mu_c(w), mat.mu_m)
        M = polarization_spectral(shape, lam).M * delta**2
        rows.append((w, lam.real, lam.imag, abs(np.trace(M).imag),
                     bound_general(lam, vol, 2), bound_ellipse(lam, vol), np.nan))
    return SWEEP_COLUMNS_2D, np.array(rows, dtype=float)
