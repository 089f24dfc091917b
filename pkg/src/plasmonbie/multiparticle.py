"""Arrays of small plasmonic spheres: dipole hybridization and the resonant Green function.

Particles are D_l = z_l + delta B with B the unit ball.  Only the dipole triple
(lambda_j = 1/6, densities proportional to nu_a) is retained; mode j = a means the
dipole along the a-th coordinate axis.
"""

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .errors import (ConfigurationError, DegeneracyError, DomainWarning, InvalidGeometryError,
                     PoleProximityError, PrecisionError, ResolutionError)
from .resonance import lambda_of
from .spherequad import product_rule

DIPOLE_LAMBDA = 1.0 / 6.0
SEPARATION_FLOOR = 5.0
SYMMETRY_TOL = 1e-12
SPLIT_GAP = 1e-12
POLE_TOL = 1e-14
FORMS = ("paper", "dipole")


@dataclass(frozen=True)
class ParticleArray:
    centers: np.ndarray
    delta: float
    separation_floor: float = SEPARATION_FLOOR

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 3)
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)
        if self.delta <= 0:
            raise InvalidGeometryError("delta must be positive")
        for p, q in itertools.combinations(range(len(c)), 2):
            dist = np.linalg.norm(c[p] - c[q])
            if dist == 0:
                raise InvalidGeometryError(f"particles {p} and {q} share a center")
            if dist < self.separation_floor * self.delta:
                raise InvalidGeometryError(
                    f"particles {p} and {q} are {dist:.3g} apart, below "
                    f"{self.separation_floor} * delta = {self.separation_floor * self.delta:.3g}")

    @property
    def L(self):
        return len(self.centers)


@dataclass(frozen=True)
class SphereQuad:
    """Product rule on the radius-delta sphere at the origin with H*-normalized dipole densities.

    phi[a] = nu_a / c with c^2 = (nu_a, nu_a)_H* = 4 pi delta^3 / 9, using S[nu_a] = -x_a / 3.
    """

    delta: float
    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    phi: np.ndarray          # (3, n)
    c: float

    @property
    def moments(self):
        """moments[a, b] = integral of x_b phi_a."""
        return (self.phi * self.weights) @ self.nodes

    @property
    def hstar_normals(self):
        """h[a, b] = (nu_b, phi_a)_H* = -integral of nu_b S[phi_a]."""
        S_phi = -self.nodes.T / (3 * self.c)
        return -(S_phi * self.weights) @ self.normals

    def gram(self):
        S_phi = -self.nodes.T / (3 * self.c)
        return -(self.phi * self.weights) @ S_phi.T


def sphere_quad(delta, n_theta=8, tol=1e-8):
    rule = product_rule(n_theta, radius=delta)
    c = np.sqrt(4 * np.pi * delta**3 / 9)
    q = SphereQuad(float(delta), rule.nodes, rule.weights, rule.normals, rule.normals.T / c, c)
    err = np.abs(q.gram() - np.eye(3)).max()
    if err > tol:
        raise PrecisionError(f"dipole Gram matrix off identity by {err:.1e}; raise n_theta")
    return q


def dipole_moment(delta):
    """Exact integral of x_a phi_a on the radius-delta sphere: sqrt(4 pi delta^3)."""
    return np.sqrt(4 * np.pi * delta**3)


def _prefactors(mat, omega, form, lam_j):
    mu_c, mu_m = mat.mu_c(omega), mat.mu_m
    if form == "paper":
        return (lam_j - 0.5) * 3 / (4 * np.pi * mu_c), (lam_j - 0.5) * (1 / mu_c - 1 / mu_m) / (4 * np.pi)
    if form == "dipole":
        g = (lam_j - 0.5) * (1 / mu_c + 1 / mu_m) / (4 * np.pi)
        return 3 * g, -g
    raise ConfigurationError(f"unknown coupling form {form!r}; expected one of {FORMS}")


def coupling_matrix(array, quad, j, mat, omega, form="paper", lam_j=DIPOLE_LAMBDA):
    """R_j by surface quadrature of the double integrals.

    form "paper":  (lam_j - 1/2)[3/(4 pi mu_c) int int (d.x)(d.y)/|d|^5 phi phi
                                 + (1/(4 pi mu_c) - 1/(4 pi mu_m)) int int x.y/|d|^3 phi phi]
    form "dipole": (lam_j - 1/2)(1/mu_c + 1/mu_m)/(4 pi) int int (3 (dh.x)(dh.y) - x.y)/|d|^3 phi phi
    with d = z_p - z_q and dh = d/|d|.
    """
    if j not in (1, 2, 3):
        raise ConfigurationError("dipole mode j must be 1, 2 or 3")
    a, b = _prefactors(mat, omega, form, lam_j)
    wphi = quad.weights * quad.phi[j - 1]
    X = quad.nodes
    xy = (X @ X.T) * np.outer(wphi, wphi)
    R = np.zeros((array.L, array.L), dtype=complex)
    for p, q in itertools.permutations(range(array.L), 2):
        d = array.centers[p] - array.centers[q]
        r = np.linalg.norm(d)
        dx = X @ d
        t1 = np.sum(np.outer(dx, dx) * np.outer(wphi, wphi))
        t2 = np.sum(xy)
        if form == "paper":
            R[p, q] = a * t1 / r**5 + b * t2 / r**3
        else:
            R[p, q] = (a * t1 / r**2 + b * t2) / r**3
    return R


def coupling_matrix_analytic(array, j, mat, omega, form="paper", lam_j=DIPOLE_LAMBDA):
    """Same matrix with the dipole integrals reduced in closed form (moment sqrt(4 pi delta^3))."""
    if j not in (1, 2, 3):
        raise ConfigurationError("dipole mode j must be 1, 2 or 3")
    a, b = _prefactors(mat, omega, form, lam_j)
    m2 = dipole_moment(array.delta) ** 2
    R = np.zeros((array.L, array.L), dtype=complex)
    for p, q in itertools.permutations(range(array.L), 2):
        d = array.centers[p] - array.centers[q]
        r = np.linalg.norm(d)
        if form == "paper":
            R[p, q] = m2 * (a * d[j - 1] ** 2 / r**5 + b / r**3)
        else:
            R[p, q] = m2 * (a * d[j - 1] ** 2 / r**2 + b) / r**3
    return R


@dataclass(frozen=True)
class HybridizationResult:
    R: np.ndarray
    tau_j: complex
    splits: np.ndarray       # eigenvalues tau_{j,l} of R
    X: np.ndarray            # right eigenvectors (columns), unit 2-norm
    Xt: np.ndarray           # adjoint vectors with X^H Xt = I
    symmetry_residual: float
    biorthogonality_residual: float

    @property
    def tau_split(self):
        return self.tau_j + self.splits

    def projector(self, l):
        return np.outer(self.X[:, l], self.Xt[:, l].conj())


def hybridize(R, tau_j=0.0, gap=SPLIT_GAP):
    """Eigen-decomposition of the complex-symmetric R with dual vectors."""
    R = np.asarray(R, dtype=complex)
    L = R.shape[0]
    nR = np.linalg.norm(R)
    sym = float(np.linalg.norm(R - R.T) / nR) if nR > 0 else 0.0
    if sym > SYMMETRY_TOL:
        raise PrecisionError(f"coupling matrix not symmetric (residual {sym:.1e})")
    if nR == 0:
        vals, X = np.zeros(L, complex), np.eye(L, dtype=complex)
    else:
        vals, X = linalg.eig(R)
        for p, q in itertools.combinations(range(L), 2):
            if abs(vals[p] - vals[q]) < gap * max(nR, 1e-300):
                raise DegeneracyError("coupling matrix has (nearly) repeated eigenvalues")
        order = np.lexsort((vals.imag, vals.real))
        vals, X = vals[order], X[:, order]
        X = X / np.linalg.norm(X, axis=0)
        for l in range(L):
            k = int(np.argmax(np.abs(X[:, l]) > 1e-8 * np.abs(X[:, l]).max()))
            X[:, l] *= np.exp(-1j * np.angle(X[k, l]))
    Xt = np.linalg.inv(X.conj().T)
    bio = float(np.abs(X.conj().T @ Xt - np.eye(L)).max()) if L else 0.0
    return HybridizationResult(R, complex(tau_j), vals, X, Xt, sym, bio)


def tau_dipole(mat, omega, lam_j=DIPOLE_LAMBDA):
    mu_c = mat.mu_c(omega)
    return 1 / (2 * mat.mu_m) + 1 / (2 * mu_c) - (1 / mu_c - 1 / mat.mu_m) * lam_j


def dipole_hybridization(array, quad, mat, omega, modes=(1, 2, 3), form="paper"):
    tau = tau_dipole(mat, omega)
    return {j: hybridize(coupling_matrix(array, quad, j, mat, omega, form), tau) for j in modes}


def validity_ratio(omega, delta):
    """omega^2 / delta; the expansions assume this is small."""
    return omega**2 / delta


def free_green(x, y, k):
    r = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    return -np.exp(1j * k * r) / (4 * np.pi * r)


def im_free_green(x, y, k):
    """Imaginary part of the free Green function, finite at x = y."""
    r = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    return -k * np.sinc(k * r / np.pi) / (4 * np.pi)


def _source_terms(x0, array, quad, j):
    """H_{j,p}(x0) = -((z_p - x0) . h_j) / (4 pi |z_p - x0|^3)."""
    d = array.centers - np.asarray(x0, float)
    r = np.linalg.norm(d, axis=1)
    return -(d @ quad.hstar_normals[j - 1]) / (4 * np.pi * r**3)


def _receiver_terms(x, array, quad, j, k):
    """S_{j,q}(x, k) = G(x, z_q, k) (x - z_q) . m_j / |x - z_q|^2, for points x of shape (..., 3)."""
    x = np.asarray(x, float)
    d = x[..., None, :] - array.centers
    r = np.linalg.norm(d, axis=-1)
    G = -np.exp(1j * k * r) / (4 * np.pi * r)
    return G * (d @ quad.moments[j - 1]) / r**2


def _check_domain(points, array, k):
    pts = np.asarray(points, float).reshape(-1, 3)
    if array.L == 0 or pts.size == 0:
        return
    r = np.linalg.norm(pts[:, None, :] - array.centers, axis=-1)
    near = np.min(r) < SEPARATION_FLOOR * array.delta
    far = k > 0 and np.max(r) > 1 / k
    if near or far:
        warnings.warn("evaluation points outside the intermediate zone "
                      "(|x - z_l| >> delta and |x - z_l| << 1/k_m)", DomainWarning, stacklevel=3)


def _denominators(hyb, mat, omega, lam):
    contrast = 1 / mat.mu_c(omega) - 1 / mat.mu_m
    den = lam - DIPOLE_LAMBDA + hyb.splits / contrast
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleProximityError("evaluation frequency sits on a hybridized resonance")
    return den


def _modal_kernel(hyb, den):
    """sum_l P_l / den_l, an L x L matrix acting as H^T K S."""
    return sum(np.outer(hyb.Xt[:, l].conj(), hyb.X[:, l]) / den[l] for l in range(len(den)))


@dataclass(frozen=True)
class GreenParts:
    free: complex
    scattered: complex
    remainder_scale: float    # delta^3, the size of the neglected terms

    @property
    def total(self):
        return self.free + self.scattered


def green_function(x, x0, array, quad, mat, omega, modes=(1, 2, 3), form="paper",
                   quasi_static=False, hybrids=None, parts=False):
    """Free Green function plus the resonant dipole expansion over hybridized modes.

    With ``quasi_static`` the receiver terms use k = 0, which makes the scattered
    part exactly symmetric in (x, x0).
    """
    k = mat.k_m(omega)
    _check_domain(np.stack([x, x0]), array, k)
    free = complex(free_green(x, x0, k))
    scat = 0j
    if array.L:
        lam = lambda_of(mat.mu_c(omega), mat.mu_m)
        hybrids = hybrids or dipole_hybridization(array, quad, mat, omega, modes, form)
        kr = 0.0 if quasi_static else k
        for j in modes:
            den = _denominators(hybrids[j], mat, omega, lam)
            H = _source_terms(x0, array, quad, j)
            S = _receiver_terms(x, array, quad, j, kr)
            scat += complex(H @ _modal_kernel(hybrids[j], den) @ S)
    out = GreenParts(free, scat, array.delta**3)
    return out if parts else out.total


@dataclass(frozen=True)
class FieldMap:
    s: np.ndarray
    t: np.ndarray
    points: np.ndarray       # (ns, nt, 3)
    im_gamma: np.ndarray     # (ns, nt)
    im_free: np.ndarray


@dataclass(frozen=True)
class PeakMetrics:
    peak_point: tuple
    peak_value: float
    fwhm_s: float
    fwhm_t: float
    fwhm: float              # max of the two axes
    reference_fwhm: float    # |Im G| of free space, 2 x_half / k_m with sin(x)/x = 1/2
    wavelength: float
    validity_ratio: float
    max_scattered: float
    max_free: float


def reference_fwhm(k):
    x_half = optimize.brentq(lambda x: np.sin(x) / x - 0.5, 1.0, 3.0, xtol=1e-15)
    return 2 * x_half / k


def _half_width(profile, i, h):
    """Distance from index i to the half-maximum crossing on each side (linear interpolation)."""
    half = profile[i] / 2
    out = []
    for step in (-1, 1):
        k = i
        while 0 <= k + step < len(profile) and profile[k + step] > half:
            k += step
        if not 0 <= k + step < len(profile):
            raise ResolutionError("half-maximum not reached inside the raster; enlarge it")
        a, b = profile[k], profile[k + step]
        out.append((abs(k - i) + (a - half) / (a - b)) * h)
    return sum(out)


def im_green_map(s, t, x0, array, quad, mat, omega, origin=(0.0, 0.0, 0.0),
                 u=(0.0, 1.0, 0.0), v=(0.0, 0.0, 1.0), modes=(1, 2, 3), form="paper",
                 quasi_static=False, hybrids=None):
    """Raster of Im Gamma(origin + s u + t v, x0) with peak metrics."""
    s, t = np.asarray(s, float), np.asarray(t, float)
    if s.size < 3 or t.size < 3:
        raise ResolutionError("raster needs at least 3 samples per axis")
    u, v = np.asarray(u, float), np.asarray(v, float)
    P = np.asarray(origin, float) + s[:, None, None] * u + t[None, :, None] * v
    k = mat.k_m(omega)
    _check_domain(P, array, k)
    im_free = im_free_green(P, x0, k)
    scat = np.zeros(P.shape[:2], complex)
    if array.L:
        lam = lambda_of(mat.mu_c(omega), mat.mu_m)
        hybrids = hybrids or dipole_hybridization(array, quad, mat, omega, modes, form)
        kr = 0.0 if quasi_static else k
        for j in modes:
            den = _denominators(hybrids[j], mat, omega, lam)
            H = _source_terms(x0, array, quad, j)
            S = _receiver_terms(P, array, quad, j, kr)
            scat += S @ (H @ _modal_kernel(hybrids[j], den))
    im = im_free + scat.imag
    fmap = FieldMap(s, t, P, im, im_free)
    return fmap, peak_metrics(fmap, x0, k, omega, array.delta, np.abs(scat.imag).max())


def peak_metrics(fmap, x0, k, omega, delta, max_scattered=0.0):
    A = np.abs(fmap.im_gamma)
    inner = A[1:-1, 1:-1]
    is_max = np.ones_like(inner, dtype=bool)
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        is_max &= inner >= A[1 + di:A.shape[0] - 1 + di, 1 + dj:A.shape[1] - 1 + dj]
    cand = np.argwhere(is_max) + 1
    if cand.size == 0:
        raise ResolutionError("no interior peak in the raster")
    dist = np.linalg.norm(fmap.points[cand[:, 0], cand[:, 1]] - np.asarray(x0, float), axis=1)
    i, j = cand[np.argmin(dist)]
    hs = fmap.s[1] - fmap.s[0]
    ht = fmap.t[1] - fmap.t[0]
    fs = _half_width(A[:, j], i, hs)
    ft = _half_width(A[i, :], j, ht)
    if max(hs, ht) > min(fs, ft) / 4:
        raise ResolutionError(f"raster step {max(hs, ht):.3g} too coarse for a peak of width "
                              f"{min(fs, ft):.3g}")
    return PeakMetrics(tuple(float(c) for c in fmap.points[i, j]), float(fmap.im_gamma[i, j]),
                       float(fs), float(ft), float(max(fs, ft)), float(reference_fwhm(k)),
                       float(2 * np.pi / k), float(validity_ratio(omega, delta)),
                       float(max_scattered), float(np.abs(fmap.im_free).max()))


def resonant_frequency(array, quad, mat, omega_range, j=1, l=0, form="paper", n_scan=2001):
    """Frequency minimizing |lambda - 1/6 + tau_{j,l}/(1/mu_c - 1/mu_m)| over a scan plus refinement."""
    def den(w):
        hyb = hybridize(coupling_matrix_analytic(array, j, mat, w, form))
        return abs(lambda_of(mat.mu_c(w), mat.mu_m) - DIPOLE_LAMBDA
                   + hyb.splits[l] / (1 / mat.mu_c(w) - 1 / mat.mu_m))
    grid = np.linspace(*omega_range, n_scan)
    vals = np.array([den(w) for w in grid])
    i = int(np.clip(np.argmin(vals), 1, n_scan - 2))
    res = optimize.minimize_scalar(den, bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                   options={"xatol": 1e-14})
    return float(res.x)


def plane_wave_response(array, quad, mat, omega, d, j=1, form="paper", hybrids=None):
    """Modal amplitudes for a plane wave e^{i k d.x}, weights Z_l = i k e^{i k d.z_l} (d . h_j)."""
    d = np.asarray(d, float) / np.linalg.norm(d)
    k = mat.k_m(omega)
    hyb = (hybrids or dipole_hybridization(array, quad, mat, omega, (j,), form))[j]
    lam = lambda_of(mat.mu_c(omega), mat.mu_m)
    den = _denominators(hyb, mat, omega, lam)
    Z = 1j * k * np.exp(1j * k * array.centers @ d) * (quad.hstar_normals[j - 1] @ d)
    return _modal_kernel(hyb, den).T @ Z
