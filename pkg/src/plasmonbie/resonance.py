"""Drude permeability, contrast parameter, plasmonic resonances and their size corrections."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .errors import ConditionWarning, ConfigurationError, PrecisionError
from .operators2d import assemble_freq_correction, assemble_helmholtz
from .spectral import require_simple
from .spherequad import polar_rule, product_rule


@dataclass(frozen=True)
class Drude:
    mu0: float = 1.0
    filling: float = 0.0
    omega0: float = 0.0
    tau: float = np.inf          # relaxation time; damping rate is 1/tau

    def __post_init__(self):
        if not 0 <= self.filling <= 1:
            raise ConfigurationError("filling factor must lie in [0, 1]")
        if self.omega0 < 0 or self.tau <= 0:
            raise ConfigurationError("omega0 must be >= 0 and tau > 0")


@dataclass(frozen=True)
class Material:
    """Background (eps_m, mu_m) and particle (eps_c, mu_c(omega)).

    mu_c comes from ``drude`` unless ``mu_c_fixed`` is given.
    """

    eps_m: float = 1.0
    mu_m: float = 1.0
    eps_c: complex = 1.0
    drude: Drude = field(default_factory=Drude)
    mu_c_fixed: complex = None

    def __post_init__(self):
        if self.eps_m <= 0 or self.mu_m <= 0:
            raise ConfigurationError("eps_m and mu_m must be positive")

    def mu_c(self, omega):
        if self.mu_c_fixed is not None:
            return complex(self.mu_c_fixed)
        return drude_mu(omega, self)

    def k_m(self, omega):
        return omega * np.sqrt(self.eps_m * self.mu_m)

    def k_c(self, omega):
        return wavenumber(omega, self.eps_c, self.mu_c(omega))


def wavenumber(omega, eps, mu):
    """omega sqrt(eps mu) on the branch with Im k >= 0."""
    k = omega * np.sqrt(complex(eps) * complex(mu))
    return -k if k.imag < 0 else k


def drude_mu(omega, mat):
    d = mat.drude if isinstance(mat, Material) else mat
    omega = np.asarray(omega, dtype=float)
    damp = 0.0 if np.isinf(d.tau) else 1.0 / d.tau
    val = d.mu0 * (1 - d.filling * omega**2 / (omega**2 - d.omega0**2 + 1j * damp * omega))
    return complex(val) if val.ndim == 0 else val


def negative_window(omega, drude):
    """True where Re mu_c(omega) < 0, from the quadratic criterion in omega^2."""
    damp = 0.0 if np.isinf(drude.tau) else 1.0 / drude.tau
    a = np.asarray(omega) ** 2 - drude.omega0**2
    return (1 - drude.filling) * a**2 - drude.filling * drude.omega0**2 * a + damp**2 * np.asarray(omega) ** 2 < 0


def lambda_of(mu_c, mu_m):
    """Contrast parameter (mu_m + mu_c) / (2 (mu_m - mu_c))."""
    if np.any(np.asarray(mu_c) == mu_m):
        raise ZeroDivisionError("mu_c equals mu_m: contrast parameter is infinite")
    lam = (mu_m + np.asarray(mu_c)) / (2 * (mu_m - np.asarray(mu_c)))
    if np.any(lam == 0):
        warnings.warn("mu_c = -mu_m gives lambda = 0", ConditionWarning, stacklevel=2)
    return complex(lam) if np.ndim(lam) == 0 else lam


def tau_static(lam_j, mu_c, mu_m):
    return 1 / (2 * mu_m) + 1 / (2 * mu_c) - (1 / mu_c - 1 / mu_m) * lam_j


def tau_j(j, data, mat, omega):
    """Static tau_j at the permeability mu_c(omega); j = 0 gives 1/mu_m."""
    lam_j = 0.5 if j == 0 else data.eigenvalues[j - 1]
    return tau_static(lam_j, mat.mu_c(omega), mat.mu_m)


@dataclass(frozen=True)
class CorrectionCoefficients:
    """Geometric parts of a size correction R = (eps_m - eps_c) a + ((eps_m mu_m - eps_c mu_c)/mu_c) b."""

    eps_part: complex
    mu_part: complex
    kind: str

    def value(self, mat, mu_c):
        return ((mat.eps_m - mat.eps_c) * self.eps_part
                + (mat.eps_m * mat.mu_m - mat.eps_c * mu_c) / mu_c * self.mu_part)


def correction_matrices_2d(bs):
    """(R_K, R_S) with R_K[j,l] = (K1 phi_j, phi_l)_H*, R_S[j,l] = ((1/2 - K*) Stilde^{-1} S1 phi_j, phi_l)_H*.

    On mean-zero modes the projection onto H*_0 acts as the identity, so the
    2D correction operator restricted to modes j >= 1 is
    (eps_m - eps_c) K1 + ((mu_m eps_m - mu_c eps_c)/mu_c) (1/2 - K*) Stilde^{-1} S1.
    """
    grid, ops, data = bs.grid, bs.ops, bs.data
    S1, K1 = assemble_freq_correction(grid)
    T = (0.5 * np.eye(grid.N) - ops.Kstar.matrix) @ linalg.solve(ops.Stilde.matrix, S1.matrix)
    Phi, B = data.eigenvectors, data.gram
    RK = (K1.matrix @ Phi).T @ B @ Phi
    RS = (T @ Phi).T @ B @ Phi
    return RK, RS


def correction_operator_2d(bs, mat, mu_c):
    """Nodal matrix of the full 2D correction operator, including the projection onto H*_0."""
    grid, ops = bs.grid, bs.ops
    S1, K1 = assemble_freq_correction(grid)
    I = np.eye(grid.N)
    P0 = I - np.outer(bs.data.phi0, grid.weights)
    T = (0.5 * I - ops.Kstar.matrix) @ linalg.solve(ops.Stilde.matrix, S1.matrix)
    return (K1.matrix @ (mat.eps_m * I - mat.eps_c * P0)
            + T @ (mat.mu_m * mat.eps_m * I - mu_c * mat.eps_c * P0) / mu_c)


def correction_2d(j, bs, mat=None, mu_c=None, matrices=None):
    """Coefficient tau_{j,1} of omega^2 log(omega) in tau_j(omega).

    Returns CorrectionCoefficients when ``mat`` is None, else the value at mu_c.
    """
    require_simple(bs.data, j)
    RK, RS = correction_matrices_2d(bs) if matrices is None else matrices
    coeff = CorrectionCoefficients(RK[j - 1, j - 1], RS[j - 1, j - 1], "2d")
    if mat is None:
        return coeff
    return coeff.value(mat, mu_c)


def assemble_A(grid, mat, omega):
    """Full frequency-dependent operator (1/mu_m)(1/2 + K*^{k_m}) + (1/mu_c)(1/2 - K*^{k_c})(S^{k_c})^{-1} S^{k_m}."""
    mu_c = mat.mu_c(omega)
    Skm, Kkm = assemble_helmholtz(grid, mat.k_m(omega))
    Skc, Kkc = assemble_helmholtz(grid, wavenumber(omega, mat.eps_c, mu_c))
    I = np.eye(grid.N)
    return ((0.5 * I + Kkm.matrix) / mat.mu_m
            + (0.5 * I - Kkc.matrix) @ linalg.solve(Skc.matrix, Skm.matrix) / mu_c)


def track_eigenvalue(A, data, j):
    """Eigenvalue of A whose eigenvector overlaps most with phi_j in the H* norm."""
    vals, vecs = linalg.eig(A)
    B = data.gram
    phi = data.eigenvectors[:, j - 1]
    norms = np.sqrt(np.real(np.einsum("ik,ij,jk->k", vecs.conj(), B, vecs)))
    overlap = np.abs(phi @ B @ vecs) / norms
    i = int(np.argmax(overlap))
    return vals[i], float(overlap[i])


def _unit_dipole():
    c2 = 4 * np.pi / 9          # (nu_3, nu_3)_H* on the unit sphere
    return np.sqrt(c2)


def correction_3d_sphere(n_outer=16, n_inner=24):
    """Geometric parts of tau_{j,2} for the dipole mode of the unit sphere.

    The kernels are (1/4pi)<x-y, nu(x)>/|x-y| and -|x-y|/(4pi).  The outer
    integral uses a product rule, the inner one a polar rule centred at the
    target point so that the |x-y| cone is resolved spectrally.
    """
    c = _unit_dipole()
    outer = product_rule(n_outer)
    Kphi = np.empty(len(outer.weights))
    Sphi = np.empty(len(outer.weights))
    for i, x in enumerate(outer.nodes):
        inner = polar_rule(x, n_inner)
        y = inner.nodes
        dist = np.linalg.norm(x - y, axis=1)
        phi_y = y[:, 2] / c
        Kphi[i] = np.sum(inner.weights * ((x - y) @ x) / dist * phi_y) / (4 * np.pi)
        Sphi[i] = -np.sum(inner.weights * dist * phi_y) / (4 * np.pi)
    x3 = outer.nodes[:, 2]
    S_phi = -x3 / (3 * c)                                   # single layer of the dipole density
    eps_part = -np.sum(outer.weights * Kphi * S_phi)       # (K2 phi, phi)_H*
    mu_part = -(0.5 - 1 / 6) * np.sum(outer.weights * Sphi * x3 / c)
    return CorrectionCoefficients(eps_part, mu_part, "3d-sphere")


def checked_correction_3d_sphere(n_outer=16, n_inner=24, tol=1e-5):
    a = correction_3d_sphere(n_outer, n_inner)
    b = correction_3d_sphere(n_outer + 8, n_inner + 12)
    if abs(a.eps_part - b.eps_part) > tol or abs(a.mu_part - b.mu_part) > tol:
        raise PrecisionError("sphere correction quadrature not converged")
    return b


def sphere_correction(coeffs, mat, delta):
    """Callable omega -> omega^2 delta^2 tau_{j,2}(omega) for a sphere of radius delta."""
    return lambda omega: omega**2 * delta**2 * coeffs.value(mat, mat.mu_c(omega))


def planar_correction(coeffs, mat, delta):
    """Callable omega -> (omega delta)^2 log(omega delta) tau_{j,1}(omega) for D = delta B."""
    def f(omega):
        w = omega * delta
        return w**2 * np.log(w) * coeffs.value(mat, mat.mu_c(omega))
    return f


@dataclass(frozen=True)
class ResonanceReport:
    j: int
    lam_j: float
    omega_qs: float          # Re lambda(omega) = lam_j
    omega_min: float         # local minimizer of |tau_j(omega)|
    omega_corr: float        # local minimizer of |tau_j(omega) + correction(omega)|
    shift: float             # omega_corr - omega_min
    tau_min: complex
    tau_corr_min: complex
    min_tau_over_omega3: float
    delta: float
    samples: tuple = ()


def _golden(f, lo, mid, hi, tol):
    if f(mid) < f(lo) and f(mid) < f(hi):
        res = optimize.minimize_scalar(f, bracket=(lo, mid, hi), method="golden",
                                       options={"xtol": tol})
        if lo <= res.x <= hi:
            return float(res.x)
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol * max(abs(mid), 1)})
    return float(res.x)


def _local_min_near(f, grid, x0, tol=1e-12):
    """Golden-section refinement of the discrete local minimum of f closest to x0."""
    vals = np.array([f(w) for w in grid])
    interior = np.flatnonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])) + 1
    if interior.size == 0:
        i = int(np.argmin(vals))
        return float(grid[i])
    i = interior[np.argmin(np.abs(grid[interior] - x0))]
    return _golden(f, grid[i - 1], grid[i], grid[i + 1], tol)


def find_resonances(mat, eigenvalues, omega_range, correction=None, delta=0.0,
                    n_scan=2001, modes=None):
    """Quasi-static and corrected resonances for each eigenvalue in the range.

    ``correction`` maps omega to the additive size correction of tau_j.
    """
    lo, hi = omega_range
    if not 0 < lo < hi:
        raise ConfigurationError("omega range must satisfy 0 < lo < hi")
    grid = np.linspace(lo, hi, n_scan)
    mu = np.array([mat.mu_c(w) for w in grid])
    lam = (mat.mu_m + mu) / (2 * (mat.mu_m - mu))
    step = grid[1] - grid[0]
    reports = []
    for idx, lam_j in enumerate(eigenvalues):
        j = idx + 1 if modes is None else modes[idx]
        g = lam.real - lam_j
        for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
            root = optimize.bisect(lambda w: lambda_of(mat.mu_c(w), mat.mu_m).real - lam_j,
                                   grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)

            def tau(w):
                return tau_static(lam_j, mat.mu_c(w), mat.mu_m)

            w_min = _local_min_near(lambda w: abs(tau(w)), grid, root)
            if correction is None:
                w_corr = w_min
                corr_min = tau(w_min)
            else:
                w_corr = _local_min_near(lambda w: abs(tau(w) + correction(w)), grid, w_min)
                corr_min = tau(w_corr) + correction(w_corr)
            a, b = max(lo, root - 4 * step), min(hi, root + 4 * step)
            ws = np.linspace(a, b, 9)
            samples = tuple((float(w), complex(tau(w))) for w in ws)
            reports.append(ResonanceReport(
                int(j), float(lam_j), float(root), w_min, w_corr, w_corr - w_min,
                complex(tau(w_min)), complex(corr_min), float(abs(tau(w_min)) / w_min**3),
                float(delta), samples))
    return reports
