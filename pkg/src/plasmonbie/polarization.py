"""First-order polarization tensors, their spectral weights and sum rules.

M(lam, D)_{lm} = integral over the boundary of x_l (lam I - K*)^{-1}[nu_m].
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NearSingularError, PrecisionError, UnderResolutionError
from .geometry2d import area

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class PolarizationTensor:
    d: int
    M: np.ndarray
    lam: complex

    def rotated(self, R):
        return PolarizationTensor(self.d, R @ self.M @ R.T, self.lam)

    @property
    def trace(self):
        return complex(np.trace(self.M))


def polarization_direct(grid, ops, lam, eigenvalues=None):
    """Solve (lam I - K*) u_m = nu_m and integrate x_l u_m."""
    lam = complex(lam)
    K = ops.Kstar.matrix
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvals(K)
    dist = float(np.min(np.abs(np.asarray(eigenvalues) - lam)))
    if dist < SINGULAR_TOL:
        raise NearSingularError(f"lam = {lam} lies on the discrete spectrum", dist)
    A = lam * np.eye(grid.N) - K
    U = np.linalg.solve(A, grid.normals.astype(complex))
    X = (grid.points - grid.center) * grid.weights[:, None]
    M = X.T @ U
    if lam.imag == 0:
        M = M.real.astype(complex)
    return PolarizationTensor(2, M, lam)


@dataclass(frozen=True)
class SpectralWeights:
    """alpha[j-1, l, m] = (nu_m, phi_j)_H* (phi_j, x_l) for modes j >= 1."""

    eigenvalues: np.ndarray
    alpha: np.ndarray
    area: float

    @property
    def beta(self):
        return np.einsum("jll->j", self.alpha)


def spectral_weights(data, grid, tol=1e-8):
    Phi = data.eigenvectors
    P = Phi.T @ (data.gram @ grid.normals)            # (nu_m, phi_j)_H*
    X = grid.points - grid.center
    Q = Phi.T @ (grid.weights[:, None] * X)            # (phi_j, x_l)
    Q_alt = P / (0.5 - data.eigenvalues)[:, None]
    scale = max(1.0, float(np.abs(Q).max()))
    err = float(np.abs(Q - Q_alt).max())
    if err > tol * scale:
        raise UnderResolutionError(
            f"moment identity violated by {err:.2e}; increase N")
    alpha = np.einsum("jl,jm->jlm", Q, P)
    return SpectralWeights(data.eigenvalues, alpha, area(grid))


def polarization_spectral(weights, lam, J=None):
    """Truncated sum over modes J (1-based; None means all)."""
    lam = complex(lam)
    if J is None:
        sel = np.arange(len(weights.eigenvalues))
    else:
        sel = np.asarray(list(J), dtype=int) - 1
    d = weights.alpha.shape[1]
    if sel.size == 0:
        return PolarizationTensor(d, np.zeros((d, d), complex), lam)
    M = np.einsum("jlm,j->lm", weights.alpha[sel], 1.0 / (lam - weights.eigenvalues[sel]))
    return PolarizationTensor(d, M, lam)


@dataclass(frozen=True)
class SumRules:
    r1: float            # relative to |D|
    r2: float
    r3: float
    second_moment: float
    rhs_formula: float
    rhs_split: float     # -I1 + I2 route through the double layer trace


def sum_rules(weights, grid, ops):
    d = 2
    D = weights.area
    lam, alpha, beta = weights.eigenvalues, weights.alpha, weights.beta
    r1 = np.linalg.norm(alpha.sum(axis=0) - D * np.eye(d)) / D
    r2 = abs(np.sum(lam * beta) - (d - 2) * D / 2)
    second = float(np.sum(lam**2 * beta))

    w = grid.weights
    nu = grid.normals
    X = grid.points - grid.center
    S, K, Ks = ops.S.matrix, ops.K.matrix, ops.Kstar.matrix
    dS_in = Ks @ nu - 0.5 * nu                        # interior normal derivative of S[nu_l]
    grad_energy = float(np.sum(w[:, None] * (S @ nu) * dS_in))
    rhs = (d - 4) * D / 4 + grad_energy
    I1 = float(np.sum(w[:, None] * X / 2 * dS_in))
    dlp_in = 0.5 * X + K @ X                          # interior trace of D[y_l]
    I2 = float(np.sum(w[:, None] * dlp_in * dS_in))
    rhs_split = (d - 2) * D / 4 - I1 + I2
    return SumRules(float(r1), float(r2), abs(second - rhs), second, rhs, rhs_split)


def s_factors(p1, p2, p3):
    """Depolarization integrals s_l, with S[nu_l] = s_l x_l inside the ellipsoid."""
    p = np.array([p1, p2, p3], dtype=float)
    if np.any(p <= 0):
        raise ValueError("semi-axes must be positive")
    out = []
    for l in range(3):
        def f(th, l=l):
            s = np.tan(th) ** 2
            ds = 2 * np.tan(th) / np.cos(th) ** 2
            return ds / ((p[l] ** 2 + s) * np.sqrt(np.prod(p**2 + s)))
        val, err = integrate.quad(f, 0, np.pi / 2, epsabs=1e-15, epsrel=1e-13, limit=200)
        if err > 1e-10:
            raise PrecisionError(f"s-factor quadrature did not converge (error {err:.1e})")
        out.append(-np.prod(p) / 2 * val)
    if abs(sum(out) + 1) > 1e-10:
        raise PrecisionError(f"depolarization sum {sum(out)} differs from -1")
    return tuple(out)


def ellipsoid_volume(p1, p2, p3):
    return 4 * np.pi / 3 * p1 * p2 * p3


def ellipsoid_polarization(p1, p2, p3, lam, rotation=None):
    """Diagonal tensor |D| / (lam - 1/2 - s_l), optionally rotated."""
    lam = complex(lam)
    s = np.array(s_factors(p1, p2, p3))
    poles = 0.5 + s
    dist = float(np.min(np.abs(lam - poles)))
    if dist < SINGULAR_TOL:
        raise NearSingularError(f"lam = {lam} sits on a depolarization pole", dist)
    M = np.diag(ellipsoid_volume(p1, p2, p3) / (lam - poles))
    if rotation is not None:
        M = rotation @ M @ rotation.T
    return PolarizationTensor(3, M, lam)


def ellipse_polarization(a, b, lam, rotation=0.0):
    """Closed form for an ellipse with semi-axes a, b rotated by ``rotation``."""
    lam = complex(lam)
    D = np.pi * a * b
    l1 = 0.5 * (a - b) / (a + b)
    M = np.diag([D / (lam - l1), D / (lam + l1)])
    c, s = np.cos(rotation), np.sin(rotation)
    R = np.array([[c, -s], [s, c]])
    return PolarizationTensor(2, R @ M @ R.T, lam)


def contracted_N(M):
    """(N++, N+-, N-+, N--) from a 2x2 tensor."""
    M = M.M if isinstance(M, PolarizationTensor) else np.asarray(M)
    m11, m12, m22 = M[0, 0], 0.5 * (M[0, 1] + M[1, 0]), M[1, 1]
    npp = m11 - m22 + 2j * m12
    npm = m11 + m22
    nmm = m11 - m22 - 2j * m12
    return npp, npm, npm, nmm


def contracted_N_direct(grid, ops, lam):
    """Same four numbers from densities e^{+-i theta_nu} and weights |x| e^{+-i theta_x}."""
    nu = grid.normals[:, 0] + 1j * grid.normals[:, 1]
    X = grid.points - grid.center
    z = X[:, 0] + 1j * X[:, 1]
    A = complex(lam) * np.eye(grid.N) - ops.Kstar.matrix
    up, um = np.linalg.solve(A, np.stack([nu, nu.conj()], axis=1)).T
    w = grid.weights
    return (np.sum(w * z * up), np.sum(w * z * um),
            np.sum(w * z.conj() * up), np.sum(w * z.conj() * um))
