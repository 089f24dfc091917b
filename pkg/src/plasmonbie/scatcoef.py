"""Scattering coefficients of a 2D particle at small frequency.

The density psi_m answers the cylindrical wave J_m(k_m|x|) e^{i m theta}; the
two-density transmission system

    S^{k_m} psi - S^{k_c} phi                                 = F1
    (1/mu_m)(1/2 + K*^{k_m}) psi + (1/mu_c)(1/2 - K*^{k_c}) phi = F2

is solved directly.  W_nm = integral of J_n(k_m|y|) e^{-i n theta_y} psi_m.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import hankel1, jv, jvp

from .errors import ConfigurationError, PrecisionError
from .operators2d import assemble_helmholtz
from .resonance import wavenumber

COND_LIMIT = 1e12
DEFAULT_N_MAX = 3


def _polar(points):
    return np.hypot(points[:, 0], points[:, 1]), np.arctan2(points[:, 1], points[:, 0])


def _check_origin_inside(grid):
    # winding number of the boundary about the origin
    ang = np.arctan2(grid.points[:, 1], grid.points[:, 0])
    steps = np.angle(np.exp(1j * np.diff(np.append(ang, ang[0]))))
    turns = np.sum(steps) / (2 * np.pi)
    if abs(abs(turns) - 1) > 1e-6 or np.min(np.hypot(*grid.points.T)) == 0:
        raise ConfigurationError("the origin must lie strictly inside the particle")


def cylindrical_wave(grid, k, m):
    """Boundary values of J_m(k r) e^{i m theta} and of its normal derivative."""
    r, th = _polar(grid.points)
    e = np.exp(1j * m * th)
    val = jv(m, k * r) * e
    dr = k * jvp(m, k * r) * e
    dth = 1j * m * jv(m, k * r) * e / r
    rhat = grid.points / r[:, None]
    that = np.stack([-rhat[:, 1], rhat[:, 0]], axis=1)
    grad_n = dr * np.sum(rhat * grid.normals, axis=1) + dth * np.sum(that * grid.normals, axis=1)
    return val, grad_n


@dataclass
class HelmholtzSystem:
    """Assembled operators at one frequency, reused across source orders."""

    grid: object
    omega: float
    k_m: complex
    k_c: complex
    mu_m: float
    mu_c: complex
    matrix: np.ndarray
    cond: float
    _lu: tuple = field(repr=False, default=None)
    Skm: np.ndarray = field(repr=False, default=None)
    Kkm: np.ndarray = field(repr=False, default=None)
    Skc: np.ndarray = field(repr=False, default=None)
    Kkc: np.ndarray = field(repr=False, default=None)

    def solve(self, rhs):
        return linalg.lu_solve(self._lu, rhs)


def helmholtz_system(grid, mat, omega, cond_limit=COND_LIMIT):
    _check_origin_inside(grid)
    mu_c = mat.mu_c(omega)
    k_m = mat.k_m(omega)
    k_c = wavenumber(omega, mat.eps_c, mu_c)
    Skm, Kkm = (op.matrix for op in assemble_helmholtz(grid, k_m))
    Skc, Kkc = (op.matrix for op in assemble_helmholtz(grid, k_c))
    I = np.eye(grid.N)
    A = np.block([[Skm, -Skc],
                  [(0.5 * I + Kkm) / mat.mu_m, (0.5 * I - Kkc) / mu_c]])
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > cond_limit:
        raise PrecisionError(
            f"transmission system condition number {cond:.2e} exceeds {cond_limit:.0e}; "
            "lower omega or increase N")
    return HelmholtzSystem(grid, float(omega), k_m, k_c, mat.mu_m, mu_c, A, cond,
                           linalg.lu_factor(A), Skm, Kkm, Skc, Kkc)


def solve_psi_m(grid, mat, omega, m, system=None):
    """Exterior density psi_m for the source J_m(k_m|x|) e^{i m theta}."""
    sys_ = system if system is not None else helmholtz_system(grid, mat, omega)
    val, dn = cylindrical_wave(grid, sys_.k_m, m)
    rhs = np.concatenate([-val, -dn / sys_.mu_m])
    return sys_.solve(rhs)[:grid.N]


def solve_psi_m_reduced(system, m):
    """Same density from the single-density form A(omega) psi = f (cross-check only)."""
    g, N = system.grid, system.grid.N
    val, dn = cylindrical_wave(g, system.k_m, m)
    I = np.eye(N)
    T = (0.5 * I - system.Kkc) / system.mu_c
    A = (0.5 * I + system.Kkm) / system.mu_m + T @ linalg.solve(system.Skc, system.Skm)
    f = -dn / system.mu_m + T @ linalg.solve(system.Skc, -val)
    return linalg.solve(A, f)


def scattering_coefficient(grid, psi_m, n, k_m):
    r, th = _polar(grid.points)
    return complex(np.sum(grid.weights * jv(n, k_m * r) * np.exp(-1j * n * th) * psi_m))


@dataclass(frozen=True)
class ScatteringCoefficients:
    W: dict
    omega: float
    k_m: float
    n_max: int

    def __getitem__(self, nm):
        return self.W[nm]

    def rows(self):
        return [(n, m, w.real, w.imag) for (n, m), w in sorted(self.W.items())]


def scattering_coefficients(grid, mat, omega, n_max=DEFAULT_N_MAX, m_max=None, system=None):
    """W_nm for |n| <= n_max and |m| <= m_max (default n_max)."""
    m_max = n_max if m_max is None else m_max
    sys_ = system if system is not None else helmholtz_system(grid, mat, omega)
    W = {}
    for m in range(-m_max, m_max + 1):
        psi = solve_psi_m(grid, mat, omega, m, sys_)
        for n in range(-n_max, n_max + 1):
            W[(n, m)] = scattering_coefficient(grid, psi, n, sys_.k_m)
    return ScatteringCoefficients(W, float(omega), float(np.real(sys_.k_m)), n_max)


def W1_matrix(W):
    a, b, c = W[(-1, 1)], W[(1, -1)], W[(1, 1)]
    off = 1j * (b - a)
    return np.array([[a + b - 2 * c, off], [off, -a - b - 2 * c]])


def decay_constant(W):
    """Smallest C with |W_nm| <= (C omega)^{|n|+|m|} / (|n|^|n| |m|^|m|) over n, m != 0."""
    best = 0.0
    for (n, m), w in W.W.items():
        if n == 0 or m == 0 or abs(w) == 0:
            continue
        p = abs(n) + abs(m)
        c = (abs(w) * abs(n) ** abs(n) * abs(m) ** abs(m)) ** (1 / p) / W.omega
        best = max(best, c)
    return best


def psi_leading(bs, mat, omega, m):
    """Leading small-omega density for m = +-1 built from the H* eigenpairs:

    -+omega sqrt(eps_m mu_m)/2 (1/mu_m - 1/mu_c) sum_j (e^{+-i theta_nu}, phi_j) phi_j / tau_j.

    The sign follows from projecting the source term; the opposite sign gives -psi.
    """
    if m not in (1, -1):
        raise ConfigurationError("leading-order density is available for m = +-1 only")
    data, grid = bs.data, bs.grid
    mu_c = mat.mu_c(omega)
    e = grid.normals[:, 0] + 1j * m * grid.normals[:, 1]
    tau = (0.5 / mat.mu_m + 0.5 / mu_c) - (1 / mu_c - 1 / mat.mu_m) * data.eigenvalues
    Phi = data.eigenvectors
    coef = (Phi.T @ (data.gram @ e)) / tau
    pref = -m * omega * np.sqrt(mat.eps_m * mat.mu_m) / 2 * (1 / mat.mu_m - 1 / mu_c)
    return pref * (Phi @ coef)


def plane_wave_synthesis_check(grid, mat, omega, theta_d=0.0, m_max=DEFAULT_N_MAX,
                               n_synth=14, ring_factor=10.0, n_ring=16):
    """Relative gap between the cylindrical-wave synthesis of the scattered field and
    direct evaluation of S^{k_m}[psi] on a far ring, psi = sum_m a_m psi_m, |m| <= m_max."""
    sys_ = helmholtz_system(grid, mat, omega)
    k = sys_.k_m
    a = {m: np.exp(1j * m * (np.pi / 2 - theta_d)) for m in range(-m_max, m_max + 1)}
    psi = {m: solve_psi_m(grid, mat, omega, m, sys_) for m in a}
    R = ring_factor * float(np.max(np.hypot(*grid.points.T)))
    phis = 2 * np.pi * np.arange(n_ring) / n_ring
    X = R * np.stack([np.cos(phis), np.sin(phis)], axis=1)
    total = sum(a[m] * psi[m] for m in a)
    dist = np.linalg.norm(X[:, None, :] - grid.points[None, :, :], axis=2)
    direct = (-0.25j * hankel1(0, k * dist)) @ (grid.weights * total)
    synth = np.zeros(n_ring, complex)
    for n in range(-n_synth, n_synth + 1):
        s = sum(scattering_coefficient(grid, psi[m], n, k) * a[m] for m in a)
        synth += -0.25j * hankel1(n, k * R) * np.exp(1j * n * phis) * s
    return float(np.linalg.norm(synth - direct) / np.linalg.norm(direct))
