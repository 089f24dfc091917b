"""Eigensystem of the Neumann-Poincare operator in the H* inner product."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, DegeneracyError, UnderResolutionError
from .geometry2d import discretize
from .operators2d import h_star_gram, layer_operators

SELF_ADJOINT_TOL = 1e-8
SIMPLE_GAP = 1e-10
DEFAULT_ETA0 = 0.1


@dataclass(frozen=True)
class SpectralData:
    """H*-orthonormal eigenpairs of K*.

    ``eigenvalues[j-1]`` and ``eigenvectors[:, j-1]`` hold mode j >= 1, ordered by
    |lambda| descending (ties: positive first).  Mode 0 (lambda = 1/2) is kept in
    ``phi0``, normalized so that its integral is 1 (it then has unit H* norm).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    phi0: np.ndarray
    lambda0: float
    gram: np.ndarray
    grid_key: str

    def mode(self, j):
        if j == 0:
            return self.lambda0, self.phi0
        return self.eigenvalues[j - 1], self.eigenvectors[:, j - 1]

    def inner(self, u, v):
        """(u, v)_H*, bilinear."""
        return u @ self.gram @ v

    @property
    def n_modes(self):
        return len(self.eigenvalues)


def self_adjointness_residual(Kstar, B):
    BK = B @ Kstar.matrix
    return np.linalg.norm(BK - BK.T) / np.linalg.norm(BK)


def _order(lam):
    idx = np.argsort(-np.abs(lam), kind="stable")
    out, i = [], 0
    while i < len(idx):
        k = i + 1
        while k < len(idx) and abs(abs(lam[idx[k]]) - abs(lam[idx[i]])) < SIMPLE_GAP:
            k += 1
        group = idx[i:k]
        out.extend(group[np.argsort(-lam[group], kind="stable")])
        i = k
    return np.array(out, dtype=int)


def _fix_sign(V):
    V = V.copy()
    for c in range(V.shape[1]):
        col = V[:, c]
        nz = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if col[nz[0]] < 0:
            V[:, c] = -col
    return V


def eigensystem(Kstar, B, weights, grid_key=""):
    """Solve B K* v = lambda B v by Cholesky reduction (scipy.linalg.eigh)."""
    res = self_adjointness_residual(Kstar, B)
    if res > SELF_ADJOINT_TOL:
        raise UnderResolutionError(
            f"K* is not H*-self-adjoint to tolerance (residual {res:.2e}); increase N")
    BK = B @ Kstar.matrix
    lam, V = linalg.eigh(0.5 * (BK + BK.T), B)
    i0 = int(np.argmin(np.abs(lam - 0.5)))
    phi0 = V[:, i0] / float(weights @ V[:, i0])
    lam0 = float(lam[i0])
    lam = np.delete(lam, i0)
    V = np.delete(V, i0, axis=1)
    if lam.max() > 0.5 + 1e-8 or lam.min() < -0.5 - 1e-8 or abs(lam0 - 0.5) > 1e-8:
        raise UnderResolutionError("eigenvalues outside (-1/2, 1/2]; increase N")
    order = _order(lam)
    lam, V = lam[order], _fix_sign(V[:, order])
    for a in (lam, V, phi0, B):
        a.setflags(write=False)
    return SpectralData(lam, V, phi0, lam0, B, grid_key)


def is_simple(data, j, gap=SIMPLE_GAP):
    lam = data.eigenvalues
    others = np.delete(lam, j - 1)
    return np.min(np.abs(others - lam[j - 1])) > gap


def require_simple(data, j, gap=SIMPLE_GAP):
    if not is_simple(data, j, gap):
        raise DegeneracyError(f"eigenvalue of mode {j} is not simple (gap <= {gap})")


def project_PJ(data, J, psi):
    """Spectral projection sum_{j in J} (psi, phi_j)_H* phi_j; J uses 1-based modes."""
    J = list(J)
    if any(j == 0 for j in J):
        raise ConfigurationError("the static mode 0 is never part of a resonance index set")
    if not J:
        return np.zeros_like(psi)
    cols = np.asarray(J) - 1
    Phi = data.eigenvectors[:, cols]
    return Phi @ (Phi.T @ (data.gram @ psi))


@dataclass(frozen=True)
class BoundarySpectrum:
    """Grid, Laplace operators and spectral data for one curve."""

    grid: object
    ops: object
    data: SpectralData


def boundary_spectrum(curve, N):
    grid = discretize(curve, N)
    ops = layer_operators(grid)
    B = h_star_gram(ops.Stilde, grid)
    data = eigensystem(ops.Kstar, B, grid.weights, grid.key)
    return BoundarySpectrum(grid, ops, data)
