"""Dense Nystrom matrices for 2D layer potentials on a QuadGrid2D.

Every matrix acts on nodal density samples with the quadrature weights
folded in: (A psi)_i ~ integral of kernel(x_i, y) psi(y) dsigma(y).

Log-singular kernels use the periodic kernel-splitting rule: write the
kernel as M1(t,s) log(4 sin^2((t-s)/2)) + M2(t,s) with M1, M2 smooth, integrate
the log factor against the trigonometric interpolant exactly (weights
``kress_weights``) and the smooth remainder by the trapezoid rule.  For
analytic curves the error decays exponentially in N.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import hankel1, jv

from .errors import ConfigurationError, GeometryScaleError

EULER_GAMMA = np.euler_gamma


@dataclass(frozen=True)
class NodalOperator:
    matrix: np.ndarray
    source: str
    target: str
    kernel: str

    def __matmul__(self, other):
        if isinstance(other, NodalOperator):
            if other.target != self.source:
                raise ConfigurationError("operator grids do not match")
            return NodalOperator(self.matrix @ other.matrix, other.source, self.target,
                                 f"{self.kernel}*{other.kernel}")
        return self.matrix @ other

    @property
    def shape(self):
        return self.matrix.shape


def _op(A, grid, tag):
    A = np.ascontiguousarray(A)
    A.setflags(write=False)
    return NodalOperator(A, grid.key, grid.key, tag)


def kress_weights(N):
    """R[d] for node offset d = i - j (mod N), N = 2n."""
    n = N // 2
    d = np.arange(N)
    m = np.arange(1, n)
    R = -(2 * np.pi / n) * (np.cos(np.outer(d, m) * np.pi / n) / m).sum(axis=1)
    R -= (np.pi / n**2) * np.cos(d * np.pi)
    return R


def _split_matrices(grid):
    N = grid.N
    R = kress_weights(N)
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    Rmat = R[idx]
    dt = grid.t[:, None] - grid.t[None, :]
    logsin = np.log(4 * np.sin(dt / 2) ** 2 + np.eye(N))  # diagonal unused
    diff = grid.points[:, None, :] - grid.points[None, :, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    return Rmat, logsin, diff, r


def assemble_S(grid):
    """Laplace single layer, kernel (1/2pi) log|x-y|."""
    N = grid.N
    Rmat, logsin, _, r = _split_matrices(grid)
    np.fill_diagonal(r, 1.0)
    smooth = (np.log(r) - 0.5 * logsin) / (2 * np.pi)
    np.fill_diagonal(smooth, np.log(grid.speed) / (2 * np.pi))
    A = (Rmat / (4 * np.pi) + (2 * np.pi / N) * smooth) * grid.speed[None, :]
    return _op(A, grid, "S")


def _dlp_kernel(grid):
    diff = grid.points[:, None, :] - grid.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    num = np.einsum("ijk,ik->ij", diff, grid.normals)
    k = num / (2 * np.pi * r2)
    np.fill_diagonal(k, grid.curvature / (4 * np.pi))
    return k


def assemble_Kstar(grid):
    """Neumann-Poincare operator, kernel <x-y, nu(x)> / (2pi|x-y|^2)."""
    return _op(_dlp_kernel(grid) * grid.weights[None, :], grid, "K*")


def assemble_K(grid):
    """L2-adjoint of K*, kernel <y-x, nu(y)> / (2pi|x-y|^2)."""
    return _op(_dlp_kernel(grid).T * grid.weights[None, :], grid, "K")


def compute_phi0(grid, Kstar):
    """Eigendensity of K* at 1/2, normalized so that its integral is 1."""
    vals, vecs = linalg.eig(Kstar.matrix)
    i = int(np.argmin(np.abs(vals - 0.5)))
    v = np.real(vecs[:, i] * np.exp(-1j * np.angle(vecs[np.argmax(np.abs(vecs[:, i])), i])))
    phi0 = v / float(grid.weights @ v)
    phi0.setflags(write=False)
    return phi0


def assemble_Stilde(grid, phi0, S=None):
    """Invertible substitute of S.

    Stilde[psi] = S[psi - a phi0] - a, with a = integral of psi.  On mean-zero
    densities it coincides with S; it sends phi0 to the constant -1, which makes
    -Stilde positive definite for every curve.
    """
    if S is None:
        S = assemble_S(grid)
    w = grid.weights
    A = S.matrix - np.outer(S.matrix @ phi0, w) - np.outer(np.ones(grid.N), w)
    return _op(A, grid, "S~")


def h_star_gram(Stilde, grid, check=True):
    """Gram matrix B of (u, v)_H* = -(u, Stilde v), symmetrized."""
    B = -grid.weights[:, None] * Stilde.matrix
    B = 0.5 * (B + B.T)
    if check:
        try:
            linalg.cholesky(B, lower=True)
        except linalg.LinAlgError as exc:
            raise GeometryScaleError(
                "H* Gram matrix is not positive definite; rescale the curve "
                "(e.g. to unit diameter) and retry") from exc
    return B


def assemble_freq_correction(grid):
    """Smooth kernels -|x-y|^2/(8pi) and -<x-y, nu(x)>/(4pi)."""
    diff = grid.points[:, None, :] - grid.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    num = np.einsum("ijk,ik->ij", diff, grid.normals)
    w = grid.weights[None, :]
    return _op(-r2 / (8 * np.pi) * w, grid, "S1"), _op(-num / (4 * np.pi) * w, grid, "K1")


def tau_k(k):
    """Constant term of the small-k expansion of -(i/4) H0(k r) - (1/2pi) log r."""
    return (np.log(complex(k)) + EULER_GAMMA - np.log(2)) / (2 * np.pi) - 0.25j


def assemble_helmholtz(grid, k):
    """Helmholtz single layer and its normal-derivative (K^k)* with kernel -(i/4)H0(k|x-y|)."""
    k = complex(k)
    if k == 0:
        raise ConfigurationError("k = 0: use the Laplace assemblers")
    if k.imag < 0:
        raise ConfigurationError("Im k must be non-negative")
    N = grid.N
    Rmat, logsin, diff, r = _split_matrices(grid)
    eye = np.eye(N, dtype=bool)
    rs = np.where(eye, 1.0, r)
    kr = k * rs
    G = -0.25j * hankel1(0, kr)
    M1 = jv(0, kr) / (4 * np.pi)
    M2 = G - M1 * logsin
    M2[eye] = tau_k(k) + np.log(grid.speed) / (2 * np.pi)
    M1[eye] = 1 / (4 * np.pi)
    Sk = (Rmat * M1 + (2 * np.pi / N) * M2) * grid.speed[None, :]

    num = np.einsum("ijk,ik->ij", diff, grid.normals)
    H = 0.25j * k * hankel1(1, kr) * num / rs
    L1 = -(k / (4 * np.pi)) * jv(1, kr) * num / rs
    L2 = H - L1 * logsin
    L1[eye] = 0.0
    L2[eye] = grid.curvature / (4 * np.pi)
    Kk = (Rmat * L1 + (2 * np.pi / N) * L2) * grid.speed[None, :]
    return _op(Sk, grid, f"S^k({k})"), _op(Kk, grid, f"K*^k({k})")


@dataclass(frozen=True)
class LayerOperators:
    """Laplace operators on one grid, assembled once and shared."""

    grid: object
    S: NodalOperator
    Kstar: NodalOperator
    K: NodalOperator
    phi0: np.ndarray
    Stilde: NodalOperator


def layer_operators(grid):
    S = assemble_S(grid)
    Ks = assemble_Kstar(grid)
    phi0 = compute_phi0(grid, Ks)
    return LayerOperators(grid, S, Ks, assemble_K(grid), phi0, assemble_Stilde(grid, phi0, S))
