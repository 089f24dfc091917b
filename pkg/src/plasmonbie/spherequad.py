"""Quadrature rules on spheres."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SphereRule:
    nodes: np.ndarray      # (n, 3) points on the sphere
    weights: np.ndarray    # (n,)
    normals: np.ndarray    # (n, 3) outward unit normals
    radius: float
    center: np.ndarray


def _frame(pole):
    e3 = np.asarray(pole, float) / np.linalg.norm(pole)
    a = np.array([1.0, 0, 0]) if abs(e3[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = a - (a @ e3) * e3
    e1 /= np.linalg.norm(e1)
    return np.stack([e1, np.cross(e3, e1), e3], axis=1)


def product_rule(n_theta, n_phi=None, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Gauss-Legendre in cos(theta) times the uniform azimuthal rule.

    Exact for spherical polynomials of degree < min(2 n_theta, n_phi).
    """
    n_phi = 2 * n_theta if n_phi is None else n_phi
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    U, P = np.meshgrid(u, phi, indexing="ij")
    st = np.sqrt(1 - U**2)
    nrm = np.stack([st * np.cos(P), st * np.sin(P), U], axis=-1).reshape(-1, 3)
    w = (wu[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).ravel() * radius**2
    c = np.asarray(center, float)
    return SphereRule(nrm * radius + c, w, nrm, float(radius), c)


def polar_rule(pole, n_theta, n_phi=None):
    """Unit-sphere rule with Gauss-Legendre nodes in the polar angle measured from ``pole``.

    Integrands smooth in that angle, such as |x - pole| times a polynomial,
    converge spectrally.
    """
    n_phi = 2 * n_theta if n_phi is None else n_phi
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    th = 0.5 * np.pi * (x + 1)
    wt = 0.5 * np.pi * wx * np.sin(th)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    T, P = np.meshgrid(th, phi, indexing="ij")
    local = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    nodes = local @ _frame(pole).T
    w = (wt[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :]).ravel()
    return SphereRule(nodes, w, nodes, 1.0, np.zeros(3))


def lebedev26():
    """26-point Lebedev rule on the unit sphere (degree 7), weights summing to 1."""
    pts, wts = [], []
    for i in range(3):
        for s in (1, -1):
            v = np.zeros(3)
            v[i] = s
            pts.append(v)
            wts.append(1 / 21)
    r = 1 / np.sqrt(2)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for si in (1, -1):
            for sj in (1, -1):
                v = np.zeros(3)
                v[i], v[j] = si * r, sj * r
                pts.append(v)
                wts.append(4 / 105)
    q = 1 / np.sqrt(3)
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                pts.append(np.array([sx, sy, sz]) * q)
                wts.append(9 / 280)
    return np.array(pts), np.array(wts)
