"""Smooth closed curves in the plane and their periodic trapezoid grids.

Curves are parametrized over t in [0, 2pi) and traversed counterclockwise.
The outward normal is nu = (x2', -x1') / |x'| and the signed curvature is
positive for convex curves.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidGeometryError

DEFAULT_MAX_HARMONIC = 16


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class BoundaryCurve2D:
    """Parametric closed curve.

    ``kind`` is ``"ellipse"`` (params ``a``, ``b``) or ``"fourier-star"``
    (params ``r0``, ``cos``, ``sin`` giving r(t) = r0 + sum a_k cos kt + b_k sin kt).
    The center is the image of the origin of the reference shape.
    """

    kind: str
    params: tuple
    center: tuple = (0.0, 0.0)
    rotation: float = 0.0

    @property
    def descriptor(self):
        return {"kind": self.kind, **dict(self.params),
                "center": list(self.center), "rotation": self.rotation}

    def _local(self, t):
        p = dict(self.params)
        if self.kind == "ellipse":
            a, b = p["a"], p["b"]
            c, s = np.cos(t), np.sin(t)
            x = np.stack([a * c, b * s])
            dx = np.stack([-a * s, b * c])
            ddx = np.stack([-a * c, -b * s])
            return x, dx, ddx
        r, dr, ddr = _star_radius(p, t)
        c, s = np.cos(t), np.sin(t)
        x = np.stack([r * c, r * s])
        dx = np.stack([dr * c - r * s, dr * s + r * c])
        ddx = np.stack([ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s])
        return x, dx, ddx

    def evaluate(self, t):
        """Return x(t), x'(t), x''(t) as arrays of shape (len(t), 2)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        R = _rotation(self.rotation)
        x, dx, ddx = self._local(t)
        z = np.asarray(self.center, dtype=float)
        return (R @ x).T + z, (R @ dx).T, (R @ ddx).T

    def scaled(self, s):
        """Curve dilated by factor s about its center."""
        p = dict(self.params)
        if self.kind == "ellipse":
            p = {"a": p["a"] * s, "b": p["b"] * s}
        else:
            p = {"r0": p["r0"] * s,
                 "cos": tuple(c * s for c in p["cos"]),
                 "sin": tuple(c * s for c in p["sin"])}
        return BoundaryCurve2D(self.kind, tuple(sorted(p.items())), self.center, self.rotation)


def _star_radius(p, t):
    r = np.full_like(t, p["r0"], dtype=float)
    dr = np.zeros_like(t, dtype=float)
    ddr = np.zeros_like(t, dtype=float)
    for k, ak in enumerate(p["cos"], start=1):
        r += ak * np.cos(k * t)
        dr -= k * ak * np.sin(k * t)
        ddr -= k * k * ak * np.cos(k * t)
    for k, bk in enumerate(p["sin"], start=1):
        r += bk * np.sin(k * t)
        dr += k * bk * np.cos(k * t)
        ddr -= k * k * bk * np.sin(k * t)
    return r, dr, ddr


def make_ellipse(a, b, center=(0.0, 0.0), rotation=0.0):
    if not (a > 0 and b > 0):
        raise InvalidGeometryError(f"semi-axes must be positive, got a={a}, b={b}")
    return BoundaryCurve2D("ellipse", (("a", float(a)), ("b", float(b))),
                           tuple(float(c) for c in center), float(rotation))


def make_disk(radius=1.0, center=(0.0, 0.0)):
    return make_ellipse(radius, radius, center)


def make_fourier_star(cos=(), sin=(), r0=1.0, center=(0.0, 0.0), rotation=0.0,
                      max_harmonic=DEFAULT_MAX_HARMONIC):
    """Star-shaped curve r(t) = r0 + sum_k cos[k-1] cos(kt) + sin[k-1] sin(kt)."""
    cos = tuple(float(c) for c in cos)
    sin = tuple(float(c) for c in sin)
    if max(len(cos), len(sin)) > max_harmonic:
        raise InvalidGeometryError(
            f"harmonic order {max(len(cos), len(sin))} exceeds cap {max_harmonic}")
    if r0 <= 0:
        raise InvalidGeometryError("r0 must be positive")
    tt = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    r, _, _ = _star_radius({"r0": r0, "cos": cos, "sin": sin}, tt)
    if r.min() <= 0:
        raise InvalidGeometryError("radial function must stay positive (curve not simple)")
    return BoundaryCurve2D("fourier-star", (("cos", cos), ("r0", float(r0)), ("sin", sin)),
                           tuple(float(c) for c in center), float(rotation))


@dataclass(frozen=True)
class QuadGrid2D:
    curve: BoundaryCurve2D
    N: int
    t: np.ndarray
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    speed: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    key: str = field(default="")

    @property
    def center(self):
        return np.asarray(self.curve.center)


def discretize(curve, N):
    """Uniform-parameter trapezoid grid with N (even, >= 16) nodes."""
    if int(N) != N or N < 16 or N % 2:
        raise ConfigurationError(f"N must be an even integer >= 16, got {N}")
    N = int(N)
    t = 2 * np.pi * np.arange(N) / N
    x, dx, ddx = curve.evaluate(t)
    speed = np.hypot(dx[:, 0], dx[:, 1])
    if speed.min() <= 0:
        raise InvalidGeometryError("curve has a vanishing tangent")
    if curve.kind == "fourier-star":
        r, _, _ = _star_radius(dict(curve.params), t)
        if r.min() <= 0:
            raise InvalidGeometryError("curve is not simple at this resolution")
    w = speed * (2 * np.pi / N)
    nu = np.stack([dx[:, 1], -dx[:, 0]], axis=1) / speed[:, None]
    kappa = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
    key = f"{curve.kind}:{curve.params}:{curve.center}:{curve.rotation}:N={N}"
    return QuadGrid2D(curve, N, _frozen(t), _frozen(x), _frozen(dx), _frozen(ddx),
                      _frozen(speed), _frozen(w), _frozen(nu), _frozen(kappa), key)


def area(grid):
    """Enclosed area from the divergence theorem, 1/2 sum w (x - z).nu."""
    rel = grid.points - grid.center
    return 0.5 * float(np.sum(grid.weights * np.einsum("ij,ij->i", rel, grid.normals)))


def perimeter(grid):
    return float(np.sum(grid.weights))


def curve_from_descriptor(desc):
    """Build a curve from a plain dict such as the CLI shape block."""
    d = dict(desc)
    kind = d.pop("kind")
    center = tuple(d.pop("center", (0.0, 0.0)))
    rotation = float(d.pop("rotation", 0.0))
    if kind == "ellipse":
        return make_ellipse(d["a"], d["b"], center, rotation)
    if kind == "disk":
        return make_disk(d.get("radius", 1.0), center)
    if kind == "fourier-star":
        return make_fourier_star(d.get("cos", ()), d.get("sin", ()), d.get("r0", 1.0),
                                 center, rotation,
                                 d.get("max_harmonic", DEFAULT_MAX_HARMONIC))
    raise InvalidGeometryError(f"unknown 2D curve kind {kind!r}")
