"""Command-line front end.

    plasmonbie run CONFIG.json
    plasmonbie <command> CONFIG.json     (command must match the config)

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import COMMANDS, load_config
from .crosssec import (averaged_cross_sections, bound_ellipse, bound_ellipsoid, bound_general,
                       enhancement_sweep, optical_theorem_check)
from .errors import PlasmonError, UnsupportedDimensionError
from .geometry2d import area, curve_from_descriptor
from .multiparticle import (ParticleArray, dipole_hybridization, im_green_map, resonant_frequency,
                            sphere_quad, tau_dipole, validity_ratio)
from .polarization import (ellipsoid_polarization, ellipsoid_volume, polarization_direct,
                           polarization_spectral, s_factors, spectral_weights)
from .resonance import (Drude, Material, checked_correction_3d_sphere, correction_2d,
                        correction_matrices_2d, find_resonances, lambda_of, planar_correction,
                        sphere_correction)
from .scatcoef import W1_matrix, helmholtz_system, scattering_coefficients
from .spectral import boundary_spectrum, self_adjointness_residual

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

UNITS = ("units: dimensionless (lengths in units of the reference particle size, "
         "omega and k in matching reciprocal units); angles in radians")

FORMULAS = {
    "spectrum": "eigenvalues of the Neumann-Poincare operator K* made self-adjoint by the "
                "inner product -(u, S~[v]); mode 0 (lambda = 1/2) omitted",
    "polarization": "M_lm = integral of x_l (lambda I - K*)^-1[nu_m]; ellipsoids: "
                    "|D| / (lambda - 1/2 - s_l)",
    "resonance": "omega_qs: Re lambda(omega) = lambda_j; omega_min: argmin |tau_j|; omega_corr: "
                 "argmin |tau_j + size correction|, with (omega delta)^2 log(omega delta) tau_j1 "
                 "in 2D and omega^2 delta^2 tau_j2 for the sphere; shift = omega_corr - omega_min",
    "cross-sections": "Q_ext = (k/3) Im Tr M, Q_s = k^4 (16 pi/9) |Tr M|^2, Q_a = Q_ext - Q_s, "
                      "far field A(x) = -k^2 x.M d; optical residual uses a 26-point sphere rule",
    "bounds": "general, ellipse and ellipsoid upper bounds on |Im Tr M| in terms of "
              "lambda = lambda' + i lambda'' and |D|",
    "scatcoef": "W_nm = integral of J_n(k|y|) e^{-in theta_y} psi_m, psi_m from the two-density "
                "transmission system with source J_m(k|x|) e^{im theta}",
    "hybridize": "R_pq of the dipole mode from double integrals over the reference sphere; "
                 "splits tau_jl are the eigenvalues of R",
    "greenmap": "Im Gamma = Im G + Im sum_l H^T P_l S / (lambda - 1/6 + tau_jl / (1/mu_c - 1/mu_m)), "
                "P_l = X_l Xt_l^H",
}


def _material(m):
    if m is None:
        return None
    if m.mu_c is not None:
        return Material(m.eps_m, m.mu_m, m.eps_c, mu_c_fixed=m.mu_c)
    d = m.drude
    return Material(m.eps_m, m.mu_m, m.eps_c,
                    drude=Drude(d.mu0, d.filling, d.omega0, np.inf if d.tau is None else d.tau))


def _curve(shape):
    desc = shape.model_dump()
    if shape.kind in ("ellipsoid", "sphere"):
        return None
    return curve_from_descriptor(desc)


def _is_3d(shape):
    return shape is not None and shape.kind in ("ellipsoid", "sphere")


def _axes(shape):
    return (1.0, 1.0, 1.0) if shape.kind == "sphere" else (shape.p1, shape.p2, shape.p3)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _csv(cfg, columns, rows, extra=()):
    buf = io.StringIO()
    buf.write(f"# plasmonbie {__version__} command={cfg.command} schema_version={cfg.schema_version}\n")
    buf.write(f"# formulas: {FORMULAS[cfg.command]}\n")
    buf.write(f"# {UNITS}\n")
    for line in extra:
        buf.write(f"# {line}\n")
    buf.write("# config: " + json.dumps(cfg.model_dump(mode="json", by_alias=True),
                                        sort_keys=True, default=str) + "\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _write(path, text, stream):
    if path is None:
        stream.write(text)
    else:
        Path(path).write_text(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        if np.iscomplexobj(o):
            return np.stack([o.real, o.imag], axis=-1).tolist()
        return o.tolist()
    if isinstance(o, np.generic):
        return _jsonable(o.item()) if isinstance(o.item(), complex) else o.item()
    raise TypeError(type(o))


def _spectrum(cfg):
    bs = boundary_spectrum(_curve(cfg.shape), cfg.numeric.N)
    lam = bs.data.eigenvalues
    rows = [(j + 1, lam[j]) for j in range(len(lam))]
    res = self_adjointness_residual(bs.ops.Kstar, bs.data.gram)
    meta = {"lambda0": bs.data.lambda0, "self_adjointness_residual": res, "N": cfg.numeric.N}
    return ("j", "lambda"), rows, [f"self_adjointness_residual={res:.3e}"], meta


def _lambdas(cfg, mat):
    n = cfg.numeric
    if n.lambdas is not None:
        return [(None, complex(l)) for l in n.lambdas]
    return [(w, lambda_of(mat.mu_c(w), mat.mu_m)) for w in n.omega.array()]


def _polarization(cfg):
    mat = _material(cfg.material)
    n = cfg.numeric
    lams = _lambdas(cfg, mat)
    rows = []
    if _is_3d(cfg.shape):
        p = np.asarray(_axes(cfg.shape)) * n.delta
        cols = ("omega", "lam_re", "lam_im") + tuple(f"M{i}{j}_{c}" for i in (1, 2, 3)
                                                     for j in (1, 2, 3) for c in ("re", "im"))
        for w, lam in lams:
            M = ellipsoid_polarization(*p, lam).M
            rows.append((np.nan if w is None else w, lam.real, lam.imag,
                         *[f(M[i, j]) for i in range(3) for j in range(3) for f in (np.real, np.imag)]))
        return cols, rows, [], {}
    bs = boundary_spectrum(_curve(cfg.shape), n.N)
    weights = spectral_weights(bs.data, bs.grid)
    cols = ("omega", "lam_re", "lam_im", "M11_re", "M11_im", "M12_re", "M12_im", "M21_re",
            "M21_im", "M22_re", "M22_im", "spectral_gap")
    for w, lam in lams:
        M = polarization_direct(bs.grid, bs.ops, lam,
                                 np.append(bs.data.eigenvalues, bs.data.lambda0)).M * n.delta**2
        Ms = polarization_spectral(weights, lam).M * n.delta**2
        gap = float(np.abs(M - Ms).max() / max(np.abs(M).max(), 1e-300))
        rows.append((np.nan if w is None else w, lam.real, lam.imag,
                     *[f(M[i, j]) for i in range(2) for j in range(2) for f in (np.real, np.imag)],
                     gap))
    return cols, rows, ["spectral_gap = max|M_direct - M_spectral| / max|M_direct|"], {}


def _resonance(cfg):
    mat = _material(cfg.material)
    n = cfg.numeric
    om = n.omega.array()
    rng = (float(om.min()), float(om.max()))
    if _is_3d(cfg.shape):
        if cfg.shape.kind != "sphere":
            raise PlasmonError("3D resonance corrections are available for the sphere only")
        coeffs = checked_correction_3d_sphere()
        reps = find_resonances(mat, [1 / 6], rng, sphere_correction(coeffs, mat, n.delta),
                               n.delta, n.n_scan, modes=[1])
    else:
        bs = boundary_spectrum(_curve(cfg.shape), n.N)
        modes = n.modes or list(range(1, min(4, bs.data.n_modes) + 1))
        mats = correction_matrices_2d(bs)
        reps = []
        for j in modes:
            coeffs = correction_2d(j, bs, matrices=mats)
            reps += find_resonances(mat, [bs.data.eigenvalues[j - 1]], rng,
                                    planar_correction(coeffs, mat, n.delta), n.delta, n.n_scan,
                                    modes=[j])
    cols = ("j", "lambda_j", "omega_qs", "omega_min", "omega_corr", "shift", "abs_tau_min",
            "abs_tau_corr_min", "min_tau_over_omega3", "delta")
    rows = [(r.j, r.lam_j, r.omega_qs, r.omega_min, r.omega_corr, r.shift, abs(r.tau_min),
             abs(r.tau_corr_min), r.min_tau_over_omega3, r.delta) for r in reps]
    return cols, rows, [], {}


def _cross_sections(cfg):
    if not _is_3d(cfg.shape):
        raise UnsupportedDimensionError("cross-sections need a 3D shape (ellipsoid or sphere)")
    mat = _material(cfg.material)
    n = cfg.numeric
    p = np.asarray(_axes(cfg.shape)) * n.delta
    rows = []
    for w in n.omega.array():
        lam = lambda_of(mat.mu_c(w), mat.mu_m)
        M = ellipsoid_polarization(*p, lam)
        k = mat.k_m(w)
        cs = averaged_cross_sections(M, k)
        rows.append((w, k, lam.real, lam.imag, cs.q_ext, cs.q_s, cs.q_a, cs.absorption_negative,
                     optical_theorem_check(M, k)))
    cols = ("omega", "k_m", "lam_re", "lam_im", "q_ext", "q_s", "q_a", "absorption_negative",
            "optical_residual")
    return cols, rows, ["absorption_negative flags Q_a < -1e-12 |Q_ext| (monitored, not enforced)"], {}


def _bounds(cfg):
    n = cfg.numeric
    shape3d = _is_3d(cfg.shape)
    if n.lambda_grid is None:
        mat = _material(cfg.material)
        if shape3d:
            shape = tuple(_axes(cfg.shape))
        else:
            bs = boundary_spectrum(_curve(cfg.shape), n.N)
            shape = spectral_weights(bs.data, bs.grid)
        cols, rows = enhancement_sweep(mat, shape, n.omega.array(), n.delta)
        return cols, rows.tolist(), [], {}
    re_, im_ = n.lambda_grid.re.array(), n.lambda_grid.im.array()
    rows = []
    if shape3d:
        p = np.asarray(_axes(cfg.shape)) * n.delta
        vol, s = ellipsoid_volume(*p), s_factors(*p)
        for a in re_:
            for b in im_:
                lam = complex(a, b)
                M = ellipsoid_polarization(*p, lam).M
                rows.append((a, b, abs(np.trace(M).imag), bound_general(lam, vol, 3), np.nan,
                             bound_ellipsoid(lam, vol, s)))
    else:
        bs = boundary_spectrum(_curve(cfg.shape), n.N)
        weights = spectral_weights(bs.data, bs.grid)
        vol = area(bs.grid) * n.delta**2
        for a in re_:
            for b in im_:
                lam = complex(a, b)
                M = polarization_spectral(weights, lam).M * n.delta**2
                rows.append((a, b, abs(np.trace(M).imag), bound_general(lam, vol, 2),
                             bound_ellipse(lam, vol), np.nan))
    cols = ("lam_re", "lam_im", "abs_im_tr_M", "bound_general", "bound_ellipse", "bound_ellipsoid")
    return cols, rows, ["NaN marks a bound that does not apply to the shape's dimension"], {}


def _scatcoef(cfg):
    mat = _material(cfg.material)
    n = cfg.numeric
    grid = boundary_spectrum(_curve(cfg.shape), n.N).grid
    rows, meta = [], {"W1": {}, "condition_number": {}}
    for w in n.omega.array():
        sys_ = helmholtz_system(grid, mat, w)
        W = scattering_coefficients(grid, mat, w, n.n_max, system=sys_)
        rows += [(w, *r) for r in W.rows()]
        meta["W1"][repr(float(w))] = W1_matrix(W)
        meta["condition_number"][repr(float(w))] = sys_.cond
    return ("omega", "n", "m", "W_re", "W_im"), rows, [], meta


def _array(cfg):
    p = cfg.particles
    return ParticleArray(np.asarray(p.centers, float), p.delta, p.separation_floor)


def _hybridize(cfg):
    mat = _material(cfg.material)
    n = cfg.numeric
    arr = _array(cfg)
    quad = sphere_quad(arr.delta, n.sphere_order)
    modes = n.modes or [1, 2, 3]
    out, rows = [], []
    for w in n.omega.array():
        hyb = dipole_hybridization(arr, quad, mat, w, modes, n.form)
        entry = {"omega": w, "validity_ratio": validity_ratio(w, arr.delta),
                 "tau_j": tau_dipole(mat, w), "modes": {}}
        for j, h in hyb.items():
            entry["modes"][str(j)] = {"R": h.R, "tau_split": h.splits, "X": h.X, "Xt": h.Xt,
                                      "symmetry_residual": h.symmetry_residual,
                                      "biorthogonality_residual": h.biorthogonality_residual}
            rows += [(w, j, l, h.splits[l].real, h.splits[l].imag) for l in range(arr.L)]
        out.append(entry)
    meta = {"form": n.form, "results": out}
    return ("omega", "j", "l", "tau_split_re", "tau_split_im"), rows, [], meta


def _greenmap(cfg):
    mat = _material(cfg.material)
    n = cfg.numeric
    arr = _array(cfg)
    quad = sphere_quad(arr.delta, n.sphere_order)
    if n.tune is not None:
        w = resonant_frequency(arr, quad, mat, n.tune.range, n.tune.mode, n.tune.branch, n.form)
    else:
        om = n.omega.array()
        if om.size != 1:
            raise PlasmonError("greenmap takes a single omega")
        w = float(om[0])
    r = n.raster
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fmap, pm = im_green_map(r.s.array(), r.t.array(), n.x0, arr, quad, mat, w, r.origin,
                                r.u, r.v, tuple(n.modes or (1, 2, 3)), n.form, n.quasi_static)
    pts = fmap.points.reshape(-1, 3)
    rows = [(*p, v) for p, v in zip(pts, fmap.im_gamma.ravel())]
    meta = {"omega": w, "k_m": mat.k_m(w), "peak": pm.__dict__,
            "fwhm_over_wavelength": pm.fwhm / pm.wavelength,
            "reference_fwhm_over_wavelength": pm.reference_fwhm / pm.wavelength,
            "warnings": sorted({str(c.message) for c in caught})}
    return ("x", "y", "z", "im_gamma"), rows, [f"omega={w!r}"], meta


HANDLERS = {"spectrum": _spectrum, "polarization": _polarization, "resonance": _resonance,
            "cross-sections": _cross_sections, "bounds": _bounds, "scatcoef": _scatcoef,
            "hybridize": _hybridize, "greenmap": _greenmap}


def run(cfg, stdout=None):
    """Execute a validated configuration; returns an exit code."""
    stdout = stdout or sys.stdout
    cols, rows, extra, meta = HANDLERS[cfg.command](cfg)
    _write(cfg.output.csv, _csv(cfg, cols, rows, extra), stdout)
    if cfg.output.json_path is not None:
        meta = dict(meta, command=cfg.command, version=__version__)
        Path(cfg.output.json_path).write_text(_json(meta))
    return EXIT_OK


def _validation_message(err):
    lines = []
    for e in err.errors():
        loc = "/".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  at {loc}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plasmonbie", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in ("run",) + COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON configuration file")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(Path(args.config).read_text())
    except OSError as e:
        print(f"cannot read configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as e:
        print(_validation_message(e), file=sys.stderr)
        return EXIT_CONFIG
    if args.cmd != "run" and args.cmd != cfg.command:
        print(f"invalid configuration:\n  at command: config says {cfg.command!r}, "
              f"invoked as {args.cmd!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except (PlasmonError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
