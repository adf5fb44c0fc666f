"""Indicator-function transforms, radial zero ledgers, and spectrum candidates.

chi_hat evaluates the transform of a body's indicator: closed product form
for axis boxes, cylinder-function form for balls and ellipsoids, and a
polar-slice quadrature (exact in the radial variable, midpoint in angle)
for other bodies in the plane or star bodies in space.  Zero scans bracket
sign changes of the radial profile and refine them by bisection; candidate
spectra are screened by the orthogonality residual max |chi_hat(diff)| and
fed through sparsification into a dual-gauge distance-set report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .bodies import ConvexBody, Ellipsoid, HPolytope, _icosphere, \
    _spherical_triangle_areas
from .distances import GapReport, PointSet, distance_set, sparsify
from .errors import BadInputError, HypothesisViolationError


def _is_axis_box(body):
    """Half-widths when every facet normal is +/- a coordinate axis, else None."""
    if not isinstance(body, HPolytope):
        return None
    d = body.dim
    if body.n_facets != 2 * d:
        return None
    widths = np.full(d, -1.0)
    for theta, h in zip(body.normals, body.offsets):
        ax = int(np.argmax(np.abs(theta)))
        if abs(abs(theta[ax]) - 1.0) > 1e-12:
            return None
        if widths[ax] >= 0 and abs(widths[ax] - h) > 1e-12:
            return None
        widths[ax] = h
    return widths if np.all(widths > 0) else None


def ball_indicator_profile(d: int, r) -> np.ndarray:
    """Radial transform of the unit d-ball: |xi|^{-d/2} J_{d/2}(2 pi |xi|)."""
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape)
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    tiny = r < 1e-8
    out[tiny] = omega
    rr = r[~tiny]
    out[~tiny] = special.jv(d / 2, 2 * np.pi * rr) / rr ** (d / 2)
    return out


def _radial_profile_fn(body):
    """Closed-form radial profile r -> chi_hat(body, r*e1) when available."""
    box = _is_axis_box(body)
    if box is not None and body.dim == 1:
        a = box[0]
        return lambda r: 2 * a * np.sinc(2 * a * np.asarray(r, dtype=float))
    if isinstance(body, Ellipsoid) and body.is_ball(1e-9):
        a = float(body.axes[0])
        d = body.dim
        return lambda r: a ** d * ball_indicator_profile(d, a * np.asarray(r, dtype=float))
    return None


def chi_hat(body: ConvexBody, xi, resolution: int = 4096) -> float:
    """Transform of the body's indicator at xi (real, by 0-symmetry).

    Boxes and ellipsoids use closed forms; other bodies integrate the polar
    slices: the radial integral in closed form against `resolution` angular
    midpoint nodes (planar bodies) or icosphere patches (star bodies in 3d).
    """
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape[0] != body.dim:
        raise BadInputError("frequency dimension mismatch")
    box = _is_axis_box(body)
    if box is not None:
        return float(np.prod(2 * box * np.sinc(2 * box * xi)))
    if isinstance(body, Ellipsoid):
        z = np.linalg.norm(body.axes * xi)
        return float(np.prod(body.axes) * ball_indicator_profile(body.dim, np.array([z]))[0])
    if body.dim == 2:
        return _chi_hat_polar_2d(body, xi, resolution)
    if body.dim == 3:
        return _chi_hat_polar_3d(body, xi, resolution)
    raise BadInputError("general-body transforms support dimensions 2 and 3")


def _radial_slice_1(a, c):
    """int_0^a rho exp(-i c rho) drho, elementwise with small-c series."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.empty(np.broadcast(a, c).shape, dtype=complex)
    small = np.abs(c) * a < 1e-4
    cs, as_ = c[small], np.broadcast_to(a, out.shape)[small]
    out[small] = as_ ** 2 / 2 - 1j * cs * as_ ** 3 / 3 - cs ** 2 * as_ ** 4 / 8
    cb, ab = c[~small], np.broadcast_to(a, out.shape)[~small]
    e = np.exp(-1j * cb * ab)
    out[~small] = 1j * ab / cb * e + (e - 1.0) / cb ** 2
    return out


def _radial_slice_2(a, c):
    """int_0^a rho^2 exp(-i c rho) drho, elementwise with small-c series."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.empty(np.broadcast(a, c).shape, dtype=complex)
    small = np.abs(c) * a < 1e-4
    cs, as_ = c[small], np.broadcast_to(a, out.shape)[small]
    out[small] = as_ ** 3 / 3 - 1j * cs * as_ ** 4 / 4 - cs ** 2 * as_ ** 5 / 10
    cb, ab = c[~small], np.broadcast_to(a, out.shape)[~small]
    e = np.exp(-1j * cb * ab)
    out[~small] = 1j * ab ** 2 / cb * e - 2j / cb * _radial_slice_1(a, c)[~small]
    return out


def _chi_hat_polar_2d(body, xi, resolution):
    phi = (np.arange(resolution) + 0.5) * 2 * np.pi / resolution
    u = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    r = 1.0 / body.gauge_many(u)
    c = 2 * np.pi * (u @ xi)
    vals = _radial_slice_1(r, c)
    return float(np.real(np.sum(vals)) * (2 * np.pi / resolution))


def _chi_hat_polar_3d(body, xi, resolution):
    level = 0
    while 20 * 4 ** (level + 1) <= resolution:
        level += 1
    verts, faces = _icosphere(level)
    u = verts[faces[:, 0]] + verts[faces[:, 1]] + verts[faces[:, 2]]
    u /= np.linalg.norm(u, axis=1)[:, None]
    patch = _spherical_triangle_areas(verts[faces[:, 0]], verts[faces[:, 1]],
                                      verts[faces[:, 2]])
    r = 1.0 / body.gauge_many(u)
    c = 2 * np.pi * (u @ xi)
    vals = _radial_slice_2(r, c)
    return float(np.real(np.sum(vals * patch)))


def chi_hat_many(body: ConvexBody, Xi, resolution: int = 4096) -> np.ndarray:
    """Vectorized chi_hat over rows of Xi (closed forms vectorize exactly)."""
    Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
    box = _is_axis_box(body)
    if box is not None:
        return np.prod(2 * box[None, :] * np.sinc(2 * box[None, :] * Xi), axis=1)
    if isinstance(body, Ellipsoid):
        z = np.linalg.norm(Xi * body.axes[None, :], axis=1)
        return float(np.prod(body.axes)) * ball_indicator_profile(body.dim, z)
    return np.array([chi_hat(body, xi, resolution) for xi in Xi])


# -- radial zero scans --------------------------------------------------------------


@dataclass(frozen=True)
class ZeroLedger:
    """Bracketed sign-change zeros of a radial profile, with spacing statistics."""

    zeros: np.ndarray
    brackets: np.ndarray      # (n, 2) enclosing intervals with opposite signs
    window: tuple
    approximate: bool         # profile taken along e1 for a not-exactly-radial body

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=float).ravel()
        b = np.asarray(self.brackets, dtype=float).reshape(-1, 2)
        z.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "zeros", z)
        object.__setattr__(self, "brackets", b)

    @property
    def spacings(self):
        return np.diff(self.zeros)

    def tail_spacing(self, count: int = 10):
        """Mean and max deviation of the last `count` spacings."""
        s = self.spacings
        if s.size == 0:
            return math.nan, math.nan
        tail = s[-count:]
        mean = float(np.mean(tail))
        return mean, float(np.max(np.abs(tail - mean)))

    def tail_phase(self, count: int = 10):
        """Circular mean of (2 pi z) mod pi over the last zeros.

        For a d-ball this settles at (d-1) pi / 4 mod pi, the rescaled phase
        offset of the oscillatory profile.
        """
        z = self.zeros[-count:]
        if z.size == 0:
            return math.nan
        ang = np.mod(2 * np.pi * z, np.pi) * 2.0
        mean = math.atan2(float(np.mean(np.sin(ang))), float(np.mean(np.cos(ang))))
        return (mean / 2.0) % math.pi


def radial_zero_scan(body: ConvexBody, window, steps: int,
                     resolution: int = 4096, xtol: float = 1e-10) -> ZeroLedger:
    """Bracket and bisect zeros of the radial indicator-transform profile.

    Exact closed profiles are used for balls and the 1d box; other bodies
    are scanned along e1 and flagged approximate.  A window without sign
    changes returns an empty ledger.
    """
    a, b = float(window[0]), float(window[1])
    if not (0 < a < b) or steps < 2:
        raise BadInputError("need 0 < a < b and steps >= 2")
    profile = _radial_profile_fn(body)
    approximate = False
    if profile is None:
        e1 = np.zeros(body.dim)
        e1[0] = 1.0
        approximate = not (isinstance(body, Ellipsoid) and body.is_ball(1e-9))

        def profile(r):
            r = np.asarray(r, dtype=float)
            return chi_hat_many(body, r.reshape(-1, 1) * e1[None, :], resolution)

    rs = np.linspace(a, b, int(steps))
    vals = profile(rs)
    zeros, brackets = [], []
    for i in range(len(rs) - 1):
        lo_r, hi_r = rs[i], rs[i + 1]
        lo_v, hi_v = vals[i], vals[i + 1]
        if lo_v == 0.0:
            continue  # grid hit; the neighboring interval brackets it
        if lo_v * hi_v >= 0:
            continue
        for _ in range(200):
            if hi_r - lo_r <= xtol:
                break
            mid = 0.5 * (lo_r + hi_r)
            mv = float(profile(np.array([mid]))[0])
            if mv == 0.0:
                lo_r, hi_r = mid - xtol / 2, mid + xtol / 2
                break
            if lo_v * mv < 0:
                hi_r = mid
            else:
                lo_r, lo_v = mid, mv
        zeros.append(0.5 * (lo_r + hi_r))
        brackets.append((rs[i], rs[i + 1]))
    return ZeroLedger(np.asarray(zeros), np.asarray(brackets).reshape(-1, 2),
                      (a, b), approximate)


# -- spectra ------------------------------------------------------------------------


def orthogonality_residual(points: PointSet, body: ConvexBody,
                           resolution: int = 4096) -> float:
    """max over distinct pairs of |chi_hat(body, difference)| (0 for < 2 points)."""
    n = len(points)
    if n < 2:
        return 0.0
    diffs = []
    P = points.points
    for i in range(n - 1):
        diffs.append(P[i + 1:] - P[i][None, :])
    diffs = np.vstack(diffs)
    return float(np.max(np.abs(chi_hat_many(body, diffs, resolution))))


@dataclass(frozen=True)
class SpectrumPipelineResult:
    residual: float | None
    sparsified: PointSet
    report: GapReport


def spectrum_gap_pipeline(points: PointSet, body: ConvexBody, R: float,
                          t_max: float | None = None,
                          ortho_tol: float | None = None) -> SpectrumPipelineResult:
    """Sparsify a spectrum candidate and report its dual-gauge distance gaps.

    With ortho_tol set, the candidate must first pass the orthogonality
    residual at that tolerance.  The sparsified set keeps points more than R
    apart in sup norm, so its dual distance set exposes the gap structure a
    genuine spectrum would force.
    """
    residual = None
    if ortho_tol is not None:
        residual = orthogonality_residual(points, body)
        if residual > ortho_tol:
            raise HypothesisViolationError(
                f"orthogonality residual {residual:.3g} exceeds tolerance {ortho_tol:.3g}")
    thin = sparsify(points, R)
    if len(thin) == 0:
        empty = GapReport(np.empty(0), [], 0.0, 0.0, 1e-9)
        return SpectrumPipelineResult(residual, thin, empty)
    if t_max is None:
        diffs = thin.points[:, None, :] - thin.points[None, :, :]
        t_max = float(np.max(body.dual_gauge_many(diffs.reshape(-1, thin.dim)))) + 1.0
    report = distance_set(thin, body, t_max, dual=True)
    return SpectrumPipelineResult(residual, thin, report)
