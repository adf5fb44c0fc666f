"""Correlation positivity machine for sets against boundary measures.

For an indicator f = 1_A on a grid over [-1,1]^d and a boundary measure
sigma, the correlation int int f(x) f(x+ty) dx dsigma(y) detects whether t
is realized as a gauge distance inside A.  For symmetric sigma the same
quantity equals the frequency-side integral int |ft(f)|^2 ft(sigma)(t xi) dxi,
which splits into three radial bands at |xi| = delta/t and 1/(delta*t):
a low band bounded below by an explicit constant times |A|^2, a high band
bounded by the goodness of sigma, and a middle band small along a lacunary
t-sequence by pigeonholing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .errors import BadInputError, BudgetExceededError
from .measures import AtomicMeasure

_PAD = 2  # zero-padding factor for the frequency grid (kills torus wrap-around)


class GridIndicator:
    """Indicator of a subset of the unit ball sampled on a uniform cell grid.

    Cells of size h = 2/m tile [-1,1]^d; marked cells must have centers in
    the closed unit ball.  The measure of the set is count * h^d.
    """

    def __init__(self, dim: int, m: int, cells):
        if dim not in (1, 2, 3):
            raise BadInputError("grids support dimensions 1..3")
        if m < 2:
            raise BadInputError("grid needs at least 2 cells per axis")
        cells = np.array(cells, dtype=bool)
        if cells.shape != (m,) * dim:
            raise BadInputError("cell array shape must be (m,)*dim")
        self.dim = dim
        self.m = int(m)
        self.h = 2.0 / m
        self.cells = cells
        self.cells.setflags(write=False)
        centers = self.marked_centers()
        if centers.shape[0] and np.max(np.linalg.norm(centers, axis=1)) > 1.0 + 1e-12:
            raise BadInputError("marked cells must have centers inside the unit ball")
        self._dense = cells.astype(float)
        self._dense.setflags(write=False)
        self._spectrum_cache = {}

    @property
    def count(self):
        return int(np.count_nonzero(self.cells))

    @property
    def measure(self):
        return self.count * self.h ** self.dim

    def axis_centers(self):
        return -1.0 + (np.arange(self.m) + 0.5) * self.h

    def marked_centers(self):
        idx = np.argwhere(self.cells)
        return -1.0 + (idx + 0.5) * self.h

    def grid_transform(self, Xi):
        """ft(f) at arbitrary frequencies by the direct cell sum."""
        Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
        centers = self.marked_centers()
        out = np.empty(Xi.shape[0], dtype=complex)
        step = max(1, (1 << 18) // max(1, centers.shape[0]))
        for s in range(0, Xi.shape[0], step):
            phase = Xi[s:s + step] @ centers.T
            out[s:s + step] = np.exp(-2j * np.pi * phase).sum(axis=1)
        return out * self.h ** self.dim

    def _power_spectrum(self, pad=_PAD):
        """(|ft(f)|^2 * dxi, |xi| radii) on the padded frequency grid."""
        key = pad
        if key not in self._spectrum_cache:
            mp = pad * self.m
            arr = np.zeros((mp,) * self.dim)
            sl = tuple(slice(0, self.m) for _ in range(self.dim))
            arr[sl] = self.cells
            F = np.fft.fftn(arr)
            dxi = (1.0 / (mp * self.h)) ** self.dim
            power = (np.abs(F) ** 2) * self.h ** (2 * self.dim) * dxi
            freqs = np.fft.fftfreq(mp, d=self.h)
            r2 = np.zeros((mp,) * self.dim)
            for ax in range(self.dim):
                shape = [1] * self.dim
                shape[ax] = mp
                r2 = r2 + (freqs.reshape(shape)) ** 2
            self._spectrum_cache[key] = (power, np.sqrt(r2))
        return self._spectrum_cache[key]

    def interpolate(self, Q):
        """Multilinear interpolation of the cell values at query points (0 outside)."""
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        u = (Q + 1.0) / self.h - 0.5
        i0 = np.floor(u).astype(np.int64)
        frac = u - i0
        vals = np.zeros(Q.shape[0])
        dense = self._dense
        for corner in product((0, 1), repeat=self.dim):
            idx = i0 + np.asarray(corner, dtype=np.int64)[None, :]
            ok = np.all((idx >= 0) & (idx < self.m), axis=1)
            if not np.any(ok):
                continue
            w = np.ones(Q.shape[0])
            for ax, c in enumerate(corner):
                w = w * (frac[:, ax] if c else 1.0 - frac[:, ax])
            cell_vals = np.zeros(Q.shape[0])
            sel = tuple(idx[ok, ax] for ax in range(self.dim))
            cell_vals[ok] = dense[sel]
            vals += w * cell_vals
        return vals

    def to_dict(self):
        return {"type": "indicator", "dim": self.dim, "grid": self.m,
                "kind": "cells", "cells": np.argwhere(self.cells).tolist()}


def indicator_from_cells(dim, m, cell_list) -> GridIndicator:
    cells = np.zeros((m,) * dim, dtype=bool)
    idx = np.asarray(cell_list, dtype=np.int64)
    if idx.size:
        cells[tuple(idx[:, k] for k in range(dim))] = True
    return GridIndicator(dim, m, cells)


def indicator_from_balls(dim, m, centers, radii) -> GridIndicator:
    """Union of Euclidean balls clipped to the unit ball, sampled at cell centers."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.asarray(radii, dtype=float).ravel()
    ax = -1.0 + (np.arange(m) + 0.5) * (2.0 / m)
    grids = np.meshgrid(*([ax] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    mask = np.zeros(pts.shape[0], dtype=bool)
    for c, r in zip(centers, radii):
        mask |= np.sum((pts - c[None, :]) ** 2, axis=1) <= r * r
    mask &= np.sum(pts ** 2, axis=1) <= 1.0
    return GridIndicator(dim, m, mask.reshape((m,) * dim))


def random_indicator(dim, m, target_measure, seed, max_balls=64) -> GridIndicator:
    """Seeded union of random balls grown until the set reaches target_measure."""
    rng = np.random.default_rng(seed)
    centers, radii = [], []
    for _ in range(max_balls):
        centers.append(rng.uniform(-0.62, 0.62, size=dim))
        radii.append(rng.uniform(0.14, 0.30))
        ind = indicator_from_balls(dim, m, np.array(centers), np.array(radii))
        if ind.measure >= target_measure:
            return ind
    raise BudgetExceededError(
        f"could not reach measure {target_measure} with {max_balls} balls")


def load_indicator(path) -> GridIndicator:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read indicator file {path}: {exc}") from None
    if spec.get("type") != "indicator":
        raise BadInputError("not an indicator file")
    dim, m, kind = int(spec["dim"]), int(spec["grid"]), spec.get("kind", "cells")
    if kind == "cells":
        return indicator_from_cells(dim, m, spec["cells"])
    if kind == "balls":
        return indicator_from_balls(dim, m, spec["centers"], spec["radii"])
    if kind == "random_balls":
        return random_indicator(dim, m, float(spec["target_measure"]), int(spec["seed"]))
    raise BadInputError(f"unknown indicator kind {kind!r}")


def save_indicator(f: GridIndicator, path) -> None:
    with open(path, "w") as fh:
        json.dump(f.to_dict(), fh, sort_keys=True)
        fh.write("\n")


# -- explicit constants ----------------------------------------------------------


@dataclass(frozen=True)
class BourgainConstants:
    """The explicit dimension constants of the positivity argument."""

    d: int
    omega_d: float = field(init=False)
    theta: float = field(init=False)
    i1_constant: float = field(init=False)
    positivity_constant: float = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise BadInputError("dimension must be >= 1")
        omega = math.pi ** (self.d / 2) / math.gamma(self.d / 2 + 1)
        base = omega / (4 ** self.d * math.pi ** self.d)
        object.__setattr__(self, "omega_d", omega)
        object.__setattr__(self, "theta", base / 80.0)
        object.__setattr__(self, "i1_constant", base / 8.0)
        object.__setattr__(self, "positivity_constant", base / 40.0)

    def eta(self, eps: float) -> float:
        """Goodness threshold eta(eps) = theta * eps."""
        return self.theta * eps


# -- lacunary plans ----------------------------------------------------------------


@dataclass(frozen=True)
class LacunaryPlan:
    """Decreasing sequence in (0,1) with t_{j+1} <= t_j / 2, plus band parameters.

    j0_index is the first (0-based) index with t <= 4 pi / R, where the low
    band's lower bound starts to apply; j_bound is the pigeonhole budget
    j0 + ceil(10 / (theta * eps) * log(1/delta)) when d and eps are given.
    """

    t: np.ndarray
    delta: float
    R: float
    d: int | None = None
    eps: float | None = None
    j0_index: int = field(init=False)
    j_bound: int | None = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).ravel()
        if t.size == 0:
            raise BadInputError("empty lacunary sequence")
        if np.any(t <= 0) or np.any(t >= 1):
            raise BadInputError("sequence values must lie in (0,1)")
        if np.any(t[1:] > t[:-1] / 2 * (1 + 1e-12)):
            raise BadInputError("sequence must halve at every step (t_{j+1} <= t_j/2)")
        if not (0 < self.delta < 1):
            raise BadInputError("delta must lie in (0,1)")
        if self.R <= 0:
            raise BadInputError("R must be positive")
        if self.delta > 1.0 / self.R * (1 + 1e-12):
            raise BadInputError("need delta <= 1/R for the high-band bound")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        hits = np.where(t <= 4 * math.pi / self.R)[0]
        object.__setattr__(self, "j0_index", int(hits[0]) if hits.size else int(t.size))
        jb = None
        if self.d is not None and self.eps is not None:
            if self.eps <= 0:
                raise BadInputError("eps must be positive")
            theta = BourgainConstants(self.d).theta
            jb = self.j0_index + 1 + math.ceil(10.0 / theta / self.eps
                                               * math.log(1.0 / self.delta))
        object.__setattr__(self, "j_bound", jb)

    def __len__(self):
        return self.t.size

    @staticmethod
    def geometric(delta, R, ratio=0.49, length=48, t1=None, d=None, eps=None):
        if not (0 < ratio <= 0.5):
            raise BadInputError("ratio must be in (0, 1/2]")
        t1 = ratio if t1 is None else t1
        t = t1 * ratio ** np.arange(length)
        return LacunaryPlan(t, float(delta), float(R), d, eps)


def pigeonhole_count(x: float, plan: LacunaryPlan) -> int:
    """Number of open bands (delta/t_j, 1/(delta t_j)) containing x.

    Never exceeds ceil((2/log 2) * log(1/delta)); the strict inequalities
    exclude band endpoints.
    """
    if x <= 0:
        raise BadInputError("x must be positive")
    lo = plan.delta / plan.t
    hi = 1.0 / (plan.delta * plan.t)
    return int(np.count_nonzero((lo < x) & (x < hi)))


def pigeonhole_bound(delta: float) -> int:
    return math.ceil(2.0 / math.log(2.0) * math.log(1.0 / delta))


# -- correlations -------------------------------------------------------------------


def direct_correlation(f: GridIndicator, sigma: AtomicMeasure, t: float,
                       chunk: int = 256) -> float:
    """Real-space correlation sum over atoms y and marked cells x of
    f(x) f(x + t y) w(y) h^d, with multilinear interpolation off-grid.

    Strictly positive only when the gauge distance t is realized between
    points of the set (up to grid tolerance).
    """
    if t <= 0:
        raise BadInputError("t must be positive")
    if sigma.dim != f.dim:
        raise BadInputError("dimension mismatch between set and measure")
    centers = f.marked_centers()
    if centers.shape[0] == 0:
        return 0.0
    total = 0.0
    hd = f.h ** f.dim
    for s in range(0, len(sigma), chunk):
        ys = sigma.positions[s:s + chunk]
        ws = sigma.weights[s:s + chunk]
        queries = (centers[None, :, :] + t * ys[:, None, :]).reshape(-1, f.dim)
        vals = f.interpolate(queries).reshape(len(ys), -1)
        total += float(np.sum(ws * vals.sum(axis=1))) * hd
    return total


def _sigma_hat_on_grid(sigma: AtomicMeasure, t: float, mp: int, h: float, dim: int,
                       chunk: int = 256):
    """ft(sigma)(t xi) over the padded frequency grid, via separable phases."""
    freqs = np.fft.fftfreq(mp, d=h)
    out = np.zeros((mp,) * dim, dtype=complex)
    for s in range(0, len(sigma), chunk):
        X = sigma.positions[s:s + chunk]
        w = sigma.weights[s:s + chunk]
        E = [np.exp(-2j * np.pi * t * X[:, ax, None] * freqs[None, :]) for ax in range(dim)]
        if dim == 1:
            out += w @ E[0]
        elif dim == 2:
            out += np.einsum("j,jk,jl->kl", w, E[0], E[1])
        else:
            out += np.einsum("j,jk,jl,jm->klm", w, E[0], E[1], E[2])
    return out


@dataclass(frozen=True)
class SplitResult:
    """The three-band split of the frequency-side correlation at one t.

    i1 + i2 + i3 equals the full quadrature sum exactly (same grid, disjoint
    bands).  quad_error collects the symmetry residue and the spectral tail
    proxy near the grid Nyquist radius.
    """

    t: float
    delta: float
    i1: float
    i2: float
    i3: float
    total: float
    quad_error: float
    direct: float | None = None

    @property
    def lower_bound(self):
        """I1 - |I2| - |I3|, the positivity certificate."""
        return self.i1 - abs(self.i2) - abs(self.i3)


def split_integrals(f: GridIndicator, sigma: AtomicMeasure, t: float, delta: float,
                    require_symmetric: bool = True) -> SplitResult:
    """Frequency-side correlation split at |xi| = delta/t and 1/(delta t).

    The quadrature lives on the zero-padded grid of f's transform, truncated
    at the grid Nyquist radius; the discarded tail is estimated by the
    spectral mass in the outermost decade of radii and reported as part of
    the high band's error bar.
    """
    if t <= 0:
        raise BadInputError("t must be positive")
    if not (0 < delta < 1):
        raise BadInputError("delta must lie in (0,1)")
    if sigma.dim != f.dim:
        raise BadInputError("dimension mismatch between set and measure")
    if require_symmetric and not sigma.is_symmetric():
        raise BadInputError("measure must be symmetric (real transform) "
                            "for the frequency-side correlation")
    power, radii = f._power_spectrum()
    mp = _PAD * f.m
    shat = _sigma_hat_on_grid(sigma, t, mp, f.h, f.dim)
    sym_err = float(np.max(np.abs(shat.imag))) * float(np.sum(power))
    vals = power * shat.real
    lo_cut = delta / t
    hi_cut = 1.0 / (delta * t)
    band1 = radii <= lo_cut
    band3 = radii >= hi_cut
    band2 = ~band1 & ~band3
    i1 = float(np.sum(vals[band1]))
    i2 = float(np.sum(vals[band2]))
    i3 = float(np.sum(vals[band3]))
    nyq = 0.5 / f.h
    tail = float(np.sum(power[radii > 0.9 * nyq])) * sigma.abs_mass
    return SplitResult(float(t), float(delta), i1, i2, i3, i1 + i2 + i3,
                       sym_err + tail)


def spectral_correlation(f: GridIndicator, sigma: AtomicMeasure, t: float) -> float:
    """Frequency-side correlation int |ft(f)|^2 ft(sigma)(t xi) dxi (symmetric sigma)."""
    return split_integrals(f, sigma, t, 0.5).total


# -- the lacunary search --------------------------------------------------------------


@dataclass(frozen=True)
class LacunarySearchResult:
    found: bool
    j_star: int | None            # 1-based index into the plan sequence
    t_star: float | None
    split: SplitResult | None
    direct: float | None
    target: float                 # the explicit positivity target for this eps
    eps: float
    constants: BourgainConstants
    rows: list                    # (j, t, i1, i2, i3, direct, verdict) per scanned j
    diagnostics: list
    verdict: str


def lacunary_search(f: GridIndicator, sigma: AtomicMeasure, plan: LacunaryPlan,
                    goodness=None, budget: int = 64,
                    compute_direct: bool = True) -> LacunarySearchResult:
    """Scan the lacunary sequence from j0 for a t with a positive correlation.

    Accepts the first j where the band split certifies I1 - |I2| - |I3| > 0
    and the real-space correlation at t_j is itself positive.  A goodness
    report for sigma, when supplied, is checked against the eta threshold;
    a shortfall is recorded as a diagnostic rather than aborting, since the
    search result is certified by the direct cross-check.  Exhausting the
    scan is reported as a hypothesis violation, never silently.
    """
    eps = f.measure
    if eps <= 0:
        raise BadInputError("the set must have positive measure")
    consts = BourgainConstants(f.dim)
    diagnostics = []
    if goodness is not None:
        eta = consts.eta(eps)
        if goodness.eps_hat > eta:
            diagnostics.append(
                f"goodness hypothesis not met at desk scale: eps_hat "
                f"{goodness.eps_hat:.6g} > eta(|A|) {eta:.6g}")
        if plan.delta > 1.0 / goodness.R * (1 + 1e-12):
            diagnostics.append(
                f"delta {plan.delta:.6g} exceeds 1/R {1.0 / goodness.R:.6g} "
                "for the measured goodness cutoff")
    if not sigma.is_probability(tol=1e-9):
        diagnostics.append("sigma is not a probability measure")
    target = consts.positivity_constant * eps * eps
    start = plan.j0_index
    if start >= len(plan):
        return LacunarySearchResult(False, None, None, None, None, target, eps,
                                    consts, [], diagnostics + [
                                        "no sequence term below 4*pi/R"],
                                    "HYPOTHESIS-VIOLATION: no admissible t in plan")
    stop = len(plan)
    if plan.j_bound is not None:
        stop = min(stop, plan.j_bound)
    stop = min(stop, start + budget)
    rows = []
    for j in range(start, stop):
        t = float(plan.t[j])
        split = split_integrals(f, sigma, t, plan.delta)
        lower = split.lower_bound
        direct = direct_correlation(f, sigma, t) if compute_direct else None
        ok = lower > 0 and (direct is None or direct > 0)
        verdict = "positive" if ok else "indecisive"
        rows.append((j + 1, t, split.i1, split.i2, split.i3, direct, verdict))
        if ok:
            split = replace(split, direct=direct)
            achieved = (f"lower bound {lower:.6g} vs explicit target {target:.6g}"
                        f" ({'meets' if lower >= target - split.quad_error else 'below'}"
                        " the target)")
            return LacunarySearchResult(True, j + 1, t, split, direct, target, eps,
                                        consts, rows, diagnostics,
                                        f"POSITIVE at j={j + 1}: {achieved}")
    reason = ("scan budget exhausted" if stop < len(plan) else "sequence exhausted")
    return LacunarySearchResult(False, None, None, None, None, target, eps, consts,
                                rows, diagnostics + [reason],
                                "HYPOTHESIS-VIOLATION: no positive j found "
                                "(measure not good enough or grid too coarse)")
