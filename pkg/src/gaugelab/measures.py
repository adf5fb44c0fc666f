"""Discretized measures and their Fourier transforms.

The transform convention is ft(mu)(xi) = sum_j w_j exp(-2 pi i <x_j, xi>),
the discrete form of the integral against exp(-2 pi i <x, xi>).  Measures
are finite atomic clouds; boundary meshes become measures whose atoms also
remember the outward normal of the node they came from, which is what lets
the projection operation tell genuine point masses (flat boundary pieces
orthogonal to the projection direction) from curved mass that projects to
an absolutely continuous part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadInputError

ATOM_NORMAL_TOL = 1e-9   # node normal within this of +/- eta counts as flat
CLUSTER_TOL = 1e-9       # projected positions merged within this
DEFAULT_BINS = 512

_FT_CHUNK = 1 << 18      # cap on atoms*points per vectorized block


class AtomicMeasure:
    """Finite weighted point cloud, optionally carrying per-atom unit normals."""

    def __init__(self, positions, weights, normals=None):
        if np.iscomplexobj(np.asarray(weights)):
            raise BadInputError("measure weights must be real")
        positions = np.atleast_2d(np.array(positions, dtype=float))
        weights = np.array(weights, dtype=float).ravel()
        if positions.shape[0] != weights.shape[0]:
            raise BadInputError("positions and weights must have equal length")
        if not np.all(np.isfinite(positions)) or not np.all(np.isfinite(weights)):
            raise BadInputError("measure data must be finite")
        self.positions = positions
        self.weights = weights
        self.normals = None
        if normals is not None:
            normals = np.atleast_2d(np.array(normals, dtype=float))
            if normals.shape != positions.shape:
                raise BadInputError("normals must match positions in shape")
            self.normals = normals
            self.normals.setflags(write=False)
        self.positions.setflags(write=False)
        self.weights.setflags(write=False)

    # -- basic quantities ----------------------------------------------------

    @property
    def dim(self):
        return self.positions.shape[1]

    def __len__(self):
        return self.positions.shape[0]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    @property
    def abs_mass(self):
        return float(np.sum(np.abs(self.weights)))

    @property
    def support_radius(self):
        if len(self) == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.positions, axis=1)))

    @property
    def lipschitz_bound(self):
        """Certified |grad ft| <= 2 pi * |mass| * support radius."""
        return 2 * math.pi * self.abs_mass * self.support_radius

    def is_probability(self, tol=1e-12):
        return abs(self.total_mass - 1.0) <= tol and bool(np.all(self.weights >= 0))

    def is_symmetric(self, tol=1e-9):
        """True when atoms pair up as (x, w) <-> (-x, w) within tolerance."""
        if len(self) == 0:
            return True
        scale = max(self.support_radius, 1.0)
        key = np.round(self.positions / (tol * scale)).astype(np.int64)
        table = {}
        for i, k in enumerate(map(tuple, key)):
            table.setdefault(k, []).append(i)
        matched = np.zeros(len(self), dtype=bool)
        wtol = tol * max(self.abs_mass, 1.0)
        for i in range(len(self)):
            if matched[i]:
                continue
            mirror = tuple(-key[i])
            for j in table.get(mirror, []):
                if not matched[j] and abs(self.weights[j] - self.weights[i]) <= wtol:
                    matched[i] = matched[j] = True
                    break
            else:
                return False
        return True

    # -- derived measures ------------------------------------------------------

    def normalized(self):
        """Same atoms rescaled to total mass 1."""
        m = self.total_mass
        if m <= 0:
            raise BadInputError("cannot normalize a measure of nonpositive mass")
        return AtomicMeasure(self.positions, self.weights / m, self.normals)

    def symmetrized(self):
        """The even part (mu + mu(-.))/2; normals flip with the reflection."""
        pos = np.vstack([self.positions, -self.positions])
        w = np.concatenate([self.weights, self.weights]) / 2.0
        nrm = None
        if self.normals is not None:
            nrm = np.vstack([self.normals, -self.normals])
        return AtomicMeasure(pos, w, nrm)

    def restrict(self, mask):
        mask = np.asarray(mask, dtype=bool)
        nrm = self.normals[mask] if self.normals is not None else None
        return AtomicMeasure(self.positions[mask], self.weights[mask], nrm)

    def to_dict(self):
        out = {"type": "measure", "dim": self.dim,
               "positions": self.positions.tolist(),
               "weights": self.weights.tolist()}
        if self.normals is not None:
            out["normals"] = self.normals.tolist()
        return out


def from_mesh(mesh, normalize=False) -> AtomicMeasure:
    """Surface measure of a boundary mesh (optionally rescaled to mass 1)."""
    mu = AtomicMeasure(mesh.positions, mesh.weights, mesh.normals)
    return mu.normalized() if normalize else mu


def point_mass(x, weight=1.0) -> AtomicMeasure:
    return AtomicMeasure(np.asarray(x, dtype=float)[None, :], [float(weight)])


def segment_measure(center, direction, length, nodes, normal=None, mass=None) -> AtomicMeasure:
    """Uniform measure on a straight segment, discretized at midpoint nodes.

    `normal` tags the atoms with the hyperplane normal of the flat piece so
    projections recognize them as a point mass; mass defaults to the length.
    """
    center = np.asarray(center, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    if nodes < 1 or length <= 0:
        raise BadInputError("segment needs nodes >= 1 and positive length")
    ts = (np.arange(nodes) + 0.5) / nodes - 0.5
    pos = center[None, :] + (ts * length)[:, None] * direction[None, :]
    total = float(length if mass is None else mass)
    w = np.full(nodes, total / nodes)
    nrm = None
    if normal is not None:
        normal = np.asarray(normal, dtype=float)
        normal = normal / np.linalg.norm(normal)
        nrm = np.repeat(normal[None, :], nodes, axis=0)
    return AtomicMeasure(pos, w, nrm)


def load_measure(path) -> AtomicMeasure:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read measure file {path}: {exc}") from None
    if spec.get("type") != "measure":
        raise BadInputError("not a measure file")
    return AtomicMeasure(spec["positions"], spec["weights"], spec.get("normals"))


def save_measure(mu: AtomicMeasure, path) -> None:
    with open(path, "w") as fh:
        json.dump(mu.to_dict(), fh, sort_keys=True)
        fh.write("\n")


# -- Fourier transforms -------------------------------------------------------


def ft_measure(mu: AtomicMeasure, xi) -> complex:
    """Transform value sum_j w_j exp(-2 pi i <x_j, xi>) at a single frequency."""
    xi = np.asarray(xi, dtype=float)
    phase = mu.positions @ xi
    return complex(np.sum(mu.weights * np.exp(-2j * np.pi * phase)))


def ft_many(mu: AtomicMeasure, Xi) -> np.ndarray:
    """Vectorized transform over rows of Xi, chunked to bound memory."""
    Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
    out = np.empty(Xi.shape[0], dtype=complex)
    n = max(1, len(mu))
    step = max(1, _FT_CHUNK // n)
    for s in range(0, Xi.shape[0], step):
        block = Xi[s:s + step]
        phase = block @ mu.positions.T
        out[s:s + step] = np.exp(-2j * np.pi * phase) @ mu.weights
    return out


def ft_profile(mu: AtomicMeasure, eta, t_grid) -> np.ndarray:
    """Transform along the ray t -> ft(mu)(t * eta)."""
    eta = np.asarray(eta, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    proj = mu.positions @ eta
    out = np.empty(t_grid.shape[0], dtype=complex)
    step = max(1, _FT_CHUNK // max(1, len(mu)))
    for s in range(0, t_grid.shape[0], step):
        block = t_grid[s:s + step]
        out[s:s + step] = np.exp(-2j * np.pi * block[:, None] * proj[None, :]) @ mu.weights
    return out


@dataclass(frozen=True)
class FourierScan:
    """Sampled transform values with the certified gradient bound attached."""

    points: np.ndarray
    values: np.ndarray
    lipschitz: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=complex).ravel()
        if pts.shape[0] != vals.shape[0]:
            raise BadInputError("scan points and values must match")
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)


def ft_scan(mu: AtomicMeasure, Xi) -> FourierScan:
    vals = ft_many(mu, Xi)
    if np.any(np.abs(vals) > mu.abs_mass * (1 + 1e-12) + 1e-15):
        raise BadInputError("transform values exceed the total mass bound")
    return FourierScan(Xi, vals, mu.lipschitz_bound)


# -- projection to a line -------------------------------------------------------


@dataclass(frozen=True)
class LineMeasure:
    """Projection of a measure onto a line: point masses plus a binned density."""

    atom_positions: np.ndarray
    atom_masses: np.ndarray
    bin_edges: np.ndarray
    bin_masses: np.ndarray

    def __post_init__(self):
        ap = np.asarray(self.atom_positions, dtype=float).ravel()
        am = np.asarray(self.atom_masses, dtype=float).ravel()
        be = np.asarray(self.bin_edges, dtype=float).ravel()
        bm = np.asarray(self.bin_masses, dtype=float).ravel()
        if ap.shape != am.shape:
            raise BadInputError("atom arrays must match")
        if be.size and be.size != bm.size + 1:
            raise BadInputError("need one more bin edge than bin mass")
        if be.size and np.any(np.diff(be) <= 0):
            raise BadInputError("bin edges must be strictly increasing")
        for a in (ap, am, be, bm):
            a.setflags(write=False)
        object.__setattr__(self, "atom_positions", ap)
        object.__setattr__(self, "atom_masses", am)
        object.__setattr__(self, "bin_edges", be)
        object.__setattr__(self, "bin_masses", bm)

    @property
    def total_mass(self):
        return float(np.sum(self.atom_masses) + np.sum(self.bin_masses))

    @property
    def atom_mass_square_sum(self):
        """Sum of squared point masses, the long-time average of |ft|^2."""
        return float(np.sum(self.atom_masses ** 2))

    def ft(self, t):
        """Transform of the line measure; bins contribute at their midpoints."""
        t = np.asarray(t, dtype=float)
        val = np.tensordot(self.atom_masses,
                           np.exp(-2j * np.pi * np.multiply.outer(self.atom_positions, t)), axes=1)
        if self.bin_masses.size:
            mids = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
            val = val + np.tensordot(self.bin_masses,
                                     np.exp(-2j * np.pi * np.multiply.outer(mids, t)), axes=1)
        return val


def project_measure(mu: AtomicMeasure, eta, bins: int = DEFAULT_BINS,
                    atom_tol: float = ATOM_NORMAL_TOL,
                    cluster_tol: float = CLUSTER_TOL) -> LineMeasure:
    """Pushforward of mu onto the line spanned by eta.

    Atoms of the projection come from nodes whose recorded normal is within
    atom_tol of +/- eta (flat pieces orthogonal to eta project to points);
    for measures without normals every node is a genuine point mass.  The
    remaining mass is binned.  Total mass is preserved exactly.
    """
    eta = np.asarray(eta, dtype=float)
    nrm = np.linalg.norm(eta)
    if abs(nrm - 1.0) > 1e-9:
        raise BadInputError("projection direction must be a unit vector")
    eta = eta / nrm
    proj = mu.positions @ eta
    if mu.normals is None:
        flat = np.ones(len(mu), dtype=bool)
    else:
        d_plus = np.linalg.norm(mu.normals - eta[None, :], axis=1)
        d_minus = np.linalg.norm(mu.normals + eta[None, :], axis=1)
        flat = np.minimum(d_plus, d_minus) <= atom_tol

    atom_pos, atom_mass = _cluster(proj[flat], mu.weights[flat], cluster_tol)

    rest = proj[~flat]
    rest_w = mu.weights[~flat]
    if rest.size:
        lo, hi = float(np.min(rest)), float(np.max(rest))
        if hi - lo < 1e-15:
            hi = lo + 1e-15
        edges = np.linspace(lo, hi, int(bins) + 1)
        masses, _ = np.histogram(rest, bins=edges, weights=rest_w)
    else:
        edges = np.empty(0)
        masses = np.empty(0)
    return LineMeasure(atom_pos, atom_mass, edges, masses)


def _cluster(values, weights, tol):
    if values.size == 0:
        return np.empty(0), np.empty(0)
    order = np.argsort(values)
    v = values[order]
    w = weights[order]
    breaks = np.where(np.diff(v) > tol)[0] + 1
    groups = np.split(np.arange(v.size), breaks)
    pos = np.empty(len(groups))
    mass = np.empty(len(groups))
    for g, idx in enumerate(groups):
        wm = w[idx]
        mass[g] = np.sum(wm)
        if idx.size == 1:
            pos[g] = v[idx[0]]
        else:
            tot = mass[g]
            pos[g] = np.sum(v[idx] * wm) / tot if tot != 0 else float(np.mean(v[idx]))
    return pos, mass


# -- time averages along a line -------------------------------------------------


def wiener_atom_mass(mu: AtomicMeasure, eta, T: float, samples: int | None = None) -> float:
    """Time average (1/2T) int_{-T}^{T} |ft(mu)(t eta)|^2 dt by trapezoid rule.

    As T grows this converges to the sum of squared point masses of the
    projection of mu onto eta, since the transform of the projection at t
    equals the transform of mu at t*eta.  The default sample count resolves
    the fastest oscillation exp(2 pi i t r) at 40 samples per unit of T*r.
    """
    if T <= 0:
        raise BadInputError("T must be positive")
    if samples is None:
        samples = int(math.ceil(40 * T * max(mu.support_radius, 0.025))) + 1
    if samples <= 0:
        raise BadInputError("samples must be positive")
    ts = np.linspace(-T, T, int(samples))
    vals = np.abs(ft_profile(mu, eta, ts)) ** 2
    return float(np.trapezoid(vals, ts) / (2 * T))


# -- directional decay scans ------------------------------------------------------


@dataclass(frozen=True)
class DecayScanResult:
    """Per-t envelope sup_eta |ft(sigma)(t eta)| over the admissible directions."""

    t_grid: np.ndarray
    envelope: np.ndarray
    cert_errors: np.ndarray
    etas: np.ndarray
    table: np.ndarray | None = None


def _admissible_directions(thetas, delta, spacing, dim):
    """Uniform direction grid at the given geodesic spacing, at distance >= delta
    from the symmetrized excluded set thetas U -thetas."""
    sym = np.vstack([thetas, -thetas])
    if dim == 2:
        n = max(8, int(math.ceil(2 * np.pi / spacing)))
        ang = np.arange(n) * 2 * np.pi / n
        etas = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif dim == 3:
        n = max(64, int(math.ceil(16 * np.pi / spacing ** 2)))
        k = np.arange(n) + 0.5
        golden = np.pi * (3 - 5 ** 0.5)
        z = 1 - 2 * k / n
        rho = np.sqrt(np.maximum(0.0, 1 - z * z))
        etas = np.stack([rho * np.cos(golden * k), rho * np.sin(golden * k), z], axis=1)
    else:
        raise BadInputError("direction scans support dimensions 2 and 3")
    dots = np.clip(etas @ sym.T, -1.0, 1.0)
    dist = np.min(np.arccos(dots), axis=1)
    return etas[dist >= delta]


def decay_scan(mu: AtomicMeasure, thetas, delta: float, t_grid,
               spacing: float | None = None, return_table: bool = False) -> DecayScanResult:
    """Envelope of |ft(mu)| along rays staying delta away from thetas U -thetas.

    mu is meant to be a surface measure restricted to a boundary piece whose
    normals lie in the theta set; the envelope then decays toward zero.  The
    certified error per t is the transform's gradient bound times the chord
    length of the direction-grid spacing at radius t.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    thetas = thetas / np.linalg.norm(thetas, axis=1)[:, None]
    if delta <= 0:
        raise BadInputError("delta must be positive")
    if spacing is None:
        spacing = delta / 4.0
    etas = _admissible_directions(thetas, delta, spacing, mu.dim)
    if etas.shape[0] == 0:
        raise BadInputError("no admissible directions: delta too large for the sphere grid")
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    env = np.empty(t_grid.shape[0])
    table = np.empty((t_grid.shape[0], etas.shape[0])) if return_table else None
    for i, t in enumerate(t_grid):
        vals = np.abs(ft_many(mu, t * etas))
        env[i] = float(np.max(vals))
        if return_table:
            table[i] = vals
    certs = mu.lipschitz_bound * np.abs(t_grid) * spacing
    return DecayScanResult(t_grid, env, certs, etas, table)


def polytopal_projection_distance(mu_d: AtomicMeasure, mu_p: AtomicMeasure,
                                  eta_set, bins: int = DEFAULT_BINS) -> float:
    """Max over directions of the L1 distance between binned projections.

    Both measures are binned with identical edges spanning the union of the
    projected supports; refining the polytopal approximation drives the
    value down.
    """
    if abs(mu_d.total_mass - mu_p.total_mass) > 0.25 * max(mu_d.total_mass, mu_p.total_mass):
        raise BadInputError("measures must have comparable total mass")
    eta_set = np.atleast_2d(np.asarray(eta_set, dtype=float))
    worst = 0.0
    for eta in eta_set:
        eta = eta / np.linalg.norm(eta)
        pd = mu_d.positions @ eta
        pp = mu_p.positions @ eta
        lo = min(pd.min(), pp.min())
        hi = max(pd.max(), pp.max())
        if hi - lo < 1e-15:
            hi = lo + 1e-15
        edges = np.linspace(lo, hi, int(bins) + 1)
        hd, _ = np.histogram(pd, bins=edges, weights=mu_d.weights)
        hp, _ = np.histogram(pp, bins=edges, weights=mu_p.weights)
        worst = max(worst, float(np.sum(np.abs(hd - hp))))
    return worst
