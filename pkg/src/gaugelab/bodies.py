"""0-symmetric convex bodies: gauge and support functionals, boundary quadrature.

A body is one of three variants: an H-polytope (unit facet normals with
offsets, stored in +/- pairs), an ellipsoid (semi-axes), or a radial body
(p-exponent superellipsoid, or a tabulated radial function in the plane).
Every variant can evaluate its gauge (Minkowski functional), its support
function (the gauge of the dual body), and produce a boundary quadrature
mesh that carries outward unit normals, i.e. the Gauss map.

All objects are immutable after construction and all operations are pure,
so values can be shared freely across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import HalfspaceIntersection

from .errors import BadInputError

PAIR_TOL = 1e-9        # +/- facet pairing match tolerance
CLAMP_TOL = 1e-12      # inner products may overshoot [-1, 1] by at most this
VERTEX_TOL = 1e-9      # vertex-on-facet incidence tolerance


def geodesic_distance(u, v):
    """Geodesic (angular) distance on the unit sphere, arccos of the clamped dot.

    Accepts single vectors or stacked rows; broadcasting follows numpy rules.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dot = np.sum(u * v, axis=-1)
    if np.any(np.abs(dot) > 1.0 + CLAMP_TOL):
        raise BadInputError("geodesic_distance expects unit vectors")
    return np.arccos(np.clip(dot, -1.0, 1.0))


def _unit_rows(arr, what):
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms <= 0):
        raise BadInputError(f"{what}: zero vector")
    return arr / norms[:, None], norms


@dataclass(frozen=True)
class BoundaryMesh:
    """Quadrature discretization of (a piece of) a body boundary.

    positions lie on the boundary, normals are outward unit vectors
    (exact facet normals for polytopes), and weights are surface-area
    quadrature weights.  boundary_tol bounds |gauge - 1| at the nodes and
    mass_tol is the declared accuracy of sum(weights) against the true
    surface area, for meshes of a full boundary.
    """

    positions: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    boundary_tol: float
    mass_tol: float

    def __post_init__(self):
        p = np.atleast_2d(np.array(self.positions, dtype=float))
        n = np.atleast_2d(np.array(self.normals, dtype=float))
        w = np.array(self.weights, dtype=float).ravel()
        if p.shape != n.shape or p.shape[0] != w.shape[0]:
            raise BadInputError("mesh arrays must agree in length")
        if np.any(w < 0):
            raise BadInputError("mesh weights must be nonnegative")
        nn = np.linalg.norm(n, axis=1)
        if np.any(np.abs(nn - 1.0) > 1e-9):
            raise BadInputError("mesh normals must be unit vectors")
        for a in (p, n, w):
            a.setflags(write=False)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.positions.shape[1]

    @property
    def total_mass(self):
        return float(np.sum(self.weights))

    def __len__(self):
        return self.positions.shape[0]

    def restrict(self, mask):
        """Sub-mesh of the selected nodes (same tolerances)."""
        mask = np.asarray(mask, dtype=bool)
        return BoundaryMesh(self.positions[mask], self.normals[mask],
                            self.weights[mask], self.boundary_tol, self.mass_tol)


class ConvexBody:
    """Base class for 0-symmetric convex bodies.

    Subclasses provide gauge_many / dual_gauge_many / contains_many /
    triangulate and the inner/outer radius certificates.
    """

    dim: int
    scale: float = 1.0  # factor applied when a body was shrunk at load time

    # -- functionals ---------------------------------------------------------

    def gauge(self, x) -> float:
        return float(self.gauge_many(np.asarray(x, dtype=float)[None, :])[0])

    def dual_gauge(self, xi) -> float:
        return float(self.dual_gauge_many(np.asarray(xi, dtype=float)[None, :])[0])

    def gauge_many(self, X) -> np.ndarray:
        raise NotImplementedError

    def dual_gauge_many(self, Xi) -> np.ndarray:
        raise NotImplementedError

    def contains_many(self, X, t=1.0) -> np.ndarray:
        """Membership x in t*K through the variant's defining inequalities."""
        raise NotImplementedError

    def radial(self, u) -> float:
        """Radial function: the boundary is {radial(u) * u}."""
        g = self.gauge(u)
        if g == 0:
            raise BadInputError("radial function needs a nonzero direction")
        return float(np.linalg.norm(u) / g)

    # -- certificates --------------------------------------------------------

    def inner_radius(self) -> float:
        """Certified r0 with the ball of radius r0 inside the body."""
        raise NotImplementedError

    def outer_radius(self) -> float:
        """Certified r1 with the body inside the ball of radius r1."""
        raise NotImplementedError

    def triangulate(self, resolution: int) -> BoundaryMesh:
        raise NotImplementedError

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError

    def rescaled(self, factor: float) -> "ConvexBody":
        """A copy scaled by `factor` (factor*K)."""
        raise NotImplementedError

    def normalized(self) -> tuple["ConvexBody", float]:
        """Shrink into the unit ball if needed; returns (body, applied factor).

        Bodies already inside the unit ball are returned unchanged with
        factor 1.  The factor is also recorded on the returned body's
        `scale` attribute for reporting.
        """
        r1 = self.outer_radius()
        if r1 <= 1.0 + 1e-12:
            return self, 1.0
        factor = 1.0 / r1
        body = self.rescaled(factor)
        body.scale = factor
        return body, factor


class HPolytope(ConvexBody):
    """Intersection of halfspaces <x, theta_i> <= h_i with unit normals in +/- pairs."""

    def __init__(self, normals, offsets):
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        offsets = np.asarray(offsets, dtype=float).ravel()
        if normals.shape[0] != offsets.shape[0]:
            raise BadInputError("normals and offsets must have equal length")
        if normals.shape[0] < 2:
            raise BadInputError("a polytope needs at least one facet pair")
        if np.any(offsets <= 0):
            raise BadInputError("facet offsets must be positive (0 interior)")
        normals, norms = _unit_rows(normals, "facet normals")
        offsets = offsets / norms
        self._check_pairs(normals, offsets)
        self.dim = normals.shape[1]
        self.normals = normals
        self.offsets = offsets
        self.normals.setflags(write=False)
        self.offsets.setflags(write=False)
        self._vertices = None

    @staticmethod
    def _check_pairs(normals, offsets):
        m = normals.shape[0]
        dots = normals @ normals.T
        for i in range(m):
            close = np.where(dots[i] > 1.0 - PAIR_TOL)[0]
            if len(close) > 1:
                raise BadInputError(f"duplicate facet normal at index {i}")
            anti = np.where(dots[i] < -1.0 + PAIR_TOL)[0]
            paired = [j for j in anti if abs(offsets[j] - offsets[i]) <= PAIR_TOL * max(1.0, offsets[i])]
            if not paired:
                raise BadInputError(
                    f"facet {i} has no matching opposite facet; body must be 0-symmetric")

    @property
    def n_facets(self):
        return self.normals.shape[0]

    @property
    def n_directions(self):
        """Number of non-parallel facet directions (facet pairs)."""
        return self.n_facets // 2

    def facet_pairs(self):
        """One representative normal per +/- pair, with its offset."""
        reps = []
        seen = np.zeros(self.n_facets, dtype=bool)
        for i in range(self.n_facets):
            if seen[i]:
                continue
            dots = self.normals @ self.normals[i]
            j = int(np.argmin(dots))
            seen[i] = seen[j] = True
            reps.append((self.normals[i], self.offsets[i]))
        return reps

    def gauge_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        vals = (X @ self.normals.T) / self.offsets[None, :]
        return np.maximum(np.max(vals, axis=1), 0.0)

    def dual_gauge_many(self, Xi):
        Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
        return np.max(Xi @ self.vertices.T, axis=1)

    def contains_many(self, X, t=1.0):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all(X @ self.normals.T <= t * self.offsets[None, :] + 1e-15, axis=1)

    @property
    def vertices(self):
        if self._vertices is None:
            self._vertices = self._enumerate_vertices()
            self._vertices.setflags(write=False)
        return self._vertices

    def _enumerate_vertices(self):
        if self.dim == 1:
            h = float(np.min(self.offsets))
            return np.array([[-h], [h]])
        halfspaces = np.hstack([self.normals, -self.offsets[:, None]])
        hs = HalfspaceIntersection(halfspaces, np.zeros(self.dim))
        verts = hs.intersections
        # Qhull may repeat vertices; merge within tolerance.
        order = np.lexsort(verts.T[::-1])
        verts = verts[order]
        keep = [0]
        for i in range(1, len(verts)):
            if np.max(np.abs(verts[i] - verts[keep[-1]])) > VERTEX_TOL:
                keep.append(i)
        return verts[keep]

    def inner_radius(self):
        return float(np.min(self.offsets))

    def outer_radius(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    def _facet_vertices(self, i):
        verts = self.vertices
        on = np.abs(verts @ self.normals[i] - self.offsets[i]) <= VERTEX_TOL * max(1.0, self.offsets[i])
        fv = verts[on]
        need = 2 if self.dim == 2 else self.dim
        if fv.shape[0] < need:
            raise BadInputError(
                f"facet {i} is redundant (carries no boundary); cannot mesh it")
        return fv

    def triangulate(self, resolution):
        if resolution < 1:
            raise BadInputError("resolution must be >= 1")
        if self.dim == 1:
            h = float(np.min(self.offsets))
            return BoundaryMesh(np.array([[-h], [h]]), np.array([[-1.0], [1.0]]),
                                np.array([1.0, 1.0]), 1e-12, 1e-12)
        if resolution < self.n_facets:
            raise BadInputError(
                f"resolution {resolution} too small to cover all {self.n_facets} facets")
        if self.dim == 2:
            return self._mesh_polygon(resolution)
        if self.dim == 3:
            return self._mesh_polytope_3d(resolution)
        raise BadInputError("boundary meshing supports dimensions 1..3")

    def _mesh_polygon(self, resolution):
        edges = [self._facet_vertices(i) for i in range(self.n_facets)]
        lengths = np.array([np.linalg.norm(e[1] - e[0]) for e in edges])
        per = np.maximum(1, np.round(resolution * lengths / lengths.sum()).astype(int))
        pos, nrm, wts = [], [], []
        for i, e in enumerate(edges):
            a, b = e[0], e[1]
            m = per[i]
            ts = (np.arange(m) + 0.5) / m
            pts = a[None, :] + ts[:, None] * (b - a)[None, :]
            pos.append(pts)
            nrm.append(np.repeat(self.normals[i][None, :], m, axis=0))
            wts.append(np.full(m, lengths[i] / m))
        return BoundaryMesh(np.vstack(pos), np.vstack(nrm), np.concatenate(wts),
                            1e-9, 1e-9 * float(lengths.sum()))

    def _mesh_polytope_3d(self, resolution):
        base = []
        for i in range(self.n_facets):
            fv = self._facet_vertices(i)
            c = fv.mean(axis=0)
            # order around the centroid inside the facet plane
            b1 = fv[0] - c
            b1 /= np.linalg.norm(b1)
            b2 = np.cross(self.normals[i], b1)
            ang = np.arctan2((fv - c) @ b2, (fv - c) @ b1)
            fv = fv[np.argsort(ang)]
            for k in range(len(fv)):
                base.append((c, fv[k], fv[(k + 1) % len(fv)], i))
        level = 0
        while len(base) * 4 ** (level + 1) <= resolution:
            level += 1
        pos, nrm, wts = [], [], []
        for (a, b, c, i) in base:
            tris = [(a, b, c)]
            for _ in range(level):
                nxt = []
                for (p, q, r) in tris:
                    pq, qr, rp = (p + q) / 2, (q + r) / 2, (r + p) / 2
                    nxt += [(p, pq, rp), (pq, q, qr), (rp, qr, r), (pq, qr, rp)]
                tris = nxt
            for (p, q, r) in tris:
                pos.append((p + q + r) / 3)
                wts.append(0.5 * np.linalg.norm(np.cross(q - p, r - p)))
                nrm.append(self.normals[i])
        return BoundaryMesh(np.array(pos), np.array(nrm), np.array(wts),
                            1e-9, 1e-9 * float(np.sum(wts)))

    def to_dict(self):
        return {"dim": self.dim, "type": "hpolytope",
                "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}

    def rescaled(self, factor):
        return HPolytope(self.normals, self.offsets * factor)


class Ellipsoid(ConvexBody):
    """Axis-aligned ellipsoid sum (x_k / a_k)^2 <= 1."""

    def __init__(self, axes):
        axes = np.array(axes, dtype=float).ravel()
        if np.any(axes <= 0):
            raise BadInputError("ellipsoid semi-axes must be positive")
        self.dim = axes.shape[0]
        self.axes = axes
        self.axes.setflags(write=False)

    def gauge_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.sqrt(np.sum((X / self.axes[None, :]) ** 2, axis=1))

    def dual_gauge_many(self, Xi):
        Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
        return np.sqrt(np.sum((Xi * self.axes[None, :]) ** 2, axis=1))

    def contains_many(self, X, t=1.0):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.sum((X / self.axes[None, :]) ** 2, axis=1) <= t * t + 1e-15

    def inner_radius(self):
        return float(np.min(self.axes))

    def outer_radius(self):
        return float(np.max(self.axes))

    def is_ball(self, tol=1e-12):
        return float(np.ptp(self.axes)) <= tol * float(np.max(self.axes))

    def _radial_many(self, U):
        return 1.0 / np.sqrt(np.sum((U / self.axes[None, :]) ** 2, axis=1))

    def _normal_at(self, X):
        n = X / self.axes[None, :] ** 2
        return n / np.linalg.norm(n, axis=1)[:, None]

    def triangulate(self, resolution):
        if resolution < 1:
            raise BadInputError("resolution must be >= 1")
        if self.dim == 1:
            a = self.axes[0]
            return BoundaryMesh(np.array([[-a], [a]]), np.array([[-1.0], [1.0]]),
                                np.array([1.0, 1.0]), 1e-12, 1e-12)
        if self.dim == 2:
            return _mesh_smooth_2d(self._radial_many, self._normal_at, resolution)
        if self.dim == 3:
            return _mesh_smooth_3d(self._radial_many, self._normal_at, resolution)
        raise BadInputError("boundary meshing supports dimensions 1..3")

    def to_dict(self):
        return {"dim": self.dim, "type": "ellipsoid", "axes": self.axes.tolist()}

    def rescaled(self, factor):
        return Ellipsoid(self.axes * factor)


class RadialBody(ConvexBody):
    """Star body given by a p-exponent superellipsoid or a tabulated radial function.

    The superellipsoid form sum |x_k / a_k|^p <= 1 needs p >= 1 for convexity
    and works in any dimension (meshing in 1..3).  The tabulated form stores
    radial samples on a uniform angle grid and is restricted to the plane;
    samples must satisfy r(u) = r(-u).
    """

    def __init__(self, p=None, axes=None, radial_samples=None):
        if radial_samples is not None:
            samples = np.array(radial_samples, dtype=float).ravel()
            m = samples.shape[0]
            if m < 8 or m % 2:
                raise BadInputError("tabulated radial function needs an even count >= 8")
            if np.any(samples <= 0):
                raise BadInputError("radial samples must be positive")
            half = m // 2
            if np.max(np.abs(samples - np.roll(samples, half))) > 1e-12 * np.max(samples):
                raise BadInputError("radial samples must satisfy r(u) = r(-u)")
            self.dim = 2
            self.kind = "tabulated"
            self.samples = samples
            self.samples.setflags(write=False)
            self.p = None
            self.axes = None
        else:
            if p is None or axes is None:
                raise BadInputError("superellipsoid needs p and axes")
            p = float(p)
            if p < 1.0:
                raise BadInputError("superellipsoid exponent must be >= 1 (convexity)")
            axes = np.array(axes, dtype=float).ravel()
            if np.any(axes <= 0):
                raise BadInputError("semi-axes must be positive")
            self.dim = axes.shape[0]
            self.kind = "superellipsoid"
            self.p = p
            self.axes = axes
            self.axes.setflags(write=False)
            self.samples = None

    # tabulated interpolation -------------------------------------------------

    def _radial_interp(self, phi):
        m = self.samples.shape[0]
        u = np.mod(phi, 2 * np.pi) * m / (2 * np.pi)
        i0 = np.floor(u).astype(int) % m
        frac = u - np.floor(u)
        return (1 - frac) * self.samples[i0] + frac * self.samples[(i0 + 1) % m]

    def gauge_many(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "superellipsoid":
            return np.sum(np.abs(X / self.axes[None, :]) ** self.p, axis=1) ** (1.0 / self.p)
        r = np.linalg.norm(X, axis=1)
        out = np.zeros_like(r)
        nz = r > 0
        phi = np.arctan2(X[nz, 1], X[nz, 0])
        out[nz] = r[nz] / self._radial_interp(phi)
        return out

    def dual_gauge_many(self, Xi):
        Xi = np.atleast_2d(np.asarray(Xi, dtype=float))
        if self.kind == "superellipsoid":
            if self.p == 1.0:
                return np.max(np.abs(Xi * self.axes[None, :]), axis=1)
            q = self.p / (self.p - 1.0) if self.p > 1.0 else np.inf
            return np.sum(np.abs(Xi * self.axes[None, :]) ** q, axis=1) ** (1.0 / q)
        # support over a refined boundary polyline
        m = self.samples.shape[0] * 8
        phi = np.arange(m) * 2 * np.pi / m
        bdry = (self._radial_interp(phi)[:, None]
                * np.stack([np.cos(phi), np.sin(phi)], axis=1))
        return np.max(Xi @ bdry.T, axis=1)

    def contains_many(self, X, t=1.0):
        return self.gauge_many(X) <= t + 1e-15

    def inner_radius(self):
        if self.kind == "superellipsoid":
            d = self.dim
            shrink = min(1.0, d ** (0.5 - 1.0 / self.p))
            return float(np.min(self.axes)) * shrink
        m = self.samples.shape[0]
        return float(np.min(self.samples)) * math.cos(math.pi / m)

    def outer_radius(self):
        if self.kind == "superellipsoid":
            d = self.dim
            grow = max(1.0, d ** (0.5 - 1.0 / self.p))
            return float(np.max(self.axes)) * grow
        return float(np.max(self.samples))

    def _radial_many(self, U):
        g = self.gauge_many(U)
        return 1.0 / g

    def _normal_at(self, X):
        if self.kind == "superellipsoid":
            g = np.abs(X / self.axes[None, :]) ** (self.p - 1.0) * np.sign(X) / self.axes[None, :]
            return g / np.linalg.norm(g, axis=1)[:, None]
        # tangent from the radial derivative, rotated outward
        phi = np.arctan2(X[:, 1], X[:, 0])
        eps = 1e-6
        r = self._radial_interp(phi)
        dr = (self._radial_interp(phi + eps) - self._radial_interp(phi - eps)) / (2 * eps)
        u = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        uperp = np.stack([-np.sin(phi), np.cos(phi)], axis=1)
        n = r[:, None] * u - dr[:, None] * uperp
        return n / np.linalg.norm(n, axis=1)[:, None]

    def triangulate(self, resolution):
        if resolution < 1:
            raise BadInputError("resolution must be >= 1")
        if self.dim == 1:
            a = self.axes[0]
            return BoundaryMesh(np.array([[-a], [a]]), np.array([[-1.0], [1.0]]),
                                np.array([1.0, 1.0]), 1e-12, 1e-12)
        if self.dim == 2:
            return _mesh_smooth_2d(self._radial_many, self._normal_at, resolution)
        if self.dim == 3 and self.kind == "superellipsoid":
            return _mesh_smooth_3d(self._radial_many, self._normal_at, resolution)
        raise BadInputError("tabulated radial bodies mesh only in the plane")

    def to_dict(self):
        if self.kind == "superellipsoid":
            return {"dim": self.dim, "type": "radial", "p": self.p,
                    "axes": self.axes.tolist()}
        return {"dim": 2, "type": "radial", "radial_samples": self.samples.tolist()}

    def rescaled(self, factor):
        if self.kind == "superellipsoid":
            return RadialBody(p=self.p, axes=self.axes * factor)
        return RadialBody(radial_samples=self.samples * factor)


# -- smooth meshing helpers ----------------------------------------------------


def _mesh_smooth_2d(radial_many, normal_at, resolution):
    """Angle-midpoint nodes; weights are chord lengths across each node cell."""
    n = int(resolution)
    phi = (np.arange(n) + 0.5) * 2 * np.pi / n
    lo = phi - np.pi / n
    hi = phi + np.pi / n

    def bdry(angles):
        u = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return radial_many(u)[:, None] * u

    pos = bdry(phi)
    wts = np.linalg.norm(bdry(hi) - bdry(lo), axis=1)
    nrm = normal_at(pos)
    h = 2 * np.pi / n
    return BoundaryMesh(pos, nrm, wts, 1e-9, 10.0 * float(np.sum(wts)) * h * h)


@lru_cache(maxsize=8)
def _icosphere(level):
    """Subdivided icosahedron: unit vertices and triangle index triples.

    The vertex set is antipodally symmetric at every level, so meshes and
    measures built from it inherit the 0-symmetry of the body.
    """
    t = (1 + 5 ** 0.5) / 2
    verts = []
    for a, b in [(1, t), (-1, t), (1, -t), (-1, -t)]:
        verts += [(0, a, b), (a, b, 0), (b, 0, a)]
    verts = np.array(verts, dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    from scipy.spatial import ConvexHull
    faces = ConvexHull(verts).simplices
    # orient all faces outward
    fixed = []
    for f in faces:
        a, b, c = verts[f]
        if np.dot(np.cross(b - a, c - a), a + b + c) < 0:
            f = f[[0, 2, 1]]
        fixed.append(f)
    faces = np.array(fixed)
    for _ in range(level):
        vlist = [tuple(v) for v in verts]
        index = {v: i for i, v in enumerate(vlist)}
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                m = m / np.linalg.norm(m)
                tm = tuple(m)
                if tm not in index:
                    index[tm] = len(vlist)
                    vlist.append(tm)
                cache[key] = index[tm]
            return cache[key]

        new_faces = []
        for (i, j, k) in faces:
            ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            new_faces += [(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)]
        verts = np.array(vlist)
        verts /= np.linalg.norm(verts, axis=1)[:, None]
        faces = np.array(new_faces)
    return verts, faces


def _spherical_triangle_areas(a, b, c):
    """Solid angles of spherical triangles with unit-vector rows a, b, c."""
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1.0 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2.0 * np.arctan2(num, den)


def _mesh_smooth_3d(radial_many, normal_at, resolution):
    """Icosphere directions projected radially onto the boundary.

    Node weights combine the exact spherical patch area with the radial
    area element r^2 / <n, u>, a midpoint rule for the surface integral;
    exact for the unit sphere.
    """
    level = 0
    while 20 * 4 ** (level + 1) <= resolution:
        level += 1
    verts, faces = _icosphere(level)
    u = verts[faces[:, 0]] + verts[faces[:, 1]] + verts[faces[:, 2]]
    u /= np.linalg.norm(u, axis=1)[:, None]
    patch = _spherical_triangle_areas(verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]])
    r = radial_many(u)
    pos = r[:, None] * u
    nrm = normal_at(pos)
    cosang = np.einsum("ij,ij->i", nrm, u)
    wts = r ** 2 / cosang * patch
    h = math.sqrt(4 * np.pi / len(faces))
    return BoundaryMesh(pos, nrm, wts, 1e-9, 10.0 * float(np.sum(wts)) * h * h)


# -- cap families ---------------------------------------------------------------


@dataclass(frozen=True)
class CapFamily:
    """Disjoint open geodesic caps on the direction sphere.

    delta0 is the minimum pairwise geodesic distance between the cap center
    directions; disjointness requires delta0 > 2 * r_cap.
    """

    directions: np.ndarray
    r_cap: float
    delta0: float = field(init=False)

    def __post_init__(self):
        dirs, _ = _unit_rows(self.directions, "cap directions")
        if self.r_cap <= 0:
            raise BadInputError("cap radius must be positive")
        n = dirs.shape[0]
        if n < 1:
            raise BadInputError("need at least one cap")
        d0 = math.inf
        for i in range(n):
            for j in range(i + 1, n):
                d0 = min(d0, float(geodesic_distance(dirs[i], dirs[j])))
        if n > 1 and d0 <= 2 * self.r_cap:
            raise BadInputError(
                f"caps overlap: min center distance {d0:.6g} <= 2*r_cap {2 * self.r_cap:.6g}")
        dirs.setflags(write=False)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "delta0", d0)

    def __len__(self):
        return self.directions.shape[0]

    def membership(self, normals):
        """Boolean (n_caps, n_nodes): strict geodesic containment in each open cap."""
        dots = np.clip(normals @ self.directions.T, -1.0, 1.0)
        return np.arccos(dots).T < self.r_cap

    def masses(self, mesh: BoundaryMesh):
        return self.membership(mesh.normals) @ mesh.weights


# -- module-level operations ----------------------------------------------------


def gauge(body: ConvexBody, x) -> float:
    """Minkowski functional of the body at x (0 at the origin, 1 on the boundary)."""
    return body.gauge(x)


def dual_gauge(body: ConvexBody, xi) -> float:
    """Support function of the body at xi, i.e. the gauge of the dual body."""
    return body.dual_gauge(xi)


def triangulate_boundary(body: ConvexBody, resolution: int) -> BoundaryMesh:
    """Boundary quadrature mesh with roughly `resolution` nodes."""
    return body.triangulate(resolution)


def area_measure_cap_mass(mesh: BoundaryMesh, theta, r_cap: float) -> float:
    """Boundary mass whose Gauss image lies strictly inside the open cap at theta."""
    theta = np.asarray(theta, dtype=float)
    theta = theta / np.linalg.norm(theta)
    dist = geodesic_distance(mesh.normals, theta[None, :])
    return float(np.sum(mesh.weights[dist < r_cap]))


# -- convenience constructors -----------------------------------------------------


def cube_body(dim: int, half_width: float = 1.0) -> HPolytope:
    eye = np.eye(dim)
    normals = np.vstack([eye, -eye])
    return HPolytope(normals, np.full(2 * dim, float(half_width)))


def ball_body(dim: int, radius: float = 1.0) -> Ellipsoid:
    return Ellipsoid(np.full(dim, float(radius)))


def regular_polygon_body(n_sides: int, circumradius: float = 1.0) -> HPolytope:
    """Regular polygon with vertices on the circle (even side count for symmetry)."""
    if n_sides % 2 or n_sides < 4:
        raise BadInputError("need an even number of sides >= 4 for 0-symmetry")
    ang = (2 * np.arange(n_sides) + 1) * np.pi / n_sides
    normals = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    h = circumradius * math.cos(math.pi / n_sides)
    return HPolytope(normals, np.full(n_sides, h))


def random_symmetric_polytope(dim: int, pairs: int, seed: int) -> HPolytope:
    """Seeded random H-polytope with `pairs` facet pairs, all facets active.

    Normals are jittered around an even angular spread and offsets stay near
    1, which keeps every facet supporting; degenerate draws are retried.
    """
    rng = np.random.default_rng(seed)
    for _ in range(64):
        if dim == 2:
            ang = (np.arange(pairs) + rng.uniform(0.15, 0.85, size=pairs)) * np.pi / pairs
            v = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            k = np.arange(pairs) + 0.5
            golden = np.pi * (3 - 5 ** 0.5)
            z = 1 - k / pairs  # upper half sphere, +/- pairing adds the rest
            rho = np.sqrt(np.maximum(0.0, 1 - z * z))
            v = np.stack([rho * np.cos(golden * k), rho * np.sin(golden * k), z], axis=1)
            v = v + rng.normal(scale=0.08, size=v.shape)
            v /= np.linalg.norm(v, axis=1)[:, None]
        h = rng.uniform(0.92, 1.08, size=pairs)
        body = HPolytope(np.vstack([v, -v]), np.concatenate([h, h]))
        try:
            for i in range(body.n_facets):
                body._facet_vertices(i)
        except BadInputError:
            continue
        return body
    raise BadInputError("failed to draw a non-degenerate random polytope")


# -- file I/O ---------------------------------------------------------------------


def body_from_dict(spec: dict) -> ConvexBody:
    try:
        kind = spec["type"]
        if kind == "hpolytope":
            return HPolytope(spec["normals"], spec["offsets"])
        if kind == "ellipsoid":
            return Ellipsoid(spec["axes"])
        if kind == "radial":
            if "radial_samples" in spec:
                return RadialBody(radial_samples=spec["radial_samples"])
            return RadialBody(p=spec["p"], axes=spec["axes"])
    except KeyError as exc:
        raise BadInputError(f"body spec missing field {exc}") from None
    raise BadInputError(f"unknown body type {spec.get('type')!r}")


def load_body(path, normalize: bool = True) -> ConvexBody:
    """Load a body from its JSON spec file.

    With normalize=True (the default) a body poking out of the unit ball is
    shrunk into it and the applied factor is kept on `body.scale`.
    """
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read body file {path}: {exc}") from None
    body = body_from_dict(spec)
    if "dim" in spec and int(spec["dim"]) != body.dim:
        raise BadInputError("declared dim does not match body data")
    if normalize:
        body, _ = body.normalized()
    return body


def save_body(body: ConvexBody, path) -> None:
    with open(path, "w") as fh:
        json.dump(body.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
