"""Boundaries with signed distance, closest-point projection and curvature.

Every shape works on arrays of points of shape ``(n, d)``. The signed distance
is ``n(P x) . (x - P x)`` with ``n`` the chosen unit normal; for closed shapes
that is the outward normal, so the distance is negative inside.

``closest(x)`` is the workhorse: it returns the foot points, signed distances
and the principal curvatures at the feet in one pass. The module-level
functions (:func:`signed_distance`, :func:`project`, :func:`curvature`,
:func:`jacobian`) wrap it with the argument checks of the public contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import _polar
from .errors import (
    FocalPointReached,
    NoConvergence,
    NonUniqueProjection,
    OutsideBand,
)

MEDIAL_TOL = 1e-12
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
N_SEED = 256
N_REACH = 4096


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x, single


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


class Boundary:
    """Interface shared by all shapes."""

    dim: int = 2
    closed: bool = True
    kind: str = ""

    # -- geometry -----------------------------------------------------------
    def closest(self, x, strict=True):
        """Return ``(foot, signed_distance, curvatures)`` for points ``x``.

        ``curvatures`` has shape ``(n, dim-1)``. With ``strict=False`` points on
        the medial axis get NaN distances instead of raising.
        """
        raise NotImplementedError

    def in_band(self, x) -> np.ndarray:
        """Open-curve band membership; every point qualifies for closed shapes."""
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[0], dtype=bool)

    def distance_lower_bound(self, x) -> np.ndarray:
        """A lower bound on the unsigned distance to the boundary (used for culling)."""
        return np.abs(self.closest(x, strict=False)[1])

    def residual(self, p) -> np.ndarray:
        """Defining-equation residual at points ``p`` (zero on the boundary)."""
        raise NotImplementedError

    def normal(self, p) -> np.ndarray:
        raise NotImplementedError

    def bbox(self):
        raise NotImplementedError

    @property
    def reach(self) -> float:
        raise NotImplementedError

    def pieces(self):
        return [self]

    # -- parametrization for reference quadrature -------------------------------
    def param_pieces(self):
        """List of ``(t0, t1, curve)`` with ``curve(t) -> (points, speed)``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# circle and sphere


@dataclass(frozen=True)
class Circle(Boundary):
    r: float = 0.75
    center: tuple = (0.0, 0.0)
    kind = "circle"
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.r <= 0:
            raise ValueError("radius must be positive")

    @property
    def reach(self):
        return self.r

    def closest(self, x, strict=True):
        x = np.asarray(x, dtype=float)
        v = x - np.asarray(self.center)
        rho = np.sqrt(np.einsum("ij,ij->i", v, v))
        bad = rho < MEDIAL_TOL
        if strict and bad.any():
            raise NonUniqueProjection("point at the centre has no unique projection")
        with np.errstate(invalid="ignore", divide="ignore"):
            u = v / rho[:, None]
        foot = np.asarray(self.center) + self.r * u
        d = rho - self.r
        if bad.any():
            d = np.where(bad, np.nan, d)
        kappa = np.full((x.shape[0], self.dim - 1), 1.0 / self.r)
        return foot, d, kappa

    def distance_lower_bound(self, x):
        v = np.asarray(x, dtype=float) - np.asarray(self.center)
        return np.abs(np.sqrt(np.einsum("ij,ij->i", v, v)) - self.r)

    def residual(self, p):
        v = np.atleast_2d(p) - np.asarray(self.center)
        return np.einsum("ij,ij->i", v, v) / self.r**2 - 1.0

    def normal(self, p):
        v = np.atleast_2d(p) - np.asarray(self.center)
        return v / np.linalg.norm(v, axis=1)[:, None]

    def bbox(self):
        c = np.asarray(self.center)
        return c - self.r, c + self.r

    def param_pieces(self):
        c = np.asarray(self.center)
        r = self.r

        def curve(t):
            t = np.asarray(t, dtype=float)
            pts = c + r * np.stack([np.cos(t), np.sin(t)], axis=-1)
            return pts, np.full(t.shape, r)

        return [(0.0, 2 * math.pi, curve)]

    def to_dict(self):
        return {"kind": self.kind, "r": self.r, "center": list(self.center)}


@dataclass(frozen=True)
class Sphere(Circle):
    r: float = 0.75
    center: tuple = (0.0, 0.0, 0.0)
    kind = "sphere"
    dim = 3

    def param_pieces(self):
        raise NotImplementedError("spheres are integrated in spherical coordinates")

    def surface(self, theta, phi):
        """Point on the sphere at polar angle ``theta`` and azimuth ``phi``."""
        st = np.sin(theta)
        u = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        return np.asarray(self.center) + self.r * u


# ---------------------------------------------------------------------------
# star-shaped curves given in polar form rho(phi) about a center


class PolarCurve(Boundary):
    """Closed curve ``c + R(angle) rho(phi) (cos phi, sin phi)``, counterclockwise.

    Subclasses supply ``_rho(phi) -> (rho, rho', rho'')``.
    """

    dim = 2
    center: tuple
    angle: float

    def _rho(self, phi):
        raise NotImplementedError

    # local frame helpers
    @cached_property
    def _rot(self):
        return rotation_matrix(self.angle)

    def _to_local(self, x):
        return (np.asarray(x, dtype=float) - np.asarray(self.center)) @ self._rot

    def _to_world(self, p):
        return p @ self._rot.T + np.asarray(self.center)

    def _gamma(self, phi):
        """Local point, first and second derivative of the curve at ``phi``."""
        r, r1, r2 = self._rho(phi)
        c, s = np.cos(phi), np.sin(phi)
        g = np.stack([r * c, r * s], axis=-1)
        g1 = np.stack([r1 * c - r * s, r1 * s + r * c], axis=-1)
        g2 = np.stack(
            [r2 * c - 2 * r1 * s - r * c, r2 * s + 2 * r1 * c - r * s], axis=-1
        )
        return g, g1, g2

    def curvature_at(self, phi):
        r, r1, r2 = self._rho(phi)
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    @cached_property
    def _seed_params(self):
        return 2 * math.pi * np.arange(N_SEED) / N_SEED

    @cached_property
    def _seed_xy(self):
        return np.ascontiguousarray(self._gamma(self._seed_params)[0])

    @cached_property
    def _dense(self):
        phi = 2 * math.pi * np.arange(N_REACH) / N_REACH
        g, g1, _ = self._gamma(phi)
        return phi, g, g1

    @cached_property
    def _dense_tree(self):
        phi, g, _ = self._dense
        seg = np.linalg.norm(np.roll(g, -1, axis=0) - g, axis=1)
        # arc between consecutive samples is at most slightly longer than the chord
        return cKDTree(g), 0.5 * 1.01 * seg.max()

    def _project(self, xl):
        xl = np.ascontiguousarray(xl, dtype=float).reshape(-1, 2)
        out = _polar.project_polar(
            self._kernel, *self._kparams, xl, self._seed_params, self._seed_xy,
            NEWTON_TOL, NEWTON_MAXIT,
        )
        if not out[-1].all():
            raise NoConvergence("closest-point iteration did not converge")
        return out[:-1]

    def _solve(self, xl):
        """Closest parameter for local points ``xl``: best of the seeds, then Newton."""
        return self._project(xl)[0]

    def closest(self, x, strict=True):
        x = np.asarray(x, dtype=float)
        _, g, d, kappa = self._project(self._to_local(x))
        return self._to_world(g), d, kappa[:, None]

    def param_of(self, p):
        """Curve parameter of points ``p`` that lie on the curve."""
        return self._solve(self._to_local(np.atleast_2d(p)))

    def distance_lower_bound(self, x):
        tree, slack = self._dense_tree
        dist, _ = tree.query(self._to_local(x))
        return np.maximum(dist - slack, 0.0)

    def normal(self, p):
        phi = self.param_of(p)
        _, g1, _ = self._gamma(phi)
        tn = g1 / np.linalg.norm(g1, axis=1)[:, None]
        return np.stack([tn[:, 1], -tn[:, 0]], axis=-1) @ self._rot.T

    def bbox(self):
        _, g, _ = self._dense
        w = self._to_world(g)
        pad = 1e-3 * np.ptp(w, axis=0).max()
        return w.min(axis=0) - pad, w.max(axis=0) + pad

    @cached_property
    def _reach(self):
        phi, g, g1 = self._dense
        kmax = np.abs(self.curvature_at(phi)).max()
        tn = g1 / np.linalg.norm(g1, axis=1)[:, None]
        nrm = np.stack([tn[:, 1], -tn[:, 0]], axis=-1)
        # radius of the ball tangent at p_i that passes through p_j, both sides
        best = np.inf
        n = len(g)
        block = 512
        for i0 in range(0, n, block):
            gi, ni = g[i0 : i0 + block], nrm[i0 : i0 + block]
            dv = g[None, :, :] - gi[:, None, :]
            d2 = np.einsum("ijk,ijk->ij", dv, dv)
            proj = np.einsum("ijk,ik->ij", dv, ni)
            with np.errstate(divide="ignore", invalid="ignore"):
                rad = d2 / (2.0 * np.abs(proj))
            rad[d2 == 0] = np.inf
            best = min(best, float(np.nanmin(rad)))
        return min(1.0 / kmax, best)

    @property
    def reach(self):
        return self._reach

    def param_pieces(self):
        def curve(t):
            t = np.asarray(t, dtype=float)
            g, g1, _ = self._gamma(t)
            return self._to_world(g), np.linalg.norm(g1, axis=-1)

        return [(0.0, 2 * math.pi, curve)]


@dataclass(frozen=True, eq=False)
class QuarticConvex(PolarCurve):
    """``((x-x0)/r)^4 + ((y-y0)/r)^2 = 1``; curvature vanishes at ``(x0, y0 +- r)``."""

    r: float = 0.75
    center: tuple = (0.0, 0.0)
    angle: float = 0.0
    kind = "quartic"
    _kernel = staticmethod(_polar.quartic_rho)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def _kparams(self):
        return (float(self.r), 0.0, 0.0)

    def _rho(self, phi):
        # rho^2 = u solves A u^2 + B u - 1 = 0 with A = c^4/r^4, B = s^2/r^2
        c, s = np.cos(phi), np.sin(phi)
        r2 = self.r * self.r
        A = c**4 / r2**2
        B = s * s / r2
        A1 = -4 * c**3 * s / r2**2
        B1 = 2 * s * c / r2
        A2 = (12 * c * c * s * s - 4 * c**4) / r2**2
        B2 = 2 * (c * c - s * s) / r2
        root = np.sqrt(B * B + 4 * A)  # = 2 A u + B > 0
        u = 2.0 / (B + root)
        u1 = -(A1 * u * u + B1 * u) / root
        u2 = -(A2 * u * u + 4 * A1 * u * u1 + 2 * A * u1 * u1 + B2 * u + 2 * B1 * u1) / root
        rho = np.sqrt(u)
        rho1 = u1 / (2 * rho)
        rho2 = (u2 - 2 * rho1 * rho1) / (2 * rho)
        return rho, rho1, rho2

    def residual(self, p):
        pl = self._to_local(np.atleast_2d(p))
        return (pl[:, 0] / self.r) ** 4 + (pl[:, 1] / self.r) ** 2 - 1.0

    def to_dict(self):
        return {"kind": self.kind, "r": self.r, "center": list(self.center), "angle": self.angle}


@dataclass(frozen=True, eq=False)
class StarCurve(PolarCurve):
    """``rho(phi) = R + r cos(m phi)``."""

    R: float = 0.75
    r: float = 0.2
    m: int = 3
    center: tuple = (0.0, 0.0)
    angle: float = 0.0
    kind = "star"
    _kernel = staticmethod(_polar.star_rho)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.r >= self.R:
            raise ValueError("star curve needs R > r")

    @property
    def _kparams(self):
        return (float(self.R), float(self.r), float(self.m))

    def _rho(self, phi):
        m = self.m
        return (
            self.R + self.r * np.cos(m * phi),
            -m * self.r * np.sin(m * phi),
            -m * m * self.r * np.cos(m * phi),
        )

    def residual(self, p):
        pl = self._to_local(np.atleast_2d(p))
        phi = np.arctan2(pl[:, 1], pl[:, 0])
        return np.hypot(pl[:, 0], pl[:, 1]) - self._rho(phi)[0]

    def to_dict(self):
        return {
            "kind": self.kind,
            "R": self.R,
            "r": self.r,
            "m": self.m,
            "center": list(self.center),
            "angle": self.angle,
        }


# ---------------------------------------------------------------------------
# open curves


@dataclass(frozen=True)
class Segment(Boundary):
    """Straight segment from ``a`` to ``b`` with normal = tangent rotated by +90 degrees."""

    a: tuple = (0.0, 0.0)
    b: tuple = (1.0, 0.0)
    kind = "segment"
    closed = False
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(c) for c in self.a))
        object.__setattr__(self, "b", tuple(float(c) for c in self.b))
        if self.length == 0:
            raise ValueError("segment endpoints coincide")

    @property
    def length(self):
        return math.dist(self.a, self.b)

    @property
    def tangent(self):
        return (np.asarray(self.b) - np.asarray(self.a)) / self.length

    @property
    def unit_normal(self):
        t = self.tangent
        return np.array([-t[1], t[0]])

    @property
    def reach(self):
        return math.inf

    def _coords(self, x):
        v = np.asarray(x, dtype=float) - np.asarray(self.a)
        return v @ self.tangent, v @ self.unit_normal

    def in_band(self, x):
        t, _ = self._coords(x)
        return (t >= 0.0) & (t <= self.length)

    def closest(self, x, strict=True):
        t, d = self._coords(x)
        foot = np.asarray(self.a) + t[:, None] * self.tangent
        return foot, d, np.zeros((len(t), 1))

    def distance_lower_bound(self, x):
        t, d = self._coords(x)
        over = np.clip(t, 0.0, self.length) - t
        return np.hypot(over, d)

    def residual(self, p):
        t, d = self._coords(np.atleast_2d(p))
        out = np.abs(d)
        return out + np.maximum(-t, 0) + np.maximum(t - self.length, 0)

    def normal(self, p):
        return np.tile(self.unit_normal, (np.atleast_2d(p).shape[0], 1))

    def bbox(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        return np.minimum(a, b), np.maximum(a, b)

    def param_pieces(self):
        a, tv = np.asarray(self.a), self.tangent

        def curve(t):
            t = np.asarray(t, dtype=float)
            return a + t[..., None] * tv, np.ones(t.shape)

        return [(0.0, self.length, curve)]

    def to_dict(self):
        return {"kind": self.kind, "a": list(self.a), "b": list(self.b)}


def _wrap(a):
    return np.mod(a, 2 * math.pi)


@dataclass(frozen=True)
class Arc(Boundary):
    """Circular arc of radius ``r`` from polar angle ``start`` sweeping ``span`` ccw.

    The normal points away from the center.
    """

    center: tuple = (0.0, 0.0)
    r: float = 0.75
    start: float = 0.0
    span: float = math.pi
    kind = "arc"
    closed = False
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def reach(self):
        return self.r

    def _polar(self, x):
        v = np.asarray(x, dtype=float) - np.asarray(self.center)
        rel = _wrap(np.arctan2(v[:, 1], v[:, 0]) - self.start)
        return v, np.hypot(v[:, 0], v[:, 1]), rel

    def in_band(self, x):
        _, rho, rel = self._polar(x)
        # wrap puts the start ray at 0; 2*pi - tiny is the start ray from below
        near_start = rel > 2 * math.pi - 1e-15
        return ((rel <= self.span) | near_start) & (rho > 0)

    def closest(self, x, strict=True):
        v, rho, _ = self._polar(x)
        bad = rho < MEDIAL_TOL
        if strict and bad.any():
            raise NonUniqueProjection("point at the arc centre has no unique projection")
        with np.errstate(invalid="ignore", divide="ignore"):
            u = v / rho[:, None]
        foot = np.asarray(self.center) + self.r * u
        d = np.where(bad, np.nan, rho - self.r)
        return foot, d, np.full((len(rho), 1), 1.0 / self.r)

    def _endpoints(self):
        c = np.asarray(self.center)
        e0 = c + self.r * np.array([math.cos(self.start), math.sin(self.start)])
        e1 = c + self.r * np.array(
            [math.cos(self.start + self.span), math.sin(self.start + self.span)]
        )
        return e0, e1

    def distance_lower_bound(self, x):
        x = np.asarray(x, dtype=float)
        _, rho, rel = self._polar(x)
        inside = rel <= self.span
        e0, e1 = self._endpoints()
        dend = np.minimum(np.linalg.norm(x - e0, axis=1), np.linalg.norm(x - e1, axis=1))
        return np.where(inside, np.abs(rho - self.r), dend)

    def residual(self, p):
        v = np.atleast_2d(p) - np.asarray(self.center)
        return np.hypot(v[:, 0], v[:, 1]) / self.r - 1.0

    def normal(self, p):
        v = np.atleast_2d(p) - np.asarray(self.center)
        return v / np.linalg.norm(v, axis=1)[:, None]

    def bbox(self):
        t = self.start + np.linspace(0.0, self.span, 721)
        pts = np.asarray(self.center) + self.r * np.stack([np.cos(t), np.sin(t)], axis=-1)
        return pts.min(axis=0), pts.max(axis=0)

    def param_pieces(self):
        c, r = np.asarray(self.center), self.r

        def curve(t):
            t = np.asarray(t, dtype=float)
            pts = c + r * np.stack([np.cos(t), np.sin(t)], axis=-1)
            return pts, np.full(t.shape, r)

        return [(self.start, self.start + self.span, curve)]

    def to_dict(self):
        return {
            "kind": self.kind,
            "center": list(self.center),
            "r": self.r,
            "start": self.start,
            "span": self.span,
        }


def Semicircle(center=(0.0, 0.0), r=0.75, start=0.0) -> Arc:
    """Upper half (by default) of the circle of radius ``r`` as an open curve."""
    return Arc(center=center, r=r, start=start, span=math.pi)


@dataclass(frozen=True)
class Capsule(Boundary):
    """Stadium: all points at distance ``rc`` from the core segment ``a``-``b``.

    As a closed shape it has an exact signed distance; :meth:`pieces` splits it
    into two straight sides and two half-circle caps (in that cyclic order:
    side, cap at ``b``, side, cap at ``a``).
    """

    a: tuple = (-0.5, 0.0)
    b: tuple = (0.5, 0.0)
    rc: float = 0.2
    kind = "capsule"
    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(c) for c in self.a))
        object.__setattr__(self, "b", tuple(float(c) for c in self.b))

    @property
    def reach(self):
        return self.rc

    @cached_property
    def _frame(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        L = float(np.linalg.norm(b - a))
        u = (b - a) / L
        return a, b, L, u, np.array([-u[1], u[0]])

    def _core(self, x):
        a, _, L, u, _ = self._frame
        t = np.clip((np.asarray(x, dtype=float) - a) @ u, 0.0, L)
        return a + t[:, None] * u, t

    def closest(self, x, strict=True):
        x = np.asarray(x, dtype=float)
        q, t = self._core(x)
        v = x - q
        rho = np.hypot(v[:, 0], v[:, 1])
        bad = rho < MEDIAL_TOL
        if strict and bad.any():
            raise NonUniqueProjection("point on the capsule core has no unique projection")
        with np.errstate(invalid="ignore", divide="ignore"):
            foot = q + self.rc * v / rho[:, None]
        d = np.where(bad, np.nan, rho - self.rc)
        L = self._frame[2]
        on_cap = (t <= 0.0) | (t >= L)
        kappa = np.where(on_cap, 1.0 / self.rc, 0.0)[:, None]
        return foot, d, kappa

    def distance_lower_bound(self, x):
        x = np.asarray(x, dtype=float)
        q, _ = self._core(x)
        return np.abs(np.linalg.norm(x - q, axis=1) - self.rc)

    def residual(self, p):
        p = np.atleast_2d(p)
        q, _ = self._core(p)
        return np.linalg.norm(p - q, axis=1) / self.rc - 1.0

    def normal(self, p):
        p = np.atleast_2d(p)
        q, _ = self._core(p)
        v = p - q
        return v / np.linalg.norm(v, axis=1)[:, None]

    def bbox(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        return np.minimum(a, b) - self.rc, np.maximum(a, b) + self.rc

    def pieces(self):
        a, b, L, u, n = self._frame
        rc = self.rc
        ang = math.atan2(u[1], u[0])
        return [
            Segment(tuple(b - rc * n), tuple(a - rc * n)),
            Arc(tuple(b), rc, ang - math.pi / 2, math.pi),
            Segment(tuple(a + rc * n), tuple(b + rc * n)),
            Arc(tuple(a), rc, ang + math.pi / 2, math.pi),
        ]

    def param_pieces(self):
        out = []
        for p in self.pieces():
            out.extend(p.param_pieces())
        return out

    def to_dict(self):
        return {"kind": self.kind, "a": list(self.a), "b": list(self.b), "rc": self.rc}


SHAPES = {
    "circle": Circle,
    "sphere": Sphere,
    "quartic": QuarticConvex,
    "star": StarCurve,
    "segment": Segment,
    "arc": Arc,
    "capsule": Capsule,
}


def from_dict(spec: dict) -> Boundary:
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == "semicircle":
        return Semicircle(**spec)
    if kind not in SHAPES:
        raise KeyError(kind)
    return SHAPES[kind](**spec)


# ---------------------------------------------------------------------------
# public single-point / array operations


def _check_band(boundary, x):
    if not boundary.closed and not boundary.in_band(x).all():
        raise OutsideBand("query point lies outside the perpendicular band of the curve")


def signed_distance(boundary: Boundary, x):
    xs, single = _as_points(x, boundary.dim)
    _check_band(boundary, xs)
    d = boundary.closest(xs)[1]
    return float(d[0]) if single else d


def project(boundary: Boundary, x):
    xs, single = _as_points(x, boundary.dim)
    _check_band(boundary, xs)
    p = boundary.closest(xs)[0]
    return p[0] if single else p


@dataclass(frozen=True)
class CurvatureData:
    """Principal curvatures at a boundary point (one entry in 2D, two in 3D)."""

    principal: tuple

    @property
    def kappa(self) -> float:
        return self.principal[0]

    @property
    def mean(self) -> float:
        return sum(self.principal) / len(self.principal)

    @property
    def gaussian(self) -> float:
        return math.prod(self.principal)


def curvature(boundary: Boundary, p) -> CurvatureData:
    ps, _ = _as_points(p, boundary.dim)
    res = np.abs(boundary.residual(ps))
    if res.max() > 1e-8:
        raise ValueError(f"point is not on the boundary (residual {res.max():.3g})")
    kappa = boundary.closest(ps)[2][0]
    return CurvatureData(tuple(float(k) for k in kappa))


JACOBIAN_MODES = ("exact", "unity", "laplacian")


def level_set_jacobian(eta, kappa):
    """``prod_i 1/(1 + eta kappa_i)``: the exact projection Jacobian on level ``eta``.

    Equal to ``1 - eta k`` (2D) or ``1 - 2 eta H + eta^2 G`` (3D) with ``k``,
    ``H``, ``G`` the curvatures of the level set, which relate to the boundary
    curvatures by ``k_level = k / (1 + eta k)``.
    """
    eta = np.asarray(eta, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    fac = 1.0 + eta[..., None] * kappa
    if np.any(fac <= 0):
        raise FocalPointReached("tube reaches a focal point of the boundary")
    return np.prod(1.0 / fac, axis=-1)


def laplacian_sd(boundary: Boundary, x, step):
    """Central-difference Laplacian of the signed distance at points ``x``."""
    x = np.asarray(x, dtype=float)
    dim = x.shape[1]
    d0 = boundary.closest(x, strict=False)[1]
    lap = np.zeros(len(x))
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = step
        dp = boundary.closest(x + e, strict=False)[1]
        dm = boundary.closest(x - e, strict=False)[1]
        lap += dp - 2 * d0 + dm
    return lap / step**2


def jacobian(boundary: Boundary, x, mode: str = "exact", h: float | None = None):
    """Level-set Jacobian at tube points ``x`` (``eta = d(x)``)."""
    xs, single = _as_points(x, boundary.dim)
    _check_band(boundary, xs)
    _, d, kappa = boundary.closest(xs)
    if mode == "exact":
        out = level_set_jacobian(d, kappa)
    elif mode == "unity":
        out = np.ones(len(d))
    elif mode == "laplacian":
        step = max(1e-5, h / 10) if h else 1e-5
        out = 1.0 - d * laplacian_sd(boundary, xs, step)
    else:
        raise ValueError(f"unknown jacobian mode {mode!r}")
    return float(out[0]) if single else out
