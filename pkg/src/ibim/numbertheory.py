"""Continued fractions and the polygon lattice-count discrepancy bound.

For a convex polygon ``P`` (in lattice units) the number of integer points in
``P`` differs from its area by at most ``sum_i rho(side_i)``, where for a side
of length ``L`` and slope with expansion ``[a0; a1, ...]``

    rho = a_0 + ... + a_k + (L + 1) / q_k,   k = max{j : q_j <= L + 1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegeneratePolygon

MAX_TERMS = 40
INT_TOL = 1e-12

SQRT2 = math.sqrt(2.0)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class ContinuedFraction:
    terms: tuple
    value: float = math.nan
    exact: bool = False  # expansion stopped at an integer remainder
    convergents: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(int(a) for a in self.terms))
        object.__setattr__(self, "convergents", tuple(convergents(self.terms)))

    @property
    def p(self):
        return [c[0] for c in self.convergents]

    @property
    def q(self):
        return [c[1] for c in self.convergents]

    def evaluate(self) -> Fraction:
        x = Fraction(self.terms[-1])
        for a in reversed(self.terms[:-1]):
            x = a + 1 / x
        return x

    def __str__(self):
        head, *rest = self.terms
        return f"[{head}; {', '.join(map(str, rest))}]" if rest else f"[{head}]"


def convergents(terms) -> list[tuple[int, int]]:
    """``(p_k, q_k)`` from ``p_k = a_k p_{k-1} + p_{k-2}`` (same for ``q``)."""
    p0, p1 = 0, 1
    q0, q1 = 1, 0
    out = []
    for a in terms:
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append((p1, q1))
    return out


def _periodic(x):
    """Exact expansions for the quadratic irrationals used in the experiments."""
    if x == SQRT2:
        return 1, 2
    if x == GOLDEN:
        return 1, 1
    return None


def continued_fraction(x, max_terms: int = MAX_TERMS) -> ContinuedFraction:
    """Floor-and-reciprocal expansion of ``x`` (a float, int or Fraction)."""
    if max_terms < 1:
        raise ValueError("max_terms must be at least 1")
    if isinstance(x, Fraction):
        terms = []
        while len(terms) < max_terms:
            a = math.floor(x)
            terms.append(a)
            if x == a:
                return ContinuedFraction(terms, float(x), True)
            x = 1 / (x - a)
        return ContinuedFraction(terms, math.nan, False)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    fast = _periodic(x)
    if fast is not None:
        a0, a = fast
        return ContinuedFraction([a0] + [a] * (max_terms - 1), x, False)
    terms = []
    r = x
    while len(terms) < max_terms:
        a = math.floor(r)
        frac = r - a
        if frac < INT_TOL or 1.0 - frac < INT_TOL:
            terms.append(a if frac < INT_TOL else a + 1)
            return ContinuedFraction(_normalize(terms), x, True)
        terms.append(a)
        r = 1.0 / frac
        if r > 1.0 / INT_TOL:
            return ContinuedFraction(terms, x, True)
    return ContinuedFraction(terms, x, False)


def _normalize(terms):
    # [.., a, 1] is the same rational as [.., a+1]; keep the short form
    if len(terms) > 1 and terms[-1] == 1:
        return terms[:-2] + [terms[-2] + 1]
    return terms


def is_badly_approximable(cf: ContinuedFraction, bound: int) -> bool:
    """True iff every computed partial quotient ``a_k`` (``k >= 1``) is ``<= bound``."""
    if len(cf.terms) < 3:
        raise ValueError("need at least three terms")
    return all(a <= bound for a in cf.terms[1:])


# ---------------------------------------------------------------------------
# lattice discrepancy of convex polygons


def _side_rho(p, q) -> float:
    """``rho`` for the side ``p -> q`` (lattice units).

    The slope enters through its magnitude; a vertical side is read with the
    axes swapped (slope 0).
    """
    dx, dy = abs(q[0] - p[0]), abs(q[1] - p[1])
    length = math.hypot(dx, dy)
    if length == 0.0:
        return 1.0
    cf = continued_fraction(dy / dx if dx > 0 else 0.0)
    k = 0
    for j, (_, qj) in enumerate(cf.convergents):
        if qj > length + 1.0:
            break
        k = j
    return float(sum(cf.terms[: k + 1])) + (length + 1.0) / cf.convergents[k][1]


def _check_polygon(vertices):
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise DegeneratePolygon("a polygon needs at least three 2D vertices")
    if not np.all(np.isfinite(v)):
        raise DegeneratePolygon("polygon vertices must be finite")
    return v


def discrepancy_bound(vertices, h: float = 1.0) -> float:
    """Upper bound on ``|#(P / h cap Z^2) - area(P) / h^2|`` for a convex polygon ``P``.

    Vertices are in physical units; the polygon is scaled by ``1/h``. Zero-length
    sides are allowed (they contribute ``rho = 1``).
    """
    v = _check_polygon(vertices) / h
    return math.fsum(_side_rho(v[i - 1], v[i]) for i in range(len(v)))


def polygon_area(vertices) -> float:
    v = _check_polygon(vertices)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def lattice_count(vertices, h: float = 1.0, tol=1e-12) -> int:
    """Points of ``h Z^2`` in the closed convex polygon (brute-force scan)."""
    v = _check_polygon(vertices) / h
    lo = np.floor(v.min(axis=0)).astype(int)
    hi = np.ceil(v.max(axis=0)).astype(int)
    xs = np.arange(lo[0], hi[0] + 1)
    ys = np.arange(lo[1], hi[1] + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1).astype(float)
    # orientation-independent half-plane test
    area2 = float(np.dot(v[:, 0], np.roll(v[:, 1], -1)) - np.dot(v[:, 1], np.roll(v[:, 0], -1)))
    sign = 1.0 if area2 >= 0 else -1.0
    inside = np.ones(len(pts), dtype=bool)
    for i in range(len(v)):
        p, q = v[i - 1], v[i]
        e = q - p
        n = math.hypot(*e)
        if n == 0:
            continue
        cross = sign * (e[0] * (pts[:, 1] - p[1]) - e[1] * (pts[:, 0] - p[0])) / n
        inside &= cross >= -tol
    return int(inside.sum())


def rectangle(center, length, width, angle) -> np.ndarray:
    """Vertices of a ``length x width`` rectangle rotated by ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    u, n = np.array([c, s]), np.array([-s, c])
    c0 = np.asarray(center, dtype=float)
    hl, hw = 0.5 * length, 0.5 * width
    return np.array([c0 - hl * u - hw * n, c0 + hl * u - hw * n, c0 + hl * u + hw * n, c0 - hl * u + hw * n])


def segment_tube(gamma: float, eps: float, length: float = 1.0) -> np.ndarray:
    """Rectangle ``Gamma x [-eps, eps]`` around the unit segment from the origin with slope ``gamma``."""
    beta = math.atan(gamma)
    u = np.array([math.cos(beta), math.sin(beta)])
    return rectangle(0.5 * length * u, length, 2 * eps, beta)


def report(x: float, terms: int = 12, vertices=None, h: float | None = None) -> dict:
    """JSON-ready summary: expansion, convergents and optionally a bound check."""
    cf = continued_fraction(x, terms)
    out = {
        "x": x,
        "terms": list(cf.terms),
        "convergents": [[p, q] for p, q in cf.convergents],
        "rational": cf.exact,
    }
    if vertices is not None and h is not None:
        count = lattice_count(vertices, h)
        area = polygon_area(vertices) / h**2
        out.update(
            h=h,
            bound=discrepancy_bound(vertices, h),
            count=count,
            area=area,
            discrepancy=abs(count - area),
        )
    return out
