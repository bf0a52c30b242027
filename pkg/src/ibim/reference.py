"""Reference values of boundary integrals by two independent quadratures.

The primary method is composite Gauss-Legendre on each parametrized piece,
doubling the panel count until two successive levels agree to ``1e-12``
relative. The check method is adaptive Simpson. Integrands with a jump across
``y = y0`` are split exactly where the curve crosses that line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import NoConvergence
from .geometry import (
    Boundary,
    Capsule,
    Circle,
    QuarticConvex,
    Segment,
    Semicircle,
    Sphere,
    StarCurve,
)
from .quadrature import INTEGRANDS, Integrand, UpperMask, upper_mask

GL_ORDER = 20
GL_TOL = 1e-12
GL_MAX_LEVEL = 20
SIMPSON_TOL = 1e-10
AGREE_TOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


# ---------------------------------------------------------------------------
# composite Gauss-Legendre


def _gl_panels(g, edges):
    """Sum of ``g`` integrated by Gauss-Legendre over consecutive ``edges``."""
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    t = 0.5 * (a + b)[:, None] + half[:, None] * _GL_X[None, :]
    vals = g(t.ravel()).reshape(t.shape)
    return math.fsum(half * (vals @ _GL_W))


def gauss_legendre(g, breaks, tol=GL_TOL, max_level=GL_MAX_LEVEL):
    """Integrate vectorized ``g`` over ``[breaks[0], breaks[-1]]``.

    ``breaks`` are points where ``g`` may be non-smooth; each gap gets ``2^k``
    equal panels at level ``k``. ``tol`` is relative to the integral of ``|g|``.
    """
    breaks = np.asarray(breaks, dtype=float)

    def edges(level):
        n = 2**level
        parts = [np.linspace(a, b, n + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])]
        return np.concatenate(parts + [breaks[-1:]])

    prev = _gl_panels(g, edges(0))
    for level in range(1, max_level + 1):
        e = edges(level)
        cur = _gl_panels(g, e)
        scale = max(abs(cur), _gl_panels(lambda t: np.abs(g(t)), e))
        if abs(cur - prev) <= tol * scale:
            return cur
        prev = cur
    raise NoConvergence("Gauss-Legendre reference did not reach the tolerance")


# ---------------------------------------------------------------------------
# adaptive Simpson (vectorized over the active intervals)


def adaptive_simpson(g, breaks, tol=SIMPSON_TOL, n_init=64, max_rounds=60):
    """Adaptive Simpson with Richardson correction; ``tol`` is absolute."""
    breaks = np.asarray(breaks, dtype=float)
    a = np.concatenate(
        [np.linspace(x0, x1, n_init + 1)[:-1] for x0, x1 in zip(breaks[:-1], breaks[1:])]
    )
    b = np.concatenate(
        [np.linspace(x0, x1, n_init + 1)[1:] for x0, x1 in zip(breaks[:-1], breaks[1:])]
    )
    total_len = breaks[-1] - breaks[0]
    m = 0.5 * (a + b)
    fa, fm, fb = g(a), g(m), g(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    done = []
    for _ in range(max_rounds):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        diff = left + right - whole
        ok = np.abs(diff) <= 15 * tol * (b - a) / total_len
        done.append((left + right + diff / 15)[ok])
        keep = ~ok
        if not keep.any():
            return math.fsum(np.concatenate(done))
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        lm, rm, flm, frm = lm[keep], rm[keep], flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        a = np.concatenate([a, m])
        b, m = np.concatenate([m, b]), np.concatenate([lm, rm])
        fa, fb = np.concatenate([fa, fm]), np.concatenate([fm, fb])
        fm = np.concatenate([flm, frm])
        whole = np.concatenate([left, right])
    raise NoConvergence("adaptive Simpson did not reach the tolerance")


# ---------------------------------------------------------------------------
# integrals over boundaries


def _crossings(curve, t0, t1, y0, n=4097):
    """Parameters in ``(t0, t1)`` where the curve crosses ``y = y0``."""
    t = np.linspace(t0, t1, n)
    y = curve(t)[0][:, 1] - y0
    out = []
    for i in np.flatnonzero(np.sign(y[:-1]) != np.sign(y[1:])):
        if y[i] == 0.0:
            root = t[i]
        elif y[i + 1] == 0.0:
            root = t[i + 1]
        else:
            root = brentq(lambda s: curve(np.array([s]))[0][0, 1] - y0, t[i], t[i + 1], xtol=1e-15)
        if t0 < root < t1:
            out.append(root)
    return sorted(set(out))


def _pieces(boundary: Boundary, f: Integrand):
    """``(breaks, g)`` per parametrized piece with ``g(t) = f(curve(t)) |curve'(t)|``."""
    for t0, t1, curve in boundary.param_pieces():
        breaks = [t0, t1]
        if isinstance(f, UpperMask):
            breaks = [t0, *_crossings(curve, t0, t1, f.y0), t1]

        def g(t, curve=curve):
            pts, speed = curve(t)
            return f(pts) * speed

        yield breaks, g


def _sphere_integrand(boundary: Sphere, f: Integrand):
    def g(theta, phi):
        pts = boundary.surface(theta, phi).reshape(-1, 3)
        return f(pts).reshape(np.shape(theta)) * boundary.r**2 * np.sin(theta)

    return g


def reference_integral(boundary: Boundary, f: Integrand, tol=GL_TOL) -> float:
    """``int_Gamma f dsigma`` by composite Gauss-Legendre."""
    if isinstance(boundary, Sphere):
        g = _sphere_integrand(boundary, f)

        def inner(theta):
            return np.array(
                [gauss_legendre(lambda p: g(np.full(p.shape, th), p), [0, 2 * math.pi], tol)
                 for th in theta]
            )

        # tensor product: refine the polar direction with the inner rule converged
        return gauss_legendre(inner, [0.0, math.pi], tol)
    return math.fsum(gauss_legendre(g, br, tol) for br, g in _pieces(boundary, f))


def simpson_integral(boundary: Boundary, f: Integrand, tol=SIMPSON_TOL) -> float:
    """Independent check of :func:`reference_integral` by adaptive Simpson."""
    if isinstance(boundary, Sphere):
        g = _sphere_integrand(boundary, f)

        def inner(theta):
            return np.array(
                [adaptive_simpson(lambda p: g(np.full(p.shape, th), p), [0, 2 * math.pi],
                                  tol / (4 * math.pi), n_init=16)
                 for th in theta]
            )

        return adaptive_simpson(inner, [0.0, math.pi], tol / 2, n_init=16)
    parts = list(_pieces(boundary, f))
    return math.fsum(adaptive_simpson(g, br, tol / len(parts)) for br, g in parts)


# ---------------------------------------------------------------------------
# golden values

GOLDEN_FILE = "golden.txt"

CATALOG = {
    "circle": lambda: Circle(0.75),
    "sphere": lambda: Sphere(0.75),
    "quartic": lambda: QuarticConvex(0.75),
    "star": lambda: StarCurve(0.75, 0.2, 3),
    "semicircle": lambda: Semicircle((0.0, 0.0), 0.75),
    "capsule": lambda: Capsule((-0.5, 0.0), (0.5, 0.0), 0.2),
    "segment_unit": lambda: Segment((0.0, 0.0), (1.0, 0.0)),
    "segment_sqrt2": lambda: _slope_segment(math.sqrt(2.0)),
    "segment_golden": lambda: _slope_segment((1 + math.sqrt(5.0)) / 2),
}


def _slope_segment(gamma):
    beta = math.atan(gamma)
    return Segment((0.0, 0.0), (math.cos(beta), math.sin(beta)))


def catalog_integrand(name: str) -> Integrand:
    if name == "test2d_upper":
        return upper_mask(INTEGRANDS["test2d"], 0.0)
    return INTEGRANDS[name]


def golden_pairs() -> list[tuple[str, str]]:
    pairs = []
    for shape in CATALOG:
        if shape == "sphere":
            names = ("one", "test3d", "sqnorm")
        else:
            names = ("one", "test2d", "sqnorm")
        pairs.extend((shape, n) for n in names)
    pairs.append(("circle", "test2d_upper"))
    return pairs


@dataclass(frozen=True)
class GoldenRecord:
    shape: str
    integrand: str
    value: float

    def line(self) -> str:
        return f"{self.shape} {self.integrand} {self.value:.15g}"


def compute_golden(shape: str, integrand: str, check=True) -> GoldenRecord:
    """Reference for a catalog pair; with ``check`` the Simpson value must agree."""
    b, f = CATALOG[shape](), catalog_integrand(integrand)
    value = reference_integral(b, f)
    if check:
        other = simpson_integral(b, f)
        if abs(value - other) > AGREE_TOL * max(1.0, abs(value)):
            raise NoConvergence(
                f"{shape}/{integrand}: Gauss-Legendre {value!r} vs Simpson {other!r}"
            )
    return GoldenRecord(shape, integrand, value)


def format_golden(records) -> str:
    head = "# shape integrand value (15 significant digits)\n"
    return head + "".join(r.line() + "\n" for r in records)


def parse_golden(text: str) -> list[GoldenRecord]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        shape, integrand, value = line.split()
        out.append(GoldenRecord(shape, integrand, float(value)))
    return out


def golden_path() -> Path:
    return Path(str(resources.files("ibim") / "data" / GOLDEN_FILE))


def load_golden(path=None) -> dict[tuple[str, str], float]:
    path = Path(path) if path else golden_path()
    return {(r.shape, r.integrand): r.value for r in parse_golden(path.read_text())}


def regenerate(path=None, check=True) -> list[GoldenRecord]:
    records = [compute_golden(s, i, check) for s, i in golden_pairs()]
    path = Path(path) if path else golden_path()
    path.write_text(format_golden(records))
    return records


def verify(path=None, rtol=1e-13) -> list[tuple[str, str, float, float]]:
    """Mismatches ``(shape, integrand, stored, recomputed)`` against a golden file."""
    stored = load_golden(path)
    bad = []
    for (shape, integrand), value in stored.items():
        fresh = compute_golden(shape, integrand, check=False).value
        if abs(fresh - value) > rtol * max(1.0, abs(value)):
            bad.append((shape, integrand, value, fresh))
    missing = set(golden_pairs()) - set(stored)
    bad.extend((s, i, math.nan, math.nan) for s, i in sorted(missing))
    return bad
