"""The lattice sum ``I_h(f) = h^d sum f(P x) theta_eps(d(x)) J(x, d(x))``."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import summation
from .geometry import JACOBIAN_MODES, Boundary, laplacian_sd, level_set_jacobian
from .lattice import LatticeFrame, TubeChunk, enumerate_tube
from .weights import WeightFunction


# ---------------------------------------------------------------------------
# integrands


@dataclass(frozen=True)
class Integrand:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    dim: int | None = None

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.fn(x)


def _one(x):
    return np.ones(len(x))


def _test2d(x):
    X, Y = x[:, 0], x[:, 1]
    X2 = X * X
    return np.cos(X2 - Y) * np.sin(Y * Y - X2 * X)


def _test3d(x):
    X, Y, Z = x[:, 0], x[:, 1], x[:, 2]
    X2 = X * X
    return np.cos(X2 - Y - Z * Z * Z) * np.sin(Y * Y - X2 * X - Z)


def _sqnorm(x):
    return np.einsum("ij,ij->i", x, x)


ONE = Integrand("one", _one)
TEST2D = Integrand("test2d", _test2d, 2)
TEST3D = Integrand("test3d", _test3d, 3)
SQNORM = Integrand("sqnorm", _sqnorm)

INTEGRANDS = {f.name: f for f in (ONE, TEST2D, TEST3D, SQNORM)}


@dataclass(frozen=True)
class UpperMask(Integrand):
    """``base`` where ``y >= y0`` and zero below."""

    base: Integrand = TEST2D
    y0: float = 0.0

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.where(x[:, 1] >= self.y0, self.base(x), 0.0)


def upper_mask(base: Integrand, y0: float) -> UpperMask:
    return UpperMask(f"{base.name}_upper", base.fn, base.dim, base, float(y0))


def get_integrand(name: str) -> Integrand:
    return INTEGRANDS[name]


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    point_count: int
    h: float
    eps: float
    frame: LatticeFrame
    jacobian_mode: str


def _assign_pieces(pieces, chunk, eps):
    """Piece owning each point: smallest |d| among pieces whose tube holds it."""
    x = chunk.points
    best = np.full(len(x), np.inf)
    owner = np.full(len(x), -1)
    for k, piece in enumerate(pieces):
        d = np.abs(piece.closest(x, strict=False)[1])
        ok = piece.in_band(x) & (d <= eps) & (d < best)
        best = np.where(ok, d, best)
        owner = np.where(ok, k, owner)
    return owner


def _terms(boundary, f, w, chunk: TubeChunk, mode, h):
    if len(chunk) == 0:
        return np.zeros(0)
    d, kappa, foot = chunk.dist, chunk.kappa, chunk.foot
    if mode == "exact":
        jac = level_set_jacobian(d, kappa)
    elif mode == "unity":
        jac = 1.0
    else:
        jac = 1.0 - d * laplacian_sd(boundary, chunk.points, max(1e-5, h / 10))
    return f(foot) * w(d) * jac


def _chunk_partial(boundary, f, w, enum, k, mode):
    chunk = enum.chunk(k)
    pieces = boundary.pieces()
    h = enum.frame.h
    if len(pieces) == 1:
        vals = _terms(boundary, f, w, chunk, mode, h)
    else:
        owner = _assign_pieces(pieces, chunk, enum.eps)
        vals = np.zeros(len(chunk))
        for j, piece in enumerate(pieces):
            sel = owner == j
            if not sel.any():
                continue
            x = chunk.points[sel]
            foot, d, kappa = piece.closest(x, strict=False)
            sub = TubeChunk(chunk.index[sel], x, d, foot, kappa)
            vals[sel] = _terms(piece, f, w, sub, mode, h)
    return summation.kahan_sum(vals), len(chunk)


def ibim_integrate(
    boundary: Boundary,
    f: Integrand,
    w: WeightFunction,
    frame: LatticeFrame,
    jacobian_mode: str = "exact",
    threads: int = 1,
) -> QuadratureResult:
    """IBIM lattice sum of ``f`` over ``boundary`` with weight ``w`` on ``frame``.

    Composite boundaries (capsule) are summed piece by piece; a lattice point in
    several piece tubes is counted once, for the piece with the smallest |d|
    (ties to the lowest piece index).
    """
    if jacobian_mode not in JACOBIAN_MODES:
        raise ValueError(f"unknown jacobian mode {jacobian_mode!r}")
    enum = enumerate_tube(boundary, frame, w.eps)
    ks = range(enum.n_chunks)
    if threads == 1:
        out = [_chunk_partial(boundary, f, w, enum, k, jacobian_mode) for k in ks]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            out = list(
                pool.map(lambda k: _chunk_partial(boundary, f, w, enum, k, jacobian_mode), ks)
            )
    parts = [p for p, _ in out]
    count = sum(n for _, n in out)
    value = frame.h ** boundary.dim * summation.total(parts)
    return QuadratureResult(value, count, frame.h, w.eps, frame, jacobian_mode)


def quadrature_error(result: QuadratureResult | float, reference: float) -> float:
    value = result.value if isinstance(result, QuadratureResult) else float(result)
    if not math.isfinite(reference):
        raise ValueError("reference must be finite")
    return abs(value - reference)
