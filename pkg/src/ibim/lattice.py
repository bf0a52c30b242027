"""Rigidly transformed Cartesian lattices and tube enumeration.

The lattice point with integer index ``n`` is ``R(angle) h (n + shift)``.
Rotating the lattice by ``R`` is the same as placing the boundary at
``R^-1 Gamma``, so the shapes never need to know about the transform.

Candidates are found by recursive block culling of the index box that covers
the boundary's bounding box dilated by ``eps + h sqrt(d)``: a block survives
when a lower bound on the distance from its center to the boundary is within
``eps`` plus the block's half-diagonal. Surviving points are grouped into
slabs of ``SLAB`` consecutive first indices; a slab is one chunk of work and
the chunk partition depends only on the geometry and ``h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import InvalidWidth, RotationUnsupported, WidthExceedsReach
from .geometry import Boundary

LEAF = 4
SLAB = 8


@dataclass(frozen=True)
class LatticeFrame:
    h: float
    shift: tuple = (0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        # the lattice is invariant under integer shifts, so keep the canonical
        # representative in [0, 1)
        shift = tuple(float(s) - math.floor(float(s)) for s in self.shift)
        object.__setattr__(self, "shift", tuple(0.0 if s == 1.0 else s for s in shift))
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.dim == 3 and self.angle != 0.0:
            raise RotationUnsupported("3D lattices support shifts only")

    @property
    def dim(self) -> int:
        return len(self.shift)

    @property
    def rotation(self) -> np.ndarray:
        if self.dim == 3:
            return np.eye(3)
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def points(self, idx) -> np.ndarray:
        """Physical coordinates of integer lattice indices ``idx`` (shape ``(n, d)``)."""
        y = self.h * (np.asarray(idx, dtype=float) + np.asarray(self.shift))
        if self.angle == 0.0:
            return y
        return y @ self.rotation.T

    def to_index(self, x) -> np.ndarray:
        """Continuous index coordinates of physical points."""
        y = np.asarray(x, dtype=float)
        if self.angle != 0.0:
            y = y @ self.rotation
        return y / self.h - np.asarray(self.shift)


SHIFT_ONLY = "shift_only"
SHIFT_AND_ROTATION = "shift_and_rotation"


def frame_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), 1, int(index)])


def sample_frame(seed: int, index: int, h: float, mode: str = SHIFT_ONLY, dim: int = 2):
    """Random lattice transform, fully determined by ``(seed, index)``."""
    if mode not in (SHIFT_ONLY, SHIFT_AND_ROTATION):
        raise ValueError(f"unknown transform mode {mode!r}")
    if mode == SHIFT_AND_ROTATION and dim == 3:
        raise RotationUnsupported("3D lattices support shifts only")
    rng = frame_rng(seed, index)
    shift = rng.random(dim)
    angle = 2 * math.pi * rng.random() if mode == SHIFT_AND_ROTATION else 0.0
    return LatticeFrame(h, tuple(shift), angle)


@dataclass
class TubeChunk:
    index: np.ndarray  # (m, d) int64
    points: np.ndarray  # (m, d)
    dist: np.ndarray  # (m,) signed distance
    foot: np.ndarray  # (m, d)
    kappa: np.ndarray  # (m, d-1)

    def __len__(self):
        return len(self.dist)


def _index_box(boundary, frame, eps):
    lo, hi = boundary.bbox()
    pad = eps + frame.h * math.sqrt(boundary.dim)
    lo, hi = np.asarray(lo) - pad, np.asarray(hi) + pad
    corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(boundary.dim, -1).T
    c = frame.to_index(corners)
    return np.floor(c.min(axis=0)).astype(np.int64), np.ceil(c.max(axis=0)).astype(np.int64)


def _cull(boundary, frame, eps, nmin, nmax):
    """Origins of the leaf blocks that may contain tube points."""
    dim = boundary.dim
    extent = int((nmax - nmin + 1).max())
    size = LEAF
    while size * 8 < extent:
        size *= 2
    counts = -(-(nmax - nmin + 1) // size)
    origins = np.stack(
        np.meshgrid(*[np.arange(c) for c in counts], indexing="ij"), axis=-1
    ).reshape(-1, dim) * size + nmin
    while True:
        centers = frame.points(origins + 0.5 * (size - 1))
        half_diag = 0.5 * frame.h * (size - 1) * math.sqrt(dim)
        keep = boundary.distance_lower_bound(centers) <= eps + half_diag + 1e-12
        origins = origins[keep]
        if size == LEAF or len(origins) == 0:
            return origins
        size //= 2
        sub = np.stack(
            np.meshgrid(*[np.arange(2)] * dim, indexing="ij"), axis=-1
        ).reshape(-1, dim) * size
        origins = (origins[:, None, :] + sub[None, :, :]).reshape(-1, dim)


def _lex_points(leaves: np.ndarray) -> np.ndarray:
    """All indices covered by disjoint aligned leaf blocks, in lexicographic order."""
    if leaves.shape[1] == 1:
        c = np.sort(leaves[:, 0])
        return (c[:, None] + np.arange(LEAF)).reshape(-1, 1)
    order = np.argsort(leaves[:, 0], kind="stable")
    leaves = leaves[order]
    heads, starts = np.unique(leaves[:, 0], return_index=True)
    bounds = list(starts[1:]) + [len(leaves)]
    parts = []
    for head, a, b in zip(heads, starts, bounds):
        tail = _lex_points(leaves[a:b, 1:])
        for r in range(LEAF):
            col = np.full((len(tail), 1), head + r, dtype=np.int64)
            parts.append(np.hstack([col, tail]))
    return np.concatenate(parts)


class TubeEnumeration:
    """Lattice points ``x`` of ``frame`` with ``|d(x)| <= eps`` (and in band).

    Iterating yields :class:`TubeChunk` objects in lexicographic index order.
    """

    def __init__(self, boundary: Boundary, frame: LatticeFrame, eps: float):
        if not eps > 0:
            raise InvalidWidth(f"tube half-width must be positive, got {eps}")
        if eps >= boundary.reach:
            raise WidthExceedsReach(
                f"tube half-width {eps:g} is not below the reach {boundary.reach:g}"
            )
        if frame.dim != boundary.dim:
            raise ValueError("frame and boundary dimensions differ")
        self.boundary = boundary
        self.frame = frame
        self.eps = eps
        nmin, nmax = _index_box(boundary, frame, eps)
        leaves = _cull(boundary, frame, eps, nmin, nmax)
        slab_id = (leaves[:, 0] - nmin[0]) // SLAB
        order = np.argsort(slab_id, kind="stable")
        leaves, slab_id = leaves[order], slab_id[order]
        cuts = np.flatnonzero(np.diff(slab_id)) + 1
        self._slabs = np.split(leaves, cuts) if len(leaves) else []
        self._count = None

    @property
    def n_chunks(self) -> int:
        return len(self._slabs)

    def chunk(self, k: int) -> TubeChunk:
        idx = _lex_points(self._slabs[k])
        x = self.frame.points(idx)
        foot, d, kappa = self.boundary.closest(x, strict=False)
        mask = np.abs(d) <= self.eps
        if not self.boundary.closed:
            mask &= self.boundary.in_band(x)
        return TubeChunk(idx[mask], x[mask], d[mask], foot[mask], kappa[mask])

    def __iter__(self) -> Iterator[TubeChunk]:
        for k in range(self.n_chunks):
            yield self.chunk(k)

    @property
    def count(self) -> int:
        if self._count is None:
            self._count = sum(len(c) for c in self)
        return self._count

    def indices(self) -> np.ndarray:
        parts = [c.index for c in self]
        if not parts:
            return np.zeros((0, self.boundary.dim), dtype=np.int64)
        return np.concatenate(parts)


def enumerate_tube(boundary: Boundary, frame: LatticeFrame, eps: float) -> TubeEnumeration:
    return TubeEnumeration(boundary, frame, eps)
