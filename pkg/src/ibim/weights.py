"""Regularized one-dimensional Dirac weights theta_eps.

Three kinds are provided, indexed by their regularity class ``q``:

    cos   q=2   (1 + cos(pi s / eps)) / (2 eps)
    hat   q=1   (1 - |s| / eps) / eps
    char  q=0   1 / (2 eps) on [-eps, eps)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidWidth

KINDS = {"cos": 2, "hat": 1, "char": 0}
ALIASES = {"cosine": "cos", "triangle": "hat", "characteristic": "char"}


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class WeightFunction:
    kind: str
    eps: float

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not (self.eps > 0 and np.isfinite(self.eps)):
            raise InvalidWidth(f"weight half-width must be positive, got {self.eps}")

    @property
    def q(self) -> int:
        return KINDS[self.kind]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        eps = self.eps
        inv = 1.0 / (2.0 * eps)
        a = np.abs(s)
        if self.kind == "cos":
            val = inv * (1.0 + np.cos(np.pi * s / eps))
            out = np.where(a <= eps, val, 0.0)
        elif self.kind == "hat":
            # unit mass needs 1/eps here, not 1/(2 eps)
            out = np.where(a <= eps, (1.0 - a / eps) / eps, 0.0)
        else:
            # half-open at +eps so lattice hits on the outer tube edge are unambiguous
            out = np.where((s >= -eps) & (s < eps), inv, 0.0)
        return out if out.ndim else float(out)

    def breakpoints(self):
        """Points in [-eps, eps] where the weight is not smooth."""
        if self.kind == "hat":
            return (-self.eps, 0.0, self.eps)
        return (-self.eps, self.eps)

    def moment(self, n: int = 64) -> float:
        """Mass of the weight by ``n``-point Gauss-Legendre on each smooth piece."""
        x, wq = _gauss_legendre(n)
        pts = self.breakpoints()
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            s = mid + half * x
            total += half * float(np.dot(wq, self(s)))
        return total


def eval_weight(w: WeightFunction, s):
    return w(s)


def moment(w: WeightFunction) -> float:
    return w.moment()
