"""Compensated summation with a fixed-shape reduction tree.

Each chunk is reduced with Neumaier's variant of Kahan summation to a
``(sum, compensation)`` pair; pairs are merged pairwise in a tree that depends
only on the number of chunks, so the result never depends on which thread
produced which chunk.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _neumaier(values):
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s, c


def kahan_sum(values) -> tuple[float, float]:
    """Compensated sum of a 1-D array as ``(sum, compensation)``."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0, 0.0
    s, c = _neumaier(values)
    return float(s), float(c)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def merge(left: tuple[float, float], right: tuple[float, float]) -> tuple[float, float]:
    s, e = _two_sum(left[0], right[0])
    return s, e + left[1] + right[1]


def pairwise_merge(parts: list[tuple[float, float]]) -> tuple[float, float]:
    if not parts:
        return 0.0, 0.0
    level = list(parts)
    while len(level) > 1:
        nxt = [merge(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def total(parts: list[tuple[float, float]]) -> float:
    s, c = pairwise_merge(parts)
    return s + c
