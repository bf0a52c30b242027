"""Compiled closest-point kernels for curves given as rho(phi) about a center."""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def quartic_rho(phi, r, unused1, unused2):
    c = math.cos(phi)
    s = math.sin(phi)
    r2 = r * r
    c2 = c * c
    s2 = s * s
    A = c2 * c2 / (r2 * r2)
    B = s2 / r2
    A1 = -4.0 * c2 * c * s / (r2 * r2)
    B1 = 2.0 * s * c / r2
    A2 = (12.0 * c2 * s2 - 4.0 * c2 * c2) / (r2 * r2)
    B2 = 2.0 * (c2 - s2) / r2
    root = math.sqrt(B * B + 4.0 * A)
    u = 2.0 / (B + root)
    u1 = -(A1 * u * u + B1 * u) / root
    u2 = -(A2 * u * u + 4.0 * A1 * u * u1 + 2.0 * A * u1 * u1 + B2 * u + 2.0 * B1 * u1) / root
    rho = math.sqrt(u)
    rho1 = u1 / (2.0 * rho)
    rho2 = (u2 - 2.0 * rho1 * rho1) / (2.0 * rho)
    return rho, rho1, rho2


@njit(cache=True, nogil=True)
def star_rho(phi, R, r, m):
    cm = math.cos(m * phi)
    sm = math.sin(m * phi)
    return R + r * cm, -m * r * sm, -m * m * r * cm


@njit(cache=True, nogil=True)
def _eval(rho_fn, phi, p0, p1, p2, x, y):
    r, r1, r2 = rho_fn(phi, p0, p1, p2)
    c = math.cos(phi)
    s = math.sin(phi)
    gx = r * c
    gy = r * s
    g1x = r1 * c - r * s
    g1y = r1 * s + r * c
    g2x = r2 * c - 2.0 * r1 * s - r * c
    g2y = r2 * s + 2.0 * r1 * c - r * s
    dx = gx - x
    dy = gy - y
    grad = g1x * dx + g1y * dy
    hess = g2x * dx + g2y * dy + g1x * g1x + g1y * g1y
    speed = math.sqrt(g1x * g1x + g1y * g1y)
    return grad, hess, speed, dx * dx + dy * dy


@njit(cache=True, nogil=True)
def _golden(rho_fn, p0, p1, p2, x, y, phi0, half):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a = phi0 - half
    b = phi0 + half
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc = _eval(rho_fn, c, p0, p1, p2, x, y)[3]
    fd = _eval(rho_fn, d, p0, p1, p2, x, y)[3]
    for _ in range(200):
        if b - a < 1e-13:
            return 0.5 * (a + b), True
        if fc < fd:
            b = d
            d = c
            fd = fc
            c = b - inv * (b - a)
            fc = _eval(rho_fn, c, p0, p1, p2, x, y)[3]
        else:
            a = c
            c = d
            fc = fd
            d = a + inv * (b - a)
            fd = _eval(rho_fn, d, p0, p1, p2, x, y)[3]
    return 0.5 * (a + b), False


@njit(cache=True, nogil=True)
def project_polar(rho_fn, p0, p1, p2, pts, seed_phi, seed_xy, tol, maxit):
    """Closest parameter, foot, signed distance and curvature for local points.

    ``ok`` is False where neither Newton nor the golden-section fallback met
    the tolerance.
    """
    n = pts.shape[0]
    ns = seed_phi.shape[0]
    out = np.empty(n)
    foot = np.empty((n, 2))
    dist = np.empty(n)
    kappa = np.empty(n)
    ok = np.ones(n, dtype=np.bool_)
    cell = 2.0 * math.pi / ns
    for i in range(n):
        x = pts[i, 0]
        y = pts[i, 1]
        best = 0
        bd = 1e300
        for j in range(ns):
            dx = seed_xy[j, 0] - x
            dy = seed_xy[j, 1] - y
            dd = dx * dx + dy * dy
            if dd < bd:
                bd = dd
                best = j
        phi = seed_phi[best]
        done = False
        for _ in range(maxit):
            grad, hess, speed, _d2 = _eval(rho_fn, phi, p0, p1, p2, x, y)
            if abs(grad) <= tol * speed:
                done = True
                break
            if hess <= 0.0:
                break
            step = -grad / hess
            if step > cell:
                step = cell
            elif step < -cell:
                step = -cell
            phi += step
        if not done:
            phi, good = _golden(rho_fn, p0, p1, p2, x, y, seed_phi[best], 2.0 * cell)
            ok[i] = good
        out[i] = phi
        r, r1, r2 = rho_fn(phi, p0, p1, p2)
        c = math.cos(phi)
        s = math.sin(phi)
        gx = r * c
        gy = r * s
        tx = r1 * c - r * s
        ty = r1 * s + r * c
        sp = math.sqrt(tx * tx + ty * ty)
        foot[i, 0] = gx
        foot[i, 1] = gy
        # outward normal of a counterclockwise curve is the tangent turned clockwise
        dist[i] = (ty * (x - gx) - tx * (y - gy)) / sp
        kappa[i] = (r * r + 2.0 * r1 * r1 - r * r2) / (sp * sp * sp)
    return out, foot, dist, kappa, ok
