"""Convergence and variance studies with log-log rate fits.

A study is a grid of ``(h, sample)`` tasks. Each task builds a lattice frame
from ``(seed, sample)`` alone, so results are keyed and reproducible no matter
how the grid is scheduled.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError, WidthExceedsReach
from .geometry import Capsule, Circle, QuarticConvex, Segment, Semicircle, Sphere, StarCurve
from .lattice import SHIFT_AND_ROTATION, SHIFT_ONLY, LatticeFrame, sample_frame
from .quadrature import INTEGRANDS, ibim_integrate, upper_mask
from .reference import reference_integral
from .weights import KINDS, WeightFunction

ALPHAS = (0.0, 0.5, 1.0)
CSV_COLUMNS = (
    "study_id",
    "shape",
    "weight",
    "alpha",
    "h",
    "epsilon",
    "sample_index",
    "value",
    "error",
    "variance",
    "point_count",
)
SHAPE_KINDS = ("circle", "sphere", "quartic", "star", "capsule", "segment", "semicircle")
STUDY_KINDS = ("convergence", "variance", "segment")


def tube_width(h: float, alpha: float, coef: float | None = None) -> float:
    """``0.1`` for alpha 0, ``2 h^(1/2)`` for alpha 1/2, ``2 h`` for alpha 1."""
    if alpha not in ALPHAS:
        raise ConfigError(f"alpha must be one of {ALPHAS}, got {alpha}", "alpha")
    if coef is None:
        coef = 0.1 if alpha == 0 else 2.0
    return coef * h**alpha


def dyadic(k_min: int, k_max: int, per_octave: int = 1) -> tuple:
    """``2^-k`` for ``k`` from ``k_min`` to ``k_max``, ``per_octave`` values per factor 2."""
    n = (k_max - k_min) * per_octave
    return tuple(2.0 ** -(k_min + j / per_octave) for j in range(n + 1))


@dataclass(frozen=True)
class StudyConfig:
    study_id: str
    shape: str
    kind: str = "convergence"
    integrand: str = "test2d"
    weight: str = "hat"
    alpha: float = 1.0
    hs: tuple = dyadic(5, 12)
    jacobian_mode: str = "exact"
    samples: int = 32
    transform: str = SHIFT_ONLY
    seed: int = 0
    shape_params: dict = field(default_factory=dict)
    eps_coef: float | None = None
    shift: tuple | None = None  # fixed lattice shift instead of a seeded draw
    angle: float | None = None  # fixed lattice rotation instead of a seeded draw
    random_center: bool = True
    center_box: float = 0.5  # centers are uniform in [-box, box]^d
    envelope_octaves: float = 1.0  # bin width (in log2 h) of the error envelope

    @property
    def dim(self) -> int:
        return 3 if self.shape == "sphere" else 2

    def eps(self, h: float) -> float:
        return tube_width(h, self.alpha, self.eps_coef)

    def validate(self) -> "StudyConfig":
        if self.shape not in SHAPE_KINDS:
            raise ConfigError(f"unknown shape {self.shape!r}", "shape")
        if self.kind not in STUDY_KINDS:
            raise ConfigError(f"unknown study kind {self.kind!r}", "kind")
        base = self.integrand.removesuffix("_upper")
        if base not in INTEGRANDS:
            raise ConfigError(f"unknown integrand {self.integrand!r}", "integrand")
        if self.weight not in KINDS:
            raise ConfigError(f"unknown weight {self.weight!r}", "weight")
        tube_width(1.0, self.alpha)
        if self.eps_coef is not None and not self.eps_coef > 0:
            raise ConfigError("eps_coef must be positive", "eps_coef")
        hs = np.asarray(self.hs, dtype=float)
        if len(hs) < 4:
            raise ConfigError("need at least 4 grid sizes for a rate fit", "hs")
        if not (np.all(hs > 0) and np.all(np.diff(hs) < 0)):
            raise ConfigError("grid sizes must be positive and strictly decreasing", "hs")
        if self.kind == "variance" and self.samples < 1:
            raise ConfigError("samples must be at least 1", "samples")
        if self.jacobian_mode not in ("exact", "unity", "laplacian"):
            raise ConfigError(f"unknown jacobian mode {self.jacobian_mode!r}", "jacobian_mode")
        if self.transform not in (SHIFT_ONLY, SHIFT_AND_ROTATION):
            raise ConfigError(f"unknown transform mode {self.transform!r}", "transform")
        if self.dim == 3 and (self.transform == SHIFT_AND_ROTATION or self.angle):
            raise ConfigError("3D studies support shifts only", "transform")
        if self.shift is not None and len(self.shift) != self.dim:
            raise ConfigError("shift has the wrong dimension", "shift")
        return self


# ---------------------------------------------------------------------------
# builders


def study_center(cfg: StudyConfig) -> np.ndarray:
    if not cfg.random_center:
        return np.zeros(cfg.dim)
    rng = np.random.default_rng([int(cfg.seed), 0])
    return rng.uniform(-cfg.center_box, cfg.center_box, cfg.dim)


def build_boundary(cfg: StudyConfig):
    c = study_center(cfg)
    p = dict(cfg.shape_params)
    kind = cfg.shape
    if kind == "circle":
        return Circle(p.get("r", 0.75), tuple(c))
    if kind == "sphere":
        return Sphere(p.get("r", 0.75), tuple(c))
    if kind == "quartic":
        return QuarticConvex(p.get("r", 0.75), tuple(c))
    if kind == "star":
        return StarCurve(p.get("R", 0.75), p.get("r", 0.2), int(p.get("m", 3)), tuple(c))
    if kind == "capsule":
        half = 0.5 * p.get("length", 1.0)
        a, b = c - [half, 0.0], c + [half, 0.0]
        return Capsule(tuple(a), tuple(b), p.get("rc", 0.2))
    if kind == "semicircle":
        return Semicircle(tuple(c), p.get("r", 0.75))
    if kind == "segment":
        beta = math.atan(p["slope"]) if "slope" in p else p.get("angle", 0.0)
        length = p.get("length", 1.0)
        u = np.array([math.cos(beta), math.sin(beta)])
        if p.get("anchor", "start") == "middle":
            a = c - 0.5 * length * u
        else:
            a = c
        return Segment(tuple(a), tuple(a + length * u))
    raise ConfigError(f"unknown shape {kind!r}", "shape")


def build_integrand(cfg: StudyConfig, boundary):
    name = cfg.integrand
    if name.endswith("_upper"):
        y0 = study_center(cfg)[1]
        return upper_mask(INTEGRANDS[name.removesuffix("_upper")], y0)
    return INTEGRANDS[name]


def study_frame(cfg: StudyConfig, h: float, index: int) -> LatticeFrame:
    frame = sample_frame(cfg.seed, index, h, cfg.transform, cfg.dim)
    if cfg.shift is not None:
        frame = replace(frame, shift=tuple(cfg.shift))
    if cfg.angle is not None:
        frame = replace(frame, angle=float(cfg.angle))
    return frame


def check_widths(cfg: StudyConfig, boundary) -> None:
    for h in cfg.hs:
        eps = cfg.eps(h)
        if eps >= boundary.reach:
            raise WidthExceedsReach(
                f"{cfg.study_id}: eps={eps:g} at h={h:g} is not below the reach {boundary.reach:g}"
            )


# ---------------------------------------------------------------------------
# fitting


@dataclass
class RateFit:
    study_id: str
    slope: float
    intercept: float
    residual_rms: float
    n_points: int
    h: tuple = ()
    y: tuple = ()
    rows: list = field(default_factory=list)
    kind: str = "error"
    reference: float = math.nan

    def summary(self) -> dict:
        return {
            "study_id": self.study_id,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual_rms": self.residual_rms,
            "n_points": self.n_points,
        }


def fit_rate(h, y):
    """OLS of ``log2 y`` on ``log2 h``: ``(slope, intercept, residual_rms, n)``.

    Non-positive values (exact hits) carry no rate information and are skipped.
    """
    h, y = np.asarray(h, dtype=float), np.asarray(y, dtype=float)
    ok = (y > 0) & np.isfinite(y)
    x, z = np.log2(h[ok]), np.log2(y[ok])
    if len(x) < 2:
        return math.nan, math.nan, math.nan, int(len(x))
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, z, rcond=None)
    res = z - A @ np.array([slope, intercept])
    return float(slope), float(intercept), float(np.sqrt(np.mean(res**2))), int(len(x))


def upper_envelope(h, err, octaves: float = 1.0):
    """Largest error in each bin of width ``octaves`` in ``log2 h`` (from the coarsest h)."""
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    lg = np.log2(h)
    bins = np.floor((lg.max() - lg) / octaves + 1e-9).astype(int)
    hs, es = [], []
    for b in np.unique(bins):
        sel = np.flatnonzero(bins == b)
        k = sel[np.argmax(err[sel])]
        hs.append(h[k])
        es.append(err[k])
    return np.array(hs), np.array(es)


def variance_about(values, mean: float) -> float:
    """``(1/N) sum (v_i - mean)^2`` about a known mean."""
    v = np.asarray(values, dtype=float) - mean
    return math.fsum(v * v) / len(v)


# ---------------------------------------------------------------------------
# studies


def _map(fn, tasks, threads):
    if threads == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(fn, tasks))


def _row(cfg, h, eps, sample, value, error, variance, count):
    return {
        "study_id": cfg.study_id,
        "shape": cfg.shape,
        "weight": cfg.weight,
        "alpha": cfg.alpha,
        "h": h,
        "epsilon": eps,
        "sample_index": sample,
        "value": value,
        "error": error,
        "variance": variance,
        "point_count": count,
    }


def _setup(cfg):
    cfg.validate()
    boundary = build_boundary(cfg)
    check_widths(cfg, boundary)
    f = build_integrand(cfg, boundary)
    return boundary, f, reference_integral(boundary, f)


def _errors(cfg, boundary, f, ref, threads):
    def task(h):
        eps = cfg.eps(h)
        res = ibim_integrate(
            boundary, f, WeightFunction(cfg.weight, eps), study_frame(cfg, h, 0), cfg.jacobian_mode
        )
        return _row(cfg, h, eps, "fixed", res.value, abs(res.value - ref), None, res.point_count)

    return _map(task, list(cfg.hs), threads)


def convergence_study(cfg: StudyConfig, threads: int = 1) -> RateFit:
    """Error ``|I_h - I|`` on one frame held fixed across all ``h``; OLS over all ``h``."""
    boundary, f, ref = _setup(cfg)
    rows = _errors(cfg, boundary, f, ref, threads)
    h = [r["h"] for r in rows]
    e = [r["error"] for r in rows]
    slope, icpt, rms, n = fit_rate(h, e)
    return RateFit(cfg.study_id, slope, icpt, rms, n, tuple(h), tuple(e), rows, "error", ref)


def variance_study(cfg: StudyConfig, threads: int = 1) -> RateFit:
    """Per ``h``: mean squared deviation of ``I_h`` over ``samples`` frames from ``I``."""
    boundary, f, ref = _setup(cfg)
    tasks = [(h, i) for h in cfg.hs for i in range(cfg.samples)]

    def task(t):
        h, i = t
        eps = cfg.eps(h)
        res = ibim_integrate(
            boundary, f, WeightFunction(cfg.weight, eps), study_frame(cfg, h, i), cfg.jacobian_mode
        )
        return res.value, res.point_count

    out = dict(zip(tasks, _map(task, tasks, threads)))
    rows, hv, var = [], [], []
    for h in cfg.hs:
        vals = [out[(h, i)][0] for i in range(cfg.samples)]
        v = variance_about(vals, ref)
        hv.append(h)
        var.append(v)
        eps = cfg.eps(h)
        for i in range(cfg.samples):
            value, count = out[(h, i)]
            rows.append(_row(cfg, h, eps, i, value, abs(value - ref), v, count))
    slope, icpt, rms, n = fit_rate(hv, var)
    return RateFit(cfg.study_id, slope, icpt, rms, n, tuple(hv), tuple(var), rows, "variance", ref)


def segment_error_study(gamma: float | None, cfg: StudyConfig, threads: int = 1) -> RateFit:
    """Errors on a unit segment of slope ``gamma``; the fit uses the per-bin error envelope."""
    if gamma is not None:
        cfg = replace(cfg, shape="segment", shape_params={**cfg.shape_params, "slope": gamma})
    boundary, f, ref = _setup(cfg)
    rows = _errors(cfg, boundary, f, ref, threads)
    h = np.array([r["h"] for r in rows])
    e = np.array([r["error"] for r in rows])
    he, ee = upper_envelope(h, e, cfg.envelope_octaves)
    slope, icpt, rms, n = fit_rate(he, ee)
    return RateFit(cfg.study_id, slope, icpt, rms, n, tuple(he), tuple(ee), rows, "envelope", ref)


def run_study(cfg: StudyConfig, threads: int = 1) -> RateFit:
    if cfg.kind == "variance":
        return variance_study(cfg, threads)
    if cfg.kind == "segment":
        return segment_error_study(None, cfg, threads)
    return convergence_study(cfg, threads)


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_summary(fits, path) -> None:
    with open(path, "w") as fh:
        json.dump([f.summary() for f in fits], fh, indent=2)
        fh.write("\n")


def config_dict(cfg: StudyConfig) -> dict:
    d = asdict(cfg)
    d["hs"] = list(cfg.hs)
    return d
