"""Command-line front end.

    ibim convergence --config configs/circle_hat.toml --out results/
    ibim variance    --config configs/quartic.toml --seed 7
    ibim reference   --verify | --regenerate | --list
    ibim contfrac    sqrt2 --terms 12 --rect 1 0.1 --h 0.01

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure or a
golden-value mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import tomli

from . import __version__, numbertheory, reference
from .errors import ConfigError, IBIMError
from .experiments import (
    StudyConfig,
    config_dict,
    dyadic,
    run_study,
    write_csv,
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_ALLOWED_KINDS = {"convergence": ("convergence", "segment"), "variance": ("variance",)}

_KEYS = {
    "id": "study_id",
    "kind": "kind",
    "shape": "shape",
    "integrand": "integrand",
    "weight": "weight",
    "alpha": "alpha",
    "h": "hs",
    "jacobian": "jacobian_mode",
    "samples": "samples",
    "transform": "transform",
    "seed": "seed",
    "shape_params": "shape_params",
    "eps_coef": "eps_coef",
    "shift": "shift",
    "angle": "angle",
    "random_center": "random_center",
    "center_box": "center_box",
    "envelope_octaves": "envelope_octaves",
}


# ---------------------------------------------------------------------------
# configuration


def _h_list(value):
    if isinstance(value, dict):
        try:
            return dyadic(int(value["min_exp"]), int(value["max_exp"]), int(value.get("per_octave", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad dyadic h range: {exc}", "h") from None
    if isinstance(value, list):
        return tuple(float(v) for v in value)
    raise ConfigError("h must be a list or a {min_exp, max_exp} table", "h")


def study_from_table(table: dict, defaults: dict, seed: int, command: str) -> StudyConfig:
    merged = {**defaults, **table}
    kw = {}
    for key, value in merged.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
        kw[_KEYS[key]] = value
    if "study_id" not in kw:
        raise ConfigError("every study needs an id", "id")
    if "shape" not in kw:
        raise ConfigError("unknown shape: none given", "shape")
    kw.setdefault("kind", command)
    if kw["kind"] not in _ALLOWED_KINDS[command]:
        raise ConfigError(f"study kind {kw['kind']!r} does not belong to {command!r}", "kind")
    if "hs" in kw:
        kw["hs"] = _h_list(kw["hs"])
    kw.setdefault("seed", seed)
    for name, typ in (("alpha", float), ("samples", int), ("seed", int)):
        if name in kw:
            try:
                kw[name] = typ(kw[name])
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be a number", name) from None
    for name in ("shift",):
        if name in kw and kw[name] is not None:
            kw[name] = tuple(float(v) for v in kw[name])
    return StudyConfig(**kw).validate()


def load_config(path, command: str, seed_override: int | None = None) -> list[StudyConfig]:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found", "config") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config file does not parse: {exc}", "config") from None
    run = data.get("run", {})
    seed = int(seed_override if seed_override is not None else run.get("seed", 0))
    defaults = data.get("defaults", {})
    studies = data.get("study", [])
    if not studies:
        raise ConfigError("config declares no [[study]] tables", "study")
    cfgs = []
    for table in studies:
        if seed_override is not None:
            table = {**table, "seed": seed_override}
        cfgs.append(study_from_table(table, defaults, seed, command))
    ids = [c.study_id for c in cfgs]
    if len(set(ids)) != len(ids):
        raise ConfigError("study ids must be unique", "id")
    return cfgs


# ---------------------------------------------------------------------------
# commands


def _merge_summary(path: Path, entries: list[dict]) -> None:
    old = json.loads(path.read_text()) if path.exists() else []
    new_ids = {e["study_id"] for e in entries}
    merged = [e for e in old if e["study_id"] not in new_ids] + entries
    path.write_text(json.dumps(merged, indent=2) + "\n")


def run_config(command, config, out, seed=None, threads=1, log=print) -> list:
    cfgs = load_config(config, command, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    fits, rows = [], []
    for cfg in cfgs:
        fit = run_study(cfg, threads)
        log(f"{cfg.study_id}: slope {fit.slope:.3f} (rms {fit.residual_rms:.2f}, {fit.n_points} points)")
        fits.append(fit)
        rows.extend(fit.rows)
    stem = Path(config).stem
    write_csv(rows, out / f"{stem}.csv")
    _merge_summary(out / "summary.json", [f.summary() for f in fits])
    manifest = {
        "config": str(config),
        "out": str(out),
        "seed": seed,
        "studies": [config_dict(c) for c in cfgs],
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    (out / f"{stem}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return fits


def _parse_real(text: str):
    named = {"sqrt2": numbertheory.SQRT2, "golden": numbertheory.GOLDEN, "pi": math.pi}
    if text in named:
        return named[text]
    if "/" in text:
        return Fraction(text)
    return float(text)


def cmd_contfrac(args) -> int:
    x = _parse_real(args.x)
    verts = None
    if args.rect:
        length, width = args.rect
        slope = float(x)
        verts = numbertheory.segment_tube(slope, width / 2, length)
    out = numbertheory.report(x if isinstance(x, Fraction) else float(x), args.terms, verts, args.h)
    if isinstance(out["x"], Fraction):
        out["x"] = str(out["x"])
    print(json.dumps(out, indent=2))
    return 0


def cmd_reference(args) -> int:
    if args.list:
        for shape, integrand in reference.golden_pairs():
            print(shape, integrand)
        return 0
    if args.regenerate:
        records = reference.regenerate(args.golden)
        print(f"wrote {len(records)} golden values")
        return 0
    bad = reference.verify(args.golden)
    for shape, integrand, stored, fresh in bad:
        print(f"mismatch {shape} {integrand}: stored {stored!r} recomputed {fresh!r}", file=sys.stderr)
    if bad:
        return EXIT_NUMERIC
    print("all golden values verified")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ibim", description="IBIM quadrature studies")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("convergence", "variance"):
        s = sub.add_parser(name, help=f"run the {name} studies of a config file")
        s.add_argument("--config", required=True)
        s.add_argument("--out", default="results")
        s.add_argument("--seed", type=int, default=None, help="override every study seed")
        s.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    r = sub.add_parser("reference", help="golden reference values")
    g = r.add_mutually_exclusive_group()
    g.add_argument("--regenerate", action="store_true")
    g.add_argument("--verify", action="store_true")
    g.add_argument("--list", action="store_true")
    r.add_argument("--golden", default=None, help="golden file (default: packaged)")
    c = sub.add_parser("contfrac", help="continued fraction and discrepancy report")
    c.add_argument("x", help="real number, p/q, or one of sqrt2, golden, pi")
    c.add_argument("--terms", type=int, default=12)
    c.add_argument("--rect", type=float, nargs=2, metavar=("LENGTH", "WIDTH"),
                   help="tube rectangle around a segment with slope x")
    c.add_argument("--h", type=float, default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("convergence", "variance"):
            run_config(args.command, args.config, args.out, args.seed, args.threads)
            return 0
        if args.command == "reference":
            return cmd_reference(args)
        return cmd_contfrac(args)
    except ConfigError as exc:
        field = f" [{exc.field}]" if exc.field else ""
        print(f"config error{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IBIMError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
