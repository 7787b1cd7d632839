"""Command-line interface.

Every subcommand writes its artifacts plus ``manifest.json`` (resolved config,
library version and artifact hashes) into ``--out``. Passing a manifest back
through ``--config`` reproduces the artifacts byte for byte.

Exit status: 0 success, 1 failed verification, 2 configuration error.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as lio
from ._parallel import pmap
from .errors import AccuracyError, LevySPDEError, ParameterError, RefusedError
from .greens import GreenFunction, TestFunction
from .noise import StableParams, sample_sas, sample_white_noise, sample_white_noise_batch
from .norms import (existence_verdict, h1_check, heat_norm_closed, lalpha_norm_quadrature,
                    wave1_norm_closed, wave2_norm_closed)
from .solutions import discrete_norm, fubini_check, mild_field, pairing_weights
from .stats import cf_test

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


# --- parsing helpers ------------------------------------------------------------

def _as_text(value):
    # config files may hold numbers or lists where flags hold strings
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_int_range(text):
    """``"3"``, ``"1,2,4"`` or ``"1..5"`` (inclusive)."""
    out = []
    text = _as_text(text)
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty range {text!r}")
    return out


def parse_float_range(text):
    """``"1.5"``, ``"0.5,1,1.5"`` or ``"lo..hi:step"`` (inclusive, rounded to 10 digits)."""
    out = []
    text = _as_text(text)
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            a, b = (float(v) for v in span.split(".."))
            step = float(step) if step else 0.1
            if step <= 0:
                raise ConfigError("range step must be positive")
            n = int(np.floor((b - a) / step + 1e-9))
            out.extend(round(a + k * step, 10) for k in range(n + 1))
        elif part:
            out.append(float(part))
    if not out:
        raise ConfigError(f"empty range {text!r}")
    return out


def parse_grid(text, ndim):
    """``lo,hi,cells`` per axis (time first for space-time operators)."""
    vals = [v for v in str(text).split(",") if v.strip()]
    if len(vals) != 3 * ndim:
        raise ConfigError(f"--grid needs 3 values (lo,hi,cells) per axis, {ndim} axes")
    lo = [float(vals[3 * k]) for k in range(ndim)]
    hi = [float(vals[3 * k + 1]) for k in range(ndim)]
    cells = [int(vals[3 * k + 2]) for k in range(ndim)]
    return {"dim": ndim, "origin": lo, "extent": [h - l for l, h in zip(lo, hi)], "cells": cells}


def default_grid(g):
    if g.space_time:
        n = {1: 32, 2: 12}.get(g.dim, 6)
        return {"dim": g.ndim, "origin": [0.0] + [-2.0] * g.dim, "extent": [2.0] + [4.0] * g.dim,
                "cells": [n] * g.ndim}
    return {"dim": g.ndim, "origin": [-2.0] * g.dim, "extent": [4.0] * g.dim, "cells": [6] * g.dim}


def parse_phi(text, ndim):
    """``c1,...,cD;r1,...,rD[;amplitude]``."""
    parts = str(text).split(";")
    if len(parts) not in (2, 3):
        raise ConfigError("--phi expects 'center;radii[;amplitude]'")
    c = [float(v) for v in parts[0].split(",")]
    r = [float(v) for v in parts[1].split(",")]
    a = float(parts[2]) if len(parts) == 3 else 1.0
    if len(c) != ndim or len(r) != ndim:
        raise ConfigError(f"--phi needs {ndim} center and radius entries")
    return {"center": c, "radii": r, "amplitude": a}


def default_phi(grid):
    lo = np.array(grid["origin"])
    ext = np.array(grid["extent"])
    return {"center": (lo + 0.5 * ext).tolist(), "radii": (0.2 * ext).tolist(), "amplitude": 1.0}


# --- parser ---------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="levy-spde", description="Stable-noise SPDE toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--config", help="manifest or config JSON to replay")

    def model(sp, seed=True):
        sp.add_argument("--equation", choices=["heat", "wave", "poisson"])
        sp.add_argument("--d", type=int, help="spatial dimension")
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--grid", help="lo,hi,cells per axis, time axis first")
        if seed:
            sp.add_argument("--seed", type=int, help="noise seed (mandatory)")
        sp.add_argument("--tol", type=float)

    sp = sub.add_parser("sample-noise", parents=[common], argument_default=argparse.SUPPRESS, help="sample a stable noise realization")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--grid", help="lo,hi,cells per axis")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", choices=["binary", "csv", "both"])

    sp = sub.add_parser("mild-field", parents=[common], argument_default=argparse.SUPPRESS, help="mild solution on the default eval grid")
    model(sp)

    sp = sub.add_parser("pairing", parents=[common], argument_default=argparse.SUPPRESS, help="generalized-solution pairing")
    model(sp)
    sp.add_argument("--phi", help="center;radii[;amplitude]")
    sp.add_argument("--replicates", type=int, help="number of consecutive seeds (default 1)")

    sp = sub.add_parser("fubini-check", parents=[common], argument_default=argparse.SUPPRESS, help="mild vs generalized (Fubini)")
    model(sp)
    sp.add_argument("--phi", help="center;radii[;amplitude]")
    sp.add_argument("--mode", choices=["shared", "refine"])
    sp.add_argument("--levels", type=int)

    sp = sub.add_parser("verdict-table", parents=[common], argument_default=argparse.SUPPRESS, help="existence verdicts as CSV")
    sp.add_argument("--equation", choices=["heat", "wave", "poisson"], action="append")
    sp.add_argument("--d", help="e.g. 1..5 (default 1..6)")
    sp.add_argument("--alpha", help="e.g. 0.25..1.95:0.1 (the default)")

    sp = sub.add_parser("norms", parents=[common], argument_default=argparse.SUPPRESS, help="closed-form vs quadrature norms")
    sp.add_argument("--equation", choices=["heat", "wave", "poisson"], required=False)
    sp.add_argument("--d")
    sp.add_argument("--alpha")
    sp.add_argument("--t", help="time horizons (default 0.5,1,2)")
    sp.add_argument("--levels", type=int)
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("cf-suite", parents=[common], argument_default=argparse.SUPPRESS, help="CF tests of the stable sampler")
    sp.add_argument("--alpha")
    sp.add_argument("--n", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--seed", type=int)

    sp = sub.add_parser("repro-all", parents=[common], argument_default=argparse.SUPPRESS, help="run the full acceptance suite")
    sp.add_argument("--only", help="criterion numbers, e.g. 1,2,4")
    return p


# --- config resolution --------------------------------------------------------------

def _need(cfg, *keys):
    for k in keys:
        if cfg.get(k) is None:
            raise ConfigError(f"--{k.replace('_', '-')} is required")


def _model_config(cfg):
    _need(cfg, "equation", "d", "alpha", "seed")
    g = GreenFunction(cfg["equation"], cfg["d"])
    if isinstance(cfg.get("grid"), str) or cfg.get("grid") is None:
        cfg["grid"] = parse_grid(cfg["grid"], g.ndim) if cfg.get("grid") else default_grid(g)
    return g


def resolve(args):
    """Merge ``--config`` with the flags given on the command line (flags win)."""
    cfg = {}
    if getattr(args, "config", None):
        data = lio.read_json(args.config)
        if data.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {data.get('command')!r}, not {args.command!r}")
        cfg.update(data.get("config", data))
    for k, v in vars(args).items():
        if k not in ("out", "config", "command"):
            cfg[k] = v
    return cfg


# --- commands -------------------------------------------------------------------------

def _grid(cfg):
    return lio.grid_from_dict(cfg["grid"])


def cmd_sample_noise(cfg, out):
    _need(cfg, "alpha", "grid", "seed")
    if isinstance(cfg["grid"], str):
        n_axes = len([v for v in cfg["grid"].split(",") if v.strip()]) // 3
        cfg["grid"] = parse_grid(cfg["grid"], n_axes)
    noise = sample_white_noise(_grid(cfg), cfg["alpha"], cfg["seed"])
    files = []
    fmt = cfg.get("format", "both")
    if fmt in ("binary", "both"):
        lio.write_noise_binary(noise, out / "noise.bin")
        files.append("noise.bin")
    if fmt in ("csv", "both"):
        lio.write_noise_csv(noise, out / "noise.csv")
        files.append("noise.csv")
    return EXIT_OK, files


def cmd_mild_field(cfg, out):
    g = _model_config(cfg)
    grid = _grid(cfg)
    noise = sample_white_noise(grid, cfg["alpha"], cfg["seed"])
    fld = mild_field(g, noise)
    lio.write_field_csv(fld, out / "field.csv", g.space_time)
    lio.write_json(lio.field_manifest(fld, g, grid, cfg["alpha"], cfg["seed"]), out / "field.json")
    return EXIT_OK, ["field.csv", "field.json"]


def _phi(cfg, g):
    if cfg.get("phi") is None:
        cfg["phi"] = default_phi(cfg["grid"])
    elif isinstance(cfg["phi"], str):
        cfg["phi"] = parse_phi(cfg["phi"], g.ndim)
    return TestFunction.from_dict(cfg["phi"])


def cmd_pairing(cfg, out):
    g = _model_config(cfg)
    grid = _grid(cfg)
    phi = _phi(cfg, g)
    existence = existence_verdict(g.operator, g.dim, cfg["alpha"])
    if not existence.generalized_exists:
        raise RefusedError(existence.explain())
    w = pairing_weights(phi, g, grid, rtol=cfg["tol"])
    m = int(cfg.get("replicates", 1))
    if m < 1:
        raise ConfigError("--replicates must be >= 1")
    seeds = np.arange(m, dtype=np.uint64) + np.uint64(cfg["seed"])
    chunks = [seeds[i:i + 1000] for i in range(0, m, 1000)]
    vals = np.concatenate(pmap(lambda s: sample_white_noise_batch(grid, cfg["alpha"], s) @ w, chunks))
    scale = discrete_norm(w, grid, cfg["alpha"]) ** (1.0 / cfg["alpha"])
    report = {"green": g.id, "phi": cfg["phi"], "alpha": cfg["alpha"], "scale": scale,
              "values": vals.tolist() if m <= 100 else None}
    status = EXIT_OK
    files = ["pairing.json"]
    if m > 1:
        with open(out / "pairings.csv", "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["seed", "value"])
            for s, v in zip(seeds, vals):
                wr.writerow([int(s), repr(float(v))])
        files.append("pairings.csv")
    if m >= 100:
        res = cf_test(vals, cfg["alpha"], scale, band_multiplier=5.0)
        report["cf_test"] = res.to_dict()
        status = EXIT_OK if res.passed else EXIT_FAIL
    lio.write_json(report, out / "pairing.json")
    return status, files


def cmd_fubini(cfg, out):
    g = _model_config(cfg)
    grid = _grid(cfg)
    phi = _phi(cfg, g)
    noise = sample_white_noise(grid, cfg["alpha"], cfg["seed"])
    kw = {}
    if cfg.get("tol") is not None:
        kw["rtol"] = cfg["tol"]
    rep = fubini_check(phi, g, noise, mode=cfg.get("mode", "shared"), levels=cfg.get("levels", 5), **kw)
    lio.write_json(rep.to_dict(), out / "fubini.json")
    return (EXIT_OK if rep.passed else EXIT_FAIL), ["fubini.json"]


def cmd_verdict_table(cfg, out):
    eqs = cfg.get("equation") or ["heat", "wave", "poisson"]
    if isinstance(eqs, str):
        eqs = [eqs]
    ds = parse_int_range(cfg.get("d", "1..6"))
    alphas = parse_float_range(cfg.get("alpha", "0.25..1.95:0.1"))
    with open(out / "verdicts.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["equation", "d", "alpha", "mild", "generalized", "random_field"])
        for eq in eqs:
            for d in ds:
                for a in alphas:
                    v = existence_verdict(eq, d, a)
                    w.writerow([eq, d, repr(a), str(v.mild_exists).lower(),
                                str(v.generalized_exists).lower(), str(v.random_field_exists).lower()])
    return EXIT_OK, ["verdicts.csv"]


def cmd_norms(cfg, out):
    eq = cfg.get("equation") or "heat"
    ds = parse_int_range(cfg.get("d", "1"))
    alphas = parse_float_range(cfg.get("alpha", "0.5,1.0,1.5"))
    ts = parse_float_range(cfg.get("t", "0.5,1,2"))
    levels = int(cfg.get("levels", 5))
    tol = cfg.get("tol") or (1e-4 if eq == "heat" else 1e-3)
    rows = []
    ok = True
    for d in ds:
        g = GreenFunction(eq, d)
        for a in alphas:
            if eq == "poisson":
                phi = TestFunction((0.0,) * d, (1.0,) * d)
                r = h1_check(phi, g, a)
                want = existence_verdict(eq, d, a).generalized_exists
                rows.append({"d": d, "alpha": a, "h1_value": r.value, "diverged": r.diverged,
                             "verdict_generalized": want})
                ok &= r.diverged != want
                continue
            for t in ts:
                if eq == "heat":
                    closed = heat_norm_closed(t, a, d)
                elif d == 1:
                    closed = wave1_norm_closed(t, a)
                elif d == 2:
                    closed = wave2_norm_closed(t, a)
                else:
                    raise RefusedError(existence_verdict(eq, d, a).explain())
                q = lalpha_norm_quadrature(g, (t,) + (0.0,) * d, a, levels=levels)
                row = {"d": d, "alpha": a, "t": t, "closed": closed.value, "quadrature": q.value,
                       "diverged": q.diverged, "closed_diverged": closed.diverged}
                if closed.finite and q.finite:
                    row["rel_gap"] = abs(q.value / closed.value - 1.0)
                    ok &= row["rel_gap"] <= tol
                else:
                    ok &= closed.diverged == q.diverged
                rows.append(row)
    lio.write_json({"equation": eq, "tol": tol, "levels": levels, "rows": rows, "passed": ok},
                   out / "norms.json")
    return (EXIT_OK if ok else EXIT_FAIL), ["norms.json"]


def cmd_cf_suite(cfg, out):
    _need(cfg, "seed")
    alphas = parse_float_range(cfg.get("alpha", "0.5,1.0,1.5"))
    n, trials = int(cfg.get("n", 100_000)), int(cfg.get("trials", 20))
    jobs = [(a, k) for a in alphas for k in range(trials)]
    base = int(cfg["seed"])
    res = pmap(lambda job: cf_test(sample_sas(StableParams(job[0]), n, base + job[1]), job[0]), jobs)
    summary = []
    ok = True
    for a in alphas:
        passed = sum(r.passed for (aa, _), r in zip(jobs, res) if aa == a)
        summary.append({"alpha": a, "trials": trials, "passed": passed, "rate": passed / trials})
        ok &= passed >= 0.99 * trials
    lio.write_json({"n": n, "summary": summary, "passed": ok}, out / "cf_suite.json")
    return (EXIT_OK if ok else EXIT_FAIL), ["cf_suite.json"]


def cmd_repro_all(cfg, out):
    from .acceptance import run_all
    sel = parse_int_range(cfg["only"]) if cfg.get("only") else None
    results = run_all(sel, echo=lambda line: print(line, flush=True))
    report = [{k: v for k, v in r.to_dict().items() if k != "seconds"} for r in results]
    for r in report:
        r["details"] = _strip_times(r["details"])
    lio.write_json({"criteria": report, "passed": all(r.passed for r in results)}, out / "acceptance.json")
    return (EXIT_OK if all(r.passed for r in results) else EXIT_FAIL), ["acceptance.json"]


def _strip_times(obj):
    if isinstance(obj, dict):
        return {k: _strip_times(v) for k, v in obj.items() if "second" not in k}
    return obj


DEFAULTS = {
    "sample-noise": {"format": "both"},
    "mild-field": {},
    "pairing": {"replicates": 1, "tol": 1e-8},
    "fubini-check": {"mode": "shared", "levels": 5},
    "verdict-table": {"equation": ["heat", "wave", "poisson"], "d": "1..6", "alpha": "0.25..1.95:0.1"},
    "norms": {"equation": "heat", "d": "1", "alpha": "0.5,1.0,1.5", "t": "0.5,1,2", "levels": 5},
    "cf-suite": {"alpha": "0.5,1.0,1.5", "n": 100_000, "trials": 20},
    "repro-all": {},
}

COMMANDS = {"sample-noise": cmd_sample_noise, "mild-field": cmd_mild_field, "pairing": cmd_pairing,
            "fubini-check": cmd_fubini, "verdict-table": cmd_verdict_table, "norms": cmd_norms,
            "cf-suite": cmd_cf_suite, "repro-all": cmd_repro_all}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(getattr(args, "out", "."))
    try:
        cfg = dict(DEFAULTS[args.command], **resolve(args))
        out.mkdir(parents=True, exist_ok=True)
        status, files = COMMANDS[args.command](cfg, out)
    except (ConfigError, ParameterError, RefusedError, ValueError, FileNotFoundError) as exc:
        print(f"levy-spde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"levy-spde {args.command}: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except LevySPDEError as exc:
        print(f"levy-spde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = {"command": args.command, "config": cfg, "version": __version__,
                "artifacts": {f: lio.sha256(out / f) for f in files}, "exit_status": status}
    lio.write_json(manifest, out / "manifest.json")
    print(f"{args.command}: {'ok' if status == EXIT_OK else 'verification failed'} -> {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
