"""Command-line front end.

Every command writes its report files into ``--out`` and echoes the primary
result on stdout (``--format`` picks CSV or JSON).  Report files start with
the same metadata block (tool version, space spec hash, seed, config echo)
and contain no timestamps or paths, so identical inputs give byte-identical
files.

File formats
------------
CSV tables are gnuplot-ready: ``#``-prefixed header lines, then one
``name,name,...`` column line, then comma-separated rows with floats in
shortest round-trip form.  JSON reports are ``{"meta": ..., "result": ...}``
with sorted keys and two-space indentation.  Step functions use the
``#stepfunction`` layout of :meth:`asymdim.singular.StepFunction.to_csv`.
Cached spectra use the ``spectrum-v1`` layout of
:func:`asymdim.spectral.write_spectrum`, one file per
``<spec-hash>-<index>-<method>`` key.

Exit codes: 0 success, 1 input error, 2 diagnostic failure
(non-convergence, non-eccentric reference, violated bound).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .dimension import (DimensionConfig, asymptotic_dimension, asymptotic_dimension_volume,
                        box_dimension)
from .errors import AsymdimError
from .singular import (LimitProcedure, StepFunction, dixmier_trace, duality_check, eccentricity,
                       power_transform, rearrangement, spectral_dimension, spectral_mu)
from .spaces import OSC_A, build_space
from .specs import SpaceSpec, load_spec, make_spec
from .spectral import (ExhaustionPlan, SpectralConfig, counting,
                       graph_laplacian, heat_trace, heat_trace0, heat_volume_bound_check,
                       ns_numbers, read_spectrum, spectrum, verify_a0_eq_dinf, write_spectrum)
from .spectral.invariants import dyadic_t
from .spectral.laplacian import encode_source

CACHE_ENV = "ASYMDIM_CACHE"
EXIT_OK, EXIT_INPUT, EXIT_DIAGNOSTIC = 0, 1, 2


class Diagnostic(Exception):
    """Estimator ran but its diagnostics failed; reports are still written."""


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Reporter:
    def __init__(self, args, spec: SpaceSpec | None, config: dict):
        self.out = Path(args.out)
        self.format = args.format
        self.meta = {
            "tool": "asymdim",
            "version": __version__,
            "command": f"{args.group} {args.sub}",
            "spec": spec.to_dict() if spec else None,
            "spec_hash": spec.digest() if spec else None,
            "seed": args.seed,
            "config": config,
        }
        self.primary = None

    def _header(self):
        lines = [f"# {k}: {json.dumps(_clean(v), sort_keys=True)}" for k, v in self.meta.items()]
        return "\n".join(lines) + "\n"

    def write_csv(self, name: str, columns, rows, primary: bool = False):
        text = self._header() + ",".join(columns) + "\n"
        text += "".join(",".join(repr(float(x)) for x in r) + "\n" for r in rows)
        self._write(name, text, primary and self.format == "csv")

    def write_text(self, name: str, body: str, primary: bool = False):
        self._write(name, self._header() + body, primary and self.format == "csv")

    def write_json(self, name: str, result, primary: bool = True):
        text = json.dumps(_clean({"meta": self.meta, "result": result}), sort_keys=True,
                          indent=2) + "\n"
        self._write(name, text, primary and self.format == "json")

    def _write(self, name, text, primary):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
        if primary:
            self.primary = text

    def flush(self):
        if self.primary is not None:
            sys.stdout.write(self.primary)


# ---------------------------------------------------------------------------
# spectrum cache
# ---------------------------------------------------------------------------


class SpectrumCache:
    """Text cache keyed by the parent spec hash, the exhaustion index and the method."""

    def __init__(self, root, parent: SpaceSpec, method: str, seed: int, probes: int, steps: int):
        self.root = Path(root)
        self.parent = parent.digest()
        self.method = method
        self.seed, self.probes, self.steps = seed, probes, steps
        self.hits = self.misses = 0

    def _path(self, index):
        tag = self.method
        if self.method == "lanczos":
            tag += f"-s{self.seed}-p{self.probes}-k{self.steps}"
        return self.root / f"{self.parent}-{index}-{tag}.spectrum"

    def __call__(self, spec, index, compute):
        path = self._path(index)
        if path.exists():
            self.hits += 1
            return read_spectrum(path)
        self.misses += 1
        s = compute()
        write_spectrum(s, path, encode_source(self.parent, index, s.method, s.volume, s.side))
        return read_spectrum(path)


def _spectra(args, spec: SpaceSpec):
    method = "lanczos" if args.lanczos else args.method
    cache = SpectrumCache(args.cache, spec, method, args.seed, args.probes, args.steps)

    def solve(s):
        return spectrum(graph_laplacian(build_space(s)), method, probes=args.probes,
                        steps=args.steps, seed=args.seed)

    if spec.kind == "cycle_torus" and spec.params["side"] >= 16 and not args.single:
        plan = ExhaustionPlan.default(spec.params["d"], spec.params["side"])
        specs = [make_spec("cycle_torus", d=plan.d, side=side, metric=spec.params["metric"])
                 for side in plan.sides]
        out = [cache(s, i, lambda s=s: solve(s)) for i, s in enumerate(specs)]
    else:
        out = [cache(spec, 0, lambda: solve(spec))]
    print(f"spectrum cache: {cache.hits} hit(s), {cache.misses} solve(s)", file=sys.stderr)
    return out


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _R_values(text):
    """``aM..aN`` (the oscillating-end radii) or a comma list."""
    if text.startswith("a") and ".." in text:
        lo, hi = text.split("..")
        i, j = int(lo[1:]), int(hi.lstrip("a"))
        if not 1 <= i < j < len(OSC_A):
            raise argparse.ArgumentTypeError(f"--R indices must satisfy 1 <= {i} < {j} <= "
                                             f"{len(OSC_A) - 1}")
        return tuple(OSC_A[i:j + 1])
    return _floats(text)


def _function(text: str) -> StepFunction:
    """Analytic tag (``pow:e``, ``const:c``) or a step-function CSV path."""
    if text.startswith(("pow:", "const:")):
        return StepFunction.from_tag(text)
    try:
        return StepFunction.from_csv(Path(text).read_text())
    except OSError as exc:
        raise argparse.ArgumentTypeError(f"cannot read step function {text!r}: {exc}")


def _dim_config(args) -> DimensionConfig:
    kw = {}
    for flag, name in [("Rmin", "R_min"), ("Rmax", "R_max"), ("rmin", "r_min"),
                       ("rmax", "r_max"), ("window", "window"), ("boxR", "box_R"),
                       ("ratio", "scale_ratio"), ("offset", "offset")]:
        v = getattr(args, flag, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "rgrid", None):
        kw["r_grid"] = args.rgrid
    if getattr(args, "R", None):
        kw["R_values"] = args.R
    if getattr(args, "regime", None):
        kw["regime"] = "all" if args.regime == "all" else None
    return DimensionConfig(**kw)


def _spectral_config(args) -> SpectralConfig:
    kw = {}
    if args.window is not None:
        kw["window"] = args.window
    if args.tmin is not None or args.tmax is not None:
        kw["t_regime_counting"] = (args.tmin, args.tmax)
    if args.counting_lo is not None:
        kw["counting_lo"] = args.counting_lo
    return SpectralConfig(**kw)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_dim(args) -> int:
    spec = load_spec(args.space)
    space = build_space(spec)
    config = _dim_config(args)
    rep = Reporter(args, spec, asdict(config))
    if args.sub == "box":
        est = box_dimension(space, config)
    elif args.sub == "asym":
        est = asymptotic_dimension(space, config)
    else:
        est = asymptotic_dimension_volume(space, config)
    rep.write_csv(f"dim-{args.sub}.csv", ["scale", "value", "log_scale", "log_value"],
                  est.series.rows(), primary=True)
    rep.write_csv(f"dim-{args.sub}-windows.csv", ["window_anchor", "slope"],
                  est.per_window_slopes)
    rep.write_json(f"dim-{args.sub}.json", est.to_dict())
    rep.flush()
    if not est.converged:
        raise Diagnostic(f"estimates over r_grid disagree by more than {config.convergence_tol}: "
                         f"{est.per_r}")
    return EXIT_OK


def cmd_spectral(args) -> int:
    spec = load_spec(args.space)
    config = _spectral_config(args)
    echo = {**asdict(config), "method": "lanczos" if args.lanczos else args.method,
            "probes": args.probes, "steps": args.steps}
    if args.sub == "heatvol":
        space = build_space(spec)
        rep = Reporter(args, spec, echo)
        t_grid = None
        if args.tmin is not None and args.tmax is not None:
            t_grid = dyadic_t(args.tmin, args.tmax)
        r = heat_volume_bound_check(space, t_grid, config=config)
        rep.write_csv("heatvol.csv", ["t", "ratio"], zip(r.t, r.ratio), primary=True)
        rep.write_json("heatvol.json", asdict(r))
        rep.flush()
        if r.band > 4:
            raise Diagnostic(f"heat/volume band {r.band:.3g} exceeds 4")
        return EXIT_OK
    spectra = _spectra(args, spec)
    rep = Reporter(args, spec, echo)
    top = max(spectra, key=lambda s: s.volume)
    if args.sub in ("theta", "counting"):
        ns = ns_numbers(spectra, config) if len(spectra) >= 3 else None
        b0 = max(ns.b0, 0.0) if ns else 0.0
        L = top.scale
        lo = args.tmin if args.tmin is not None else (
            config.counting_lo / L ** 2 if args.sub == "counting" else config.heat_lo / 4)
        hi = args.tmax if args.tmax is not None else (
            config.counting_hi if args.sub == "counting" else L ** 2 / config.heat_hi)
        t = dyadic_t(lo, hi, config.per_octave)
        if args.sub == "theta":
            rows = zip(t, heat_trace(top, t), heat_trace0(top, t, b0))
            rep.write_csv("theta.csv", ["t", "theta", "theta0"], rows, primary=True)
        else:
            N, N0 = counting(top, t)
            rep.write_csv("counting.csv", ["t", "N", "N0"], zip(t, N, N0), primary=True)
        rep.write_json(f"{args.sub}.json", {"b0": b0, "t_range": [lo, hi]}, primary=False)
        rep.flush()
        return EXIT_OK
    if args.sub == "ns":
        ns = ns_numbers(spectra, config)
        rep.write_json("ns.json", ns.to_dict())
        rep.flush()
        if ns.alpha0 is None and ns.alpha0_prime is None:
            raise Diagnostic("no Novikov-Shubin form has a usable regime")
        if not ns.ordering_ok(config.fit_tol):
            raise Diagnostic("ordering alpha0_lower <= alpha0_prime <= alpha0 violated")
        return EXIT_OK
    # verify-a0
    dim_cfg = _dim_config(args)
    rep.meta["config"] = {**echo, "dimension": asdict(dim_cfg)}
    r = verify_a0_eq_dinf(spec, dim_cfg, config, spectra=spectra)
    rep.write_json("verify-a0.json", r.to_dict())
    rep.flush()
    if r.difference > args.tol:
        raise Diagnostic(f"|alpha0 - d_inf| = {r.difference:.3g} exceeds {args.tol}")
    return EXIT_OK


def cmd_trace(args) -> int:
    spec = load_spec(args.space) if getattr(args, "space", None) else None
    echo = {k: v for k, v in sorted(vars(args).items())
            if k in ("mu", "muA", "muT", "lam", "alpha", "limit", "tol", "power", "method")}
    rep = Reporter(args, spec, echo)
    if args.sub == "duality":
        r = duality_check(_function(args.lam))
        rep.write_json("duality.json", asdict(r))
        rep.flush()
        return EXIT_OK
    if args.sub == "dixmier":
        mu_A, mu_T = _function(args.muA), _function(args.muT)
        lim = LimitProcedure(args.limit)
        ecc = eccentricity(mu_T, args.tol)
        if not ecc.is_eccentric:
            rep.write_json("dixmier.json", {"value": None, "eccentricity": ecc.to_dict()})
            rep.flush()
            raise Diagnostic(f"reference μ_T is not 0-eccentric "
                             f"(limit estimate {ecc.limit_estimate:.4g})")
        r = dixmier_trace(mu_A, mu_T, lim, tol=args.tol)
        rep.write_json("dixmier.json", {**asdict(r), "eccentricity": ecc.to_dict()})
        rep.flush()
        return EXIT_OK
    # mu / ecc: from an analytic tag, a CSV, or the spectrum of --space
    result = {}
    if spec is not None:
        spectra = _spectra(args, spec)
        top = max(spectra, key=lambda s: s.volume)
        mu, p, window = spectral_mu(top, _spectral_config(args), -args.power)
        result.update({"fit_exponent": p, "fit_window": list(window),
                       "spectral_dimension": spectral_dimension(mu)})
        alpha = args.alpha
        if alpha == "auto":
            ns = ns_numbers(spectra, _spectral_config(args))
            alpha = ns.alpha0 if ns.alpha0 is not None else ns.alpha0_prime
            result["alpha0"] = alpha
    elif args.lam:
        mu, alpha = rearrangement(_function(args.lam)), args.alpha
    elif args.mu:
        mu, alpha = _function(args.mu), args.alpha
    else:
        raise argparse.ArgumentTypeError("give --space, --mu or --lambda")
    if alpha not in (None, "auto"):
        mu = power_transform(mu, float(alpha))
        result["power"] = float(alpha)
    if args.sub == "mu":
        rep.write_text("mu.csv", mu.to_csv(), primary=True)
        if spec is None or mu.head is None:
            try:
                result["spectral_dimension"] = spectral_dimension(mu)
            except AsymdimError as exc:
                result["spectral_dimension_error"] = str(exc)
        rep.write_json("mu.json", result, primary=False)
        rep.flush()
        return EXIT_OK
    ecc = eccentricity(mu, args.tol)
    result.update(ecc.to_dict())
    rep.write_json("ecc.json", result)
    rep.flush()
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default="asymdim-out", help="report directory")
    p.add_argument("--cache", default=os.environ.get(CACHE_ENV, ".asymdim-cache"),
                   help=f"spectrum cache directory (default ${CACHE_ENV} or .asymdim-cache)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json",
                   help="which report is echoed on stdout")
    p.add_argument("--window", type=int, default=None)
    return p


def _spectral_flags(p):
    p.add_argument("--method", choices=("auto", "dense", "analytic-torus", "lanczos"),
                   default="auto")
    p.add_argument("--lanczos", action="store_true",
                   help="use stochastic Lanczos quadrature (needed above the dense budget)")
    p.add_argument("--probes", type=int, default=32)
    p.add_argument("--steps", type=int, default=80)
    p.add_argument("--tmin", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--counting-lo", dest="counting_lo", type=float, default=None,
                   help="counting regime starts at this / L^2")
    p.add_argument("--single", action="store_true",
                   help="use only the given space, not its torus exhaustion")


def _dim_flags(p):
    p.add_argument("--Rmin", type=float, default=None)
    p.add_argument("--Rmax", type=float, default=None)
    p.add_argument("--R", type=_R_values, default=None,
                   help="explicit radii: comma list or aM..aN (oscillating-end table)")
    p.add_argument("--rgrid", type=_floats, default=None)
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--boxR", type=float, default=None)
    p.add_argument("--ratio", type=float, default=None, help="ratio of consecutive box radii")
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--regime", choices=("upper-half", "all"), default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="asymdim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)

    dim = groups.add_parser("dim", help="box / asymptotic / volume dimension")
    dsub = dim.add_subparsers(dest="sub", required=True)
    for name in ("box", "asym", "volume"):
        p = dsub.add_parser(name, parents=[common])
        p.add_argument("--space", required=True, help="spec file or inline kind:k=v,...")
        _dim_flags(p)

    spec = groups.add_parser("spectral", help="heat trace, counting, Novikov-Shubin numbers")
    ssub = spec.add_subparsers(dest="sub", required=True)
    for name in ("theta", "counting", "ns", "verify-a0", "heatvol"):
        p = ssub.add_parser(name, parents=[common])
        p.add_argument("--space", required=True)
        _spectral_flags(p)
        if name == "verify-a0":
            _dim_flags(p)
            p.add_argument("--tol", type=float, default=0.2)

    trace = groups.add_parser("trace", help="rearrangements, eccentricity, singular traces")
    tsub = trace.add_subparsers(dest="sub", required=True)
    for name in ("mu", "ecc"):
        p = tsub.add_parser(name, parents=[common])
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--space")
        src.add_argument("--mu", help="pow:<e>, const:<c> or step-function CSV")
        src.add_argument("--lambda", dest="lam", help="distribution function to rearrange")
        p.add_argument("--power", type=float, default=0.5,
                       help="with --space: μ of L^(-power)")
        p.add_argument("--alpha", default=None,
                       help="raise μ to this power; 'auto' uses alpha0 of --space")
        p.add_argument("--tol", type=float, default=0.05)
        _spectral_flags(p)
    p = tsub.add_parser("dixmier", parents=[common])
    p.add_argument("--muA", required=True)
    p.add_argument("--muT", required=True)
    p.add_argument("--limit", choices=("log-cesaro", "last-window"), default="log-cesaro")
    p.add_argument("--tol", type=float, default=0.05)
    p = tsub.add_parser("duality", parents=[common])
    p.add_argument("--lambda", dest="lam", required=True)
    return parser


COMMANDS = {"dim": cmd_dim, "spectral": cmd_spectral, "trace": cmd_trace}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return COMMANDS[args.group](args)
    except Diagnostic as exc:
        print(f"asymdim: diagnostic: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    except (AsymdimError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"asymdim: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
