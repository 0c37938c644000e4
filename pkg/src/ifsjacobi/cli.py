"""Command-line front end.

Measure arguments accept a file (Jacobi or atoms format, text or JSON) or
``fixture:NAME``. Tolerances and windows may come from an INI file given by
``--config`` or the ``IFSJACOBI_CONFIG`` environment variable; explicit flags
win over both.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fixtures
from .analysis import capacity_report, difference_series, nevai_report
from .closure import closure
from .convolution import FixpointConfig, convolve, fixpoint
from .errors import DegenerateStep, IfsJacobiError, ParseError
from .inverse import delta_frontier, invert
from .jacobi import (
    DiscreteMeasure,
    JacobiMatrix,
    format_atoms,
    format_jacobi,
    jacobi_from_discrete,
    read_measure,
)
from .spectral import convolve_spectral, fixpoint_spectral, gauss_rule

CONFIG_ENV = "IFSJACOBI_CONFIG"
CONFIG_SECTION = "ifsjacobi"
DEFAULT_FIXTURE_SIZE = 4096

# keys recognised in the [ifsjacobi] section, with their types
CONFIG_KEYS = {
    "tolerance": float,
    "max_iterations": int,
    "tol_rel": float,
    "window_lo": int,
    "window_hi": int,
    "refinable_weights": str,
    "format": str,
}

log = logging.getLogger("ifsjacobi")


class UsageError(Exception):
    pass


def _f(v: float) -> str:
    return format(float(v), ".17g")


def load_config(path: Optional[str]) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise UsageError(f"cannot read config file {path}")
    if not cp.has_section(CONFIG_SECTION):
        return {}
    out = {}
    for key, raw in cp.items(CONFIG_SECTION):
        if key not in CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r} in {path}")
        try:
            out[key] = CONFIG_KEYS[key](raw)
        except ValueError:
            raise UsageError(f"bad value for {key!r} in {path}: {raw!r}") from None
    return out


def _pick(flag, cfg: dict, key: str, default=None):
    if flag is not None:
        return flag
    return cfg.get(key, default)


def _fixture_name(spec: str) -> Optional[str]:
    return spec[len("fixture:"):] if spec.startswith("fixture:") else None


def load_measure(spec: str, size: int, cfg: dict):
    """Measure named by ``spec``; fixtures with a Jacobi form are built at ``size``."""
    name = _fixture_name(spec)
    if name is None:
        try:
            return read_measure(spec)
        except OSError as exc:
            raise UsageError(f"cannot read {spec}: {exc.strerror}") from None
    try:
        fx = fixtures.get(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    if name == "refinable-1" and "refinable_weights" in cfg:
        w = [float(t) for t in cfg["refinable_weights"].split(",")]
        return fixtures.refinable_sigma(w)
    return fx.sigma(size)


def fixture_delta(spec: str) -> Optional[float]:
    name = _fixture_name(spec)
    if name is None or name not in fixtures.FIXTURES:
        return None
    return fixtures.FIXTURES[name].delta


def as_jacobi(m, size: int) -> JacobiMatrix:
    if isinstance(m, DiscreteMeasure):
        return jacobi_from_discrete(m, min(size, m.merged().count))
    return m


def _resolve_delta(args, spec: str) -> float:
    if args.delta is not None:
        return args.delta
    d = fixture_delta(spec)
    if d is None:
        raise UsageError("--delta is required for this input")
    return d


def _emit(text: str, out: Optional[str]):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _write_series(directory: Path, name: str, n, values):
    directory.mkdir(parents=True, exist_ok=True)
    rows = "".join(f"{int(i)} {_f(v)}\n" for i, v in zip(n, values))
    (directory / f"{name}.dat").write_text(rows, encoding="utf-8")


def _fmt(args, cfg) -> str:
    return _pick(args.format, cfg, "format", "text")


# -- subcommands -----------------------------------------------------------

def cmd_closure(args, cfg):
    sigma = load_measure(args.sigma, args.size, cfg)
    delta = _resolve_delta(args, args.sigma)
    J = closure(sigma, delta, args.size, check_normalization=args.check_normalization)
    _emit(format_jacobi(J, _fmt(args, cfg)), args.output)


def cmd_convolve(args, cfg):
    sigma = load_measure(args.sigma, args.size, cfg)
    eta = load_measure(args.eta, args.size, cfg)
    delta = _resolve_delta(args, args.sigma)
    if args.method == "spectral":
        J = convolve_spectral(sigma, eta, delta, args.size)
    else:
        J = convolve(sigma, eta, delta, args.size, check_normalization=args.check_normalization)
    _emit(format_jacobi(J, _fmt(args, cfg)), args.output)


def cmd_fixpoint(args, cfg):
    sigma = load_measure(args.sigma, args.size, cfg)
    delta = _resolve_delta(args, args.sigma)
    init = None
    if args.init is not None:
        init = as_jacobi(load_measure(args.init, args.size, cfg), args.size)
    fc = FixpointConfig(
        tolerance=_pick(args.tolerance, cfg, "tolerance"),
        max_iterations=_pick(args.max_iterations, cfg, "max_iterations", 200),
        strict=not args.allow_unconverged,
    )
    run = fixpoint_spectral if args.method == "spectral" else fixpoint
    J, report = run(sigma, delta, args.size, J_init=init, cfg=fc)
    _emit(format_jacobi(J, _fmt(args, cfg)), args.output)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    if args.plot_dir:
        m = np.arange(1, len(report.distances) + 1)
        _write_series(Path(args.plot_dir), "distances", m, report.distances)
    if not report.converged:
        log.warning("fixpoint: not converged after %d iterations", report.iterations_run)


def cmd_invert(args, cfg):
    mu = as_jacobi(load_measure(args.mu, args.size, cfg), args.size)
    res = invert(mu, args.delta, args.size)
    _emit(format_jacobi(res.sigma_jacobi, _fmt(args, cfg)), args.output)
    sys.stderr.write(
        f"feasible_size {res.feasible_size} requested_size {res.requested_size}"
        f"{' (terminated early)' if res.terminated_early else ''}\n"
    )


def cmd_frontier(args, cfg):
    sizes = sorted(set(args.sizes))
    mu = as_jacobi(load_measure(args.mu, max(sizes), cfg), max(sizes))
    tol = _pick(args.tol_rel, cfg, "tol_rel", 1e-3)
    fr = delta_frontier(mu, sizes, tol)
    _emit("".join(f"{n} {_f(d)}\n" for n, d in fr.entries), args.output)


def cmd_gauss(args, cfg):
    J = as_jacobi(load_measure(args.jacobi, args.order, cfg), args.order)
    rule = gauss_rule(J, args.order)
    _emit(format_atoms(DiscreteMeasure.normalized(rule.nodes, rule.weights), _fmt(args, cfg)),
          args.output)


def cmd_analyze(args, cfg):
    size = args.size or DEFAULT_FIXTURE_SIZE
    J = as_jacobi(load_measure(args.jacobi, size, cfg), size)
    if args.size:
        J = J.truncate(args.size)
    lo = _pick(args.window[0] if args.window else None, cfg, "window_lo")
    hi = _pick(args.window[1] if args.window else None, cfg, "window_hi")
    window = None
    if lo is not None or hi is not None:
        window = (lo if lo is not None else max(1, J.size // 10), hi if hi is not None else J.size)
    nev = nevai_report(J, args.a_inf, args.b_inf, window)
    sigma_info = None
    if args.sigma is not None:
        if args.delta is None:
            raise UsageError("--sigma needs --delta for the capacity bracket")
        sigma_info = (as_jacobi(load_measure(args.sigma, J.size, cfg), J.size), args.delta)
    cap = capacity_report(J, sigma_info)
    report = {"size": J.size, "nevai": nev.to_dict(), "capacity": cap.to_dict()}
    ref = None
    if args.reference is not None:
        ref = as_jacobi(load_measure(args.reference, J.size, cfg), J.size)
        da, db = difference_series(J, ref)
        report["reference"] = {"max_a_difference": float(da.max()), "max_b_difference": float(db[1:].max(initial=0.0))}
    _emit(json.dumps(report, indent=2, allow_nan=True) + "\n", args.output)
    if args.plot_dir:
        d = Path(args.plot_dir)
        _write_series(d, "a_deviation", nev.n, nev.a_deviations)
        _write_series(d, "b_deviation", nev.n, nev.b_deviations)
        _write_series(d, "deviation", nev.n, nev.deviations)
        _write_series(d, "partial_sums", nev.n, nev.partial_sums)
        _write_series(d, "capacity", cap.n, cap.estimates)
        if ref is not None:
            n = np.arange(1, da.size)
            _write_series(d, "a_difference", n, da[1:])
            _write_series(d, "b_difference", n, db[1:])


def cmd_fixtures(args, cfg):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = []
    for name, fx in fixtures.FIXTURES.items():
        m = load_measure(f"fixture:{name}", args.size, cfg)
        if isinstance(m, DiscreteMeasure):
            fname = f"{name}.atoms"
            text = format_atoms(m, _fmt(args, cfg))
        else:
            fname = f"{name}.jac"
            text = format_jacobi(m, _fmt(args, cfg))
        (out / fname).write_text(text, encoding="utf-8")
        manifest.append({"name": name, "file": fname, "delta": fx.delta, "description": fx.description})
    (out / "fixtures.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


# -- parser ----------------------------------------------------------------

def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _delta(s: str) -> float:
    v = float(s)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError("delta must lie in [0, 1)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifsjacobi", description=__doc__.splitlines()[0])
    p.add_argument("--config", help=f"INI config file (default: ${CONFIG_ENV})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, size=True):
        if size:
            sp.add_argument("--size", "-n", type=_positive_int, required=True, help="truncation size")
        sp.add_argument("-o", "--output", help="output file (default stdout)")
        sp.add_argument("--format", choices=["text", "json"])

    sp = sub.add_parser("closure", help="Jacobi matrix of the invariant measure in one pass")
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--delta", type=_delta)
    sp.add_argument("--check-normalization", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_closure)

    sp = sub.add_parser("convolve", help="one IFS convolution of eta with fixed points sigma")
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--eta", required=True)
    sp.add_argument("--delta", type=_delta)
    sp.add_argument("--method", choices=["direct", "spectral"], default="direct")
    sp.add_argument("--check-normalization", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_convolve)

    sp = sub.add_parser("fixpoint", help="iterate the IFS convolution to its fixed point")
    sp.add_argument("--sigma", required=True)
    sp.add_argument("--delta", type=_delta)
    sp.add_argument("--method", choices=["direct", "spectral"], default="direct")
    sp.add_argument("--init", help="starting measure (default Lebesgue)")
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--max-iterations", type=_positive_int)
    sp.add_argument("--allow-unconverged", action="store_true",
                    help="write the last iterate instead of failing at the iteration cap")
    sp.add_argument("--report", help="JSON file for the distance sequence")
    sp.add_argument("--plot-dir", help="directory for the (m, distance) series")
    common(sp)
    sp.set_defaults(func=cmd_fixpoint)

    sp = sub.add_parser("invert", help="recover sigma from a target Jacobi matrix")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--delta", type=_delta, required=True)
    common(sp)
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("frontier", help="largest feasible delta per truncation size")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--sizes", type=_positive_int, nargs="+", required=True)
    sp.add_argument("--tol-rel", type=float)
    common(sp, size=False)
    sp.set_defaults(func=cmd_frontier)

    sp = sub.add_parser("gauss", help="Gauss rule of a Jacobi matrix, as an atoms file")
    sp.add_argument("--jacobi", required=True)
    sp.add_argument("--order", type=_positive_int, required=True)
    common(sp, size=False)
    sp.set_defaults(func=cmd_gauss)

    sp = sub.add_parser("analyze", help="continuity and capacity indicators (JSON)")
    sp.add_argument("--jacobi", required=True)
    sp.add_argument("--size", "-n", type=_positive_int,
                    help="truncate the input first (fixtures: build size, default 4096)")
    sp.add_argument("--a-inf", type=float)
    sp.add_argument("--b-inf", type=float)
    sp.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))
    sp.add_argument("--sigma", help="fixed-point law, for the capacity bracket")
    sp.add_argument("--delta", type=_delta)
    sp.add_argument("--reference", help="Jacobi matrix to difference against")
    sp.add_argument("--plot-dir", help="directory for two-column (n, value) series")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("fixtures", help="write every named fixture to a directory")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--size", "-n", type=_positive_int, default=DEFAULT_FIXTURE_SIZE,
                    help="size of the fixtures given by Jacobi matrices")
    sp.add_argument("--format", choices=["text", "json"])
    sp.set_defaults(func=cmd_fixtures)
    return p


def _describe(exc: IfsJacobiError) -> str:
    kind = type(exc).__name__
    msg = str(exc)
    if isinstance(exc, DegenerateStep) and exc.step is not None and "step" not in msg:
        msg += f" (step n={exc.step})"
    return f"{kind}: {msg}"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.func(args, cfg)
    except (UsageError, ParseError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ifsjacobi: error: {exc}\n")
        return 2
    except IfsJacobiError as exc:
        sys.stderr.write(f"ifsjacobi: {_describe(exc)}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"ifsjacobi: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
