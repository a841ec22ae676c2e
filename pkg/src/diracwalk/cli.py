"""Command-line driver.

Every subcommand takes its options as flags or from ``--config FILE.json``
(keys are the long option names with ``-`` replaced by ``_``; flags given on
the command line win). Artifacts go to ``--out-dir``.

Exit codes: 0 success, 1 usage error, 2 numerical-consistency failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dispersion as disp
from . import experiments as exp
from . import output
from .gauge import ElectricField, UniformElectricField, load_field
from .walks import WalkKind, build_walk

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

TABLE_MASSES = ("0", "pi/3", "pi/2", "2pi/3", "pi", "4pi/3")
TABLE_KINDS = (WalkKind.THREE_STEP_EQUILATERAL, WalkKind.SIX_STEP_EQUILATERAL,
               WalkKind.THREE_STEP_ISOSCELES)


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# --------------------------------------------------------------------------- value parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "sqrt3": math.sqrt(3.0)}


def parse_number(text) -> float:
    """Float or arithmetic expression in ``pi`` and ``sqrt3`` (``2pi/3`` is accepted)."""
    if isinstance(text, (int, float)):
        return float(text)
    src = re.sub(r"(\d|\))\s*(pi|sqrt3|\()", r"\1*\2", str(text).strip().replace("π", "pi"))

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError
    try:
        return float(ev(ast.parse(src, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [parse_number(v) for v in text]
    return [parse_number(v) for v in str(text).split(",") if v.strip()]


def parse_pair(text, kind=float):
    vals = parse_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    return tuple(kind(v) for v in vals)


def parse_complex_pair(text):
    if isinstance(text, (list, tuple)):
        parts = [str(v) for v in text]
    else:
        parts = str(text).split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated complex values, got {text!r}")
    try:
        return tuple(complex(p.strip().replace("i", "j")) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex pair: {text!r}") from None


def parse_kind(text) -> WalkKind:
    try:
        return WalkKind(text)
    except ValueError:
        names = ", ".join(k.value for k in WalkKind)
        raise argparse.ArgumentTypeError(f"unknown walk {text!r}; expected one of {names}") from None


# --------------------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# (dest, default, converter) per subcommand; argparse defaults are None so that
# config-file values can be told apart from explicit flags.
DEFAULTS = {
    "dispersion": {"walk": ("six-step-equilateral", parse_kind), "mass": ("0", parse_number),
                   "resolution": (256, int), "nx": (None, int), "ny": (None, int),
                   "output": ("dispersion.csv", str)},
    "zitter": {"walk": ("three-step-equilateral", parse_kind), "masses": (",".join(TABLE_MASSES), parse_list),
               "grid": (512, int), "output": ("zitter.csv", str)},
    "evolve": {"walk": ("three-step-equilateral", parse_kind), "mass": ("0", parse_number),
               "nx": (1024, int), "ny": (64, int), "steps": (2000, int),
               "initial": ("localized-symmetric", str), "spinor": ("0.70710678118654752,0.70710678118654752",
                                                                   parse_complex_pair),
               "site": (None, lambda v: parse_pair(v, int)), "k": ("0,0", parse_pair), "width": (4.0, float),
               "Ex": (None, parse_number), "Ey": (None, parse_number), "field_form": ("momentum-shift", str),
               "field_file": (None, str), "stride": (1, int), "seed": (0, int), "prefix": ("density", str)},
    "gauge-check": {"seed": (0, int), "seeds": (1, int), "n": (12, int), "steps": (10, int),
                    "mass": (None, parse_number), "corrupt": (False, bool), "zero_phase": (False, bool),
                    "tolerance": (1e-12, float)},
    "cone-check": {"walk": ("all", str), "radii": ("0.2,0.1,0.05", parse_list), "directions": (32, int),
                   "bound": (0.05, float), "output": ("cone.csv", str)},
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diracwalk", description="Dirac quantum walks on triangular and honeycomb lattices.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    def common(sp):
        sp.add_argument("--config", help="JSON file with option values")
        sp.add_argument("--out-dir", default=None, help="directory for artifacts (default: .)")
        return sp

    kinds = ", ".join(k.value for k in WalkKind)

    d = common(sub.add_parser("dispersion", help="scan omega(k) over the Brillouin zone"))
    d.add_argument("--walk", help=kinds)
    d.add_argument("--mass", help="mass, e.g. 0.5 or pi/3")
    d.add_argument("--resolution", help="grid points per axis")
    d.add_argument("--nx")
    d.add_argument("--ny")
    d.add_argument("--output", help="file name inside --out-dir")

    z = common(sub.add_parser("zitter", help="minimal Zitterbewegung frequencies"))
    z.add_argument("--walk", help="a triangular walk")
    z.add_argument("--masses", help="comma-separated masses")
    z.add_argument("--grid", help="coarse scan points per axis")
    z.add_argument("--output")

    e = common(sub.add_parser("evolve", help="evolve a packet and export x-projected densities"))
    e.add_argument("--walk")
    e.add_argument("--mass")
    e.add_argument("--nx")
    e.add_argument("--ny")
    e.add_argument("--steps")
    e.add_argument("--initial", help="localized-symmetric, localized or gaussian")
    e.add_argument("--spinor", help="two complex amplitudes, e.g. 1,1j")
    e.add_argument("--site", help="a,b start site (default: lattice centre)")
    e.add_argument("--k", help="kx,ky carrier of a gaussian packet")
    e.add_argument("--width", help="gaussian width in lattice units")
    e.add_argument("--Ex", help="electric field x component")
    e.add_argument("--Ey", help="electric field y component")
    e.add_argument("--field-form", help="momentum-shift, literal-ramp or literal-static")
    e.add_argument("--field-file", help="field JSON document (overrides --Ex/--Ey)")
    e.add_argument("--stride", help="write every n-th time step to the CSV")
    e.add_argument("--seed")
    e.add_argument("--prefix", help="artifact name prefix")

    g = common(sub.add_parser("gauge-check", help="randomized gauge-invariance check"))
    g.add_argument("--seed")
    g.add_argument("--seeds", help="number of consecutive seeds to run")
    g.add_argument("--n", help="lattice side")
    g.add_argument("--steps")
    g.add_argument("--mass")
    g.add_argument("--corrupt", action="store_const", const=True, help="flip the sign of the first xi correction")
    g.add_argument("--zero-phase", action="store_const", const=True)
    g.add_argument("--tolerance")

    c = common(sub.add_parser("cone-check", help="isotropy of the massless cone"))
    c.add_argument("--walk", help=f"one of {kinds} or 'all'")
    c.add_argument("--radii")
    c.add_argument("--directions")
    c.add_argument("--bound", help="anisotropy bound at the smallest radius")
    c.add_argument("--output")
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags, config file and defaults, converting every value."""
    table = DEFAULTS[args.command]
    config = {}
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(config) - set(table) - {"out_dir"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = argparse.Namespace(command=args.command)
    for key, (default, conv) in table.items():
        value = getattr(args, key, None)
        if value is None:
            value = config.get(key, default)
        if value is not None and conv is not bool:
            try:
                value = conv(value)
            except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                raise UsageError(f"--{key.replace('_', '-')}: {exc}") from None
        setattr(out, key, bool(value) if conv is bool else value)
    out.out_dir = Path(args.out_dir if args.out_dir is not None else config.get("out_dir", "."))
    return out


def _out_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


# --------------------------------------------------------------------------- commands


def cmd_dispersion(o) -> int:
    nx = o.nx or o.resolution
    ny = o.ny or o.resolution
    if nx < 8 or ny < 8:
        raise UsageError("resolution must be at least 8")
    walk = build_walk(o.walk, o.mass)
    result = disp.scan_bz(walk, nx, ny)
    path = _out_dir(o.out_dir) / o.output
    output.write_dispersion_csv(path, result)
    om = np.abs(result.omega_minus)
    j, i = np.unravel_index(np.argmin(om), om.shape)
    print(f"{o.walk.value} m={o.mass:.6g}: {nx}x{ny} grid, min |omega| = {om[j, i]:.6g} "
          f"at ({result.kx[i]:.6g}, {result.ky[j]:.6g}) -> {path}")
    return EXIT_OK


def cmd_zitter(o) -> int:
    if o.walk not in TABLE_KINDS:
        raise UsageError(f"no minimal-frequency table for the {o.walk.value} walk; "
                         "use diracwalk.dispersion.min_gap directly")
    reports = []
    for m in o.masses:
        rep = disp.min_gap(disp.zitter_walk(o.walk, m), n=o.grid)
        reports.append((m, rep))
        pts = " ".join(f"({p.kx:.6g}, {p.ky:.6g})" for p in rep.minimizers)
        lines = " ".join(f"({f:.6g}, ky)" if a == "kx" else f"(kx, {f:.6g})" for a, f in rep.degenerate_lines)
        print(f"m={m:.6g}  omega_min={rep.omega_min:.6f}  gap={rep.gap:.6f}  {pts} {lines}".rstrip())
    path = _out_dir(o.out_dir) / o.output
    output.write_zitter_csv(path, reports)
    print(f"-> {path}")
    return EXIT_OK


def cmd_evolve(o) -> int:
    field = None
    gauge = None
    if o.field_file:
        if o.walk is not WalkKind.THREE_STEP_EQUILATERAL:
            raise UsageError("electric fields are only available for the three-step-equilateral walk")
        try:
            gauge = load_field(o.field_file)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad field file: {exc}") from None
        if isinstance(gauge, UniformElectricField):
            field = ElectricField(gauge.Ex, gauge.Ey)
            o.field_form = gauge.form
            gauge = None
    elif o.Ex is not None or o.Ey is not None:
        if o.walk is not WalkKind.THREE_STEP_EQUILATERAL:
            raise UsageError("electric fields are only available for the three-step-equilateral walk")
        field = ElectricField(o.Ex or 0.0, o.Ey or 0.0)
    try:
        initial = exp.InitialCondition(o.initial, spinor=o.spinor, site=o.site, k=o.k, width=o.width)
        config = exp.ExperimentConfig(kind=o.walk, mass=o.mass, n_x=o.nx, n_y=o.ny, steps=o.steps,
                                      initial=initial, field=field, field_form=o.field_form, seed=o.seed)
        lattice = config.lattice
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if o.stride < 1:
        raise UsageError("--stride must be positive")
    if config.wrap_risk():
        print(f"warning: {len(config.walk().substeps) * o.steps} sub-steps may wrap a packet around "
              f"the {o.nx}x{o.ny} lattice", file=sys.stderr)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", exp.WrapRiskWarning)
        result = exp.run_experiment(config, gauge=gauge)
    out = _out_dir(o.out_dir)
    x = np.arange(2 * o.nx) * lattice.epsilon / 2
    output.write_density_csv(out / f"{o.prefix}.csv", result.times, x, result.projection, stride=o.stride)
    output.write_pgm(out / f"{o.prefix}.pgm", exp.bin_columns(result.projection))
    drift = float(np.max(np.abs(result.norms - result.norms[0])) / result.norms[0])
    print(f"{o.walk.value}: {o.steps} steps on {o.nx}x{o.ny}, max norm drift {drift:.3g}")
    if field is not None and o.steps >= 12:
        report = exp.bloch_report(result)
        output.write_json(out / "bloch.json", report.to_dict())
        if report.detected:
            print(f"Bloch period {report.period_steps:.4f} steps (autocorrelation {report.peak:.3f}), "
                  f"relative error to nearest prediction {report.relative_error:.3g}")
        else:
            print(f"no period detected (best autocorrelation {report.peak:.3f})")
    if drift > 1e-10:
        raise NumericalFailure(f"norm drift {drift:.3g} exceeds 1e-10")
    return EXIT_OK


def cmd_gauge_check(o) -> int:
    rows = []
    ok = True
    for seed in range(o.seed, o.seed + o.seeds):
        r = exp.gauge_check(seed, o.n, o.steps, mass=o.mass, corrupt=o.corrupt,
                            zero_phase=o.zero_phase, tolerance=o.tolerance)
        ok &= r.passed
        rows.append({"seed": seed, "deviation": r.deviation, "passed": r.passed})
        print(f"seed {seed}: max deviation {r.deviation:.3e} -> {'pass' if r.passed else 'FAIL'}")
    output.write_json(_out_dir(o.out_dir) / "gauge_check.json",
                      {"n": o.n, "steps": o.steps, "tolerance": o.tolerance, "corrupt": o.corrupt,
                       "zero_phase": o.zero_phase, "results": rows})
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_cone_check(o) -> int:
    kinds = list(WalkKind) if o.walk == "all" else [parse_kind(o.walk)]
    radii = sorted(o.radii, reverse=True)
    rows, summary, ok = [], {}, True
    for kind in kinds:
        walk = build_walk(kind, 0.0)
        anis = []
        for r in radii:
            try:
                a, angles, slopes = disp.cone_slope_check(walk, r, o.directions)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            anis.append(a)
            rows.extend((kind.value, r, th, s) for th, s in zip(angles, slopes))
        monotone = all(b < a for a, b in zip(anis, anis[1:]))
        passed = anis[-1] < o.bound and monotone
        ok &= passed
        summary[kind.value] = {"radii": radii, "anisotropy": anis, "monotone": monotone, "passed": passed}
        listing = ", ".join(f"r={r:g}: {a:.3e}" for r, a in zip(radii, anis))
        print(f"{kind.value}: {listing}; monotone={monotone} -> {'pass' if passed else 'FAIL'}")
    out = _out_dir(o.out_dir)
    output.write_csv(out / o.output, ("walk", "radius", "angle", "slope"), rows)
    output.write_json(out / "cone.json", summary)
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {"dispersion": cmd_dispersion, "zitter": cmd_zitter, "evolve": cmd_evolve,
            "gauge-check": cmd_gauge_check, "cone-check": cmd_cone_check}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, disp.NonUnitaryError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
