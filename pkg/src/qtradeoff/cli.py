"""Command-line front end.

Subcommands write a complete JSON or CSV document to ``--out`` (standard
output by default).  Output is assembled in memory first, so a failing run
never leaves a partial file behind.  Exit codes: 0 success, 1 usage or parse
error, 2 domain or model error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .closed_forms import (
    FamilyParams,
    f_zeta,
    family_fisher_quantities,
    root_u0,
    zeta as zeta_of,
)
from .errors import TradeoffError
from .linalg import decode_matrix
from .qfi import Classification, UnitaryModel, classify, rld_hyperbola
from .sampler import SampleConfig, run_survey

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class CurveRequest:
    grid_min: float
    grid_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.grid_min) and math.isfinite(self.grid_max)):
            raise UsageError("grid bounds must be finite")
        if not self.grid_min < self.grid_max:
            raise UsageError(f"grid-min {self.grid_min!r} must be below grid-max {self.grid_max!r}")
        if self.n_points < 2:
            raise UsageError(f"points must be at least 2, got {self.n_points}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.n_points)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _vector(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a,b,c but got {text!r}")
    if len(vals) != 3 or not all(math.isfinite(t) for t in vals):
        raise argparse.ArgumentTypeError(f"expected three finite numbers, got {text!r}")
    return vals


def _pair(text: str) -> tuple[float, float]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}")
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}")
    return vals


def _finite(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return val


def _meta_line(cmd: str, **meta) -> str:
    meta["version"] = __version__
    return f"# qtradeoff {cmd} {json.dumps(meta, sort_keys=True)}\n"


def _load_model(args) -> UnitaryModel:
    if args.model is not None:
        try:
            with open(args.model) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read {args.model}: {exc}")
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.model} is not valid JSON: {exc}")
        try:
            mats = [decode_matrix(obj[k]) for k in ("rho0", "X", "Y")]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed model file: {exc}")
        return UnitaryModel.from_arrays(*mats)
    if args.u is None or args.x is None or args.y is None:
        raise UsageError("give --model FILE, or --u with --x and --y")
    return FamilyParams(args.u, args.x, args.y).to_model()


def cmd_analyze(args) -> str:
    report = classify(_load_model(args))
    return report.to_json(indent=2) + "\n"


def _bounds_grid(args, fp) -> CurveRequest:
    r11 = float(fp.J_R_inv[0, 0].real)
    s11 = float(fp.J_S_inv[0, 0])
    gap = s11 - r11
    base = gap if gap > 1e-9 * max(1.0, abs(s11)) else 0.5 * max(abs(s11), 1e-12)
    lo = args.grid_min if args.grid_min is not None else r11 + 0.05 * base
    hi = args.grid_max if args.grid_max is not None else s11 + 4.0 * base
    return CurveRequest(lo, hi, args.points if args.points is not None else 200)


def cmd_bounds(args) -> str:
    report = classify(_load_model(args))
    fp = report.fisher
    req = _bounds_grid(args, fp)
    grid = req.grid()
    with_rld = report.classification in (Classification.INTERSECTING, Classification.RLD_DOMINANT)
    if with_rld:
        r11 = fp.J_R_inv[0, 0].real
        if grid[0] <= r11:
            raise DomainFailure(f"grid-min must exceed J_R^11 = {_fmt(r11)} for the RLD curve")
        v22 = rld_hyperbola(fp, grid)
    else:
        print(
            f"note: NoIntersection ({report.classification.value}); emitting SLD lines only",
            file=sys.stderr,
        )
    s11 = _fmt(fp.J_S_inv[0, 0])
    s22 = _fmt(fp.J_S_inv[1, 1])
    buf = io.StringIO()
    buf.write(
        _meta_line(
            "bounds",
            classification=report.classification.value,
            J_R_inv_11=float(fp.J_R_inv[0, 0].real),
            J_R_inv_22=float(fp.J_R_inv[1, 1].real),
            im_J_R_inv_12=fp.im12,
        )
    )
    buf.write("V11,V22_rld,V22_sld_line,V11_sld_line\n")
    for k, v11 in enumerate(grid):
        rld = _fmt(v22[k]) if with_rld else ""
        buf.write(f"{_fmt(v11)},{rld},{s22},{s11}\n")
    buf.write(f"# intersections {json.dumps([list(p) for p in report.intersections])}\n")
    return buf.getvalue()


def cmd_family(args) -> str:
    if args.u is None:
        raise UsageError("--u is required")
    have_xy = args.x is not None and args.y is not None
    if have_xy == (args.zeta is not None):
        raise UsageError("give either --zeta or both --x and --y")
    out = {"u": args.u}
    if have_xy:
        p = FamilyParams(args.u, args.x, args.y)
        z = p.zeta
        cap, d1, d2 = family_fisher_quantities(p)
        out.update(x=list(args.x), y=list(args.y))
    else:
        z = args.zeta
        cap = d1 = d2 = None
    F = f_zeta(z, args.u)
    out.update(zeta=z, F=F, Delta=cap, Delta1=d1, Delta2=d2, u0=root_u0(z))
    return json.dumps(out, indent=2) + "\n"


def cmd_root_curve(args) -> str:
    req = CurveRequest(
        args.grid_min if args.grid_min is not None else 1e-3,
        args.grid_max if args.grid_max is not None else 1.0 / 3.0,
        args.points if args.points is not None else 100,
    )
    if not (0 < req.grid_min and req.grid_max <= 1.0 / 3.0):
        raise DomainFailure("zeta grid must lie within (0, 1/3]")
    zs = req.grid()
    u0 = np.array([root_u0(z) for z in zs])
    resid = max(abs(f_zeta(z, u)) for z, u in zip(zs, u0))
    if resid >= 1e-10:
        raise DomainFailure(f"root residual {resid:.3g} exceeds 1e-10")
    if np.any(np.diff(u0) < 0):
        raise DomainFailure("u0(zeta) is not monotone nondecreasing on this grid")
    buf = io.StringIO()
    buf.write(_meta_line("root-curve", grid_min=req.grid_min, grid_max=req.grid_max, points=req.n_points))
    buf.write("zeta,u0\n")
    for z, u in zip(zs, u0):
        buf.write(f"{_fmt(z)},{_fmt(u)}\n")
    return buf.getvalue()


def cmd_strength_curve(args) -> str:
    if args.x is None or args.y is None:
        raise UsageError("--x and --y are required")
    req = CurveRequest(
        args.grid_min if args.grid_min is not None else 1e-3,
        args.grid_max if args.grid_max is not None else 0.33,
        args.points if args.points is not None else 200,
    )
    if not (0 < req.grid_min and req.grid_max < 1.0 / 3.0):
        raise DomainFailure("u grid must lie within (0, 1/3)")
    buf = io.StringIO()
    z = zeta_of(args.x, args.y)
    buf.write(
        _meta_line("strength-curve", x=list(args.x), y=list(args.y), zeta=z, u0=root_u0(z) if z > 0 else None)
    )
    buf.write("u,Delta1,Delta2\n")
    for u in req.grid():
        _, d1, d2 = family_fisher_quantities(FamilyParams(float(u), args.x, args.y))
        buf.write(f"{_fmt(u)},{_fmt(d1)},{_fmt(d2)}\n")
    return buf.getvalue()


def cmd_sample(args) -> str:
    if args.n < 1:
        raise UsageError(f"--n must be positive, got {args.n}")
    try:
        cfg = SampleConfig(
            n_samples=args.n,
            seed=args.seed,
            u_range=args.u_max_range,
            x=args.x or (1.0, 2.0, 3.0),
            y=args.y or (1.5, 5.0, 1.0),
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    buf = io.StringIO()
    summary = run_survey(cfg, out=buf, version=__version__)
    summary_text = json.dumps(summary.to_dict(), indent=2) + "\n"
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary_text)
    else:
        sys.stderr.write(summary_text)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtradeoff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qtradeoff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, model=False, family=False, grid=False):
        p.add_argument("--out", help="output file (default: standard output)")
        if model:
            p.add_argument("--model", help="model JSON file with rho0, X, Y")
        if family:
            p.add_argument("--u", type=_finite)
            p.add_argument("--x", type=_vector, help="a,b,c")
            p.add_argument("--y", type=_vector, help="a,b,c")
        if grid:
            p.add_argument("--grid-min", type=_finite)
            p.add_argument("--grid-max", type=_finite)
            p.add_argument("--points", type=int)

    p = sub.add_parser("analyze", help="trade-off report for one model")
    common(p, model=True, family=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bounds", help="RLD hyperbola and SLD lines as CSV")
    common(p, model=True, family=True, grid=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("family", help="closed-form quantities of the single-u family")
    common(p, family=True)
    p.add_argument("--zeta", type=_finite)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("root-curve", help="u0 as a function of zeta")
    common(p, grid=True)
    p.set_defaults(func=cmd_root_curve)

    p = sub.add_parser("strength-curve", help="Delta1 and Delta2 as functions of u")
    common(p, family=True, grid=True)
    p.set_defaults(func=cmd_strength_curve)

    p = sub.add_parser("sample", help="Monte Carlo survey of random reference states")
    common(p, family=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--u-max-range", type=_pair, default=(0.0, 1.0 / 3.0), help="lo,hi for each u_k")
    p.add_argument("--summary", help="summary JSON file (default: standard error)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"qtradeoff {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainFailure, TradeoffError, ValueError) as exc:
        print(f"qtradeoff {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
