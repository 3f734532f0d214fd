"""Command-line interface.

    slitcap compute --a1 RE,IM --a2 RE,IM --a3 RE,IM --a4 RE,IM
                    [--rel-tol X] [--abs-tol X] [--format text|json|csv]
                    [--out PATH] [--no-trace]
    slitcap sweep   --a3 RE,IM --a4 RE,IM --line PX,PY,DX,DY --length L
                    --from LO --to HI --steps N [--workers W] [...]
    slitcap tables  [--rel-tol X] [--abs-tol X]
    slitcap selftest

Exit codes: 0 success, 2 geometry rejection, 3 solver failure, 4 tolerance
failure in tables/selftest.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import reference
from .elliptic import lattice_from_periods, sigma, wp, wp_prime, zeta_w
from .errors import DegenerateGeometry, OutOfRange, SlitcapError
from .geometry import SlitConfig
from .pipeline import ComputeReport, SweepResult, solve, sweep

_EXIT_GEOMETRY = 2
_EXIT_SOLVER = 3
_EXIT_TOLERANCE = 4

_TABLE_CAP_TOL = 5e-5
_TABLE_MOD_TOL = 1e-4


def _parse_complex(text: str) -> complex:
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected 're,im' decimals, got {text!r}"
        ) from exc


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_json(rep: ComputeReport) -> str:
    payload = {
        "module": rep.module,
        "capacity": rep.capacity,
        "accessory": rep.accessory(),
        "defects": {"sum": rep.sum_defect_max, "residue": rep.residue_defect_max},
        "endpoint_errors": list(rep.endpoint_errors) if rep.endpoint_errors else None,
        "runtime_ms": rep.runtime_ms,
    }
    return json.dumps(payload, indent=2) + "\n"


def _report_text(rep: ComputeReport) -> str:
    lines = [
        f"case:            {rep.case_tag.value}",
        f"module  m:       {rep.module:.9f}",
        f"capacity 1/m:    {rep.capacity:.9f}",
        "accessory:       " + "  ".join(f"{k}={v:.9f}" for k, v in rep.accessory().items()),
        f"defects:         sum={rep.sum_defect_max:.3e}  residue={rep.residue_defect_max:.3e}",
    ]
    if rep.endpoint_errors is not None:
        lines.append("endpoint errors: " + "  ".join(f"{e:.3e}" for e in rep.endpoint_errors))
        lines.append(f"line deviation:  {rep.max_line_deviation:.3e}")
    lines.append(f"runtime:         {rep.runtime_ms:.1f} ms")
    return "\n".join(lines) + "\n"


_CSV_HEADER = "a,m,cap,defect_sum,defect_residue\n"


def _report_csv(rep: ComputeReport) -> str:
    row = ",".join(["", _fmt9(rep.module), _fmt9(rep.capacity),
                    _fmt9(rep.sum_defect_max), _fmt9(rep.residue_defect_max)])
    return _CSV_HEADER + row + "\n"


def _sweep_csv(res: SweepResult) -> str:
    out = [_CSV_HEADER]
    for p in res.points:
        if p.m is None:
            out.append(f"{_fmt9(p.a)},,,,\n")
        else:
            out.append(",".join([_fmt9(p.a), _fmt9(p.m), _fmt9(p.cap),
                                 _fmt9(p.sum_defect), _fmt9(p.residue_defect)]) + "\n")
    return "".join(out)


def _cmd_compute(args: argparse.Namespace) -> int:
    cfg = SlitConfig(args.a1, args.a2, args.a3, args.a4)
    rep = solve(cfg, rel_tol=args.rel_tol, abs_tol=args.abs_tol, trace=not args.no_trace)
    if args.format == "json":
        _emit(_report_json(rep), args.out)
    elif args.format == "csv":
        _emit(_report_csv(rep), args.out)
    else:
        _emit(_report_text(rep), args.out)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    px, py, dx, dy = args.line
    res = sweep(a3=args.a3, a4=args.a4,
                line_point=complex(px, py), line_dir=complex(dx, dy),
                length=args.length, lo=args.lo, hi=args.hi, steps=args.steps,
                rel_tol=args.rel_tol, abs_tol=args.abs_tol, workers=args.workers)
    _emit(_sweep_csv(res), args.out)
    summary = {
        "minima": res.minima,
        "maxima": res.maxima,
        "slope_indicator": {_fmt9(p.a): p.slope for p in res.points},
        "failures": {_fmt9(p.a): p.error for p in res.points if p.error},
    }
    sys.stderr.write(json.dumps(summary, indent=2) + "\n")
    return 0


def _cmd_tables(args: argparse.Namespace) -> int:
    fails = 0
    print("capacity table (tolerance 5e-5):")
    print(f"{'row':>3} {'computed':>13} {'reference':>13} {'delta':>10}")
    for i, (a1, a2, a3, a4, cap_ref) in enumerate(reference.CAPACITY_CASES, 1):
        rep = solve(SlitConfig(a1, a2, a3, a4), rel_tol=args.rel_tol,
                    abs_tol=args.abs_tol, trace=False)
        delta = abs(rep.capacity - cap_ref)
        flag = "" if delta <= _TABLE_CAP_TOL else "  FAIL"
        fails += delta > _TABLE_CAP_TOL
        print(f"{i:>3} {rep.capacity:>13.8f} {cap_ref:>13.8f} {delta:>10.2e}{flag}")
    print("\nslide-family moduli (tolerance 1e-4 on m, 2e-4 on cap):")
    print(f"{'a':>3} {'m':>10} {'m ref':>10} {'delta':>10} {'cap':>10} {'cap ref':>10}")
    for a, (m_ref, cap_ref) in reference.SLIDE_MODULES.items():
        rep = solve(reference.slide_config(a), rel_tol=args.rel_tol,
                    abs_tol=args.abs_tol, trace=False)
        dm = abs(rep.module - m_ref)
        dc = abs(rep.capacity - cap_ref)
        bad = dm > _TABLE_MOD_TOL or dc > 2e-4
        fails += bad
        print(f"{a:>3} {rep.module:>10.5f} {m_ref:>10.5f} {dm:>10.2e} "
              f"{rep.capacity:>10.5f} {cap_ref:>10.5f}{'  FAIL' if bad else ''}")
    if fails:
        print(f"\n{fails} rows outside tolerance")
        return _EXIT_TOLERANCE
    print("\nall rows within tolerance")
    return 0


def _selftest_kernel() -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(20240817)
    checks: list[tuple[str, bool, str]] = []
    worst_leg = 0.0
    worst_ident = 0.0
    for b in np.linspace(0.2, 5.0, 20):
        lat = lattice_from_periods(float(b))
        worst_leg = max(worst_leg, abs(lat.omega2 * lat.eta1 - lat.eta2 - 2j * math.pi))
        z = (0.05 + 0.9 * rng.random(5)) + 1j * b * (0.05 + 0.4 * rng.random(5))
        p = wp(z, lat)
        pp = wp_prime(z, lat)
        cubic = np.max(np.abs(pp ** 2 - (4 * p ** 3 - lat.g2 * p - lat.g3))
                       / np.abs(pp ** 2 + 1.0))
        h = 1e-5
        fd = (zeta_w(z + h, lat) - zeta_w(z - h, lat)) / (2 * h)
        dzeta = np.max(np.abs(fd + p))
        fd = (sigma(z + h, lat) - sigma(z - h, lat)) / (2 * h) / sigma(z, lat)
        dsig = np.max(np.abs(fd - zeta_w(z, lat)))
        worst_ident = max(worst_ident, float(cubic), float(dzeta), float(dsig))
    checks.append(("legendre relation (20 lattices)", worst_leg < 1e-12, f"{worst_leg:.2e}"))
    checks.append(("differential identities", worst_ident < 1e-8, f"{worst_ident:.2e}"))
    sq = lattice_from_periods(1.0)
    checks.append(("square lattice g3 = 0", abs(sq.g3) < 1e-13, f"{abs(sq.g3):.2e}"))
    checks.append(("square lattice eta1 = pi", abs(sq.eta1 - math.pi) < 1e-10,
                   f"{abs(sq.eta1 - math.pi):.2e}"))
    return checks


def _cmd_selftest(_args: argparse.Namespace) -> int:
    checks = _selftest_kernel()
    for i, (a1, a2, a3, a4, cap_ref) in enumerate(reference.CAPACITY_CASES, 1):
        try:
            rep = solve(SlitConfig(a1, a2, a3, a4), trace=False)
            delta = abs(rep.capacity - cap_ref)
            checks.append((f"capacity row {i}", delta <= _TABLE_CAP_TOL, f"delta {delta:.2e}"))
        except SlitcapError as exc:
            checks.append((f"capacity row {i}", False, f"{type(exc).__name__}: {exc}"))
    npass = sum(ok for _, ok, _ in checks)
    for name, ok, info in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {info}")
    print(f"\n{npass}/{len(checks)} checks passed")
    return 0 if npass == len(checks) else _EXIT_TOLERANCE


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slitcap", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_tols(p):
        p.add_argument("--rel-tol", type=float, default=1e-9)
        p.add_argument("--abs-tol", type=float, default=1e-11)

    pc = sub.add_parser("compute", help="module/capacity of one configuration")
    for name in ("a1", "a2", "a3", "a4"):
        pc.add_argument(f"--{name}", type=_parse_complex, required=True,
                        metavar="RE,IM")
    add_tols(pc)
    pc.add_argument("--format", choices=("text", "json", "csv"), default="text")
    pc.add_argument("--out", default=None)
    pc.add_argument("--no-trace", action="store_true",
                    help="skip boundary-trace diagnostics")
    pc.set_defaults(func=_cmd_compute)

    ps = sub.add_parser("sweep", help="slide a slit along a line")
    ps.add_argument("--a3", type=_parse_complex, required=True, metavar="RE,IM")
    ps.add_argument("--a4", type=_parse_complex, required=True, metavar="RE,IM")
    ps.add_argument("--line", type=float, nargs=4, required=True,
                    metavar=("PX", "PY", "DX", "DY"),
                    help="anchor point and direction of the sliding line")
    ps.add_argument("--length", type=float, required=True)
    ps.add_argument("--from", dest="lo", type=float, required=True)
    ps.add_argument("--to", dest="hi", type=float, required=True)
    ps.add_argument("--steps", type=int, required=True)
    ps.add_argument("--workers", type=int, default=1)
    add_tols(ps)
    ps.add_argument("--out", default=None)
    ps.set_defaults(func=_cmd_sweep)

    pt = sub.add_parser("tables", help="reproduce the built-in reference tables")
    add_tols(pt)
    pt.set_defaults(func=_cmd_tables)

    pst = sub.add_parser("selftest", help="kernel properties + golden capacities")
    pst.set_defaults(func=_cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateGeometry, OutOfRange) as exc:
        stage = getattr(exc, "stage", "geometry")
        sys.stderr.write(f"error [{stage}] {type(exc).__name__}: {exc}\n")
        return _EXIT_GEOMETRY
    except SlitcapError as exc:
        stage = getattr(exc, "stage", "solver")
        sys.stderr.write(f"error [{stage}] {type(exc).__name__}: {exc}\n")
        return _EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
