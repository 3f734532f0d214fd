"""End-to-end orchestration: geometry -> initial data -> evolution -> map.

`solve` runs the whole pipeline for one configuration and assembles a
report; `sweep` repeats it for a slit sliding along a line, each position
getting its own homotopy from the symmetric start.  Errors raised by a
stage are re-raised with a `stage` attribute naming the failing stage.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import SlitcapError
from .evolution import (
    AccessoryState,
    Trajectory,
    initial_accessory_state,
    integrate,
    module_slide_slope,
)
from .geometry import CaseTag, NormalizedConfig, SlitConfig, normalize
from .initial import initial_state
from .mapping import TraceReport, boundary_trace, build_map

_STAGES = ("geometry", "initialization", "integration", "reconstruction")


@dataclass(frozen=True)
class ComputeReport:
    config: SlitConfig
    case_tag: CaseTag
    module: float
    capacity: float
    state: AccessoryState
    sum_defect_max: float
    residue_defect_max: float
    endpoint_errors: tuple[float, float, float, float] | None
    max_line_deviation: float | None
    runtime_ms: float
    ncfg: NormalizedConfig
    trajectory: Trajectory

    def accessory(self) -> dict[str, float]:
        s = self.state
        return {"x1": s.x1, "x2": s.x2, "x3": s.x3, "x4": s.x4,
                "y0": s.y0, "m": s.m, "a_re": s.a.real, "a_im": s.a.imag}


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SlitcapError as exc:
        exc.stage = stage
        raise


def solve(cfg: SlitConfig, rel_tol: float = 1e-9, abs_tol: float = 1e-11,
          trace: bool = True, trace_n: int = 64) -> ComputeReport:
    """Full pipeline for one slit pair.

    trace=False skips the boundary-trace diagnostics (useful inside sweeps
    where only the module is wanted).
    """
    t0 = time.perf_counter()
    ncfg = _staged("geometry", normalize, cfg)
    sym = _staged("initialization", initial_state, ncfg)
    s0 = initial_accessory_state(sym)
    traj = _staged("integration", integrate, s0, ncfg, rel_tol, abs_tol)
    final = traj.final
    endpoint_errors = None
    max_dev = None
    if trace:
        md = _staged("reconstruction", build_map, final, ncfg)
        report: TraceReport = _staged("reconstruction", boundary_trace, md, ncfg, trace_n)
        endpoint_errors = report.endpoint_errors
        max_dev = report.max_line_deviation
    sums, res = traj.max_defects()
    return ComputeReport(
        config=cfg,
        case_tag=ncfg.case_tag,
        module=final.m,
        capacity=1.0 / final.m,
        state=final,
        sum_defect_max=sums,
        residue_defect_max=res,
        endpoint_errors=endpoint_errors,
        max_line_deviation=max_dev,
        runtime_ms=1e3 * (time.perf_counter() - t0),
        ncfg=ncfg,
        trajectory=traj,
    )


@dataclass(frozen=True)
class SweepPoint:
    a: float
    m: float | None
    cap: float | None
    sum_defect: float | None
    residue_defect: float | None
    slope: float | None          # solver-internal dm/da indicator
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    points: list[SweepPoint]
    minima: list[float]
    maxima: list[float]


def _sweep_config(line_point: complex, line_dir: complex, length: float,
                  a: float, a3: complex, a4: complex) -> SlitConfig:
    u = line_dir / abs(line_dir)
    p1 = line_point + (a - 0.5 * length) * u
    p2 = line_point + (a + 0.5 * length) * u
    return SlitConfig(p1, p2, a3, a4)


def _sweep_one(args) -> SweepPoint:
    (a, line_point, line_dir, length, a3, a4, rel_tol, abs_tol) = args
    cfg = _sweep_config(line_point, line_dir, length, a, a3, a4)
    try:
        rep = solve(cfg, rel_tol=rel_tol, abs_tol=abs_tol, trace=False)
        u = line_dir / abs(line_dir)
        if rep.ncfg.swapped:
            slope = None  # slide velocity would sit on the held slit
        else:
            slope = module_slide_slope(rep.state, rep.ncfg, input_direction=u)
        return SweepPoint(a=a, m=rep.module, cap=rep.capacity,
                          sum_defect=rep.sum_defect_max,
                          residue_defect=rep.residue_defect_max,
                          slope=slope)
    except SlitcapError as exc:
        return SweepPoint(a=a, m=None, cap=None, sum_defect=None,
                          residue_defect=None, slope=None,
                          error=f"{type(exc).__name__}: {exc}")


def sweep(a3: complex, a4: complex, line_point: complex, line_dir: complex,
          length: float, lo: float, hi: float, steps: int,
          rel_tol: float = 1e-9, abs_tol: float = 1e-11,
          workers: int = 1) -> SweepResult:
    """Module of the sliding-slit family; one homotopy per grid point.

    The moving slit is [a - length/2, a + length/2] along the given line;
    a3a4 is held fixed.  Extrema are located by sign changes of centered
    differences of m(a); per-point failures are recorded and skipped.
    """
    if steps < 2:
        raise ValueError("sweep needs at least 2 steps")
    avals = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    jobs = [(a, line_point, line_dir, length, a3, a4, rel_tol, abs_tol)
            for a in avals]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_one, jobs))
    else:
        points = [_sweep_one(j) for j in jobs]

    minima: list[float] = []
    maxima: list[float] = []
    ok = [p for p in points if p.m is not None]
    for prev, mid, nxt in zip(ok, ok[1:], ok[2:]):
        dl = mid.m - prev.m
        dr = nxt.m - mid.m
        if dl < 0.0 <= dr:
            minima.append(mid.a)
        elif dl > 0.0 >= dr:
            maxima.append(mid.a)
    return SweepResult(points=points, minima=minima, maxima=maxima)
