"""Reconstruction of the conformal map from a solved accessory state.

The map of the periodic strip {-m < Im z < 0} onto the slit exterior has

    f'(z) = c exp(gamma z) prod_k sigma(z - z_k) / [sigma(z-z0) sigma(z+z0)]^2

on the doubled lattice (1, 2mi), gamma = beta*eta1/pi.  The scale c is
recovered from the log-residue a by inverting the residue formula at the
pole, and f itself is obtained by quadrature of f' along pole-avoiding
polyline paths (the residues of f' at +-z0 vanish for a solved state, so
the integral is path independent up to the monitored defect level).

Values are produced in the solver's working frame; apply the isometry
recorded by the geometry module to map them back to input coordinates.
The slit-tip preimages used for evaluation are x1, x2 on the upper strip
edge and x3 - i m, x4 - i m on the lower edge (the state's bookkeeping
coordinate z3 = x3 + i m is the lattice translate of the lower-edge point;
f itself picks up exp(2 i beta) across that translation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import Lattice, _reduce, sigma
from .errors import PathBlocked, QuadratureFailure
from .evolution import AccessoryState
from .geometry import CaseTag, NormalizedConfig, SlitConfig, normalize

_PATH_MARGIN = 1e-3
_GK_MAX_DEPTH = 30
_GK_MAX_PANELS = 20000

# Gauss7 / Kronrod15 nodes and weights on [-1, 1] (QUADPACK constants).
_K15_NODES = np.array([
    0.0,
    0.2077849550078985, -0.2077849550078985,
    0.4058451513773972, -0.4058451513773972,
    0.5860872354676911, -0.5860872354676911,
    0.7415311855993944, -0.7415311855993944,
    0.8648644233597691, -0.8648644233597691,
    0.9491079123427585, -0.9491079123427585,
    0.9914553711208126, -0.9914553711208126,
])
_K15_WEIGHTS = np.array([
    0.2094821410847278,
    0.2044329400752989, 0.2044329400752989,
    0.1903505780647854, 0.1903505780647854,
    0.1690047266392679, 0.1690047266392679,
    0.1406532597155259, 0.1406532597155259,
    0.1047900103222502, 0.1047900103222502,
    0.0630920926299786, 0.0630920926299786,
    0.0229353220105292, 0.0229353220105292,
])
# Gauss-7 lives on K15 nodes 0, +-0.4058..., +-0.7415..., +-0.9491...
_G7_INDEX = np.array([0, 3, 4, 7, 8, 11, 12])
_G7_WEIGHTS = np.array([
    0.4179591836734694,
    0.3818300505051189, 0.3818300505051189,
    0.2797053914892767, 0.2797053914892767,
    0.1294849661688697, 0.1294849661688697,
])


@dataclass(frozen=True)
class MapData:
    """Solved state plus the constants of the integral representation."""

    state: AccessoryState
    c: complex
    c1: complex          # f value pinned at the lower-edge tip x3 - i m
    gamma: complex

    @property
    def lattice(self) -> Lattice:
        return self.state.lattice()

    def tip_preimages(self) -> np.ndarray:
        s = self.state
        return np.array([s.x1, s.x2, s.x3 - 1j * s.m, s.x4 - 1j * s.m])


def recover_scale(state: AccessoryState) -> complex:
    """Scale constant of the integral representation from the log-residue.

    c = -exp(a) exp(-gamma z0) sigma(2 z0)^2 / prod_k sigma(z0 - z_k).
    """
    lat = state.lattice()
    z = state.z_points()
    z0 = state.z0
    # beta is recovered from the constraint sum_k x_k = beta/pi, so the
    # signature needs nothing beyond the state itself
    beta = (state.x1 + state.x2 + state.x3 + state.x4) * math.pi
    gam = (beta / math.pi) * lat.eta1.real
    vals = sigma(np.array([z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3], 2.0 * z0]), lat)
    return complex(-np.exp(state.a) * np.exp(-gam * z0) * vals[4] ** 2
                   / (vals[0] * vals[1] * vals[2] * vals[3]))


def build_map(state: AccessoryState, ncfg: NormalizedConfig) -> MapData:
    """Bundle the constants; the additive constant pins f(x3 - i m) = A3."""
    lat = state.lattice()
    gam = (ncfg.beta / math.pi) * lat.eta1.real
    return MapData(state=state, c=recover_scale(state),
                   c1=ncfg.targets[2], gamma=complex(gam))


def map_derivative(z, md: MapData):
    """f'(z) in the working frame; vanishes at tip preimages, double poles
    at +-z0 modulo the lattice."""
    s = md.state
    lat = md.lattice
    zc = np.asarray(z, dtype=complex)
    zp = s.z_points()
    args = np.stack([zc - zp[0], zc - zp[1], zc - zp[2], zc - zp[3],
                     zc - s.z0, zc + s.z0])
    sv = sigma(args, lat)
    out = md.c * np.exp(md.gamma * zc) * sv[0] * sv[1] * sv[2] * sv[3] \
        / (sv[4] ** 2 * sv[5] ** 2)
    return out if isinstance(z, np.ndarray) else complex(out)


def _pole_clearance(md: MapData, pts: np.ndarray) -> float:
    """Distance from the points to the pole set {+-z0 + lattice}."""
    lat = md.lattice
    z0 = md.state.z0
    d1, _, _ = _reduce(pts - z0, lat)
    d2, _, _ = _reduce(pts + z0, lat)
    return float(min(np.min(np.abs(d1)), np.min(np.abs(d2))))


def _segment_clearance(md: MapData, a: complex, b: complex) -> float:
    """Exact min distance from segment [a, b] to the pole set."""
    lat = md.lattice
    z0 = md.state.z0
    per = 2.0 * md.state.m
    lo_r = math.floor(min(a.real, b.real)) - 1
    hi_r = math.ceil(max(a.real, b.real)) + 1
    lo_i = math.floor(min(a.imag, b.imag) / per) - 1
    hi_i = math.ceil(max(a.imag, b.imag) / per) + 1
    ab = b - a
    denom = abs(ab) ** 2
    best = math.inf
    for base in (z0, -z0):
        for nre in range(lo_r, hi_r + 1):
            for nim in range(lo_i, hi_i + 1):
                p = base + nre + 1j * per * nim
                t = 0.0 if denom == 0.0 else max(0.0, min(1.0, ((p - a).conjugate() * ab).real / denom))
                best = min(best, abs(p - (a + t * ab)))
    return best


def _route(md: MapData, a: complex, b: complex) -> list[complex]:
    """Polyline from a to b keeping _PATH_MARGIN away from all poles."""
    def ok(points: list[complex]) -> bool:
        return all(_segment_clearance(md, p, q) >= _PATH_MARGIN
                   for p, q in zip(points, points[1:]))

    candidates: list[list[complex]] = [[a, b]]
    candidates.append([a, complex(b.real, a.imag), b])
    candidates.append([a, complex(a.real, b.imag), b])
    for dc in (0.5, -0.5, 0.25, -0.25, 0.37, -0.37):
        c = b.real + dc
        candidates.append([a, complex(c, a.imag), complex(c, b.imag), b])
        c = a.real + dc
        candidates.append([a, complex(c, a.imag), complex(c, b.imag), b])
    for path in candidates:
        if ok(path):
            return path
    raise PathBlocked(f"no pole-avoiding path from {a} to {b}")


def _gk_panel(func, a: complex, b: complex):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = func(mid + half * _K15_NODES)
    i15 = half * np.sum(_K15_WEIGHTS * vals)
    i7 = half * np.sum(_G7_WEIGHTS * vals[_G7_INDEX])
    return complex(i15), abs(i15 - i7)


def _integrate_segment(func, a: complex, b: complex, tol: float) -> complex:
    """Adaptive Gauss-Kronrod on the straight segment [a, b]."""
    stack = [(a, b, tol, 0)]
    total = 0.0 + 0.0j
    panels = 0
    while stack:
        pa, pb, ptol, depth = stack.pop()
        panels += 1
        if panels > _GK_MAX_PANELS:
            raise QuadratureFailure("panel budget exhausted")
        val, err = _gk_panel(func, pa, pb)
        if err <= ptol or depth >= _GK_MAX_DEPTH:
            if err > ptol:
                raise QuadratureFailure(
                    f"panel [{pa}, {pb}] stuck at error {err:.3e} > {ptol:.3e}"
                )
            total += val
        else:
            pm = 0.5 * (pa + pb)
            stack.append((pa, pm, 0.5 * ptol, depth + 1))
            stack.append((pm, pb, 0.5 * ptol, depth + 1))
    return total


def _integrate_fprime(md: MapData, points: list[complex], tol: float) -> complex:
    """Integral of f' along a polyline, panels seeded at tip projections."""
    func = lambda z: map_derivative(z, md)
    tips = md.tip_preimages()
    total = 0.0 + 0.0j
    nseg = len(points) - 1
    for a, b in zip(points, points[1:]):
        # split where a tip preimage projects onto the segment: f' has a
        # simple zero there and panels converge faster once it is a boundary
        cuts = [0.0, 1.0]
        ab = b - a
        denom = abs(ab) ** 2
        if denom > 0:
            for tip in tips:
                t = ((tip - a).conjugate() * ab).real / denom
                if 0.05 < t < 0.95 and abs(tip - (a + t * ab)) < 0.2:
                    cuts.append(t)
        cuts.sort()
        seg_tol = tol / max(1, nseg) / max(1, len(cuts) - 1)
        for t0, t1 in zip(cuts, cuts[1:]):
            total += _integrate_segment(func, a + t0 * ab, a + t1 * ab, seg_tol)
    return total


def map_eval(z: complex, md: MapData, base: complex, base_value: complex) -> complex:
    """f(z) = base_value + integral of f' from base to z (routed path)."""
    if z == base:
        return base_value
    path = _route(md, complex(base), complex(z))
    tol = 1e-10 * max(abs(md.c), 1.0)
    return base_value + _integrate_fprime(md, path, tol)


@dataclass(frozen=True)
class TraceReport:
    max_line_deviation: float
    endpoint_errors: tuple[float, float, float, float]
    moving_line_deviation: float
    fixed_line_deviation: float


def _line_distance(points: np.ndarray, ncfg: NormalizedConfig, moving: bool) -> np.ndarray:
    if ncfg.case_tag is CaseTag.PARALLEL:
        level = ncfg.half_gap if moving else -ncfg.half_gap
        return np.abs(points.imag - level)
    direction = np.exp(0.5j * ncfg.beta) if moving else np.exp(-0.5j * ncfg.beta)
    return np.abs((points * np.conj(direction)).imag)


def boundary_trace(md: MapData, target, n: int = 64) -> TraceReport:
    """Sample f on both strip edges and compare with the target slits.

    target may be a SlitConfig (normalized internally) or a NormalizedConfig.
    Endpoint errors are |f(tip preimage) - A_k| in the working frame;
    line deviations are distances to the carrier lines.
    """
    if n < 64:
        raise ValueError("need at least 64 trace points per edge")
    ncfg = normalize(target) if isinstance(target, SlitConfig) else target
    s = md.state
    tips = md.tip_preimages()
    base = tips[2]
    base_value = ncfg.targets[2]

    f_tips = [base_value if k == 2 else map_eval(tips[k], md, base, base_value)
              for k in range(4)]
    endpoint_errors = tuple(abs(f_tips[k] - ncfg.targets[k]) for k in range(4))

    deviations = []
    for moving in (True, False):
        level = 0.0 if moving else -s.m
        avoid = (s.x1, s.x2) if moving else (s.x3, s.x4)
        xs = np.arange(n) / n
        keep = np.ones(n, dtype=bool)
        for av in avoid:
            keep &= np.abs((xs - av + 0.5) % 1.0 - 0.5) > 2e-3
        xs = xs[keep]
        line_pts = xs + 1j * level
        if _pole_clearance(md, line_pts) < _PATH_MARGIN:
            raise PathBlocked("strip edge runs too close to the map pole")
        # anchor the first sample, then accumulate along the edge
        anchor = map_eval(complex(line_pts[0]), md, base, base_value)
        values = [anchor]
        tol = 1e-10 * max(abs(md.c), 1.0)
        for a, b in zip(line_pts, line_pts[1:]):
            values.append(values[-1] + _integrate_fprime(md, [complex(a), complex(b)], tol))
        values = np.array(values)
        deviations.append(float(np.max(_line_distance(values, ncfg, moving))))

    return TraceReport(
        max_line_deviation=max(deviations),
        endpoint_errors=endpoint_errors,  # type: ignore[arg-type]
        moving_line_deviation=deviations[0],
        fixed_line_deviation=deviations[1],
    )
