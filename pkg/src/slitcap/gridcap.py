"""Method-diverse capacity cross-check: finite-difference condenser solve.

Rasterizes the two slits onto a tensor-product grid as Dirichlet plates at
potentials 0 and 1, solves the 5-point discrete Laplace equation on a large
truncation box with homogeneous Neumann sides, and reports the discrete
Dirichlet energy, which equals the condenser capacity.  The grid is uniform
over the configuration and geometrically stretched towards the box, so the
truncation box can be far away at moderate cost.

This is a coarse sanity oracle (percent-level), deliberately independent of
everything in the elliptic pipeline; it shares no code path with the solver
beyond the SlitConfig type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pyamg
import scipy.sparse as sp

from .errors import NonConvergence, OutOfRange
from .geometry import SlitConfig

_STRETCH = 1.15
_CORE_PAD = 0.3     # core-region padding, in units of config diameter
_CG_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Discretization request.

    half_width: truncation-box half-size in multiples of the configuration
    diameter (>= 4).  resolution: grid cells per configuration diameter in
    the uniform core (>= 32).  Capacity is scale invariant, so both knobs
    are expressed relative to the configuration size.
    """

    half_width: float = 6.0
    resolution: int = 256

    def validate(self) -> None:
        if self.half_width < 4.0:
            raise OutOfRange(f"half_width {self.half_width} must be >= 4 diameters")
        if self.resolution < 32:
            raise OutOfRange(f"resolution {self.resolution} must be >= 32")


def _stretched_axis(lo: float, hi: float, h: float, wlo: float, whi: float) -> np.ndarray:
    """Uniform spacing h on [lo, hi], geometric growth out to [wlo, whi]."""
    core = np.arange(math.floor((hi - lo) / h) + 1) * h + lo
    left = []
    x, step = lo, h
    while x > wlo:
        step *= _STRETCH
        x -= step
        left.append(x)
    right = []
    x, step = core[-1], h
    while x < whi:
        step *= _STRETCH
        x += step
        right.append(x)
    return np.concatenate([left[::-1], core, right])


def _segment_mask(X: np.ndarray, Y: np.ndarray, a: complex, b: complex, band: float) -> np.ndarray:
    ab = b - a
    denom = abs(ab) ** 2
    px = X - a.real
    py = Y - a.imag
    t = np.clip((px * ab.real + py * ab.imag) / denom, 0.0, 1.0)
    dx = px - t * ab.real
    dy = py - t * ab.imag
    return np.hypot(dx, dy) <= band


def _circle_mask(X: np.ndarray, Y: np.ndarray, center: complex, radius: float, band: float) -> np.ndarray:
    return np.abs(np.hypot(X - center.real, Y - center.imag) - radius) <= band


def _capacity_on_grid(xs: np.ndarray, ys: np.ndarray,
                      plate0: np.ndarray, plate1: np.ndarray) -> float:
    """Dirichlet energy of the discrete harmonic potential (plates 0 / 1).

    The linear system is the stationarity condition of the edge-weighted
    energy sum_e w_e (u_a - u_b)^2, i.e. the standard 5-point Laplacian on a
    tensor grid; homogeneous Neumann on the outer box is natural (missing
    edges).
    """
    nx, ny = len(xs), len(ys)
    if np.any(plate0 & plate1):
        raise OutOfRange("plates overlap after rasterization")
    dx = np.diff(xs)
    dy = np.diff(ys)
    # transverse widths owned by each node line
    wx = np.zeros(nx)
    wx[:-1] += 0.5 * dx
    wx[1:] += 0.5 * dx
    wy = np.zeros(ny)
    wy[:-1] += 0.5 * dy
    wy[1:] += 0.5 * dy

    idx = np.arange(nx * ny).reshape(ny, nx)
    fixed = plate0 | plate1
    uval = np.where(plate1, 1.0, 0.0)

    rows, cols, vals = [], [], []
    rhs = np.zeros(nx * ny)
    diag = np.zeros(nx * ny)

    def add_edges(ia: np.ndarray, ib: np.ndarray, w: np.ndarray):
        fa = fixed.reshape(-1)[ia]
        fb = fixed.reshape(-1)[ib]
        ua = uval.reshape(-1)[ia]
        ub = uval.reshape(-1)[ib]
        # free-free couplings
        m = ~fa & ~fb
        rows.append(ia[m]); cols.append(ib[m]); vals.append(-w[m])
        rows.append(ib[m]); cols.append(ia[m]); vals.append(-w[m])
        np.add.at(diag, ia[~fa], w[~fa])
        np.add.at(diag, ib[~fb], w[~fb])
        # free-fixed contributions to the right-hand side
        m = ~fa & fb
        np.add.at(rhs, ia[m], w[m] * ub[m])
        m = fa & ~fb
        np.add.at(rhs, ib[m], w[m] * ua[m])

    # horizontal edges: weight = wy[j] / dx[i]
    ia = idx[:, :-1].reshape(-1)
    ib = idx[:, 1:].reshape(-1)
    w = (wy[:, None] / dx[None, :]).reshape(-1)
    add_edges(ia, ib, w)
    # vertical edges: weight = wx[i] / dy[j]
    ia = idx[:-1, :].reshape(-1)
    ib = idx[1:, :].reshape(-1)
    w = (wx[None, :] / dy[:, None]).reshape(-1)
    add_edges(ia, ib, w)

    free = ~fixed.reshape(-1)
    free_idx = np.where(free)[0]
    renum = -np.ones(nx * ny, dtype=np.int64)
    renum[free_idx] = np.arange(free_idx.size)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    keep = free[rows] & free[cols]
    A = sp.coo_matrix(
        (np.concatenate([vals[keep], diag[free_idx]]),
         (np.concatenate([renum[rows[keep]], np.arange(free_idx.size)]),
          np.concatenate([renum[cols[keep]], np.arange(free_idx.size)]))),
        shape=(free_idx.size, free_idx.size),
    ).tocsr()
    b = rhs[free_idx]

    ml = pyamg.ruge_stuben_solver(A)
    residuals: list[float] = []
    x = ml.solve(b, tol=_CG_TOL, accel="cg", maxiter=400, residuals=residuals)
    bnorm = float(np.linalg.norm(b))
    if residuals and bnorm > 0 and residuals[-1] / bnorm > _CG_TOL * 10:
        raise NonConvergence(
            f"AMG-CG stalled at relative residual {residuals[-1] / bnorm:.2e}"
        )

    u = uval.reshape(-1).copy()
    u[free_idx] = x
    U = u.reshape(ny, nx)
    ex = (np.diff(U, axis=1) ** 2) * (wy[:, None] / dx[None, :])
    ey = (np.diff(U, axis=0) ** 2) * (wx[None, :] / dy[:, None])
    return float(ex.sum() + ey.sum())


def _grid_for(points: list[complex], diam: float, gs: GridSpec):
    h = diam / gs.resolution
    pad = _CORE_PAD * diam
    xlo = min(p.real for p in points) - pad
    xhi = max(p.real for p in points) + pad
    ylo = min(p.imag for p in points) - pad
    yhi = max(p.imag for p in points) + pad
    cx = 0.5 * (xlo + xhi)
    cy = 0.5 * (ylo + yhi)
    W = gs.half_width * diam
    xs = _stretched_axis(xlo, xhi, h, cx - W, cx + W)
    ys = _stretched_axis(ylo, yhi, h, cy - W, cy + W)
    return xs, ys, h


def grid_capacity(cfg: SlitConfig, gs: GridSpec = GridSpec()) -> float:
    """Condenser capacity of the two-slit configuration on the grid."""
    gs.validate()
    diam = cfg.diameter()
    xs, ys, h = _grid_for(list(cfg.endpoints), diam, gs)
    X, Y = np.meshgrid(xs, ys)
    plate0 = _segment_mask(X, Y, cfg.a1, cfg.a2, 0.5 * h)
    plate1 = _segment_mask(X, Y, cfg.a3, cfg.a4, 0.5 * h)
    return _capacity_on_grid(xs, ys, plate0, plate1)


def annulus_capacity(q: float, gs: GridSpec = GridSpec()) -> float:
    """Capacity of the condenser between circles of radii q and 1.

    The exact value is 2*pi/log(1/q); used as the oracle's own sanity check.
    """
    gs.validate()
    if not 0.0 < q < 1.0:
        raise OutOfRange("inner radius must be in (0, 1)")
    diam = 2.0
    pts = [complex(-1, -1), complex(1, 1)]
    xs, ys, h = _grid_for(pts, diam, gs)
    X, Y = np.meshgrid(xs, ys)
    plate0 = _circle_mask(X, Y, 0j, 1.0, 0.5 * h)
    plate1 = _circle_mask(X, Y, 0j, q, 0.5 * h)
    return _capacity_on_grid(xs, ys, plate0, plate1)
