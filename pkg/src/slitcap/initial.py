"""Initial accessory parameters from the closed-form symmetric maps.

A mirror-symmetric slit pair (the moving slit being the reflection of the
fixed one) has an explicit conformal map, so the accessory parameters are
available in closed form there:

* crossing carriers:  f(z) = c exp(2 a eta1 z) sigma(z-a)/sigma(z+a) with
  a = beta/(4 pi), on the lattice (1, i*m);
* parallel carriers:  f(z) = -(b/pi) (zeta(z) - eta1 z), b = half gap.

The critical points of either map reduce to wp(z) = known value, solved by
the inverse wp on the branch rectangle [0, 1/2] x [0, m/2]; the module m of
the symmetric domain follows by bisecting the tip-distance ratio.  The
symmetric closed forms live on the single-width lattice (1, i*m); the
returned state is expressed in the coordinates of the evolution module,
which works on the doubled lattice (1, 2i*m): abscissas are shifted by
beta/(4 pi) and the map pole sits at z0 = -i*m/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .elliptic import BranchRegion, inverse_wp, lattice_from_periods, sigma, wp, wp_prime, zeta_w
from .errors import BracketFailure, DegenerateGeometry
from .geometry import CaseTag, NormalizedConfig

_BRACKET = (0.1, 3.0)
_BISECT_STEPS = 70
_BISECT_RELTOL = 1e-14


@dataclass(frozen=True)
class SymmetricSolution:
    """Initial accessory data: module, tip abscissas, pole ordinate, log-residue.

    x_init are the four critical abscissas in evolution coordinates
    (x1 = x3, x2 = x4 by symmetry); a0 always has imaginary part pi because
    the symmetric residue is negative real; c0 is the map scale.
    """

    m0: float
    x_init: tuple[float, float, float, float]
    y0_init: float
    a0: complex
    c0: float


def _critical_point(m: float, alpha: float) -> complex:
    """Root of the critical-point equation on the lattice (1, i*m).

    Solves wp(z) = wp(alpha) - wp'(alpha) / (2 (alpha eta1 - zeta(alpha)))
    inside [0, 1/2] x [0, m/2]; the root lies on the line Im z = m/2.
    """
    lat = lattice_from_periods(m)
    pa = wp(alpha, lat)
    ppa = wp_prime(alpha, lat)
    za = zeta_w(alpha, lat)
    target = pa - ppa / (2.0 * (alpha * lat.eta1 - za))
    region = BranchRegion((0.0, 0.5), (0.0, m / 2.0))
    return inverse_wp(target, lat, region)


def critical_abscissa(m: float, alpha: float) -> float:
    """Real part of the symmetric-map critical point for crossing slits."""
    return _critical_point(m, alpha).real


def length_ratio(m: float, alpha: float) -> float:
    """Far/near tip-distance ratio of the symmetric crossing-slit domain.

    l = | i exp(-4 alpha eta1 z2) sigma(z2+alpha)^2 / sigma(z2-alpha)^2 |
    at the critical point z2, lattice (1, i*m).
    """
    lat = lattice_from_periods(m)
    z2 = _critical_point(m, alpha)
    ratio = 1j * cmath.exp(-4.0 * alpha * lat.eta1 * z2) \
        * (sigma(z2 + alpha, lat) / sigma(z2 - alpha, lat)) ** 2
    return abs(ratio)


def _bisect(func, lo: float, hi: float, what: str) -> float:
    """Sign-change bisection with the fixed iteration budget."""
    flo = func(lo)
    fhi = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketFailure(
            f"{what}: no sign change on [{lo}, {hi}] (f(lo)={flo:.6g}, f(hi)={fhi:.6g})"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if (fmid > 0) == (fhi > 0):
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
        if hi - lo < _BISECT_RELTOL * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def solve_symmetric_module(target_ratio: float, alpha: float) -> float:
    """Module of the symmetric crossing-slit domain with given tip ratio."""
    if not math.isfinite(target_ratio) or target_ratio < 1.0:
        raise BracketFailure(f"target ratio {target_ratio!r} must be finite and >= 1")
    if target_ratio == 1.0:
        raise DegenerateGeometry("tip-distance ratio 1 means a degenerate fixed slit")
    return _bisect(lambda m: length_ratio(m, alpha) - target_ratio,
                   *_BRACKET, what="symmetric module (crossing slits)")


def initial_state_generic(ncfg: NormalizedConfig) -> SymmetricSolution:
    """Initial accessory state for crossing carriers (0 < beta < pi)."""
    if ncfg.case_tag is not CaseTag.GENERIC:
        raise DegenerateGeometry("generic initializer needs a generic configuration")
    alpha = ncfg.beta / (4.0 * math.pi)
    m0 = solve_symmetric_module(ncfg.l4 / ncfg.l3, alpha)
    x0 = critical_abscissa(m0, alpha)
    lat = lattice_from_periods(m0)
    a0 = (0.5 * math.log(ncfg.l3 * ncfg.l4)
          - 2.0 * alpha ** 2 * lat.eta1.real
          + math.log(abs(sigma(2.0 * alpha, lat)))
          + 1j * math.pi)
    return SymmetricSolution(
        m0=m0,
        x_init=(alpha + x0, alpha - x0, alpha + x0, alpha - x0),
        y0_init=-m0 / 2.0,
        a0=a0,
        c0=math.sqrt(ncfg.l3 * ncfg.l4),
    )


def initial_state_parallel(ncfg: NormalizedConfig) -> SymmetricSolution:
    """Initial accessory state for parallel carriers (beta = 0).

    The critical points solve wp(z) = -eta1; the module is fixed by matching
    (2/pi) Re[zeta(z2) - eta1 z2] to the length/half-gap ratio of the fixed
    slit, all on the lattice (1, i*m).
    """
    if ncfg.case_tag is not CaseTag.PARALLEL:
        raise DegenerateGeometry("parallel initializer needs a parallel configuration")
    target = ncfg.slit_length / ncfg.half_gap

    def fit(m: float) -> float:
        lat = lattice_from_periods(m)
        root = inverse_wp(-lat.eta1, lat, BranchRegion((0.0, 0.5), (0.0, m / 2.0)))
        z2 = complex(root.real, m / 2.0)
        val = (2.0 / math.pi) * (zeta_w(z2, lat) - lat.eta1 * z2)
        return val.real - target

    m0 = _bisect(fit, *_BRACKET, what="symmetric module (parallel slits)")
    lat = lattice_from_periods(m0)
    x0 = inverse_wp(-lat.eta1, lat, BranchRegion((0.0, 0.5), (0.0, m0 / 2.0))).real
    a0 = math.log(ncfg.half_gap / math.pi) + 1j * math.pi
    return SymmetricSolution(
        m0=m0,
        x_init=(x0, -x0, x0, -x0),
        y0_init=-m0 / 2.0,
        a0=a0,
        c0=ncfg.half_gap / math.pi,
    )


def initial_state(ncfg: NormalizedConfig) -> SymmetricSolution:
    if ncfg.case_tag is CaseTag.PARALLEL:
        return initial_state_parallel(ncfg)
    return initial_state_generic(ncfg)
