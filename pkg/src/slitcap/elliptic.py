"""Weierstrass elliptic functions on rectangular lattices via theta series.

All functions live on the lattice generated by the full periods ``1`` and
``omega2 = i*omega2_im`` (periods, not half-periods).  With ``tau = omega2``
and nome ``q = exp(i*pi*tau)`` the basic building block is the odd Jacobi
theta function

    theta1(v | tau) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) v),

from which sigma, zeta, wp and wp' follow:

    sigma(z) = exp(eta1 z^2 / 2) theta1(pi z) / (pi theta1'(0)),
    zeta(z)  = eta1 z + pi theta1'(pi z) / theta1(pi z),
    wp(z)    = -eta1 + pi^2 [ (theta1'/theta1)^2 - theta1''/theta1 ](pi z),
    wp'(z)   = pi^3 [ 3 r s - 2 r^3 - u ](pi z),   r,s,u = theta1'/theta1, ...

The pi-scaling of the theta argument is the one (and only one) for which
``sigma(z)/z -> 1``; the test-suite pins that normalization.  Arguments are
reduced into the fundamental rectangle before the series is summed and the
exact quasi-periodicity factors are reapplied, so accuracy is uniform in z.
Because only coefficient *ratios* enter, the common factor q^{1/4} is never
materialized and large lattices do not underflow.

Direct lattice sums / products of the classical definitions are implemented
in the test-suite as independent oracles; they are deliberately not used
here (the q-series converge geometrically on the purely imaginary tau this
package works with).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, NoRootInRegion, OutOfRange, PoleProximity

# Series truncation: stop once a term drops below _TRUNC * |partial sum|.
_TRUNC = 1e-17
_MAX_TERMS = 200
_POLE_RADIUS = 1e-12

_OMEGA2_MIN = 1e-4
_OMEGA2_MAX = 1e4


@dataclass(frozen=True)
class Lattice:
    """Rectangular period lattice (1, i*omega2_im) with cached invariants.

    eta1 is real and eta2 purely imaginary on rectangular lattices; eta2 is
    taken from the Legendre relation omega2*eta1 - eta2 = 2*pi*i, which is
    exact.  Immutable, hence safe to share between threads.
    """

    omega2_im: float
    tau: complex
    nome_q: float
    eta1: complex
    eta2: complex
    g2: complex
    g3: complex
    # reduced theta coefficients 2*(-1)^n q^{n(n+1)} and the odd integers 2n+1
    _coeff: np.ndarray = field(repr=False, compare=False)
    _kodd: np.ndarray = field(repr=False, compare=False)
    # ratios theta1'''(0)/theta1'(0) cancel q^{1/4}; keep the reduced sums
    _d1: float = field(repr=False, compare=False)

    @property
    def omega2(self) -> complex:
        return 1j * self.omega2_im


def _eisenstein(qbar: float, weight: int, max_terms: int = 600) -> float:
    """E4 (weight 4) or E6 (weight 6) at real qbar = q^2 in [0, 1)."""
    if weight == 4:
        coeff, power = 240.0, 3
    elif weight == 6:
        coeff, power = -504.0, 5
    else:
        raise ValueError("weight must be 4 or 6")
    if qbar == 0.0:
        return 1.0
    terms = [1.0]
    qn = 1.0
    for n in range(1, max_terms + 1):
        qn *= qbar
        term = coeff * (n ** power) * qn / (1.0 - qn)
        terms.append(term)
        if abs(term) < _TRUNC * 1.0 and n > 2:
            return math.fsum(terms)
    raise ConvergenceFailure(
        f"Eisenstein E{weight} series needs more than {max_terms} terms (qbar={qbar!r})"
    )


def lattice_from_periods(omega2_im: float) -> Lattice:
    """Build the lattice with periods 1 and i*omega2_im.

    Raises OutOfRange outside [1e-4, 1e4] and ConvergenceFailure when the
    theta/Eisenstein series cannot reach full double precision within the
    term caps (very elongated lattices).
    """
    b = float(omega2_im)
    if not math.isfinite(b) or b < _OMEGA2_MIN or b > _OMEGA2_MAX:
        raise OutOfRange(f"omega2_im={omega2_im!r} outside [{_OMEGA2_MIN}, {_OMEGA2_MAX}]")

    q = math.exp(-math.pi * b)
    # Worst-case reduced argument has |Im v| <= pi*b/2; term n then decays
    # like exp(-pi*b*n^2) relative to the n=0 term.
    nterms = int(math.ceil(math.sqrt(42.0 / (math.pi * b)))) + 4
    if nterms > _MAX_TERMS:
        raise ConvergenceFailure(
            f"theta series for omega2_im={b} needs {nterms} terms (cap {_MAX_TERMS})"
        )
    n = np.arange(nterms)
    coeff = 2.0 * (-1.0) ** n * q ** (n * (n + 1.0))  # q^{1/4} divided out
    kodd = 2.0 * n + 1.0

    d1 = float(np.sum(coeff * kodd))          # ~ theta1'(0) / q^{1/4}
    d3 = float(-np.sum(coeff * kodd ** 3))    # ~ theta1'''(0) / q^{1/4}
    eta1 = -math.pi ** 2 * d3 / (3.0 * d1)

    tau = 1j * b
    eta2 = tau * eta1 - 2j * math.pi  # Legendre relation, exact
    qbar = math.exp(-2.0 * math.pi * b)
    g2 = (4.0 * math.pi ** 4 / 3.0) * _eisenstein(qbar, 4)
    g3 = (8.0 * math.pi ** 6 / 27.0) * _eisenstein(qbar, 6)
    if 1.0 / 3.0 <= b <= 3.0:
        # Rotating the rectangular lattice by i maps b -> 1/b and gives
        # g2(1/b) = b^4 g2(b), g3(1/b) = -b^6 g3(b).  Averaging the two
        # evaluations makes the square-lattice zero of g3 exact instead of
        # a cancellation of O(1) Eisenstein terms.
        qbar_r = math.exp(-2.0 * math.pi / b)
        g2 = 0.5 * (g2 + (4.0 * math.pi ** 4 / 3.0) * _eisenstein(qbar_r, 4) / b ** 4)
        g3 = 0.5 * (g3 - (8.0 * math.pi ** 6 / 27.0) * _eisenstein(qbar_r, 6) / b ** 6)

    return Lattice(
        omega2_im=b,
        tau=tau,
        nome_q=q,
        eta1=complex(eta1),
        eta2=eta2,
        g2=complex(g2),
        g3=complex(g3),
        _coeff=coeff,
        _kodd=kodd,
        _d1=d1,
    )


def theta1(z: complex, tau: complex) -> complex:
    """Jacobi theta1 via its q-series, q = exp(i*pi*tau).

    Summation stops when the term magnitude falls below 1e-17 of the partial
    sum (two consecutive decreasing terms); more than 200 terms raises
    ConvergenceFailure.  Odd in z.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise OutOfRange(f"Im(tau) must be positive, got {tau!r}")
    q = np.exp(1j * math.pi * tau)
    z = complex(z)
    total = 0.0 + 0.0j
    below = 0
    prev = math.inf
    for n in range(_MAX_TERMS):
        k = 2 * n + 1
        term = 2.0 * (-1) ** n * q ** ((n + 0.5) ** 2) * np.sin(k * z)
        total += term
        mag = abs(term)
        if mag <= _TRUNC * max(abs(total), 1e-300) and mag <= prev:
            below += 1
            if below >= 2:
                return complex(total)
        else:
            below = 0
        prev = mag
    raise ConvergenceFailure(f"theta1 series did not converge for z={z!r}, tau={tau!r}")


def _reduce(z, lat: Lattice):
    """Reduce z modulo the lattice into [-1/2,1/2] x [-b/2,b/2].

    Returns (z0, mshift, nshift) with z = z0 + mshift + nshift*omega2.
    """
    zc = np.asarray(z, dtype=complex)
    n = np.round(zc.imag / lat.omega2_im)
    z1 = zc - 1j * lat.omega2_im * n
    m = np.round(z1.real)
    z0 = z1 - m
    return z0, m, n


def _theta_sums(lat: Lattice, v, order: int):
    """Partial theta sums at v (vectorized); q^{1/4} divided out.

    Returns [t0, t1, ..., t_order] where t_j ~ theta1^{(j)}(v)/q^{1/4}.
    """
    v = np.asarray(v, dtype=complex)
    arg = v[..., None] * lat._kodd
    s = np.sin(arg)
    out = [np.sum(lat._coeff * s, axis=-1)]
    if order >= 1:
        c = np.cos(arg)
        out.append(np.sum(lat._coeff * lat._kodd * c, axis=-1))
    if order >= 2:
        out.append(-np.sum(lat._coeff * lat._kodd ** 2 * s, axis=-1))
    if order >= 3:
        out.append(-np.sum(lat._coeff * lat._kodd ** 3 * c, axis=-1))
    return out


def _check_poles(z0, what: str):
    dist = np.abs(z0)
    bad = dist < _POLE_RADIUS
    if np.any(bad):
        raise PoleProximity(
            f"{what}: argument within {_POLE_RADIUS} of a lattice point "
            f"(min distance {float(np.min(dist)):.3e})"
        )


def sigma(z, lat: Lattice):
    """Weierstrass sigma; entire, odd, sigma(z)/z -> 1 at the origin."""
    z0, m, n = _reduce(z, lat)
    (t0,) = _theta_sums(lat, math.pi * z0, 0)
    base = np.exp(0.5 * lat.eta1 * z0 * z0) * t0 / (math.pi * lat._d1)
    omega = m + 1j * lat.omega2_im * n
    eta = m * lat.eta1 + n * lat.eta2
    eps = np.where((np.mod(m, 2) == 0) & (np.mod(n, 2) == 0), 1.0, -1.0)
    out = eps * base * np.exp(eta * (z0 + 0.5 * omega))
    return out if isinstance(z, np.ndarray) else complex(out)


def zeta_w(z, lat: Lattice):
    """Weierstrass zeta (odd, simple pole of residue 1 at lattice points)."""
    z0, m, n = _reduce(z, lat)
    _check_poles(z0, "zeta_w")
    t0, t1 = _theta_sums(lat, math.pi * z0, 1)
    out = lat.eta1 * z0 + math.pi * t1 / t0 + m * lat.eta1 + n * lat.eta2
    return out if isinstance(z, np.ndarray) else complex(out)


def _wp_core(lat: Lattice, z0, order: int):
    sums = _theta_sums(lat, math.pi * z0, order)
    t0 = sums[0]
    r = sums[1] / t0
    s = sums[2] / t0
    w = -lat.eta1 + math.pi ** 2 * (r * r - s)
    if order < 3:
        return w, None, r
    u = sums[3] / t0
    wp_p = math.pi ** 3 * (3.0 * r * s - 2.0 * r ** 3 - u)
    return w, wp_p, r


def wp(z, lat: Lattice):
    """Weierstrass P-function (even elliptic of order 2)."""
    z0, _, _ = _reduce(z, lat)
    _check_poles(z0, "wp")
    w, _, _ = _wp_core(lat, z0, 2)
    return w if isinstance(z, np.ndarray) else complex(w)


def wp_prime(z, lat: Lattice):
    """Derivative of the Weierstrass P-function."""
    z0, _, _ = _reduce(z, lat)
    _check_poles(z0, "wp_prime")
    _, wpp, _ = _wp_core(lat, z0, 3)
    return wpp if isinstance(z, np.ndarray) else complex(wpp)


def wp_with_prime(z, lat: Lattice):
    """wp and wp' in one theta pass (shared by the ODE right-hand side)."""
    z0, _, _ = _reduce(z, lat)
    _check_poles(z0, "wp_with_prime")
    w, wpp, _ = _wp_core(lat, z0, 3)
    if isinstance(z, np.ndarray):
        return w, wpp
    return complex(w), complex(wpp)


def dzeta_domega2(z, lat: Lattice):
    """Partial derivative of zeta(z; 1, omega2) with respect to omega2.

    dzeta/domega2 = -(1/2/pi/i) [ wp'(z)/2 + (zeta(z) - eta1 z) wp(z)
                                  + eta1 zeta(z) - (g2/12) z ]
    with omega1 = 1 held fixed.  Not periodic in z: the true zeta(z) value
    (quasi-period factors included) enters the formula.
    """
    zc = np.asarray(z, dtype=complex)
    z0, m, n = _reduce(zc, lat)
    _check_poles(z0, "dzeta_domega2")
    w, wpp, r = _wp_core(lat, z0, 3)
    zt = lat.eta1 * z0 + math.pi * r + m * lat.eta1 + n * lat.eta2
    val = -(0.5 * wpp + (zt - lat.eta1 * zc) * w + lat.eta1 * zt
            - (lat.g2 / 12.0) * zc) / (2j * math.pi)
    return val if isinstance(z, np.ndarray) else complex(val)


@dataclass(frozen=True)
class BranchRegion:
    """Axis-aligned rectangle selecting one branch of the inverse P-function.

    Must stay inside one fundamental half-domain of wp so the root is unique.
    """

    re_range: tuple[float, float]
    im_range: tuple[float, float]

    def contains(self, z: complex, slack: float = 1e-9) -> bool:
        return (self.re_range[0] - slack <= z.real <= self.re_range[1] + slack
                and self.im_range[0] - slack <= z.imag <= self.im_range[1] + slack)


_INV_GRID = 64
_INV_NEWTON_CAP = 50
_INV_SEEDS = 6


def inverse_wp(w: complex, lat: Lattice, region: BranchRegion) -> complex:
    """Solve wp(z) = w for z inside the branch region.

    Coarse 64x64 scan over cell centers, Newton refinement from the best
    seeds, residual tolerance 1e-11*max(1,|w|).  Among admissible roots the
    one with smallest Im (then smallest Re) is returned, which makes the
    branch choice deterministic.
    """
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise OutOfRange("inverse_wp target must be finite")
    relo, rehi = region.re_range
    imlo, imhi = region.im_range
    xs = relo + (np.arange(_INV_GRID) + 0.5) * (rehi - relo) / _INV_GRID
    ys = imlo + (np.arange(_INV_GRID) + 0.5) * (imhi - imlo) / _INV_GRID
    Z = xs[None, :] + 1j * ys[:, None]
    vals = wp(Z, lat)
    resid = np.abs(vals - w)
    flat = np.argsort(resid, axis=None)

    tol = 1e-11 * max(1.0, abs(w))
    roots: list[complex] = []
    best_resid = float(resid.flat[flat[0]])
    seeds_taken: list[complex] = []
    for idx in flat:
        z_seed = complex(Z.flat[idx])
        if any(abs(z_seed - s) < 2.0 * (rehi - relo) / _INV_GRID for s in seeds_taken):
            continue
        seeds_taken.append(z_seed)
        if len(seeds_taken) > _INV_SEEDS:
            break
        zk = z_seed
        try:
            for _ in range(_INV_NEWTON_CAP):
                f, fp = wp_with_prime(zk, lat)
                err = abs(f - w)
                best_resid = min(best_resid, err)
                if err <= tol:
                    break
                if fp == 0:
                    break
                zk = zk - (f - w) / fp
            else:
                continue
        except PoleProximity:
            continue
        f = wp(zk, lat)
        if abs(f - w) <= tol and region.contains(zk):
            if not any(abs(zk - r) < 1e-8 for r in roots):
                roots.append(complex(zk))
    if not roots:
        raise NoRootInRegion(
            f"no root of wp(z)={w!r} found in {region!r} (best residual {best_resid:.3e})",
            best_residual=best_resid,
        )
    roots.sort(key=lambda r: (round(r.imag, 12), round(r.real, 12)))
    return roots[0]
