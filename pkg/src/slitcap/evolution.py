"""Transport of accessory parameters along the slit homotopy.

State: the four real abscissas x1..x4 of the slit-tip preimages
(z1 = x1, z2 = x2, z3 = x3 + i*m, z4 = x4 - i*m), the module m, the pole
ordinate y0 (map pole at z0 = i*y0, y0 in (-m, 0)) and the complex
log-residue a.  All elliptic functions live on the doubled lattice
(1, 2*m*i); eta1 = 2 zeta(1/2) and gamma = (beta/pi) * eta1 on that lattice.

Right-hand side, with G_k = Adot_k / f''(z_k) and G3 = G4 = 0 because only
the first slit moves:

    dm   = pi * Re(G1 + G2)
    dx_l = -Re[ G_l * (sum_{s!=l} zeta(z_l-z_s) + gamma - eta1 (z_l-z0)
                       - zeta(z_l-z0) - 2 zeta(z_l+z0))
                + sum_{j!=l} G_j * (zeta(z_l-z_j) - zeta(z0-z_j)
                                    - eta1 (z_l-z0)) ]
    da   = G1 wp(z0-z1) + G2 wp(z0-z2) + eta1 (G1 + G2)
    dy0  = Im[ -sum_k wp(z0-z_k) zdot_k / D ]
           + Re[ (4 dzeta(2 z0) - (4 beta/pi) dzeta(1/2)
                  - 2 sum_k dzeta(z0-z_k)) / D ] * dm,
    D = 4 wp(2 z0) - sum_k wp(z0-z_k),  dzeta = d zeta / d omega2.

The dy0 row is the time derivative of the vanishing-residue identity
  gamma + sum_k zeta(z0-z_k) - 2 zeta(2 z0) = 0,
so that identity and sum_k x_k = beta/pi are first integrals; both are
monitored at every accepted step.  The imaginary parts of z3, z4, z0 are
slaved to m and y0 exactly (the state stays real), which removes the drift
a fully complex formulation would admit.

Integration uses an embedded Dormand-Prince 5(4) pair with standard PI-free
step control; a step that lands on a near-collision (PoleProximity /
SingularPinch inside a stage) is rejected and retried at half the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import Lattice, dzeta_domega2, lattice_from_periods, sigma, wp, zeta_w, _reduce
from .errors import (
    ConvergenceFailure,
    DefectBlowup,
    OutOfRange,
    PoleProximity,
    SingularPinch,
    StepSizeUnderflow,
)
from .geometry import CaseTag, NormalizedConfig

_GAMMA_POLE_TOL = 1e-10
_PINCH_TOL = 1e-10
_DT_FLOOR = 1e-12
_DEFECT_WARN = 1e-7
_DEFECT_ABORT = 1e-5
_MAX_STEPS = 200_000


@dataclass(frozen=True)
class AccessoryState:
    """Accessory parameters at homotopy time t."""

    x1: float
    x2: float
    x3: float
    x4: float
    m: float
    y0: float
    a: complex
    t: float = 0.0

    @property
    def z0(self) -> complex:
        return 1j * self.y0

    def z_points(self) -> np.ndarray:
        return np.array([self.x1, self.x2,
                         self.x3 + 1j * self.m, self.x4 - 1j * self.m])

    def lattice(self) -> Lattice:
        return lattice_from_periods(2.0 * self.m)

    def pack(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4,
                         self.m, self.y0, self.a.real, self.a.imag])

    @staticmethod
    def unpack(y: np.ndarray, t: float) -> "AccessoryState":
        return AccessoryState(x1=float(y[0]), x2=float(y[1]), x3=float(y[2]),
                              x4=float(y[3]), m=float(y[4]), y0=float(y[5]),
                              a=complex(y[6], y[7]), t=t)


@dataclass(frozen=True)
class StateDerivative:
    dx1: float
    dx2: float
    dx3: float
    dx4: float
    dm: float
    dy0: float
    da: complex

    def pack(self) -> np.ndarray:
        return np.array([self.dx1, self.dx2, self.dx3, self.dx4,
                         self.dm, self.dy0, self.da.real, self.da.imag])


@dataclass
class StepStat:
    t: float
    dt: float
    error_norm: float


@dataclass
class Trajectory:
    """Accepted states with per-step error estimates and constraint defects."""

    samples: list[AccessoryState] = field(default_factory=list)
    step_stats: list[StepStat] = field(default_factory=list)
    defect_log: list[tuple[float, float, float]] = field(default_factory=list)

    @property
    def initial(self) -> AccessoryState:
        return self.samples[0]

    @property
    def final(self) -> AccessoryState:
        return self.samples[-1]

    def max_defects(self) -> tuple[float, float]:
        sums = max(d[1] for d in self.defect_log)
        res = max(d[2] for d in self.defect_log)
        return sums, res


def _assert_clear(args: np.ndarray, lat: Lattice, tol: float, what: str) -> None:
    z0, _, _ = _reduce(args, lat)
    dist = float(np.min(np.abs(z0)))
    if dist < tol:
        raise PoleProximity(f"{what}: argument within {dist:.3e} of a lattice point")


def _gammas(state: AccessoryState, v1: complex, v2: complex, beta: float,
            lat: Lattice) -> tuple[complex, complex]:
    """G_k = Adot_k / f''(z_k) for the two moving tips, via Eq.-(d) elimination
    of the map scale (the log-residue a carries it)."""
    z = state.z_points()
    z0 = state.z0
    eta1 = lat.eta1.real
    gam = (beta / math.pi) * eta1
    args = np.array([
        z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3], 2.0 * z0,
        z[0] - z0, z[0] + z0, z[0] - z[1], z[0] - z[2], z[0] - z[3],
        z[1] - z0, z[1] + z0, z[1] - z[0], z[1] - z[2], z[1] - z[3],
    ])
    _assert_clear(args, lat, _GAMMA_POLE_TOL, "gamma_k")
    sv = sigma(args, lat)
    pref = sv[0] * sv[1] * sv[2] * sv[3] / sv[4] ** 2
    g1 = -v1 * pref * np.exp(-(state.a + gam * (z[0] - z0))) \
        * sv[5] ** 2 * sv[6] ** 2 / (sv[7] * sv[8] * sv[9])
    g2 = -v2 * pref * np.exp(-(state.a + gam * (z[1] - z0))) \
        * sv[10] ** 2 * sv[11] ** 2 / (sv[12] * sv[13] * sv[14])
    return complex(g1), complex(g2)


def gamma_k(state: AccessoryState, ncfg: NormalizedConfig, k: int) -> complex:
    """Velocity-to-curvature ratio Adot_k / f''(z_k) for tip k in {1, 2}."""
    if k not in (1, 2):
        raise OutOfRange("only the moving tips k=1,2 have nonzero velocity")
    lat = state.lattice()
    g1, g2 = _gammas(state, ncfg.v1, ncfg.v2, ncfg.beta, lat)
    return g1 if k == 1 else g2


def module_slide_slope(state: AccessoryState, ncfg: NormalizedConfig,
                       input_direction: complex | None = None) -> float:
    """dm/da for a unit slide of the moving slit along its carrier.

    The solver-internal monotonicity indicator pi*Re(G1+G2) with both tips
    given the same unit velocity.  By default the slide direction is the
    positive moving-carrier direction of the working frame; pass the
    input-plane direction to measure the slope of a user-side sweep axis.
    """
    if input_direction is None:
        unit = np.exp(0.5j * ncfg.beta) if ncfg.case_tag is CaseTag.GENERIC else 1.0 + 0j
    else:
        unit = ncfg.motion.transform_vector(complex(input_direction))
        unit /= abs(unit)
    lat = state.lattice()
    g1, g2 = _gammas(state, unit, unit, ncfg.beta, lat)
    return math.pi * (g1 + g2).real


def rhs(state: AccessoryState, ncfg: NormalizedConfig) -> StateDerivative:
    """Time derivative of the accessory state along the homotopy."""
    lat = state.lattice()
    z = state.z_points()
    z0 = state.z0
    eta1 = lat.eta1.real
    beta = ncfg.beta
    gam = (beta / math.pi) * eta1

    g1, g2 = _gammas(state, ncfg.v1, ncfg.v2, beta, lat)
    dm = math.pi * (g1 + g2).real

    zargs = np.array([
        z[0] - z[1], z[0] - z[2], z[0] - z[3],   # u1 u2 u3
        z[1] - z[2], z[1] - z[3],                # u4 u5
        z[0] - z0, z[0] + z0,                    # w1p w1m
        z[1] - z0, z[1] + z0,                    # w2p w2m
    ])
    _assert_clear(zargs, lat, _GAMMA_POLE_TOL, "rhs")
    u1, u2, u3, u4, u5, w1p, w1m, w2p, w2m = zeta_w(zargs, lat)

    b1 = u1 + u2 + u3 + gam - eta1 * (z[0] - z0) - w1p - 2.0 * w1m
    c12 = u1 + w2p - eta1 * (z[0] - z0)
    dx1 = -(g1 * b1 + g2 * c12).real

    b2 = -u1 + u4 + u5 + gam - eta1 * (z[1] - z0) - w2p - 2.0 * w2m
    c21 = -u1 + w1p - eta1 * (z[1] - z0)
    dx2 = -(g2 * b2 + g1 * c21).real

    c31 = -u2 + w1p - eta1 * (z[2] - z0)
    c32 = -u4 + w2p - eta1 * (z[2] - z0)
    dx3 = -(g1 * c31 + g2 * c32).real

    c41 = -u3 + w1p - eta1 * (z[3] - z0)
    c42 = -u5 + w2p - eta1 * (z[3] - z0)
    dx4 = -(g1 * c41 + g2 * c42).real

    pargs = np.array([z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3], 2.0 * z0])
    _assert_clear(pargs, lat, _GAMMA_POLE_TOL, "rhs")
    pv = wp(pargs, lat)
    da = g1 * pv[0] + g2 * pv[1] + eta1 * (g1 + g2)

    denom = 4.0 * pv[4] - (pv[0] + pv[1] + pv[2] + pv[3])
    if abs(denom) < _PINCH_TOL:
        raise SingularPinch(f"pole-ordinate equation degenerate (|D|={abs(denom):.3e})")
    zdots = np.array([dx1, dx2, dx3 + 1j * dm, dx4 - 1j * dm])
    first = -(pv[0] * zdots[0] + pv[1] * zdots[1]
              + pv[2] * zdots[2] + pv[3] * zdots[3]) / denom
    dzargs = np.array([2.0 * z0, 0.5, z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3]])
    dzv = dzeta_domega2(dzargs, lat)
    second = (4.0 * dzv[0] - (4.0 * beta / math.pi) * dzv[1]
              - 2.0 * (dzv[2] + dzv[3] + dzv[4] + dzv[5])) / denom
    dy0 = first.imag + second.real * dm

    return StateDerivative(dx1=float(dx1), dx2=float(dx2), dx3=float(dx3),
                           dx4=float(dx4), dm=float(dm), dy0=float(dy0),
                           da=complex(da))


def constraint_defects(state: AccessoryState, beta: float) -> dict[str, float]:
    """Defects of the two first integrals at the given state."""
    sum_defect = abs(state.x1 + state.x2 + state.x3 + state.x4 - beta / math.pi)
    lat = state.lattice()
    z = state.z_points()
    z0 = state.z0
    gam = (beta / math.pi) * lat.eta1.real
    args = np.array([z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3], 2.0 * z0])
    vals = zeta_w(args, lat)
    residue = gam + vals[0] + vals[1] + vals[2] + vals[3] - 2.0 * vals[4]
    return {"sum_defect": float(sum_defect), "residue_defect": float(abs(residue))}


# Dormand-Prince 5(4): seven stages, first-same-as-last not exploited.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                    -17253 / 339200, 22 / 525, -1 / 40])


def _f(y: np.ndarray, t: float, ncfg: NormalizedConfig) -> np.ndarray:
    return rhs(AccessoryState.unpack(y, t), ncfg).pack()


def integrate(s0: AccessoryState, ncfg: NormalizedConfig,
              rel_tol: float = 1e-9, abs_tol: float = 1e-11) -> Trajectory:
    """Integrate the accessory system over the homotopy t in [0, 1].

    Raises StepSizeUnderflow (carrying the last good state) if adaptivity
    stalls, DefectBlowup if a monitored first integral drifts past 1e-5,
    and SingularPinch if the configuration degenerates mid-run.
    """
    if not (1e-13 <= rel_tol <= 1e-6) or not (1e-13 <= abs_tol <= 1e-6):
        raise OutOfRange(f"tolerances ({rel_tol}, {abs_tol}) outside [1e-13, 1e-6]")

    traj = Trajectory()
    t = 0.0
    y = s0.pack()
    traj.samples.append(AccessoryState.unpack(y, t))
    d0 = constraint_defects(traj.samples[0], ncfg.beta)
    traj.defect_log.append((t, d0["sum_defect"], d0["residue_defect"]))

    k = np.empty((7, y.size))
    dt = 1e-3
    nsteps = 0
    while t < 1.0:
        if nsteps > _MAX_STEPS:
            raise ConvergenceFailure("integration exceeded the step budget")
        dt = min(dt, 1.0 - t)
        try:
            k[0] = _f(y, t, ncfg)
            for i in range(1, 7):
                yi = y + dt * (_DP_A[i] @ k[:i])
                k[i] = _f(yi, t + _DP_C[i] * dt, ncfg)
        except (PoleProximity, SingularPinch):
            if dt <= _DT_FLOOR:
                raise
            dt *= 0.5
            continue
        y_new = y + dt * (_DP_B5 @ k)
        err = dt * (_DP_ERR @ k)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if not math.isfinite(err_norm):
            dt *= 0.5
            if dt < _DT_FLOOR:
                raise StepSizeUnderflow("non-finite error estimate at minimal step",
                                        last_state=AccessoryState.unpack(y, t),
                                        trajectory=traj)
            continue
        if err_norm <= 1.0:
            t += dt
            y = y_new
            state = AccessoryState.unpack(y, t)
            traj.samples.append(state)
            traj.step_stats.append(StepStat(t=t, dt=dt, error_norm=err_norm))
            d = constraint_defects(state, ncfg.beta)
            traj.defect_log.append((t, d["sum_defect"], d["residue_defect"]))
            if max(d["sum_defect"], d["residue_defect"]) > _DEFECT_ABORT:
                raise DefectBlowup(
                    f"first-integral defect {max(d.values()):.3e} above "
                    f"{_DEFECT_ABORT} at t={t:.6f}"
                )
            factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
        else:
            factor = max(0.2, 0.9 * err_norm ** -0.2)
        dt *= factor
        if dt < _DT_FLOOR:
            raise StepSizeUnderflow(f"step size underflow at t={t:.6f}",
                                    last_state=AccessoryState.unpack(y, t),
                                    trajectory=traj)
        nsteps += 1
    return traj


def initial_accessory_state(sym, t: float = 0.0) -> AccessoryState:
    """Wrap a SymmetricSolution into the evolution state at homotopy time t."""
    x1, x2, x3, x4 = sym.x_init
    return AccessoryState(x1=x1, x2=x2, x3=x3, x4=x4, m=sym.m0,
                          y0=sym.y0_init, a=sym.a0, t=t)
