"""Slit-pair geometry: admissibility checks and canonical normalization.

The solver works in a canonical frame: the carrier-line intersection at the
origin, the fixed slit on the ray ``arg w = -beta/2`` and the moving slit on
``arg w = +beta/2`` (generic case), or both carriers horizontal and symmetric
about the real axis (parallel case).  ``normalize_*`` map an arbitrary
admissible input into that frame, record the isometry so results can be
mapped back, and produce the constant endpoint velocities of the homotopy
that slides the moving slit from the mirror-symmetric start position onto
its target.  Only the first slit moves; the second is held fixed, swapping
the two when the renumbering rules require it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateGeometry

_DISJOINT_TOL = 1e-9      # min segment distance, in units of the larger slit
_PARALLEL_TOL = 1e-12     # |sin angle| below which carriers count as parallel
_NEAR_PARALLEL = 1e-6     # rejected band: ill-conditioned generic ODE
_CONTAIN_TOL = 1e-9


class CaseTag(Enum):
    GENERIC = "generic"
    PARALLEL = "parallel"


@dataclass(frozen=True)
class SlitConfig:
    """Endpoints of the two slits A1A2 and A3A4 in plane coordinates."""

    a1: complex
    a2: complex
    a3: complex
    a4: complex

    @property
    def endpoints(self) -> tuple[complex, complex, complex, complex]:
        return (self.a1, self.a2, self.a3, self.a4)

    def diameter(self) -> float:
        pts = self.endpoints
        return max(abs(p - q) for p in pts for q in pts)

    def scaled(self, factor: complex, offset: complex = 0.0) -> "SlitConfig":
        return SlitConfig(*(factor * p + offset for p in self.endpoints))


@dataclass(frozen=True)
class PlaneIsometry:
    """w_work = rotation*(w - origin), with optional conjugation first.

    Maps input-plane points to the solver's working frame and back.
    """

    origin: complex
    rotation: complex
    reflect: bool = False

    def to_working(self, w: complex) -> complex:
        d = w - self.origin
        if self.reflect:
            d = d.conjugate()
        return self.rotation * d

    def to_input(self, w: complex) -> complex:
        d = w / self.rotation
        if self.reflect:
            d = d.conjugate()
        return self.origin + d

    def transform_vector(self, v: complex) -> complex:
        """Direction/velocity transform (no translation)."""
        if self.reflect:
            v = v.conjugate()
        return self.rotation * v


@dataclass(frozen=True)
class NormalizedConfig:
    """Canonical-frame description of an admissible slit pair.

    Velocities v1, v2 are the constant working-frame speeds of the moving
    tips over the homotopy time t in [0, 1]; the fixed slit never moves.
    ``targets`` are the working-frame endpoint positions at t = 1 (indexed
    A1..A4) and ``start1/start2`` the mirror-symmetric initial positions of
    the moving tips.  For the generic case l1 is signed (negative when the
    carrier intersection lies inside the moving slit) and 0 < l3 < l4.
    """

    case_tag: CaseTag
    beta: float
    v1: complex
    v2: complex
    targets: tuple[complex, complex, complex, complex]
    start1: complex
    start2: complex
    motion: PlaneIsometry
    swapped: bool
    reflected: bool
    a5: complex | None = None
    l1: float | None = None
    l2: float | None = None
    l3: float | None = None
    l4: float | None = None
    slit_length: float | None = None
    half_gap: float | None = None

    @property
    def is_static(self) -> bool:
        scale = max(abs(t) for t in self.targets)
        return abs(self.v1) <= 1e-13 * scale and abs(self.v2) <= 1e-13 * scale


def _segment_distance(p1: complex, p2: complex, q1: complex, q2: complex) -> float:
    """Euclidean distance between segments [p1,p2] and [q1,q2]."""

    def orient(a: complex, b: complex, c: complex) -> float:
        return ((b - a).conjugate() * (c - a)).imag

    def point_seg(p: complex, a: complex, b: complex) -> float:
        ab = b - a
        denom = abs(ab) ** 2
        t = 0.0 if denom == 0.0 else max(0.0, min(1.0, ((p - a).conjugate() * ab).real / denom))
        return abs(p - (a + t * ab))

    d1, d2 = orient(p1, p2, q1), orient(p1, p2, q2)
    d3, d4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2 and d3 != d4:
        return 0.0
    return min(point_seg(q1, p1, p2), point_seg(q2, p1, p2),
               point_seg(p1, q1, q2), point_seg(p2, q1, q2))


def _point_on_segment(p: complex, a: complex, b: complex, tol: float) -> bool:
    ab = b - a
    if abs(ab) == 0.0:
        return abs(p - a) <= tol
    t = max(0.0, min(1.0, ((p - a).conjugate() * ab).real / abs(ab) ** 2))
    return abs(p - (a + t * ab)) <= tol


def _validate(cfg: SlitConfig) -> None:
    len1 = abs(cfg.a2 - cfg.a1)
    len2 = abs(cfg.a4 - cfg.a3)
    scale = max(len1, len2)
    if scale == 0.0:
        raise DegenerateGeometry("both slits degenerate to points")
    if min(len1, len2) < _DISJOINT_TOL * scale:
        raise DegenerateGeometry(f"slit of relative length {min(len1, len2) / scale:.2e} is degenerate")
    dist = _segment_distance(cfg.a1, cfg.a2, cfg.a3, cfg.a4)
    if dist < _DISJOINT_TOL * scale:
        raise DegenerateGeometry(
            f"slits intersect or nearly touch (relative distance {dist / scale:.2e})"
        )


def classify(cfg: SlitConfig) -> CaseTag:
    """Parallel vs generic carriers; rejects degenerate configurations.

    Collinear carriers, intersecting slits and nearly-parallel-but-not-
    parallel carriers (angle below 1e-6 rad) all raise DegenerateGeometry.
    """
    _validate(cfg)
    d1 = cfg.a2 - cfg.a1
    d2 = cfg.a4 - cfg.a3
    cross = (d1 * d2.conjugate()).imag
    sin_angle = abs(cross) / (abs(d1) * abs(d2))
    if sin_angle < _PARALLEL_TOL:
        # same carrier line?
        offset = abs(((cfg.a3 - cfg.a1) * d1.conjugate()).imag) / abs(d1)
        if offset < _DISJOINT_TOL * max(abs(d1), abs(d2)):
            raise DegenerateGeometry("slits lie on one carrier line (collinear)")
        return CaseTag.PARALLEL
    if sin_angle < _NEAR_PARALLEL:
        raise DegenerateGeometry(
            f"carriers nearly parallel (angle ~ {sin_angle:.2e} rad): refusing ill-conditioned case"
        )
    return CaseTag.GENERIC


def _wrap_angle(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    out = math.fmod(phi + math.pi, 2.0 * math.pi)
    if out <= 0.0:
        out += 2.0 * math.pi
    return out - math.pi


def normalize_generic(cfg: SlitConfig) -> NormalizedConfig:
    """Canonicalize a generic (non-parallel) slit pair.

    Renumbering rules: the fixed slit must not contain the carrier
    intersection A5 (swap the slit roles otherwise); within the fixed pair
    A4 is farther from A5 than A3; within the moving pair A2 is farther
    (or, when A5 lies inside the moving slit, A2 is the tip on the ray at
    angle +beta from the fixed ray, the opposite tip getting a signed
    negative distance).  A reflection is recorded whenever the raw angle
    comes out negative, reducing beta to (0, pi).
    """
    if classify(cfg) is not CaseTag.GENERIC:
        raise DegenerateGeometry("normalize_generic called on non-generic configuration")
    a1, a2, a3, a4 = cfg.endpoints
    d1 = a2 - a1
    d2 = a4 - a3
    denom = (d1 * d2.conjugate()).imag
    scale = max(abs(d1), abs(d2))
    if abs(denom) < 1e-14 * abs(d1) * abs(d2):
        raise DegenerateGeometry("carrier intersection is numerically singular")
    # intersection of the two carrier lines
    t = ((a3 - a1) * d2.conjugate()).imag / denom
    a5 = a1 + t * d1

    tol = _CONTAIN_TOL * scale
    moving = [a1, a2]
    fixed = [a3, a4]
    swapped = False
    if _point_on_segment(a5, fixed[0], fixed[1], tol):
        if _point_on_segment(a5, moving[0], moving[1], tol):
            raise DegenerateGeometry("both slits meet the carrier intersection")
        moving, fixed = fixed, moving
        swapped = True

    # fixed slit: entirely on one ray from a5; order near/far
    if abs(fixed[0] - a5) > abs(fixed[1] - a5):
        fixed = [fixed[1], fixed[0]]
    l3 = abs(fixed[0] - a5)
    l4 = abs(fixed[1] - a5)
    if l3 <= tol:
        raise DegenerateGeometry("fixed slit touches the carrier intersection")
    phi_f = cmath.phase(fixed[1] - a5)

    # Moving slit: the farther tip fixes the moving ray; the near tip gets a
    # signed coordinate along it (negative iff A5 lies inside the slit).
    # This covers the A5-on-slit, A5-at-tip and disjoint cases uniformly.
    reflected = False
    if abs(moving[0] - a5) > abs(moving[1] - a5):
        moving = [moving[1], moving[0]]
    l2 = abs(moving[1] - a5)
    phi_m = cmath.phase(moving[1] - a5)
    l1 = ((moving[0] - a5) * cmath.exp(-1j * phi_m)).real
    if abs(l1) <= tol:
        l1 = 0.0
    delta = _wrap_angle(phi_m - phi_f)
    if delta < 0.0:
        reflected = True
        delta = -delta
    beta = delta
    if not 0.0 < beta < math.pi:
        raise DegenerateGeometry(f"carrier angle beta={beta} outside (0, pi)")

    if reflected:
        motion = PlaneIsometry(origin=a5, rotation=cmath.exp(1j * (phi_f - beta / 2.0)),
                               reflect=True)
    else:
        motion = PlaneIsometry(origin=a5, rotation=cmath.exp(-1j * (phi_f + beta / 2.0)))

    e_m = cmath.exp(1j * beta / 2.0)   # moving-ray direction in the working frame
    e_f = cmath.exp(-1j * beta / 2.0)
    targets = (l1 * e_m, l2 * e_m, l3 * e_f, l4 * e_f)
    start1 = l3 * e_m
    start2 = l4 * e_m
    v1 = (l1 - l3) * e_m
    v2 = (l2 - l4) * e_m
    return NormalizedConfig(
        case_tag=CaseTag.GENERIC, beta=beta, v1=v1, v2=v2,
        targets=targets, start1=start1, start2=start2, motion=motion,
        swapped=swapped, reflected=reflected,
        a5=a5, l1=l1, l2=l2, l3=l3, l4=l4,
    )


def normalize_parallel(cfg: SlitConfig) -> NormalizedConfig:
    """Canonicalize a parallel slit pair.

    Working frame: carriers horizontal, the moving slit above the fixed one,
    the fixed slit centred on the imaginary axis, the mid-line between the
    carriers on the real axis.  beta = 0, velocities are real.
    """
    if classify(cfg) is not CaseTag.PARALLEL:
        raise DegenerateGeometry("normalize_parallel called on non-parallel configuration")
    a1, a2, a3, a4 = cfg.endpoints
    rot = abs(a4 - a3) / (a4 - a3)
    p1, p2, p3, p4 = (rot * a for a in (a1, a2, a3, a4))
    if abs(p1.imag - p3.imag) < _DISJOINT_TOL * max(abs(a2 - a1), abs(a4 - a3)):
        raise DegenerateGeometry("parallel slits on the same carrier")
    if p1.imag < p3.imag:
        rot = -rot
        p1, p2, p3, p4 = -p1, -p2, -p3, -p4
    if p1.real > p2.real:
        p1, p2 = p2, p1
    if p3.real > p4.real:
        p3, p4 = p4, p3
    slit_length = p4.real - p3.real
    half_gap = 0.5 * (p1.imag - p3.imag)
    center = 0.5 * (p3 + p4).real + 0.5j * (p1.imag + p3.imag)
    motion = PlaneIsometry(origin=center / rot, rotation=rot)
    q1, q2, q3, q4 = (p - center for p in (p1, p2, p3, p4))
    start1 = q3.conjugate()
    start2 = q4.conjugate()
    v1 = (q1 - start1).real
    v2 = (q2 - start2).real
    return NormalizedConfig(
        case_tag=CaseTag.PARALLEL, beta=0.0, v1=complex(v1), v2=complex(v2),
        targets=(q1, q2, q3, q4), start1=start1, start2=start2, motion=motion,
        swapped=False, reflected=False,
        slit_length=slit_length, half_gap=half_gap,
    )


def normalize(cfg: SlitConfig) -> NormalizedConfig:
    """Dispatch on classify()."""
    if classify(cfg) is CaseTag.PARALLEL:
        return normalize_parallel(cfg)
    return normalize_generic(cfg)
