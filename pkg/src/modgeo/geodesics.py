"""Geodesic semicircles attached to indefinite forms: crossing predicates,
intersection points, angles, signs, and complete enumeration of the
intersections of a closed geodesic with a second closed geodesic or with a
vertical ray, modulo the group.

Conventions (pinned, used consistently everywhere):
  * A form (A,B,C) with A != 0 describes the semicircle |z - m| = r with
    m = -B/2A, r = sqrt(D)/2|A|, oriented from the repelling to the
    attracting fixed point of its automorph: clockwise for A > 0.
  * The intersection angle is the counterclockwise rotation mod pi taking
    the tangent line of the first geodesic to that of the second; it does
    not depend on either orientation, and swapping the arguments replaces
    theta by pi - theta.  Closed form for two circles:
        cos theta = sign(m1 - m2) (r1^2 + r2^2 - (m1-m2)^2) / (2 r1 r2),
    and against the vertical line x = x0:
        cos theta = (x0 - m1) / r1.
  * The intersection sign is mu = -sign(Q1(w, 1)) with w the repelling
    fixed point of the second geodesic; it flips when either orientation
    is reversed, and for two A > 0 forms reduces to "+1 iff the left
    endpoint of the second lies between the endpoints of the first".

All predicates and the angle magnitudes are decided in exact integer or
rational arithmetic; floating point only enters when rendering points and
cosines to floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .qforms import (
    FormClass,
    GroupElement,
    QForm,
    form_from_matrix,
    is_primitive_hyperbolic,
    normalize_hyperbolic,
    require_indefinite,
    translation_groups,
    two_term_sign,
)


class GeodesicError(ValueError):
    """Geometrically invalid request (coincident axes, no crossing, ...)."""


# ---------------------------------------------------------------------------
# exact quadratic irrationals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Surd:
    """(P + Q*sqrt(D))/R with integer entries, D > 0 non-square, R > 0."""

    P: int
    Q: int
    R: int
    D: int

    def __post_init__(self) -> None:
        if self.R == 0:
            raise GeodesicError("zero denominator in surd")
        P, Q, R = self.P, self.Q, self.R
        if R < 0:
            P, Q, R = -P, -Q, -R
        g = math.gcd(math.gcd(abs(P), abs(Q)), R)
        object.__setattr__(self, "P", P // g)
        object.__setattr__(self, "Q", Q // g)
        object.__setattr__(self, "R", R // g)

    def __float__(self) -> float:
        return (self.P + self.Q * math.sqrt(self.D)) / self.R

    def _cmp(self, other) -> int:
        if isinstance(other, Surd):
            if other.D != self.D:
                raise GeodesicError("cannot compare surds over different fields")
            p = self.P * other.R - other.P * self.R
            q = self.Q * other.R - other.Q * self.R
            return two_term_sign(p, q, self.D) if (p or q) else 0
        frac = Fraction(other)
        p = self.P * frac.denominator - frac.numerator * self.R
        q = self.Q * frac.denominator
        return two_term_sign(p, q, self.D) if (p or q) else 0

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def conjugate(self) -> "Surd":
        return Surd(self.P, -self.Q, self.R, self.D)

    def __neg__(self) -> "Surd":
        return Surd(-self.P, -self.Q, self.R, self.D)


def form_sign_at_surd(Q: QForm, w: Surd) -> int:
    """Exact sign of Q(w, 1) for a quadratic surd w."""
    P, Qc, R, d = w.P, w.Q, w.R, w.D
    p = Q.A * (P * P + Qc * Qc * d) + Q.B * P * R + Q.C * R * R
    q = 2 * Q.A * P * Qc + Q.B * Qc * R
    if p == 0 and q == 0:
        return 0
    return two_term_sign(p, q, d)


# ---------------------------------------------------------------------------
# endpoints and descriptive geodesic records
# ---------------------------------------------------------------------------

def roots(Q: QForm) -> tuple[Surd, Surd]:
    """The two real roots of Q(x,1), sorted increasingly."""
    D = require_indefinite(Q)
    lo = Surd(-Q.B, -1, 2 * Q.A, D)
    hi = Surd(-Q.B, 1, 2 * Q.A, D)
    return (lo, hi) if Q.A > 0 else (hi, lo)


def oriented_endpoints(Q: QForm) -> tuple[Surd, Surd]:
    """(repelling, attracting) fixed points of the geodesic of Q.

    The positive-trace automorph attracts toward (-B + sqrt(D))/(2A): the
    larger root when A > 0 (clockwise flow), the smaller when A < 0.
    """
    D = require_indefinite(Q)
    return (Surd(-Q.B, -1, 2 * Q.A, D), Surd(-Q.B, 1, 2 * Q.A, D))


def center(Q: QForm) -> Fraction:
    return Fraction(-Q.B, 2 * Q.A)


def radius_sq(Q: QForm) -> Fraction:
    return Fraction(Q.disc, 4 * Q.A * Q.A)


@dataclass(frozen=True)
class Geodesic:
    """Descriptive record of a geodesic: a semicircle or a vertical ray."""

    kind: str                       # "semicircle" or "vertical"
    w_low: Surd | None = None
    w_high: Surd | None = None
    x: Fraction | None = None
    clockwise: bool | None = None
    source: tuple | None = None

    @staticmethod
    def from_form(Q: QForm) -> "Geodesic":
        lo, hi = roots(Q)
        return Geodesic(kind="semicircle", w_low=lo, w_high=hi,
                        clockwise=Q.A > 0, source=Q.as_tuple())

    @staticmethod
    def vertical(d: int, c: int) -> "Geodesic":
        if c <= 0 or math.gcd(c, d) != 1:
            raise GeodesicError(f"need gcd(c,d)=1 and c>0, got ({d},{c})")
        return Geodesic(kind="vertical", x=Fraction(-d, c), source=(d, c))

    def as_json(self) -> dict:
        if self.kind == "semicircle":
            return {"kind": self.kind, "w_low": float(self.w_low),
                    "w_high": float(self.w_high),
                    "clockwise": self.clockwise, "source": list(self.source)}
        return {"kind": self.kind, "x": [self.x.numerator,
                                         self.x.denominator],
                "source": list(self.source)}


# ---------------------------------------------------------------------------
# crossing predicates
# ---------------------------------------------------------------------------

def form_inner_product(Q1: QForm, Q2: QForm) -> int:
    """B1 B2 - 2(A1 C2 + A2 C1): polarization of the discriminant."""
    return Q1.B * Q2.B - 2 * (Q1.A * Q2.C + Q2.A * Q1.C)


def crosses(Q1: QForm, Q2: QForm) -> bool:
    """Whether the root pairs interlace: <Q1,Q2>^2 < D1 D2 exactly."""
    D1 = require_indefinite(Q1)
    D2 = require_indefinite(Q2)
    ip = form_inner_product(Q1, Q2)
    if ip * ip == D1 * D2:
        raise GeodesicError(
            f"forms {Q1.as_tuple()} and {Q2.as_tuple()} share their axis")
    return ip * ip < D1 * D2


def crosses_vertical(Q: QForm, d: int, c: int) -> bool:
    """Whether the geodesic of Q crosses the vertical at -d/c: A*Q(-d/c) < 0."""
    require_indefinite(Q)
    if c <= 0 or math.gcd(c, d) != 1:
        raise GeodesicError(f"need gcd(c,d)=1 and c>0, got ({d},{c})")
    val = Q.A * d * d - Q.B * c * d + Q.C * c * c   # c^2 Q(-d/c, 1)
    return Q.A * val < 0


# ---------------------------------------------------------------------------
# single-intersection data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Intersection:
    point: complex
    cos_angle: float
    angle: float
    sign: int
    witness_form: QForm

    def as_json(self) -> dict:
        return {"point": [self.point.real, self.point.imag],
                "cos_angle": self.cos_angle, "angle": self.angle,
                "sign": self.sign,
                "form": list(self.witness_form.as_tuple())}


def _clamp(x: float) -> float:
    return max(-1.0, min(1.0, x))


def crossing_x(Q1: QForm, Q2: QForm) -> Fraction:
    """x-coordinate of the intersection of the two semicircles, exact."""
    m1, m2 = center(Q1), center(Q2)
    if m1 == m2:
        raise GeodesicError("concentric geodesics do not cross")
    r1s, r2s = radius_sq(Q1), radius_sq(Q2)
    return (r1s - r2s - m1 * m1 + m2 * m2) / (2 * (m2 - m1))


def intersection_data(Q1: QForm, Q2: QForm) -> Intersection:
    """Intersection of the geodesics of Q1 (first) and Q2 (second)."""
    if not crosses(Q1, Q2):
        raise GeodesicError(
            f"geodesics of {Q1.as_tuple()} and {Q2.as_tuple()} do not cross")
    m1, m2 = center(Q1), center(Q2)
    r1s = radius_sq(Q1)
    x = crossing_x(Q1, Q2)
    y2 = r1s - (x - m1) ** 2
    point = complex(float(x), math.sqrt(float(y2)))
    # cos theta = sign(m1-m2) (r1^2 + r2^2 - (m1-m2)^2) / (2 r1 r2)
    num = r1s + radius_sq(Q2) - (m1 - m2) ** 2
    scale = math.sqrt(Q1.disc * Q2.disc) / (4 * abs(Q1.A * Q2.A))
    cos = (1 if m1 > m2 else -1) * float(num) / (2 * scale)
    cos = _clamp(cos)
    repelling = oriented_endpoints(Q2)[0]
    mu = -form_sign_at_surd(Q1, repelling)
    return Intersection(point=point, cos_angle=cos, angle=math.acos(cos),
                        sign=mu, witness_form=Q1)


def intersection_data_vertical(Q: QForm, d: int, c: int) -> Intersection:
    """Intersection of the geodesic of Q (first) with the vertical ray at
    -d/c (second), the ray oriented from -d/c up to the cusp."""
    if not crosses_vertical(Q, d, c):
        raise GeodesicError(
            f"geodesic of {Q.as_tuple()} does not cross x = {-d}/{c}")
    x0 = Fraction(-d, c)
    m = center(Q)
    y2 = radius_sq(Q) - (x0 - m) ** 2
    point = complex(float(x0), math.sqrt(float(y2)))
    # (x0 - m)/r = sign(A) (Bc - 2Ad) / (c sqrt(D))
    cos = _clamp(float(x0 - m) * 2 * abs(Q.A) / math.sqrt(Q.disc))
    # repelling endpoint of the upward ray is -d/c itself
    val = Q.A * d * d - Q.B * c * d + Q.C * c * c
    mu = -(1 if val > 0 else -1)
    return Intersection(point=point, cos_angle=cos, angle=math.acos(cos),
                        sign=mu, witness_form=Q)


# ---------------------------------------------------------------------------
# enumeration against a closed geodesic
# ---------------------------------------------------------------------------

def _sigma_segment(sigma: GroupElement) -> tuple[QForm, Fraction, Fraction,
                                                 Fraction, Fraction]:
    """Fundamental segment data for a normalized sigma: the form, center,
    squared radius, right x-end Re(sigma . apex), and squared end height."""
    Qs = form_from_matrix(sigma)
    ms = center(Qs)
    r2 = radius_sq(Qs)
    a, b, c, d = sigma.a, sigma.b, sigma.c, sigma.d
    den = (c * ms + d) ** 2 + c * c * r2
    x_end = ((a * ms + b) * (c * ms + d) + a * c * r2) / den
    y2_end = r2 - (x_end - ms) ** 2
    if not (ms < x_end and y2_end > 0):
        raise GeodesicError("internal: malformed fundamental segment")
    return Qs, ms, r2, x_end, y2_end


def _class_guard(gamma_cls: FormClass, Qs: QForm) -> None:
    pp = Qs.primitive_part()
    prim_cls = FormClass.from_form(gamma_cls.seed.primitive_part())
    if prim_cls.contains(pp) or prim_cls.contains(-pp):
        raise GeodesicError(
            "gamma class and sigma share a closed geodesic; "
            "intersections are not transversal")


def enumerate_closed_intersections(gamma_cls: FormClass,
                                   sigma: GroupElement) -> list[Intersection]:
    """All intersections of the closed geodesic of gamma_cls with the closed
    geodesic of sigma on the modular surface.

    One record per class form whose own crossing point lies on the
    fundamental segment [apex, sigma.apex) of the sigma geodesic; this walks
    each double coset exactly once.  Completeness: a crossing at height y
    forces |A| <= sqrt(D_gamma)/(2y), and the segment height is minimal at
    its right end.
    """
    sigma = normalize_hyperbolic(sigma)
    if not is_primitive_hyperbolic(sigma):
        raise GeodesicError(f"sigma {sigma.as_tuple()} is not primitive")
    Qs, ms, r2s, x_end, y2_end = _sigma_segment(sigma)
    _class_guard(gamma_cls, Qs)
    Dg = gamma_cls.disc
    bound = Fraction(Dg) / (4 * y2_end)
    HA = math.isqrt(int(bound))
    found: list[tuple[Fraction, QForm]] = []
    for (A, Bc) in translation_groups(gamma_cls, HA):
        for B in _center_window(A, Bc, Dg, ms, x_end):
            C = (B * B - Dg) // (4 * A)
            Qp = QForm(A, B, C)
            if not crosses(Qp, Qs):
                continue
            x = crossing_x(Qp, Qs)
            if ms <= x < x_end:
                found.append((x, Qp))
    found.sort(key=lambda t: (t[0], t[1].as_tuple()))
    return [intersection_data(Qp, Qs) for _, Qp in found]


def _center_window(A: int, Bc: int, D: int, x_lo: Fraction,
                   x_hi: Fraction, slack: int = 0) -> range:
    """Integers B = Bc mod 2|A| whose form center -B/2A can put a crossing
    on [x_lo, x_hi]: the center must lie within one radius of the window,
    so B ranges over -2A*[x_lo, x_hi] widened by sqrt(D) (exact, rounded
    outward)."""
    e1, e2 = -2 * A * x_lo, -2 * A * x_hi
    fmin, fmax = min(e1, e2), max(e1, e2)
    w = math.isqrt(D) + 1 + slack
    blo = fmin.numerator // fmin.denominator - w          # floor - w
    bhi = -((-fmax.numerator) // fmax.denominator) + w    # ceil + w
    m = 2 * abs(A)
    start = blo + ((Bc - blo) % m)
    return range(start, bhi + 1, m)


def closed_intersection_count_doubled(gamma_cls: FormClass,
                                      sigma: GroupElement,
                                      factor: int = 2) -> int:
    """Re-run the segment scan with all bounds widened by factor; used to
    prove completeness of the production bound on test instances."""
    sigma = normalize_hyperbolic(sigma)
    Qs, ms, r2s, x_end, y2_end = _sigma_segment(sigma)
    _class_guard(gamma_cls, Qs)
    Dg = gamma_cls.disc
    HA = factor * math.isqrt(int(Fraction(Dg) / (4 * y2_end)))
    count = 0
    for (A, Bc) in translation_groups(gamma_cls, HA):
        slack = factor * (2 * abs(A) + math.isqrt(Dg))
        for B in _center_window(A, Bc, Dg, ms, x_end, slack=slack):
            C = (B * B - Dg) // (4 * A)
            Qp = QForm(A, B, C)
            if not crosses(Qp, Qs):
                continue
            if ms <= crossing_x(Qp, Qs) < x_end:
                count += 1
    return count


# ---------------------------------------------------------------------------
# enumeration against a vertical ray
# ---------------------------------------------------------------------------

def enumerate_vertical_intersections(gamma_cls: FormClass, d: int,
                                     c: int) -> list[Intersection]:
    """All class forms whose geodesic crosses the vertical at -d/c, with
    their intersection records.

    Completeness: |Q(-d/c,1)| >= 1/c^2 for integral forms while a crossing
    form satisfies |Q(-d/c,1)| <= D/(4|A|), so |A| <= D c^2 / 4.  Within
    each |A| the crossing condition pins B to |Bc - 2Ad| < c sqrt(D).
    """
    if c <= 0 or math.gcd(c, d) != 1:
        raise GeodesicError(f"need gcd(c,d)=1 and c>0, got ({d},{c})")
    D = gamma_cls.disc
    HA = (D * c * c) // 4
    out: list[tuple[Fraction, QForm]] = []
    for A in range(-HA, HA + 1):
        if A == 0:
            continue
        # |Bc - 2Ad| < c sqrt(D): integer window via isqrt
        w = math.isqrt(c * c * D)
        lo, hi = 2 * A * d - w, 2 * A * d + w
        Blo = -(-lo // c)           # ceil(lo/c)
        Bhi = hi // c
        for B in range(Blo, Bhi + 1):
            if (B * c - 2 * A * d) ** 2 >= c * c * D:
                continue
            num = B * B - D
            if num % (4 * A) != 0:
                continue
            Qp = QForm(A, B, num // (4 * A))
            if not gamma_cls.contains(Qp):
                continue
            if not crosses_vertical(Qp, d, c):
                continue
            y2 = radius_sq(Qp) - (Fraction(-d, c) - center(Qp)) ** 2
            out.append((-y2, Qp))
    out.sort(key=lambda t: (t[0], t[1].as_tuple()))
    return [intersection_data_vertical(Qp, d, c) for _, Qp in out]
