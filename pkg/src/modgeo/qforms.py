"""Exact arithmetic for integer binary quadratic forms and SL2(Z).

A form (A, B, C) stands for Q(x, y) = A x^2 + B x y + C y^2.  Everything here
assumes (and validates where it matters) an indefinite, non-square
discriminant D = B^2 - 4AC > 0.  The group acts on the right,
(Q o g)(x, y) = Q(ax + by, cx + dy), so orbits of a form under SL2(Z) are the
classes enumerated by `reduction_cycle` / `class_representatives`.

`matrix_from_form` returns the positive-trace automorph assembled from the
fundamental solution of t^2 - D u^2 = 4.  For a form with content m > 1 that
automorph need not generate the full stabilizer (the generator belongs to the
primitive part), which is why orbit enumeration goes through
`stabilizer_automorph`.

`enumerate_orbit_bounded` walks coset representatives of the stabilizer
through an exact integer wedge: primitive first columns (x, y) taken modulo
the automorph, then translation orbits solved exactly.  No floating point is
involved anywhere in this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence


class QFormError(ValueError):
    """Invalid form, matrix, or discriminant for the requested operation."""


# ---------------------------------------------------------------------------
# exact sign helpers
# ---------------------------------------------------------------------------

def _sign(x) -> int:
    return (x > 0) - (x < 0)


def is_discriminant(D: int) -> bool:
    """True for D > 0, D = 0 or 1 mod 4, and D not a perfect square."""
    if D <= 0 or D % 4 not in (0, 1):
        return False
    r = math.isqrt(D)
    return r * r != D


def two_term_sign(p, q, d: int) -> int:
    """Exact sign of p + q*sqrt(d) for rational p, q and non-square d > 0."""
    if d <= 0:
        raise QFormError(f"two_term_sign needs d > 0, got {d}")
    sp, sq = _sign(p), _sign(q)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq if sp == 0 else sp
    # opposite signs: compare p^2 with q^2 d
    lhs, rhs = p * p, q * q * d
    if lhs == rhs:
        raise QFormError("sqrt(d) is rational; d must be non-square")
    return sp if lhs > rhs else sq


# ---------------------------------------------------------------------------
# group elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupElement:
    """An element (a, b; c, d) of SL2(Z)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for v in (self.a, self.b, self.c, self.d):
            if not isinstance(v, int):
                raise QFormError(f"matrix entries must be int, got {v!r}")
        if self.a * self.d - self.b * self.c != 1:
            raise QFormError(f"determinant must be 1: {self.as_tuple()}")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1, 0, 0, 1)

    @staticmethod
    def T(n: int = 1) -> "GroupElement":
        return GroupElement(1, n, 0, 1)

    @staticmethod
    def S() -> "GroupElement":
        return GroupElement(0, -1, 1, 0)

    # -- algebra -----------------------------------------------------------
    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "GroupElement":
        # -g acts identically on H; kept distinct as a matrix
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        result, base = GroupElement.identity(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- queries -----------------------------------------------------------
    @property
    def trace(self) -> int:
        return self.a + self.d

    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    # -- actions -----------------------------------------------------------
    def apply(self, z: complex) -> complex:
        """Moebius action on a point of the upper half plane."""
        num = self.a * z + self.b
        den = self.c * z + self.d
        return num / den

    def apply_column(self, x: int, y: int) -> tuple[int, int]:
        """Action on an integer column vector."""
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def cusp_image(self) -> Fraction | None:
        """Image of i*infinity: a/c as a Fraction, or None if fixed."""
        if self.c == 0:
            return None
        return Fraction(self.a, self.c)


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class QForm:
    """Integer binary quadratic form A x^2 + B x y + C y^2."""

    A: int
    B: int
    C: int

    def __post_init__(self) -> None:
        for v in (self.A, self.B, self.C):
            if not isinstance(v, int):
                raise QFormError(f"form coefficients must be int, got {v!r}")
        if self.A == 0 and self.B == 0 and self.C == 0:
            raise QFormError("the zero form is not allowed")

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def content(self) -> int:
        return math.gcd(math.gcd(abs(self.A), abs(self.B)), abs(self.C))

    def primitive_part(self) -> "QForm":
        m = self.content
        return QForm(self.A // m, self.B // m, self.C // m)

    def __call__(self, x, y):
        """Evaluate at (x, y); exact for int/Fraction, complex for complex."""
        return self.A * x * x + self.B * x * y + self.C * y * y

    def value_at(self, x):
        """Q(x, 1) for rational or complex x."""
        return self.A * x * x + self.B * x + self.C

    def __neg__(self) -> "QForm":
        return QForm(-self.A, -self.B, -self.C)

    def mirror(self) -> "QForm":
        """Reflection (A, -B, C): the form of the geodesic mirrored at x=0."""
        return QForm(self.A, -self.B, self.C)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.A, self.B, self.C)


def require_indefinite(Q: QForm) -> int:
    """Return disc(Q), raising unless it is positive and non-square."""
    D = Q.disc
    if not is_discriminant(D):
        raise QFormError(f"form {Q.as_tuple()} has disc {D}; "
                         "need positive non-square")
    return D


def apply_sl2(Q: QForm, g: GroupElement) -> QForm:
    """Right action (Q o g)(x, y) = Q(ax + by, cx + dy)."""
    a, b, c, d = g.a, g.b, g.c, g.d
    A2 = Q(a, c)
    C2 = Q(b, d)
    B2 = 2 * Q.A * a * b + Q.B * (a * d + b * c) + 2 * Q.C * c * d
    return QForm(A2, B2, C2)


def form_from_matrix(g: GroupElement) -> QForm:
    """The fixed-point form (c, d - a, -b) of a hyperbolic element."""
    if not g.is_hyperbolic():
        raise QFormError(f"matrix {g.as_tuple()} is not hyperbolic")
    return QForm(g.c, g.d - g.a, -g.b)


# ---------------------------------------------------------------------------
# reduction and classes
# ---------------------------------------------------------------------------

def is_reduced(Q: QForm) -> bool:
    """Reduced: 0 < B < sqrt(D) and sqrt(D) - B < 2|A| < sqrt(D) + B."""
    D = require_indefinite(Q)
    B, twoA = Q.B, 2 * abs(Q.A)
    if B <= 0 or B * B >= D:
        return False
    if (twoA + B) ** 2 <= D:        # need sqrt(D) < 2|A| + B
        return False
    if twoA - B >= 0 and (twoA - B) ** 2 >= D:   # need 2|A| - B < sqrt(D)
        return False
    return True


def reduction_step(Q: QForm) -> QForm:
    """One rho step (A, B, C) -> (C, B', (B'^2 - D)/(4C))."""
    D = require_indefinite(Q)
    C = Q.C
    if C == 0:
        raise QFormError("rho undefined for C = 0 (square discriminant)")
    ac = abs(C)
    s = math.isqrt(D)
    if C * C < D:
        # window sqrt(D) - 2|C| < B' < sqrt(D), B' = -B mod 2|C|
        Bp = s - ((s + Q.B) % (2 * ac))
    else:
        # window -|C| < B' <= |C|
        Bp = (-Q.B) % (2 * ac)
        if Bp > ac:
            Bp -= 2 * ac
    num = Bp * Bp - D
    if num % (4 * C) != 0:
        raise QFormError("internal: rho produced a non-integral form")
    return QForm(C, Bp, num // (4 * C))


def _rho_matrix(Q: QForm, Qn: QForm) -> GroupElement:
    """The g = (0, -1; 1, s) with Q o g = Qn (s from the B change)."""
    # Q o (0,-1;1,s) = (C, 2Cs - B, ...)
    s2 = Qn.B + Q.B
    if s2 % (2 * Q.C) != 0:
        raise QFormError("internal: inconsistent rho matrix")
    return GroupElement(0, -1, 1, s2 // (2 * Q.C))


def reduce_form(Q: QForm, max_steps: int = 10000) -> QForm:
    """Apply rho until reduced."""
    require_indefinite(Q)
    cur = Q
    for _ in range(max_steps):
        if is_reduced(cur):
            return cur
        cur = reduction_step(cur)
    raise QFormError(f"reduction did not terminate for {Q.as_tuple()}")


def reduction_cycle(Q: QForm) -> tuple[QForm, ...]:
    """The full rho cycle of reduced forms equivalent to Q, in rho order.

    Canonical rotation: the lexicographically smallest member comes first.
    """
    start = reduce_form(Q)
    cycle = [start]
    cur = reduction_step(start)
    while cur != start:
        cycle.append(cur)
        cur = reduction_step(cur)
        if len(cycle) > 100000:
            raise QFormError("reduction cycle unreasonably long")
    pivot = min(range(len(cycle)), key=lambda i: cycle[i].as_tuple())
    return tuple(cycle[pivot:] + cycle[:pivot])


@dataclass(frozen=True)
class FormClass:
    """An SL2(Z) class of forms: a seed plus its reduced cycle."""

    seed: QForm
    cycle: tuple[QForm, ...]

    @staticmethod
    def from_form(Q: QForm) -> "FormClass":
        return FormClass(seed=Q, cycle=reduction_cycle(Q))

    @property
    def disc(self) -> int:
        return self.seed.disc

    @property
    def content(self) -> int:
        return self.seed.content

    def contains(self, Q: QForm) -> bool:
        if Q.disc != self.disc:
            return False
        return reduce_form(Q) in set(self.cycle)

    def key(self) -> tuple[tuple[int, int, int], ...]:
        """Canonical identity of the class (rotation-normalized cycle)."""
        return tuple(f.as_tuple() for f in self.cycle)

    def as_json(self) -> dict:
        return {
            "seed": list(self.seed.as_tuple()),
            "disc": self.disc,
            "cycle": [list(f.as_tuple()) for f in self.cycle],
        }


def is_equivalent(Q1: QForm, Q2: QForm) -> bool:
    """Whether Q1 and Q2 lie in the same SL2(Z) orbit."""
    if Q1.disc != Q2.disc:
        return False
    return reduce_form(Q1) in set(reduction_cycle(Q2))


def class_representatives(D: int) -> list[FormClass]:
    """All form classes of discriminant D (including imprimitive contents)."""
    if not is_discriminant(D):
        raise QFormError(f"{D} is not a positive non-square discriminant")
    s = math.isqrt(D)
    reduced: list[QForm] = []
    b0 = 1 if D % 2 else 2
    for B in range(b0, s + 1, 2):
        N = (D - B * B) // 4        # = |A C|, positive
        if N <= 0:
            continue
        for aa in _divisors(N):
            # window sqrt(D) - B < 2|A| < sqrt(D) + B
            if (2 * aa + B) ** 2 <= D:
                continue
            if 2 * aa - B >= 0 and (2 * aa - B) ** 2 >= D:
                continue
            for A in (aa, -aa):
                C = (B * B - D) // (4 * A)
                reduced.append(QForm(A, B, C))
    classes: list[FormClass] = []
    seen: set[QForm] = set()
    for Q in sorted(reduced, key=QForm.as_tuple):
        if Q in seen:
            continue
        cyc = reduction_cycle(Q)
        seen.update(cyc)
        classes.append(FormClass(seed=cyc[0], cycle=cyc))
    classes.sort(key=FormClass.key)
    return classes


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


# ---------------------------------------------------------------------------
# Pell and automorphs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def pell_fundamental(D: int) -> tuple[int, int]:
    """Fundamental solution (t, u), t, u > 0 minimal, of t^2 - D u^2 = 4.

    Computed as the trace/lower-left data of the automorph obtained by
    composing rho-step matrices once around a reduction cycle, which is the
    fundamental automorph of forms of discriminant D.
    """
    if not is_discriminant(D):
        raise QFormError(f"{D} is not a positive non-square discriminant")
    b0 = math.isqrt(D)
    if (b0 - D) % 2 != 0:
        b0 -= 1
    seed = reduce_form(QForm(1, b0, (b0 * b0 - D) // 4))
    g = GroupElement.identity()
    cur = seed
    while True:
        nxt = reduction_step(cur)
        g = g * _rho_matrix(cur, nxt)
        cur = nxt
        if cur == seed:
            break
    if g.trace < 0:
        g = -g
    u, rem = divmod(g.c, seed.A)
    if rem != 0:
        raise QFormError("internal: automorph not aligned with seed form")
    if u < 0:
        g = g.inverse()
        if g.trace < 0:
            g = -g
        u = g.c // seed.A
    t = g.trace
    if t <= 2 or u <= 0 or t * t - D * u * u != 4:
        raise QFormError(f"internal: bad Pell solution ({t},{u}) for D={D}")
    return (t, u)


def matrix_from_form(Q: QForm) -> GroupElement:
    """Positive-trace automorph ((t-Bu)/2, -Cu; Au, (t+Bu)/2) of Q."""
    D = require_indefinite(Q)
    t, u = pell_fundamental(D)
    if (t - Q.B * u) % 2 != 0:
        raise QFormError("internal: Pell parity mismatch")
    return GroupElement((t - Q.B * u) // 2, -Q.C * u,
                        Q.A * u, (t + Q.B * u) // 2)


def stabilizer_automorph(Q: QForm) -> GroupElement:
    """Generator (mod +-1) of the stabilizer of Q in SL2(Z).

    This is the automorph of the primitive part of Q; for imprimitive forms
    the Pell solution of disc(Q) itself can give a proper power of it.
    """
    return matrix_from_form(Q.primitive_part())


def is_primitive_hyperbolic(g: GroupElement) -> bool:
    """Whether g is hyperbolic and not +-(power >= 2) of another element."""
    if not g.is_hyperbolic():
        return False
    M = stabilizer_automorph(form_from_matrix(g))
    return g in (M, -M, M.inverse(), -M.inverse())


def normalize_hyperbolic(g: GroupElement) -> GroupElement:
    """The representative of {+-g^{+-1}} with trace > 0 and c > 0."""
    if not g.is_hyperbolic():
        raise QFormError(f"matrix {g.as_tuple()} is not hyperbolic")
    if g.trace < 0:
        g = -g
    if g.c < 0:
        g = g.inverse()
        if g.trace < 0:
            g = -g
    if g.c == 0:
        raise QFormError("hyperbolic element cannot fix the cusp")
    return g


# ---------------------------------------------------------------------------
# word decomposition
# ---------------------------------------------------------------------------

def decompose_word(g: GroupElement) -> list[tuple[str, int]]:
    """Write g as a product of T^n and S, returned as [('T', n), ('S', 1), ...].

    The token ('-', 1) records an overall sign -1.  `assemble_word` inverts
    this exactly; the pair is used by the cocycle fast path.
    """
    tokens: list[tuple[str, int]] = []
    cur = g
    # peel generators from the left: g = T^q * S * g'
    while cur.c != 0:
        q = cur.a // cur.c
        if q != 0:
            tokens.append(("T", q))
            cur = GroupElement.T(-q) * cur
        tokens.append(("S", 1))
        cur = GroupElement.S().inverse() * cur
        # now |new c| = |old a - q c| < |old c| ... strictly decreasing
    # cur is (e, m; 0, e) with e = +-1
    if cur.a == -1:
        tokens.append(("-", 1))
        cur = -cur
    if cur.b != 0:
        tokens.append(("T", cur.b))
    # tokens applied left to right multiply back to g
    return tokens


def assemble_word(tokens: Sequence[tuple[str, int]]) -> GroupElement:
    g = GroupElement.identity()
    for kind, n in tokens:
        if kind == "T":
            g = g * GroupElement.T(n)
        elif kind == "S":
            g = g * GroupElement.S()
        elif kind == "-":
            g = -g
        else:
            raise QFormError(f"unknown token {kind!r}")
    return g


# ---------------------------------------------------------------------------
# wedge coset enumeration
# ---------------------------------------------------------------------------

def _floor_quad(P: int, Qc: int, R: int, D: int) -> int:
    """Exact floor of (P + Qc*sqrt(D)) / R for integers, R != 0."""
    if R < 0:
        P, Qc, R = -P, -Qc, -R
    # integer guess within 1 of P + Qc*sqrt(D), then correct exactly
    r = math.isqrt(Qc * Qc * D)
    num = P + (r if Qc >= 0 else -(r + 1))
    n = num // R
    while two_term_sign(P - (n + 1) * R, Qc, D) >= 0:
        n += 1
    while two_term_sign(P - n * R, Qc, D) < 0:
        n -= 1
    return n


class _QuadIrr:
    """Minimal exact arithmetic for (P + Qc*sqrt(D))/R, used by the seed search."""

    __slots__ = ("P", "Qc", "R", "D")

    def __init__(self, P: int, Qc: int, R: int, D: int) -> None:
        if R == 0:
            raise ZeroDivisionError
        if R < 0:
            P, Qc, R = -P, -Qc, -R
        g = math.gcd(math.gcd(abs(P), abs(Qc)), R)
        self.P, self.Qc, self.R, self.D = P // g, Qc // g, R // g, D

    def floor(self) -> int:
        return _floor_quad(self.P, self.Qc, self.R, self.D)

    def __sub__(self, n: int) -> "_QuadIrr":
        return _QuadIrr(self.P - n * self.R, self.Qc, self.R, self.D)

    def recip(self) -> "_QuadIrr":
        # R / (P + Qc sqrt D) = R (P - Qc sqrt D) / (P^2 - Qc^2 D)
        den = self.P * self.P - self.Qc * self.Qc * self.D
        return _QuadIrr(self.R * self.P, -self.R * self.Qc, den, self.D)

    def cmp_fraction(self, x: Fraction) -> int:
        """sign(self - x)."""
        # (P + Qc sqrt D)/R - p/q = ((Pq - pR) + Qc q sqrt D) / (R q)
        p, q = x.numerator, x.denominator
        return two_term_sign(self.P * q - p * self.R, self.Qc * q, self.D)


def _smallest_denominator_rational(alpha: _QuadIrr, beta: _QuadIrr) -> Fraction:
    """A rational in the open interval (alpha, beta), small denominator."""
    n = alpha.floor() + 1
    cand = Fraction(n)
    if beta.cmp_fraction(cand) > 0:
        return cand
    a = alpha.floor()
    inner = _smallest_denominator_rational((beta - a).recip(), (alpha - a).recip())
    return a + 1 / inner


def _wedge_seed(Q: QForm, want_positive: bool) -> tuple[int, int]:
    """A primitive integer vector v with sign(Q(v)) as requested."""
    target = 1 if want_positive else -1
    for v in ((1, 0), (0, 1), (1, 1), (1, -1)):
        if _sign(Q(*v)) == target:
            return v
    # Q(x,1) has sign -sign(A) strictly between the roots: pick a rational there
    D = require_indefinite(Q)
    w_lo = _QuadIrr(-Q.B, -1, 2 * Q.A, D)
    w_hi = _QuadIrr(-Q.B, 1, 2 * Q.A, D)
    if Q.A < 0:
        w_lo, w_hi = w_hi, w_lo
    x = _smallest_denominator_rational(w_lo, w_hi)
    v = (x.numerator, x.denominator)
    if _sign(Q(*v)) != target:
        raise QFormError(f"internal: seed search failed for {Q.as_tuple()}")
    return v


def _cross(v: tuple[int, int], w: tuple[int, int]) -> int:
    return v[0] * w[1] - v[1] * w[0]


@dataclass(frozen=True)
class _Wedge:
    v0: tuple[int, int]
    v1: tuple[int, int]       # automorph image of v0
    s: int                    # orientation sign of (v0, v1)
    q0: int                   # |Q(v0)|
    q1: int                   # |Q(v1)|

    def contains(self, v: tuple[int, int]) -> bool:
        return (self.s * _cross(self.v0, v) >= 0
                and self.s * _cross(self.v1, v) < 0)


def _wedges(Q: QForm) -> tuple[_Wedge, _Wedge]:
    M = stabilizer_automorph(Q)
    out = []
    for want_pos in (True, False):
        v0 = _wedge_seed(Q, want_pos)
        v1 = M.apply_column(*v0)
        s = _sign(_cross(v0, v1))
        if s == 0:
            raise QFormError("internal: automorph fixes the seed direction")
        out.append(_Wedge(v0=v0, v1=v1, s=s,
                          q0=abs(Q(*v0)), q1=abs(Q(*v1))))
    return (out[0], out[1])


def _wedge_points(Q: QForm, wedge: _Wedge, bound: int) -> Iterator[tuple[int, int]]:
    """Primitive vectors v in the wedge with 0 < |Q(v)| <= bound.

    |Q|/||v||^2 restricted to the wedge directions attains its minimum at a
    boundary ray (the direction profile is a single sinusoid arc between root
    directions), so ||v||^2 <= bound * max(||v0||^2/|Q(v0)|, ||v1||^2/|Q(v1)|).
    """
    n0 = wedge.v0[0] ** 2 + wedge.v0[1] ** 2
    n1 = wedge.v1[0] ** 2 + wedge.v1[1] ** 2
    R = bound * max(Fraction(n0, wedge.q0), Fraction(n1, wedge.q1))
    R = int(math.ceil(R)) + 1
    X = math.isqrt(R)
    p0, r0 = wedge.v0
    p1, r1 = wedge.v1
    s = wedge.s
    for x in range(-X, X + 1):
        ymax = math.isqrt(R - x * x)
        ylo, yhi = -ymax, ymax
        # s*(p0*y - r0*x) >= 0
        if p0 != 0:
            b = Fraction(r0 * x, p0)
            if s * p0 > 0:
                ylo = max(ylo, math.ceil(b))
            else:
                yhi = min(yhi, math.floor(b))
        elif s * (-r0 * x) < 0:
            continue
        # s*(p1*y - r1*x) < 0
        if p1 != 0:
            b = Fraction(r1 * x, p1)
            if s * p1 > 0:
                hi = math.floor(b)
                if hi == b:
                    hi -= 1
                yhi = min(yhi, hi)
            else:
                lo = math.ceil(b)
                if lo == b:
                    lo += 1
                ylo = max(ylo, lo)
        elif s * (-r1 * x) >= 0:
            continue
        for y in range(ylo, yhi + 1):
            if x == 0 and y == 0:
                continue
            if math.gcd(abs(x), abs(y)) != 1:
                continue
            val = Q(x, y)
            if val != 0 and abs(val) <= bound:
                yield (x, y)


def _complete_column(x: int, y: int) -> GroupElement:
    """Some g in SL2(Z) with first column (x, y)."""
    g, r, t = _xgcd(x, y)
    if g != 1:
        raise QFormError("column must be primitive")
    # r x + t y = 1  ->  det(x, -t; y, r) = x r + t y = 1
    return GroupElement(x, -t, y, r)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


@lru_cache(maxsize=256)
def _tgroups_cached(cycle_key, seed_tuple, bound: int):
    Q = QForm(*seed_tuple)
    groups: set[tuple[int, int]] = set()
    for wedge in _wedges(Q):
        for v in _wedge_points(Q, wedge, bound):
            g = _complete_column(*v)
            f = apply_sl2(Q, g)
            A = f.A
            m = 2 * abs(A)
            Bc = f.B % m
            if Bc > abs(A):
                Bc -= m
            key = (A, Bc)
            if key in groups:
                raise QFormError("internal: wedge produced a duplicate coset")
            groups.add(key)
    return sorted(groups)


def translation_groups(cls: FormClass, bound: int) -> list[tuple[int, int]]:
    """Translation-orbit representatives (A, B mod 2A canonical) of the class
    with 0 < |A| <= bound: one per coset family {stab} g {T^t}."""
    if bound < 1:
        return []
    return _tgroups_cached(cls.key(), cls.seed.as_tuple(), bound)


def enumerate_orbit_bounded(cls: FormClass, height: int) -> list[QForm]:
    """All forms in the class with max(|A|, |C|) <= height, sorted.

    Complete because any such form has |A| <= height, hence lies in a
    translation group found by the wedge scan; within a group the allowed
    translates solve |C(t)| <= height exactly.
    """
    D = cls.disc
    out: list[QForm] = []
    for (A, Bc) in translation_groups(cls, height):
        m = 2 * abs(A)
        hi = D + 4 * abs(A) * height
        lo = D - 4 * abs(A) * height
        bmax = math.isqrt(hi)
        if lo <= 0:
            ranges = [(-bmax, bmax)]
        else:
            bmin = math.isqrt(lo - 1) + 1
            ranges = [(-bmax, -bmin), (bmin, bmax)]
        for (blo, bhi) in ranges:
            # beta = Bc mod 2|A| within [blo, bhi]
            start = blo + ((Bc - blo) % m)
            for beta in range(start, bhi + 1, m):
                num = beta * beta - D
                if num % (4 * A) != 0:
                    raise QFormError("internal: non-integral translate")
                C = num // (4 * A)
                if abs(C) <= height:
                    out.append(QForm(A, beta, C))
    out.sort(key=QForm.as_tuple)
    return out
