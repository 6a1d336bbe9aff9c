"""Special functions and complex quadrature.

Legendre polynomials, the Gauss hypergeometric function on the cut plane,
an adaptive Gauss-Kronrod contour integrator, high-order derivatives via the
Cauchy integral, small Gamma helpers, and the closed form of the real-line
integral int t^(k-1) / (-A t^2 + B i t + C)^k dt used by the cycle-integral
evaluations.
"""
from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import NonConvergenceError

# ---------------------------------------------------------------------------
# Legendre polynomials
# ---------------------------------------------------------------------------


def legendre_p(r: int, x):
    """P_r(x) by the three-term recurrence; x may be real or complex."""
    if r < 0:
        raise ValueError(f"legendre_p needs r >= 0, got {r}")
    if r == 0:
        return 1.0
    prev, cur = 1.0, x
    for n in range(1, r):
        prev, cur = cur, ((2 * n + 1) * x * cur - n * prev) / (n + 1)
    return cur


# ---------------------------------------------------------------------------
# Gamma helpers
# ---------------------------------------------------------------------------


def upper_gamma_int(k: int, x: float) -> float:
    """Incomplete Gamma(k, x) for integer k >= 1: (k-1)! e^(-x) sum x^m/m!."""
    if k < 1:
        raise ValueError(f"upper_gamma_int needs k >= 1, got {k}")
    s = 0.0
    term = 1.0
    for m in range(k):
        if m:
            term *= x / m
        s += term
    return math.factorial(k - 1) * math.exp(-x) * s


# ---------------------------------------------------------------------------
# Gauss hypergeometric
# ---------------------------------------------------------------------------

_SERIES_RADIUS = 0.92
_MAX_TERMS = 12000


def _2f1_series(a: float, b: float, c: float, z: complex) -> complex:
    term: complex = 1.0
    total: complex = 1.0
    for j in range(_MAX_TERMS):
        term *= (a + j) * (b + j) / ((c + j) * (1 + j)) * z
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)):
            return total
    raise NonConvergenceError("2F1 series did not converge",
                              achieved=abs(term))


def gauss_2f1(a: float, b: float, c: float, z: complex,
              tol: float = 1e-13) -> complex:
    """2F1(a, b; c; z) on the plane cut along [1, infinity).

    Direct series inside the disk, the Pfaff map z -> z/(z-1) when that lands
    inside, and the Euler integral as the last resort (needs one upper
    parameter strictly between 0 and c, which holds for every use here).
    """
    if c <= 0 and c == int(c):
        raise ValueError(f"2F1 pole: c = {c} is a non-positive integer")
    z = complex(z)
    if z == 0:
        return complex(1.0)
    if z.imag == 0 and z.real >= 1:
        raise ValueError(f"2F1 argument {z} lies on the branch cut")
    if a <= 0 and a == int(a):
        # terminating series: a polynomial, converges everywhere
        return _2f1_terminating(int(a), b, c, z)
    if b <= 0 and b == int(b):
        return _2f1_terminating(int(b), a, c, z)
    if abs(z) < _SERIES_RADIUS:
        return _2f1_series(a, b, c, z)
    w = z / (z - 1)
    if abs(w) < _SERIES_RADIUS:
        # 2F1(c-a, b; c; z/(z-1)) = (1-z)^b 2F1(a, b; c; z)
        return (1 - z) ** (-b) * _2f1_series(c - a, b, c, w)
    return _2f1_euler(a, b, c, z, tol)


def _2f1_terminating(neg: int, other: float, c: float, z: complex) -> complex:
    term: complex = 1.0
    total: complex = 1.0
    for j in range(-neg):
        term *= (neg + j) * (other + j) / ((c + j) * (1 + j)) * z
        total += term
    return total


def _2f1_euler(a: float, b: float, c: float, z: complex,
               tol: float) -> complex:
    # Euler: Gamma(c)/(Gamma(b) Gamma(c-b)) int_0^1 t^(b-1)(1-t)^(c-b-1)(1-zt)^(-a) dt
    # symmetric in (a, b); pick an exponent pair that keeps the endpoints tame
    for (p, q) in ((a, b), (b, a)):
        if 1 <= q and 1 <= c - q:
            def integrand(t: complex, p=p, q=q) -> complex:
                return t ** (q - 1) * (1 - t) ** (c - q - 1) * (1 - z * t) ** (-p)
            res = contour_quadrature(integrand, (0.0, 1.0), tol=tol)
            const = math.gamma(c) / (math.gamma(q) * math.gamma(c - q))
            return const * res.value
    raise NonConvergenceError(
        f"2F1({a},{b};{c};{z}) outside the implemented parameter domain")


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod contour quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod nodes on [-1, 1] with weights, and the embedded 7-point
# Gauss weights (indices 1, 3, 5, 7, 9, 11, 13 of the node list)
_K15_NODES = (
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993945, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0, 0.2077849550078985, 0.4058451513773972,
    0.5860872354676911, 0.7415311855993945, 0.8648644233597691,
    0.9491079123427585, 0.9914553711208126,
)
_K15_WEIGHTS = (
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
    0.14065325971552591, 0.16900472663926790, 0.19035057806478540,
    0.20443294007529889, 0.20948214108472782, 0.20443294007529889,
    0.19035057806478540, 0.16900472663926790, 0.14065325971552591,
    0.10479001032225018, 0.06309209262997855, 0.02293532201052922,
)
_G7_WEIGHTS = (
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
    0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
    0.1294849661688697,
)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    evaluations: int


PathSpec = Sequence  # complex nodes of a polyline, or (gamma, dgamma) pair


def _path_pieces(path: PathSpec) -> list[tuple[Callable, Callable]]:
    """Normalize a path into (z(t), dz(t)) pieces parametrized on [0, 1]."""
    if len(path) >= 1 and callable(path[0]):
        if len(path) != 2 or not callable(path[1]):
            raise ValueError("smooth path must be a (gamma, dgamma) pair")
        return [(path[0], path[1])]
    nodes = [complex(p) for p in path]
    if len(nodes) < 2:
        raise ValueError("polyline path needs at least two nodes")
    pieces = []
    for u, v in zip(nodes, nodes[1:]):
        if u == v:
            continue
        pieces.append((lambda t, u=u, v=v: u + t * (v - u),
                       lambda t, u=u, v=v: v - u))
    if not pieces:
        raise ValueError("path has zero length")
    return pieces


def _gk15(f: Callable, zfun: Callable, dzfun: Callable,
          t0: float, t1: float) -> tuple[complex, float]:
    """Kronrod value and |K15 - G7| error estimate on one parameter interval."""
    mid = 0.5 * (t0 + t1)
    half = 0.5 * (t1 - t0)
    k: complex = 0.0
    g: complex = 0.0
    for i, x in enumerate(_K15_NODES):
        t = mid + half * x
        val = f(zfun(t)) * dzfun(t)
        k += _K15_WEIGHTS[i] * val
        if i % 2 == 1:
            g += _G7_WEIGHTS[i // 2] * val
    k *= half
    g *= half
    return k, abs(k - g)


def contour_quadrature(f: Callable[[complex], complex], path: PathSpec,
                       tol: float = 1e-10, max_evals: int = 10 ** 6,
                       min_intervals: int = 2) -> QuadratureResult:
    """Adaptively integrate f along a path in the complex plane.

    path: either a sequence of complex nodes (straight segments between
    consecutive nodes) or a pair (gamma, dgamma) of callables on [0, 1].
    Each smooth piece starts from min_intervals equal panels; pass a larger
    value for integrands whose mass is highly localized on the piece.
    Raises NonConvergenceError when the evaluation budget runs out before the
    summed nested-rule error estimate drops below tol.
    """
    pieces = _path_pieces(path)
    evals = 0
    heap: list = []
    serial = 0
    total_err = 0.0
    m = max(1, min_intervals)
    for idx, (zf, dzf) in enumerate(pieces):
        for j in range(m):
            t0, t1 = j / m, (j + 1) / m
            v, e = _gk15(f, zf, dzf, t0, t1)
            evals += 15
            heapq.heappush(heap, (-e, serial, idx, t0, t1, v, e))
            serial += 1
            total_err += e
    while total_err > tol:
        if evals + 30 > max_evals:
            raise NonConvergenceError(
                "quadrature budget exhausted", achieved=total_err, target=tol)
        neg_e, _, idx, t0, t1, v, e = heapq.heappop(heap)
        tm = 0.5 * (t0 + t1)
        if tm <= t0 or tm >= t1:
            # interval at floating-point resolution, cannot refine further
            raise NonConvergenceError(
                "quadrature interval collapsed", achieved=e, target=tol)
        zf, dzf = pieces[idx]
        vl, el = _gk15(f, zf, dzf, t0, tm)
        vr, er = _gk15(f, zf, dzf, tm, t1)
        evals += 30
        total_err += el + er - e
        heapq.heappush(heap, (-el, serial, idx, t0, tm, vl, el))
        serial += 1
        heapq.heappush(heap, (-er, serial, idx, tm, t1, vr, er))
        serial += 1
    value = sum(item[5] for item in heap)
    err = sum(item[6] for item in heap)
    return QuadratureResult(value=value, abs_error_estimate=err,
                            evaluations=evals)


def segment(a: complex, b: complex) -> tuple[complex, complex]:
    """Convenience: the straight path from a to b."""
    return (complex(a), complex(b))


def circle_path(center: complex, radius: float,
                clockwise: bool = False) -> tuple[Callable, Callable]:
    """Full circle about center, parametrized on [0, 1], counterclockwise
    unless told otherwise."""
    sgn = -1.0 if clockwise else 1.0
    w = 2j * math.pi * sgn

    def gamma(t: float) -> complex:
        return center + radius * cmath.exp(w * t)

    def dgamma(t: float) -> complex:
        return radius * w * cmath.exp(w * t)

    return (gamma, dgamma)


# ---------------------------------------------------------------------------
# the closed-form real-line integral
# ---------------------------------------------------------------------------


def legendre_contour_integral(k: int, A: float, B: float, C: float) -> float:
    """int_{-inf}^{inf} t^(k-1) / (-A t^2 + B i t + C)^k dt, k odd >= 3.

    Vanishes for AC > 0; for AC < 0 equals
    (-1)^((k+1)/2) sign(A) 2 pi D^(-k/2) P_(k-1)(B / sqrt(D)), D = B^2 - 4AC.
    """
    if k < 3 or k % 2 == 0:
        raise ValueError(f"need odd k >= 3, got {k}")
    D = B * B - 4 * A * C
    if D <= 0:
        raise ValueError(f"need positive discriminant, got D = {D}")
    if A * C > 0:
        return 0.0
    if A * C == 0:
        raise ValueError("AC = 0 puts a pole on the integration line")
    sq = math.sqrt(D)
    sgn = 1.0 if A > 0 else -1.0
    return ((-1) ** ((k + 1) // 2) * sgn * 2 * math.pi * sq ** (-k)
            * legendre_p(k - 1, B / sq))


# ---------------------------------------------------------------------------
# high-order derivatives via the Cauchy integral
# ---------------------------------------------------------------------------


def cauchy_derivative(f: Callable[[complex], complex], z0: complex,
                      order: int, radius: float, normalized: bool = False,
                      tol: float = 1e-8, max_points: int = 1 << 16) -> complex:
    """order-th derivative of f at z0 from circle samples of radius radius.

    normalized=True divides by (2 pi i)^order, matching the differentiation
    operator (1/2 pi i) d/dz iterated.  Doubles the sample count until two
    consecutive densities agree to tol (relative), then returns the finer one.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if radius <= 0:
        raise ValueError("radius must be positive")

    def trap(N: int) -> complex:
        acc: complex = 0.0
        for j in range(N):
            th = 2 * math.pi * j / N
            w = cmath.exp(1j * th)
            acc += f(z0 + radius * w) * cmath.exp(-1j * order * th)
        return math.factorial(order) / (radius ** order) * acc / N

    N = max(32, 4 * (order + 1))
    prev = trap(N)
    result = None
    diff = None
    while 2 * N <= max_points:
        N *= 2
        cur = trap(N)
        diff = abs(cur - prev)
        if diff <= tol * max(1.0, abs(cur)):
            result = cur
            break
        prev = cur
    if result is None:
        raise NonConvergenceError(
            "cauchy_derivative samples did not stabilize",
            achieved=diff, target=tol)
    if normalized:
        result /= (2j * math.pi) ** order
    return result
