"""Orbit series engines and the exact cocycle.

Oracles come first and are independent of the module internals:

  * _mp_kernel: the contour kernel from 40-digit residue arithmetic,
    anchored at the elementary value J_1(phi) = -2 pi sin(phi);
  * _brute_family_sum: a plain symmetric translate loop with an explicit
    tail bound, no adaptivity, integer form coefficients throughout;
  * direct sums over enumerate_orbit_bounded for the literal engine.
"""
import cmath
import math
import random

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from modgeo.errors import NonConvergenceError
from modgeo.geodesics import (
    GeodesicError,
    crosses,
    form_sign_at_surd,
    intersection_data,
    oriented_endpoints,
)
from modgeo.poincare import (
    SeriesHandle,
    TruncationPolicy,
    _orbit_terms,
    cusp_of_inverse,
    default_n_max,
    eval_cocycle,
    eval_series,
    family_coefficient,
    fourier_coefficient_vector,
    kernel_j,
    orbit_partial_sum,
    series_prefactor,
    series_value,
    sign_limit_check,
    slash_weight,
    translation_family_sum,
)
from modgeo.qforms import (
    FormClass,
    GroupElement,
    QForm,
    enumerate_orbit_bounded,
    form_from_matrix,
    translation_groups,
)

CLS5 = FormClass.from_form(QForm(1, 1, -1))
CLS8 = FormClass.from_form(QForm(1, 2, -1))
CLS12 = FormClass.from_form(QForm(1, 2, -2))
T = GroupElement.T()
S = GroupElement.S()
SIG6 = GroupElement(1, 2, 2, 5)
SIG7 = GroupElement(1, 5, 1, 6)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def _mp_kernel(k: int, phi: float) -> complex:
    """Residue evaluation of the kernel at 40 digits."""
    with mp.workdps(40):
        p = mp.mpf(phi)
        total = mp.mpc(0)
        for sgn in (1, -1):
            acc = mp.mpc(0)
            for m in range(k):
                acc += (mp.binomial(k - 1, m) * (-1j * p) ** (k - 1 - m)
                        * (-1) ** m * mp.rf(k, m) * mp.mpf(2 * sgn) ** (-k - m))
            total += mp.e ** (-1j * p * sgn) * acc / mp.factorial(k - 1)
        return complex(-2j * mp.pi * total)


def _mp_kernel_taylor(k: int, phi: float) -> complex:
    """Series evaluation of the kernel at 40 digits, small phi only."""
    with mp.workdps(40):
        p = mp.mpf(phi)
        acc = mp.mpf(0)
        for j in range(120):
            acc += ((-1) ** j * mp.binomial(k - 1 + j, j) * p ** (2 * j)
                    / mp.factorial(2 * k - 1 + 2 * j))
        return complex((-1) ** k * 2 * mp.pi * p ** (2 * k - 1) * acc)


def _brute_family_sum(k: int, A: int, Bc: int, D: int, z: complex) -> complex:
    """Translate loop with integer coefficients and a proven tail bound."""
    assert (Bc * Bc - D) % (4 * A) == 0
    r = math.sqrt(D) / (2 * abs(A))
    R = abs(z.real + Bc / (2 * A)) + abs(z.imag) + r
    # tail: 2 |A|^-k (T-R)^(1-2k) / (2k-1) < 1e-13
    T_cut = int(R + (2 * abs(A) ** (-k) / ((2 * k - 1) * 1e-13))
                ** (1 / (2 * k - 1))) + 2
    s = 0j
    for t in range(-T_cut, T_cut + 1):
        B = Bc + 2 * A * t
        C = (B * B - D) // (4 * A)
        s += (A * z * z + B * z + C) ** (-k)
    return s


def _orbit_brute(k: int, cls: FormClass, flavor: str, z: complex,
                 height: int) -> complex:
    s = 0j
    for Q in enumerate_orbit_bounded(cls, height):
        t = (Q.A * z * z + Q.B * z + Q.C) ** (-k)
        if flavor == "parson" and Q.A < 0:
            t = -t
        s += t
    return series_prefactor(k, cls.disc) * s


def _mul(*gs: GroupElement) -> GroupElement:
    out = GroupElement.identity()
    for g in gs:
        out = out * g
    return out


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def test_kernel_anchor_weight_one():
    for phi in (0.1, 0.5, 1.0, 2.0, 2.4, 2.6, 3.3, 7.7, 19.3, 47.1):
        val = kernel_j(1, phi)
        want = -2 * math.pi * math.sin(phi)
        assert abs(val - want) < 1e-11 * max(1.0, abs(want))
        assert abs(val.imag) < 1e-11 * max(1.0, abs(val))


def test_kernel_matches_highprec_residues():
    worst = 0.0
    for k in range(2, 7):
        for phi in (0.2, 0.7, 1.5, 2.4, 2.49, 2.51, 3.0, 6.0, 10.0,
                    30.0, 59.0):
            want = _mp_kernel(k, phi)
            got = kernel_j(k, phi)
            worst = max(worst, abs(got - want) / max(1e-300, abs(want)))
    assert worst < 5e-12


def test_kernel_oracle_branches_agree():
    # the two oracle formulas are the same function
    for k in (2, 4, 6):
        for phi in (0.3, 1.7, 2.5):
            a = _mp_kernel(k, phi)
            b = _mp_kernel_taylor(k, phi)
            assert abs(a - b) < 1e-25 * max(1.0, abs(a))


def test_kernel_accurate_on_both_sides_of_branch_switch():
    for k in (2, 3, 5):
        for phi in (2.5 - 1e-9, 2.5 + 1e-9):
            want = _mp_kernel(k, phi)
            got = kernel_j(k, phi)
            assert abs(got - want) < 5e-12 * max(1.0, abs(want))


def test_kernel_rejects_bad_input():
    with pytest.raises(ValueError):
        kernel_j(0, 1.0)
    with pytest.raises(ValueError):
        kernel_j(2, 0.0)
    with pytest.raises(ValueError):
        kernel_j(2, -1.0)


# ---------------------------------------------------------------------------
# translation families and their coefficients
# ---------------------------------------------------------------------------

FAMILY_CASES = [
    (2, 1, 1, 5, 0.37 + 0.9j),
    (2, -1, 1, 5, -0.22 + 1.4j),
    (3, 2, 0, 8, 0.51 + 0.8j),
    (3, -3, 1, 13, 0.13 + 1.1j),
    (4, 1, 0, 12, -0.75 + 0.85j),
    (2, 5, 3, 29, 0.08 + 1.9j),
]


def test_family_sum_matches_brute():
    for (k, A, Bc, D, z) in FAMILY_CASES:
        got = translation_family_sum(k, A, Bc, D, z)
        want = _brute_family_sum(k, A, Bc, D, z)
        assert abs(got - want) < 5e-11 * max(1.0, abs(want))


def test_family_coefficients_reconstruct_sum():
    for (k, A, Bc, D, z) in FAMILY_CASES:
        n_max = default_n_max(z.imag, 1e-16) + 10
        acc = 0j
        for n in range(1, n_max + 1):
            acc += family_coefficient(k, A, Bc, D, n) * cmath.exp(
                2j * math.pi * n * z)
        want = translation_family_sum(k, A, Bc, D, z)
        assert abs(acc - want) < 1e-11 * max(1.0, abs(want))


def test_family_reconstruction_random_suite():
    rng = random.Random(20260815)
    checked = 0
    while checked < 120:
        k = rng.choice((2, 3, 4))
        A = rng.choice((1, -1)) * rng.randint(1, 9)
        D = rng.randint(5, 40)
        root = math.isqrt(D)
        if root * root == D:
            continue
        Bc = next((B for B in range(2 * abs(A))
                   if (B * B - D) % (4 * A) == 0), None)
        if Bc is None:
            continue
        z = complex(rng.uniform(-1.2, 1.2), rng.uniform(0.75, 2.2))
        n_max = default_n_max(z.imag, 1e-15) + 8
        acc = 0j
        for n in range(1, n_max + 1):
            acc += family_coefficient(k, A, Bc, D, n) * cmath.exp(
                2j * math.pi * n * z)
        want = translation_family_sum(k, A, Bc, D, z)
        assert abs(acc - want) < 2e-10 * max(1.0, abs(want)), (k, A, Bc, D, z)
        checked += 1
    assert checked == 120


# ---------------------------------------------------------------------------
# literal engine
# ---------------------------------------------------------------------------

def test_orbit_terms_equal_bounded_enumeration():
    for cls, heights in ((CLS5, (1, 3, 10, 47)), (CLS12, (2, 20))):
        for H in heights:
            streamed = sorted(Q.as_tuple() for Q in _orbit_terms(cls, H))
            listed = sorted(Q.as_tuple()
                            for Q in enumerate_orbit_bounded(cls, H))
            assert streamed == listed


def test_partial_sum_matches_enumeration_sum():
    z = 0.3 + 1.1j
    for flavor in ("katok", "parson"):
        for k in (2, 3):
            got = orbit_partial_sum(k, CLS12, flavor, z, 40)
            want = _orbit_brute(k, CLS12, flavor, z, 40)
            assert abs(got - want) < 1e-12 * max(1.0, abs(want))


def test_partial_sum_doubling_drift_decays():
    # plain k = 2 has the slowest (1/height) tail, so decay is visible
    z = 1j
    vals = [orbit_partial_sum(2, CLS5, "katok", z, H)
            for H in (200, 400, 800, 1600)]
    drifts = [abs(b - a) for a, b in zip(vals, vals[1:])]
    assert drifts[0] > 1e-5          # genuinely away from float noise
    assert drifts[1] < 0.7 * drifts[0]
    assert drifts[2] < 0.7 * drifts[1]


def test_eval_series_doubling_contract():
    h = SeriesHandle(3, CLS5, TruncationPolicy(tol=1e-8), flavor="parson")
    z = 0.3 + 1.1j
    val = eval_series(h, z)
    assert h.achieved_height is not None and h.achieved_height >= 256
    fast = series_value(3, CLS5, "parson", z, bound=h.achieved_height)
    assert abs(val - fast) < 5e-7


def test_eval_series_plain_weight_two_attainable_tolerance():
    # pinned: the plain k = 2 tail scales like 1/height, so the doubling
    # test runs at a tolerance the schedule can actually reach
    h = SeriesHandle(2, CLS5, TruncationPolicy(tol=1e-4))
    val = eval_series(h, 1j)
    assert h.achieved_height is not None
    assert abs(val) < 3e-4          # weight-4 cusp space is trivial


def test_eval_series_exact_cancellation_converges_immediately():
    # odd weight-pair exponent on a class containing -Q for each Q:
    # every partial sum cancels termwise
    h = SeriesHandle(3, CLS5, TruncationPolicy(tol=1e-10))
    val = eval_series(h, 0.3 + 0.9j)
    assert abs(val) < 1e-13
    assert h.achieved_height == 128


def test_eval_series_budget_exhaustion():
    h = SeriesHandle(2, CLS5, TruncationPolicy(tol=1e-14, max_doublings=2))
    with pytest.raises(NonConvergenceError) as info:
        eval_series(h, 1j)
    assert info.value.achieved is not None
    assert info.value.target == 1e-14


def test_eval_series_rejects_nonpositive_height_points():
    h = SeriesHandle(3, CLS5)
    for z in (1.0 - 1.0j, 0.5 + 0.0j):
        with pytest.raises(ValueError):
            eval_series(h, z)


def test_policy_and_handle_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(height=0)
    with pytest.raises(ValueError):
        TruncationPolicy(tol=0.0)
    with pytest.raises(ValueError):
        TruncationPolicy(max_doublings=0)
    with pytest.raises(ValueError):
        SeriesHandle(1, CLS5)
    with pytest.raises(ValueError):
        SeriesHandle(2, CLS5, flavor="other")


# ---------------------------------------------------------------------------
# modular behavior of the two flavors
# ---------------------------------------------------------------------------

def test_plain_series_is_modular():
    # weight 12 carries a nonzero cusp form, so the check is not vacuous
    k, bound = 6, 600
    def f(z):
        return series_value(k, CLS5, "katok", z, bound)
    for g in (T, S, _mul(T, S)):
        for z in (1j, 0.3 + 0.8j):
            gz = g.apply(z)
            lhs = f(gz)
            rhs = (g.c * z + g.d) ** (2 * k) * f(z)
            assert abs(lhs - rhs) < 1e-6


def test_plain_series_modular_through_doubling_engine():
    k = 6
    h = SeriesHandle(k, CLS5, TruncationPolicy(tol=1e-8))
    f_i = eval_series(h, 1j)
    for g in (T, S):
        h2 = SeriesHandle(k, CLS5, TruncationPolicy(tol=1e-8))
        lhs = eval_series(h2, g.apply(1j))
        rhs = (g.c * 1j + g.d) ** (2 * k) * f_i
        assert abs(lhs - rhs) < 1e-6


def test_signweighted_series_translation_invariant():
    z = 0.37 + 1.3j
    exact = series_value(3, CLS5, "parson", z, 400)
    shifted = series_value(3, CLS5, "parson", z + 1, 400)
    assert abs(exact - shifted) < 1e-13
    h1 = SeriesHandle(3, CLS5, TruncationPolicy(tol=1e-7), flavor="parson")
    h2 = SeriesHandle(3, CLS5, TruncationPolicy(tol=1e-7), flavor="parson")
    assert abs(eval_series(h1, z) - eval_series(h2, z + 1)) < 2e-7


def test_signweighted_even_exponent_cancels_on_ambiguous_class():
    # classes containing -Q alongside Q kill the sign-weighted series at
    # even k, both enginewise and termwise
    for k in (2, 4):
        assert abs(orbit_partial_sum(k, CLS5, "parson", 0.4 + 1j, 60)) < 1e-13
        assert abs(series_value(k, CLS5, "parson", 0.4 + 1j, 200)) < 1e-12


# ---------------------------------------------------------------------------
# cocycle
# ---------------------------------------------------------------------------

def test_cocycle_vanishes_for_cusp_fixing_elements():
    z = 0.2 + 1.5j
    assert eval_cocycle(3, CLS5, GroupElement.identity(), z) == 0j
    assert eval_cocycle(3, CLS5, GroupElement.T(1), z) == 0j
    assert eval_cocycle(3, CLS5, GroupElement.T(-3), z) == 0j
    assert eval_cocycle(2, CLS12, -GroupElement.T(2), z) == 0j


def test_cocycle_relation():
    z = 0.31 + 1.7j
    TS = _mul(T, S)
    for k, cls in ((2, CLS12), (3, CLS5)):
        for sig in (T, S, TS):
            for tau in (T, S, TS):
                lhs = eval_cocycle(k, cls, sig * tau, z)
                r_sig = lambda w, s=sig: eval_cocycle(k, cls, s, w)
                rhs = (slash_weight(r_sig, tau, 2 * k)(z)
                       + eval_cocycle(k, cls, tau, z))
                assert abs(lhs - rhs) < 1e-9, (k, sig.as_tuple(),
                                               tau.as_tuple())


def test_cocycle_matches_series_transformation():
    # the series' failure of modularity is exactly the cocycle
    z = 2j
    k, bound = 3, 2500
    def f(w):
        return series_value(k, CLS5, "parson", w, bound)
    lhs = slash_weight(f, S, 2 * k)(z) - f(z)
    r = eval_cocycle(k, CLS5, S, z)
    assert abs(r) > 1e-3            # the failure is genuinely nonzero
    assert abs(lhs - r) < 5e-7


def test_cocycle_transformation_trivial_even_case():
    # ambiguous class at even k: series and cocycle both vanish, and the
    # transformation identity degenerates to 0 = 0
    z = 2j
    def f(w):
        return series_value(2, CLS5, "parson", w, 300)
    lhs = slash_weight(f, S, 4)(z) - f(z)
    r = eval_cocycle(2, CLS5, S, z)
    assert abs(r) < 1e-14
    assert abs(lhs - r) < 1e-5


def test_cocycle_nontrivial_weight_two_class():
    z = 2j
    k, bound = 2, 3000
    def f(w):
        return series_value(k, CLS12, "parson", w, bound)
    lhs = slash_weight(f, S, 2 * k)(z) - f(z)
    r = eval_cocycle(k, CLS12, S, z)
    assert abs(r) > 1e-3
    # 1/bound series tail limits the achievable agreement here
    assert abs(lhs - r) < 5e-3


def test_cocycle_pole_is_an_error():
    root = (-1 + math.sqrt(5)) / 2      # zero of a crossing class form
    with pytest.raises(GeodesicError):
        eval_cocycle(3, CLS5, S, complex(root, 0.0))


def test_cusp_of_inverse_normalization():
    assert cusp_of_inverse(S) == (0, 1)
    assert cusp_of_inverse(SIG6) == (5, 2)
    assert cusp_of_inverse(SIG6.inverse()) == (-1, 2)
    assert cusp_of_inverse(T) is None
    assert cusp_of_inverse(GroupElement.identity()) is None


# ---------------------------------------------------------------------------
# sign stabilization along a hyperbolic axis
# ---------------------------------------------------------------------------

def test_sign_limit_reference_case():
    assert sign_limit_check(CLS5, SIG6, 20) is True


def test_sign_limit_zero_budget_fails():
    assert sign_limit_check(CLS5, SIG6, 0) is False


def test_sign_limit_matches_crossing_orientation():
    # when the seed geodesic crosses the sigma axis, the stabilized sign
    # is the negative of the recorded intersection sign
    for seed, sig in ((QForm(1, 1, -1), SIG6), (QForm(-1, 1, 1), SIG6),
                      (QForm(-1, 1, 1), SIG7)):
        cls = FormClass.from_form(seed)
        Qs = form_from_matrix(sig)
        assert crosses(seed, Qs)
        mu = intersection_data(seed, Qs).sign
        target = form_sign_at_surd(seed, oriented_endpoints(Qs)[0])
        assert target == -mu
        assert sign_limit_check(cls, sig, 30) is True


def test_sign_limit_rejects_shared_axis():
    with pytest.raises(ValueError):
        sign_limit_check(CLS8, SIG6, 10)    # seed axis equals sigma axis


def test_sign_limit_rejects_imprimitive():
    with pytest.raises(ValueError):
        sign_limit_check(CLS5, GroupElement(2, 3, 3, 5), 10)


# ---------------------------------------------------------------------------
# coefficient engine internals
# ---------------------------------------------------------------------------

def test_coefficient_vector_prefix_reuse_consistent():
    long = fourier_coefficient_vector(3, CLS5, "parson", 80, 24)
    short = fourier_coefficient_vector(3, CLS5, "parson", 80, 10)
    assert short == long[:11]
    assert short[0] == 0j


def test_coefficient_vector_against_family_direct():
    # independent reassembly: sum per-family analytic coefficients
    k, bound, n_max = 3, 60, 12
    D = CLS5.disc
    pref = series_prefactor(k, D)
    want = [0j] * (n_max + 1)
    for (A, Bc) in translation_groups(CLS5, bound):
        sgn = 1 if A > 0 else -1
        for n in range(1, n_max + 1):
            want[n] += pref * sgn * family_coefficient(k, A, Bc, D, n)
    got = fourier_coefficient_vector(3, CLS5, "parson", 60, 12)
    for n in range(1, n_max + 1):
        assert abs(got[n] - want[n]) < 1e-12 * max(1.0, abs(want[n]))


def test_series_value_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        series_value(3, CLS5, "parson", 0.5 - 1j, 50)


def test_default_n_max_bounds():
    assert default_n_max(10.0) == 8
    assert default_n_max(0.001) == 600
    assert 8 <= default_n_max(0.9) <= 60


# ---------------------------------------------------------------------------
# property suite: cocycle relation on random words
# ---------------------------------------------------------------------------

_GEN = st.sampled_from([T, T.inverse(), S])
_WORDS = st.lists(_GEN, min_size=1, max_size=3).map(lambda gs: _mul(*gs))


@settings(max_examples=100, deadline=None)
@given(sig=_WORDS, tau=_WORDS,
       x=st.floats(-1.0, 1.0), y=st.floats(0.6, 2.5),
       k=st.sampled_from([2, 3]), cls=st.sampled_from([CLS5, CLS12]))
def test_cocycle_relation_property(sig, tau, x, y, k, cls):
    z = complex(x, y)
    lhs = eval_cocycle(k, cls, sig * tau, z)
    rhs = (slash_weight(lambda w: eval_cocycle(k, cls, sig, w), tau, 2 * k)(z)
           + eval_cocycle(k, cls, tau, z))
    assert abs(lhs - rhs) < 1e-9
