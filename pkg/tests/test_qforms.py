"""Exact form/group layer: oracles are brute-force scans written first."""
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from modgeo.qforms import (
    FormClass,
    GroupElement,
    QForm,
    QFormError,
    apply_sl2,
    assemble_word,
    class_representatives,
    decompose_word,
    enumerate_orbit_bounded,
    form_from_matrix,
    is_discriminant,
    is_equivalent,
    is_primitive_hyperbolic,
    is_reduced,
    matrix_from_form,
    normalize_hyperbolic,
    pell_fundamental,
    reduce_form,
    reduction_cycle,
    stabilizer_automorph,
    translation_groups,
    two_term_sign,
)

# ---------------------------------------------------------------------------
# oracles (independent of the implementations under test)
# ---------------------------------------------------------------------------

def pell_brute(D: int) -> tuple[int, int]:
    """Smallest u > 0 with 4 + D u^2 square."""
    u = 1
    while True:
        tt = 4 + D * u * u
        r = math.isqrt(tt)
        if r * r == tt:
            return (r, u)
        u += 1


def orbit_brute(cls: FormClass, H: int) -> list[QForm]:
    """Rectangle scan + class membership, no wedge machinery."""
    D = cls.disc
    out = set()
    for A in range(-H, H + 1):
        for C in range(-H, H + 1):
            bb = D + 4 * A * C
            if bb < 0:
                continue
            r = math.isqrt(bb)
            if r * r != bb:
                continue
            for B in ({r, -r} if r else {0}):
                Q = QForm(A, B, C)
                if cls.contains(Q):
                    out.add(Q)
    return sorted(out, key=QForm.as_tuple)


def all_forms_brute(D: int, H: int) -> set[QForm]:
    out = set()
    for A in range(-H, H + 1):
        for C in range(-H, H + 1):
            bb = D + 4 * A * C
            if bb < 0:
                continue
            r = math.isqrt(bb)
            if r * r != bb:
                continue
            for B in ({r, -r} if r else {0}):
                out.add(QForm(A, B, C))
    return out


def rand_group_element(rng: random.Random) -> GroupElement:
    g = GroupElement.identity()
    for _ in range(rng.randrange(1, 10)):
        if rng.random() < 0.5:
            g = g * GroupElement.T(rng.randrange(-4, 5))
        else:
            g = g * GroupElement.S()
    return g


DISCS = [5, 8, 12, 13, 17, 20, 21, 24, 28, 32, 40, 44, 45, 60, 61]


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def test_group_element_determinant_checked():
    with pytest.raises(QFormError):
        GroupElement(1, 0, 0, 2)
    with pytest.raises(QFormError):
        GroupElement(2, 0, 0, 2)


def test_definite_form_rejected_at_ops():
    Q = QForm(1, 0, 1)  # constructing is fine, disc checks are at op level
    with pytest.raises(QFormError):
        reduce_form(Q)
    with pytest.raises(QFormError):
        matrix_from_form(Q)


def test_square_disc_rejected():
    with pytest.raises(QFormError):
        class_representatives(9)
    with pytest.raises(QFormError):
        pell_fundamental(16)
    with pytest.raises(QFormError):
        reduce_form(QForm(1, 3, 0))  # disc 9


def test_is_discriminant():
    assert [D for D in range(1, 30) if is_discriminant(D)] == \
        [5, 8, 12, 13, 17, 20, 21, 24, 28, 29]


def test_two_term_sign_exact():
    assert two_term_sign(0, 1, 5) == 1
    assert two_term_sign(0, -1, 5) == -1
    assert two_term_sign(-2, 1, 5) == 1   # sqrt5 > 2
    assert two_term_sign(-3, 1, 5) == -1  # sqrt5 < 3
    assert two_term_sign(7, -2, 12) == 1  # 7 > 2 sqrt12 = 6.93
    assert two_term_sign(-7, 2, 12) == -1
    with pytest.raises(QFormError):
        two_term_sign(2, -1, 4)  # sqrt4 rational: tie is a caller bug


# ---------------------------------------------------------------------------
# group algebra
# ---------------------------------------------------------------------------

def test_group_identities():
    S, T = GroupElement.S(), GroupElement.T()
    assert S * S == -GroupElement.identity()
    assert (S * T) ** 3 == -GroupElement.identity()
    assert T ** 5 == GroupElement.T(5)
    assert T ** -3 == GroupElement.T(-3)


def test_inverse_and_pow():
    rng = random.Random(11)
    for _ in range(120):
        g = rand_group_element(rng)
        assert g * g.inverse() == GroupElement.identity()
        assert g ** -2 == (g.inverse()) ** 2
        assert g ** 0 == GroupElement.identity()


def test_moebius_action_composes():
    rng = random.Random(12)
    z = 0.3 + 1.7j
    for _ in range(100):
        g, h = rand_group_element(rng), rand_group_element(rng)
        assert abs((g * h).apply(z) - g.apply(h.apply(z))) < 1e-12


# ---------------------------------------------------------------------------
# action on forms
# ---------------------------------------------------------------------------

def test_action_is_right_action():
    rng = random.Random(3)
    for _ in range(150):
        Q = QForm(rng.randrange(-5, 6) or 1, rng.randrange(-5, 6),
                  rng.randrange(-5, 6))
        g, h = rand_group_element(rng), rand_group_element(rng)
        assert apply_sl2(Q, g * h) == apply_sl2(apply_sl2(Q, g), h)
        assert apply_sl2(Q, GroupElement.identity()) == Q
        assert apply_sl2(Q, g).disc == Q.disc
        assert apply_sl2(Q, g).content == Q.content


def test_action_matches_substitution():
    rng = random.Random(4)
    for _ in range(150):
        Q = QForm(rng.randrange(-5, 6) or 1, rng.randrange(-5, 6),
                  rng.randrange(-5, 6))
        g = rand_group_element(rng)
        x, y = rng.randrange(-7, 8), rng.randrange(-7, 8)
        assert apply_sl2(Q, g)(x, y) == Q(g.a * x + g.b * y, g.c * x + g.d * y)


def test_form_from_matrix_anchors():
    assert form_from_matrix(GroupElement(1, 1, 1, 2)) == QForm(1, 1, -1)
    assert form_from_matrix(GroupElement(2, 1, 1, 1)) == QForm(1, -1, -1)
    with pytest.raises(QFormError):
        form_from_matrix(GroupElement.T(3))  # parabolic


def test_form_from_matrix_conjugation_covariance():
    rng = random.Random(5)
    gam0 = GroupElement(1, 1, 1, 2)
    for _ in range(150):
        g = rand_group_element(rng)
        gam = g * gam0 * g.inverse()
        assert form_from_matrix(gam) == apply_sl2(form_from_matrix(gam0),
                                                  g.inverse())


def test_matrix_form_roundtrip():
    # matrix_from_form(Q) stabilizes Q; form_from_matrix recovers Q/content scale
    for D in DISCS:
        for cls in class_representatives(D):
            for Q in cls.cycle:
                M = matrix_from_form(Q)
                assert apply_sl2(Q, M) == Q
                t, u = pell_fundamental(D)
                assert M.trace == t
                assert form_from_matrix(M) == QForm(Q.A * u, Q.B * u, Q.C * u)


# ---------------------------------------------------------------------------
# pell
# ---------------------------------------------------------------------------

def test_pell_fundamental_vs_brute():
    for D in DISCS:
        assert pell_fundamental(D) == pell_brute(D), D


def test_pell_anchors():
    assert pell_fundamental(5) == (3, 1)
    assert pell_fundamental(8) == (6, 2)
    assert pell_fundamental(12) == (4, 1)
    assert pell_fundamental(32) == (6, 1)
    assert pell_fundamental(45) == (7, 1)


def test_matrix_from_form_anchors():
    assert matrix_from_form(QForm(1, 1, -1)) == GroupElement(1, 1, 1, 2)
    assert matrix_from_form(QForm(1, -1, -1)) == GroupElement(2, 1, 1, 1)
    assert matrix_from_form(QForm(2, 4, -2)) == GroupElement(1, 2, 2, 5)
    assert matrix_from_form(QForm(1, 5, -5)) == GroupElement(1, 5, 1, 6)
    # content-3 form: pell matrix of disc 45 is the SQUARE of the generator
    assert matrix_from_form(QForm(3, 3, -3)) == GroupElement(2, 3, 3, 5)
    assert stabilizer_automorph(QForm(3, 3, -3)) == GroupElement(1, 1, 1, 2)
    assert matrix_from_form(QForm(3, 3, -3)) == \
        stabilizer_automorph(QForm(3, 3, -3)) ** 2


def test_is_primitive_hyperbolic():
    M5 = GroupElement(1, 1, 1, 2)
    assert is_primitive_hyperbolic(M5)
    assert is_primitive_hyperbolic(-M5.inverse())
    assert not is_primitive_hyperbolic(M5 ** 2)
    assert not is_primitive_hyperbolic(GroupElement(2, 3, 3, 5))  # = M5^2
    assert not is_primitive_hyperbolic(GroupElement.T(1))
    rng = random.Random(6)
    for _ in range(100):
        g = rand_group_element(rng)
        gam = g * M5 * g.inverse()
        assert is_primitive_hyperbolic(gam)
        assert not is_primitive_hyperbolic(gam * gam)


def test_normalize_hyperbolic():
    rng = random.Random(7)
    base = GroupElement(1, 1, 1, 2)
    for _ in range(120):
        g = rand_group_element(rng)
        gam = g * (base ** rng.choice([1, 2, 3])) * g.inverse()
        if gam.c == 0:
            continue
        variants = (gam, -gam, gam.inverse(), -gam.inverse())
        normed = {normalize_hyperbolic(v) for v in variants}
        assert len(normed) == 1
        n = normed.pop()
        assert n.trace > 0 and n.c > 0 and n in variants


# ---------------------------------------------------------------------------
# reduction and classes
# ---------------------------------------------------------------------------

def test_reduction_cycle_anchor_d5():
    cyc = reduction_cycle(QForm(1, 1, -1))
    assert set(cyc) == {QForm(1, 1, -1), QForm(-1, 1, 1)}
    assert reduce_form(QForm(1, 3, 1)) in cyc


def test_is_reduced_matches_root_condition():
    # reduced <=> w > 1 > w' > 0 in absolute value with opposite signs:
    # exact check via two_term_sign against the standard inequality set
    for D in DISCS:
        for Q in all_forms_brute(D, 12):
            s = math.isqrt(D)
            B, twoA = Q.B, 2 * abs(Q.A)
            expect = (0 < B and B * B < D
                      and (twoA - B) ** 2 < D < (twoA + B) ** 2)
            assert is_reduced(Q) == expect, Q


def test_class_representatives_counts():
    assert len(class_representatives(5)) == 1
    assert len(class_representatives(8)) == 1
    assert len(class_representatives(12)) == 2
    assert len(class_representatives(13)) == 1
    assert len(class_representatives(32)) == 3
    assert len(class_representatives(45)) == 3


def test_class_representatives_cover_and_disjoint():
    for D in (12, 32, 45, 40):
        classes = class_representatives(D)
        seen: set[QForm] = set()
        for cls in classes:
            assert not (set(cls.cycle) & seen)
            seen |= set(cls.cycle)
        # every reduced form of disc D appears in exactly one cycle
        reduced = {Q for Q in all_forms_brute(D, D) if is_reduced(Q)}
        assert seen == reduced


def test_is_equivalent_equivalence_relation():
    rng = random.Random(8)
    cls12 = class_representatives(12)
    a, b = cls12[0].seed, cls12[1].seed
    assert not is_equivalent(a, b)
    for _ in range(100):
        g, h = rand_group_element(rng), rand_group_element(rng)
        Qa, Qb = apply_sl2(a, g), apply_sl2(a, h)
        assert is_equivalent(Qa, Qb)
        assert is_equivalent(Qb, Qa)
        assert not is_equivalent(Qa, apply_sl2(b, g))


def test_imprimitive_class_scaling():
    # content-m classes are m * (primitive classes of D/m^2)
    prim = class_representatives(5)[0]
    imp = [c for c in class_representatives(45) if c.content == 3]
    assert len(imp) == 1
    scaled = {QForm(3 * f.A, 3 * f.B, 3 * f.C) for f in prim.cycle}
    assert set(imp[0].cycle) == scaled


# ---------------------------------------------------------------------------
# orbit enumeration
# ---------------------------------------------------------------------------

def test_orbit_bounded_d5_h1_anchor():
    cls = class_representatives(5)[0]
    got = {f.as_tuple() for f in enumerate_orbit_bounded(cls, 1)}
    assert got == {(1, 1, -1), (1, -1, -1), (-1, 1, 1), (-1, -1, 1),
                   (1, 3, 1), (1, -3, 1), (-1, 3, -1), (-1, -3, -1)}


def test_orbit_bounded_vs_brute():
    for D in DISCS:
        for cls in class_representatives(D):
            for H in (1, 3, 9):
                got = enumerate_orbit_bounded(cls, H)
                assert got == orbit_brute(cls, H), (D, cls.seed, H)


def test_orbit_bounded_monotone_and_sorted():
    for D in (5, 12, 32):
        for cls in class_representatives(D):
            prev: set[QForm] = set()
            for H in (1, 2, 4, 8, 16):
                cur = enumerate_orbit_bounded(cls, H)
                assert cur == sorted(cur, key=QForm.as_tuple)
                assert prev <= set(cur)
                assert all(max(abs(f.A), abs(f.C)) <= H and f.disc == D
                           for f in cur)
                prev = set(cur)


def test_translation_groups_complete():
    # every orbit form with |A| <= H belongs to exactly one listed group
    for D in (5, 8, 12, 45):
        for cls in class_representatives(D):
            groups = set(translation_groups(cls, 6))
            for f in enumerate_orbit_bounded(cls, 6):
                if abs(f.A) > 6:
                    continue
                m = 2 * abs(f.A)
                Bc = f.B % m
                if Bc > abs(f.A):
                    Bc -= m
                assert (f.A, Bc) in groups


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------

def test_word_roundtrip_random():
    rng = random.Random(9)
    for _ in range(300):
        g = rand_group_element(rng)
        if rng.random() < 0.5:
            g = -g
        assert assemble_word(decompose_word(g)) == g


def test_word_anchors():
    assert decompose_word(GroupElement.identity()) == []
    assert assemble_word(decompose_word(GroupElement.S())) == GroupElement.S()
    assert decompose_word(GroupElement.T(4)) == [("T", 4)]


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------

form_strategy = st.tuples(
    st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9),
).filter(lambda t: is_discriminant(t[1] * t[1] - 4 * t[0] * t[2])).map(
    lambda t: QForm(*t))

word_strategy = st.lists(
    st.one_of(st.integers(-4, 4).map(lambda n: GroupElement.T(n)),
              st.just(GroupElement.S())),
    min_size=0, max_size=10)


def _product(ws):
    g = GroupElement.identity()
    for w in ws:
        g = g * w
    return g


@settings(max_examples=150, deadline=None)
@given(Q=form_strategy, ws=word_strategy)
def test_prop_action_preserves_disc_content(Q, ws):
    g = _product(ws)
    f = apply_sl2(Q, g)
    assert f.disc == Q.disc
    assert f.content == Q.content


@settings(max_examples=150, deadline=None)
@given(Q=form_strategy, ws=word_strategy)
def test_prop_equivalence_under_action(Q, ws):
    assert is_equivalent(Q, apply_sl2(Q, _product(ws)))


@settings(max_examples=120, deadline=None)
@given(Q=form_strategy)
def test_prop_reduce_reaches_cycle(Q):
    R = reduce_form(Q)
    assert is_reduced(R)
    assert R in reduction_cycle(Q)
    assert is_equivalent(Q, R)


@settings(max_examples=120, deadline=None)
@given(Q=form_strategy)
def test_prop_automorph_stabilizes(Q):
    M = stabilizer_automorph(Q)
    assert apply_sl2(Q, M) == Q
    assert M.trace > 2
    assert is_primitive_hyperbolic(M)


@settings(max_examples=150, deadline=None)
@given(p=st.integers(-50, 50), q=st.integers(-50, 50),
       d=st.sampled_from([2, 3, 5, 7, 8, 12, 45]))
def test_prop_two_term_sign(p, q, d):
    import math as m
    approx = p + q * m.sqrt(d)
    if abs(approx) > 1e-6:
        assert two_term_sign(p, q, d) == (1 if approx > 0 else -1)
