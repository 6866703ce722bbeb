import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ramify.perm import (
    CycleParseError,
    DegreeMismatchError,
    GeneratedGroup,
    MembershipError,
    Permutation,
    Transitivity,
    compose,
    format_cycles,
    group_order,
    joined_group,
    naive_closure,
    normal_closure,
    orbits,
    parse_cycles,
    point_stabilizer,
    transitivity,
)

from oracles import o_closure, o_normal_closure, o_point_orbits, o_stabilizer


def perm(text: str, d: int) -> Permutation:
    return parse_cycles(text, d)


@st.composite
def permutations_st(draw, max_degree=8):
    d = draw(st.integers(min_value=1, max_value=max_degree))
    images = draw(st.permutations(list(range(1, d + 1))))
    return Permutation(images)


@st.composite
def small_groups_st(draw, max_degree=6, max_gens=3):
    d = draw(st.integers(min_value=1, max_value=max_degree))
    k = draw(st.integers(min_value=1, max_value=max_gens))
    gens = [Permutation(draw(st.permutations(list(range(1, d + 1)))))
            for _ in range(k)]
    return GeneratedGroup(d, gens)


# -- composition ------------------------------------------------------------

def test_compose_involution_is_identity():
    t = perm("(1 2)", 2)
    assert compose(t, t).is_identity()


def test_compose_right_factor_first():
    a = perm("(1 2 3 4)", 4)
    b = perm("(1 3)", 4)
    assert str(compose(a, b)) == "(1 4)(2 3)"


def test_compose_identity_law():
    a = perm("(1 3 2)", 4)
    assert compose(a, Permutation.identity(4)) == a
    assert compose(Permutation.identity(4), a) == a


def test_compose_degree_mismatch():
    with pytest.raises(DegreeMismatchError):
        compose(perm("(1 2)", 2), perm("(1 2)", 3))


@given(permutations_st())
def test_inverse_cancels(p):
    assert (p * p.inverse()).is_identity()
    assert (p.inverse() * p).is_identity()


@given(st.data())
def test_compose_matches_pointwise(data):
    d = data.draw(st.integers(min_value=1, max_value=7))
    a = Permutation(data.draw(st.permutations(list(range(1, d + 1)))))
    b = Permutation(data.draw(st.permutations(list(range(1, d + 1)))))
    c = a * b
    for i in range(1, d + 1):
        assert c(i) == a(b(i))


# -- parsing / printing -----------------------------------------------------

def test_parse_basic():
    assert parse_cycles("(1 2)(3 4)", 4).images == (2, 1, 4, 3)


def test_parse_id():
    assert parse_cycles("id", 3).is_identity()


def test_parse_repeated_point():
    with pytest.raises(CycleParseError, match="repeated point"):
        parse_cycles("(1 2 2)", 3)


def test_parse_out_of_range():
    with pytest.raises(CycleParseError, match="out of range"):
        parse_cycles("(1 5)", 4)


def test_parse_malformed():
    for bad in ["(1 2", "1 2)", "()", "(1 2))", "(1 a)", ""]:
        with pytest.raises(CycleParseError):
            parse_cycles(bad, 4)


def test_parse_fixed_point_cycle_allowed():
    assert parse_cycles("(3)", 3).is_identity()
    assert parse_cycles("(1 2)(3)", 3) == perm("(1 2)", 3)


def test_parse_accepts_whitespace_between_cycles():
    assert parse_cycles("(1 2) (3 4)", 4) == parse_cycles("(1 2)(3 4)", 4)


@given(permutations_st())
def test_print_parse_round_trip(p):
    assert parse_cycles(format_cycles(p), p.degree) == p


@given(permutations_st())
def test_printer_is_canonical(p):
    s = format_cycles(p)
    assert format_cycles(parse_cycles(s, p.degree)) == s


# -- group order ------------------------------------------------------------

def test_order_s3():
    g = GeneratedGroup(3, [perm("(1 2)", 3), perm("(1 2 3)", 3)])
    assert group_order(g) == 6


def test_order_d4():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4), perm("(1 3)", 4)])
    assert group_order(g) == 8


def test_order_s5():
    g = GeneratedGroup(5, [perm("(1 2 3 4 5)", 5), perm("(1 2)", 5)])
    assert group_order(g) == 120


def test_order_trivial():
    assert GeneratedGroup.trivial(4).order == 1


@settings(max_examples=60, deadline=None)
@given(small_groups_st())
def test_order_matches_naive_closure(g):
    raw = [tuple(x - 1 for x in p.images) for p in g.generators]
    assert g.order == len(o_closure(raw))


@settings(max_examples=40, deadline=None)
@given(small_groups_st())
def test_membership_matches_naive_closure(g):
    raw_closure = o_closure([tuple(x - 1 for x in p.images)
                             for p in g.generators])
    closure = {Permutation(tuple(x + 1 for x in t)) for t in raw_closure}
    for p in itertools.islice(closure, 30):
        assert p in g
    rng = random.Random(7)
    for _ in range(10):
        images = list(range(1, g.degree + 1))
        rng.shuffle(images)
        q = Permutation(images)
        assert (q in g) == (q in closure)


def test_elements_enumeration():
    g = GeneratedGroup(3, [perm("(1 2 3)", 3)])
    assert [str(p) for p in g.elements()] == ["id", "(1 2 3)", "(1 3 2)"]
    with pytest.raises(ValueError):
        GeneratedGroup(5, [perm("(1 2 3 4 5)", 5), perm("(1 2)", 5)]).elements(cap=100)


# -- orbits -----------------------------------------------------------------

def test_orbits_c2_on_three_points():
    g = GeneratedGroup(3, [perm("(1 2)", 3)])
    assert orbits(g) == ((1, 2), (3,))


def test_orbits_d4_on_pairs():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4), perm("(1 3)", 4)])
    parts = orbits(g, itertools.product(range(1, 5), repeat=2))
    sizes = sorted(len(p) for p in parts)
    assert sizes == [4, 4, 8]
    diag = next(p for p in parts if (1, 1) in p)
    assert set(diag) == {(i, i) for i in range(1, 5)}
    opposite = next(p for p in parts if (1, 3) in p)
    assert set(opposite) == {(1, 3), (3, 1), (2, 4), (4, 2)}


def test_orbits_s3_on_pairs():
    g = GeneratedGroup(3, [perm("(1 2)", 3), perm("(1 2 3)", 3)])
    assert len(orbits(g, itertools.product(range(1, 4), repeat=2))) == 2


@settings(max_examples=40, deadline=None)
@given(small_groups_st())
def test_orbits_match_oracle(g):
    raw = [tuple(x - 1 for x in p.images) for p in g.generators]
    expected = [tuple(x + 1 for x in part)
                for part in o_point_orbits(raw, g.degree)]
    assert list(orbits(g)) == expected


# -- point stabilizer -------------------------------------------------------

def test_stabilizer_s3():
    g = GeneratedGroup(3, [perm("(1 2)", 3), perm("(1 2 3)", 3)])
    assert point_stabilizer(g, 1).order == 2


def test_stabilizer_d4():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4), perm("(1 3)", 4)])
    stab = point_stabilizer(g, 1)
    assert stab.order == 2
    assert perm("(2 4)", 4) in stab


def test_stabilizer_c4_regular():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4)])
    assert point_stabilizer(g, 1).order == 1


@settings(max_examples=40, deadline=None)
@given(small_groups_st(), st.integers(min_value=1, max_value=6))
def test_orbit_stabilizer_identity(g, p):
    p = 1 + (p - 1) % g.degree
    orbit = next(part for part in g.orbit_partition if p in part)
    assert point_stabilizer(g, p).order * len(orbit) == g.order


@settings(max_examples=25, deadline=None)
@given(small_groups_st(max_degree=5))
def test_stabilizer_matches_oracle(g):
    raw = [tuple(x - 1 for x in p.images) for p in g.generators]
    elements = o_closure(raw)
    for p0 in range(g.degree):
        assert point_stabilizer(g, p0 + 1).order == len(o_stabilizer(elements, p0))


# -- normal closure ---------------------------------------------------------

def test_normal_closure_transposition_in_s3():
    g = GeneratedGroup(3, [perm("(1 2)", 3), perm("(1 2 3)", 3)])
    assert normal_closure([perm("(1 2)", 3)], g).order == 6


def test_normal_closure_in_d4():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4), perm("(1 3)", 4)])
    n = normal_closure([perm("(1 2)(3 4)", 4)], g)
    assert n.order == 4
    raw = [tuple(x - 1 for x in p.images) for p in g.generators]
    expected = o_normal_closure([(1, 0, 3, 2)], o_closure(raw))
    assert n.order == len(expected)


def test_normal_closure_of_identity():
    g = GeneratedGroup(3, [perm("(1 2 3)", 3)])
    assert normal_closure([Permutation.identity(3)], g).order == 1
    assert normal_closure([], g).order == 1


def test_normal_closure_membership_required():
    g = GeneratedGroup(4, [perm("(1 2 3 4)", 4)])
    with pytest.raises(MembershipError):
        normal_closure([perm("(1 2)", 4)], g)


@settings(max_examples=25, deadline=None)
@given(small_groups_st(max_degree=5), st.data())
def test_normal_closure_matches_oracle(g, data):
    elements = list(g.elements(cap=10080))
    sub = [data.draw(st.sampled_from(elements))]
    n = normal_closure(sub, g)
    for s in sub:
        assert s in n
    for gen in g.generators:
        for s in n.generators:
            assert s.conjugate(gen) in n
    raw_sub = [tuple(x - 1 for x in s.images) for s in sub]
    raw_all = {tuple(x - 1 for x in e.images) for e in elements}
    assert n.order == len(o_normal_closure(raw_sub, raw_all))


# -- transitivity -----------------------------------------------------------

def test_transitivity_cases():
    s3 = GeneratedGroup(3, [perm("(1 2)", 3), perm("(1 2 3)", 3)])
    c4 = GeneratedGroup(4, [perm("(1 2 3 4)", 4)])
    c2 = GeneratedGroup(3, [perm("(1 2)", 3)])
    assert transitivity(s3) is Transitivity.TWO_TRANSITIVE
    assert transitivity(c4) is Transitivity.TRANSITIVE
    assert transitivity(c2) is Transitivity.INTRANSITIVE


def test_transitivity_degree_one():
    assert transitivity(GeneratedGroup.trivial(1)) is Transitivity.TRANSITIVE


@settings(max_examples=40, deadline=None)
@given(small_groups_st(max_degree=6), permutations_st(max_degree=6))
def test_transitivity_conjugation_invariant(g, s):
    if s.degree != g.degree:
        s = Permutation.identity(g.degree)
    conj = GeneratedGroup(g.degree, [p.conjugate(s) for p in g.generators])
    assert transitivity(conj) is transitivity(g)


# -- misc -------------------------------------------------------------------

def test_naive_closure_matches_group_order():
    gens = [perm("(1 2 3 4)", 4), perm("(1 3)", 4)]
    assert len(naive_closure(gens)) == GeneratedGroup(4, gens).order


def test_naive_closure_cap():
    gens = [perm("(1 2 3 4 5 6 7 8)", 8), perm("(1 2)", 8)]
    with pytest.raises(ValueError):
        naive_closure(gens, cap=100)


def test_joined_group():
    a = GeneratedGroup(3, [perm("(1 2)", 3)])
    b = GeneratedGroup(3, [perm("(2 3)", 3)])
    assert joined_group(a, b).order == 6


def test_cycle_type_and_sign():
    p = perm("(1 2)(3 4 5)", 6)
    assert p.cycle_type() == (3, 2, 1)
    assert p.sign() == -1
    assert perm("(1 2)", 2).is_transposition()
    assert not perm("(1 2)(3 4)", 4).is_transposition()


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation([1, 1, 3])
