import json

import pytest
from hypothesis import given, settings, strategies as st

from ramify.cover import (
    BranchedCover,
    CoverFormatError,
    InvalidCoverError,
    cover_from_json_dict,
    dumps_cover,
    is_galois,
    is_morse,
    loads_cover,
    monodromy_group,
    relation_product,
    total_space_genus,
    validate,
)
from ramify.perm import Permutation, parse_cycles


def mk(d, g, cycle_strs, handle_strs=()):
    return BranchedCover(
        degree=d,
        base_genus=g,
        handles=tuple((parse_cycles(a, d), parse_cycles(b, d))
                      for a, b in handle_strs),
        branch_cycles=tuple(parse_cycles(s, d) for s in cycle_strs),
    )


HYPERELLIPTIC6 = mk(2, 0, ["(1 2)"] * 6)
TREFOIL = mk(3, 0, ["(1 2)", "(2 3)", "(1 3 2)"])
TREFOIL_MORSE = mk(3, 0, ["(1 2)", "(1 2)", "(2 3)", "(2 3)"])
D4 = mk(4, 0, ["(1 2 3 4)", "(1 3)", "(1 4)(2 3)"])
ETALE_G1 = mk(2, 1, [], handle_strs=[("(1 2)", "id")])
RAMIFIED_G1 = mk(2, 1, ["(1 2)", "(1 2)"], handle_strs=[("id", "id")])
IDENTITY_COVER = mk(1, 0, [])


@st.composite
def valid_covers_st(draw, max_degree=5, max_genus=1, max_branch=4):
    d = draw(st.integers(min_value=1, max_value=max_degree))
    g = draw(st.integers(min_value=0, max_value=max_genus))
    r = draw(st.integers(min_value=0, max_value=max_branch))
    perm_st = st.permutations(list(range(1, d + 1))).map(Permutation)
    handles = tuple((draw(perm_st), draw(perm_st)) for _ in range(g))
    frees = [draw(perm_st) for _ in range(max(r - 1, 0))]
    cover = None
    if r > 0:
        prefix = BranchedCover(d, g, handles, tuple(frees))
        last = relation_product(prefix).inverse()
        cover = BranchedCover(d, g, handles, tuple(frees) + (last,))
    else:
        cover = BranchedCover(d, g, handles, ())
    report = validate(cover)
    from hypothesis import assume
    assume(report.valid)
    return cover


# -- validation ---------------------------------------------------------

def test_validate_hyperelliptic_pair():
    assert validate(mk(2, 0, ["(1 2)", "(1 2)"])).valid


def test_validate_relation_failure():
    report = validate(mk(3, 0, ["(1 2)", "(2 3)"]))
    assert not report.valid
    assert any("surface relation" in v for v in report.violations)


def test_validate_d4_cover():
    report = validate(D4)
    assert report.valid
    assert report.monodromy_order == 8


def test_validate_reports_all_violations():
    bad = mk(3, 0, ["id", "(1 2)"])
    report = validate(bad)
    assert not report.valid
    assert any("identity" in v for v in report.violations)
    assert any("surface relation" in v for v in report.violations)
    assert any("intransitive" in v for v in report.violations)


def test_validate_intransitive():
    report = validate(mk(3, 0, ["(1 2)", "(1 2)"]))
    assert not report.valid
    assert any("intransitive" in v for v in report.violations)


def test_validate_degree_mismatch():
    bad = BranchedCover(3, 0, (), (parse_cycles("(1 2)", 2),))
    report = validate(bad)
    assert not report.valid
    assert any("degree" in v for v in report.violations)


def test_validate_etale_and_identity_covers():
    assert validate(ETALE_G1).valid
    assert validate(IDENTITY_COVER).valid


def test_operations_reject_invalid_cover():
    bad = mk(3, 0, ["(1 2)", "(2 3)"])
    with pytest.raises(InvalidCoverError):
        total_space_genus(bad)
    with pytest.raises(InvalidCoverError):
        monodromy_group(bad)


# -- monodromy group ------------------------------------------------------

def test_monodromy_hyperelliptic():
    assert monodromy_group(HYPERELLIPTIC6).order == 2


def test_monodromy_trefoil():
    assert monodromy_group(TREFOIL).order == 6


def test_monodromy_d4():
    assert monodromy_group(D4).order == 8


# -- genus ----------------------------------------------------------------

def test_genus_hyperelliptic_six_points():
    assert total_space_genus(HYPERELLIPTIC6) == 2


def test_genus_trefoil():
    assert total_space_genus(TREFOIL) == 0


def test_genus_etale_over_torus():
    assert total_space_genus(ETALE_G1) == 1


def test_genus_identity_cover_matches_base():
    assert total_space_genus(IDENTITY_COVER) == 0
    torus_id = mk(1, 1, [])
    assert total_space_genus(torus_id) == 1


# -- predicates -------------------------------------------------------------

def test_is_morse():
    assert is_morse(TREFOIL_MORSE)
    assert not is_morse(TREFOIL)  # 3-cycle present
    klein = mk(4, 0, ["(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"])
    assert validate(klein).valid
    assert not is_morse(klein)  # double transpositions: two ramification points


def test_is_galois():
    assert is_galois(HYPERELLIPTIC6)
    assert not is_galois(D4)
    assert is_galois(mk(3, 0, ["(1 2 3)", "(1 3 2)"]))


# -- properties ---------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(valid_covers_st(), st.data())
def test_relabel_invariance(cover, data):
    sigma = Permutation(data.draw(
        st.permutations(list(range(1, cover.degree + 1)))))
    other = cover.relabel(sigma)
    r1, r2 = validate(cover), validate(other)
    assert r1.valid and r2.valid
    assert r1.total_space_genus == r2.total_space_genus
    assert r1.monodromy_order == r2.monodromy_order
    assert r1.is_morse == r2.is_morse
    assert r1.is_galois == r2.is_galois


@settings(max_examples=60, deadline=None)
@given(valid_covers_st())
def test_genus_is_non_negative_integer(cover):
    assert total_space_genus(cover) >= 0


def test_morse_parity_degree_two():
    # over genus 0 with d = 2, Morse covers need an even branch count
    for r in (2, 4, 6, 8):
        assert validate(mk(2, 0, ["(1 2)"] * r)).valid
    for r in (1, 3, 5):
        assert not validate(mk(2, 0, ["(1 2)"] * r)).valid


def test_galois_regular_model_consistency():
    # the same tuple viewed through its regular action also validates
    cover = mk(3, 0, ["(1 2 3)", "(1 3 2)"])
    assert validate(cover).valid and is_galois(cover)
    # regular action of C_3 on itself is the same degree here; genus agrees
    assert total_space_genus(cover) == 0


# -- cover files ----------------------------------------------------------

def test_cover_file_round_trip():
    for cover in (HYPERELLIPTIC6, TREFOIL, D4, ETALE_G1, IDENTITY_COVER):
        assert loads_cover(dumps_cover(cover)) == cover


def test_cover_file_with_labels_round_trip():
    cover = BranchedCover(2, 0,
                          branch_cycles=(parse_cycles("(1 2)", 2),) * 2,
                          labels=("x=0", "x=1"))
    assert loads_cover(dumps_cover(cover)) == cover


def test_cover_file_rejects_unknown_fields():
    doc = json.loads(dumps_cover(TREFOIL))
    doc["extra"] = 1
    with pytest.raises(CoverFormatError, match="unknown fields"):
        cover_from_json_dict(doc)


def test_cover_file_rejects_missing_fields():
    with pytest.raises(CoverFormatError, match="missing field"):
        cover_from_json_dict({"degree": 2})


def test_cover_file_rejects_bad_types():
    with pytest.raises(CoverFormatError):
        cover_from_json_dict({"degree": "2", "base_genus": 0,
                              "handles": [], "branch_cycles": []})
    with pytest.raises(CoverFormatError):
        loads_cover("not json")


def test_cover_file_is_deterministic():
    assert dumps_cover(D4) == dumps_cover(D4)
