from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orbiflow.orb2 import (
    D2,
    D2_Dk,
    D2_Z2,
    EUCLIDEAN_SIGS,
    GeometryClass,
    S2,
    T2,
    TwoOrbSig,
    classify_extended,
    classify_geometry,
    is_bad,
    is_spherical_sig,
    mapping_class_group,
    orb_euler_char,
    spherical_sigs,
)


def chi_oracle(genus, cones, boundary=0):
    # independent exact evaluation of chi(|S|) - sum (1 - 1/k)
    return Fraction(2 - 2 * genus - boundary) - sum(Fraction(k - 1, k) for k in cones)


def test_euler_char_examples():
    assert orb_euler_char(S2(2, 3, 5)) == Fraction(1, 30)
    assert orb_euler_char(S2()) == 2
    assert orb_euler_char(S2(2, 2, 2, 2)) == 0
    assert orb_euler_char(S2(2, 3, 7)) == Fraction(-1, 42)
    assert orb_euler_char(S2(3, 3)) == Fraction(2, 3)
    assert orb_euler_char(S2(2)) == Fraction(3, 2)
    assert orb_euler_char(D2_Z2) == Fraction(1, 2)
    assert orb_euler_char(D2_Dk(4)) == Fraction(1, 8)


@given(
    genus=st.integers(0, 4),
    cones=st.lists(st.integers(2, 60), max_size=6),
    boundary=st.integers(0, 3),
)
def test_euler_char_matches_oracle(genus, cones, boundary):
    s = TwoOrbSig(genus, tuple(cones), boundary)
    assert orb_euler_char(s) == chi_oracle(genus, cones, boundary)


@given(cones=st.lists(st.integers(2, 40), min_size=1, max_size=5), bump=st.integers(1, 10))
def test_euler_char_strictly_decreasing_in_each_cone_order(cones, bump):
    base = TwoOrbSig(0, tuple(cones), 0)
    larger = list(cones)
    larger[0] += bump
    assert orb_euler_char(TwoOrbSig(0, tuple(larger), 0)) < orb_euler_char(base)


@given(cones=st.lists(st.integers(2, 40), max_size=4), k=st.integers(2, 40))
def test_euler_char_additive_cone_deficit(cones, k):
    s0 = TwoOrbSig(0, tuple(cones), 0)
    s1 = TwoOrbSig(0, tuple(cones) + (k,), 0)
    assert orb_euler_char(s1) == orb_euler_char(s0) - Fraction(k - 1, k)


def test_classification_examples():
    assert classify_geometry(S2(2, 3, 5)) is GeometryClass.Spherical
    assert classify_geometry(S2(2, 3)) is GeometryClass.Bad
    assert classify_geometry(S2(3, 3, 3)) is GeometryClass.Euclidean
    assert classify_geometry(S2(2, 3, 7)) is GeometryClass.Hyperbolic
    assert classify_geometry(T2()) is GeometryClass.Euclidean
    assert classify_geometry(S2(7)) is GeometryClass.Bad


def test_full_spherical_list():
    for s in spherical_sigs(50):
        assert classify_geometry(s) is GeometryClass.Spherical, s
        assert is_spherical_sig(s), s
        assert orb_euler_char(s) > 0


def test_full_euclidean_list():
    for s in EUCLIDEAN_SIGS:
        assert classify_geometry(s) is GeometryClass.Euclidean
        assert orb_euler_char(s) == 0


def test_bad_family():
    for k in range(2, 30):
        assert classify_geometry(S2(k)) is GeometryClass.Bad
        for kp in range(2, 30):
            expected = GeometryClass.Bad if k != kp else GeometryClass.Spherical
            assert classify_geometry(S2(k, kp)) is expected


def test_symmetric_football_is_good():
    for k in range(2, 101):
        assert classify_geometry(S2(k, k)) is GeometryClass.Spherical


@given(
    genus=st.integers(0, 3),
    cones=st.lists(st.integers(2, 30), max_size=5),
)
def test_sign_determines_class_for_good_signatures(genus, cones):
    s = TwoOrbSig(genus, tuple(cones), 0)
    if is_bad(s):
        assert classify_geometry(s) is GeometryClass.Bad
        return
    chi = orb_euler_char(s)
    cls = classify_geometry(s)
    if chi > 0:
        assert cls is GeometryClass.Spherical
    elif chi == 0:
        assert cls is GeometryClass.Euclidean
    else:
        assert cls is GeometryClass.Hyperbolic


def test_bounded_signatures():
    with pytest.raises(ValueError):
        classify_geometry(D2(3))
    assert classify_extended(D2(3)) is GeometryClass.Discal
    assert classify_extended(D2()) is GeometryClass.Discal
    assert classify_extended(D2_Z2) is GeometryClass.Discal
    assert classify_extended(D2_Dk(5)) is GeometryClass.Discal
    assert classify_extended(D2(2, 2)) is GeometryClass.Other
    assert classify_extended(TwoOrbSig(0, (), 2)) is GeometryClass.Other


def test_signature_validation():
    with pytest.raises(ValueError):
        TwoOrbSig(0, (1, 3), 0)
    with pytest.raises(ValueError):
        TwoOrbSig(0, (), 0, ("Z2", 0))  # reflector needs boundary
    # canonical sorted cone orders
    assert TwoOrbSig(0, (5, 2, 3), 0) == TwoOrbSig(0, (2, 3, 5), 0)


def test_mapping_class_groups():
    assert mapping_class_group(S2(2, 3, 6)).order == 1
    assert mapping_class_group(S2(2, 4, 4)).order == 2
    assert mapping_class_group(S2(3, 3, 3)).name == "S3"
    assert mapping_class_group(S2(3, 3, 3)).order == 6
    assert mapping_class_group(S2(2, 2, 2, 2)).order == float("inf")
    assert "PSL(2,Z)" in mapping_class_group(S2(2, 2, 2, 2)).name
    assert mapping_class_group(T2()).order == float("inf")
    with pytest.raises(ValueError):
        mapping_class_group(S2(2, 3, 5))
    with pytest.raises(ValueError):
        mapping_class_group(S2(2, 3, 7))
