from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orbiflow.orb2 import S2
from orbiflow.orb3 import (
    Component,
    DiscSite,
    Edge,
    SingularGraph,
    ThreeOrbDesc,
    discal_fill,
    edge_label_multiset,
    edge_label_set,
    undo_zero_surgery,
    validate_vertex,
    vertex_link,
    zero_surgery,
)


def test_vertex_condition_examples():
    assert validate_vertex(2, 2, 7) is True
    assert validate_vertex(2, 3, 5) is True
    assert validate_vertex(2, 3, 6) is False
    assert validate_vertex(3, 3, 3) is False
    with pytest.raises(ValueError):
        validate_vertex(1, 2, 2)


@given(st.integers(2, 50), st.integers(2, 50), st.integers(2, 50))
def test_vertex_condition_matches_exact_sign(p, q, r):
    expected = (Fraction(1, p) + Fraction(1, q) + Fraction(1, r)) > 1
    assert validate_vertex(p, q, r) is expected


def test_vertex_link():
    assert vertex_link(2, 3, 4) == S2(2, 3, 4)
    assert vertex_link(2, 2, 2) == S2(2, 2, 2)
    with pytest.raises(ValueError):
        vertex_link(2, 3, 6)


def test_discal_fill():
    assert str(discal_fill(S2(5, 5))) == "D3(5,5)"
    assert str(discal_fill(S2())) == "D3"
    assert str(discal_fill(S2(2, 3, 5))) == "D3(2,3,5)"
    assert str(discal_fill(S2(2, 2, 9))) == "D3(2,2,9)"
    with pytest.raises(ValueError):
        discal_fill(S2(2, 3))  # bad football
    with pytest.raises(ValueError):
        discal_fill(S2(2, 3, 7))  # hyperbolic
    # boundary of the fill is the input signature
    for s in (S2(), S2(4, 4), S2(2, 2, 3), S2(2, 3, 3)):
        assert discal_fill(s).boundary() == s


def test_graph_validation():
    # tripod: three edges meeting at one vertex (other ends free in D3(2,2,5))
    g = SingularGraph(
        (
            Edge("e1", 2, ("v", None)),
            Edge("e2", 2, ("v", None)),
            Edge("e3", 5, ("v", None)),
        )
    )
    assert g.vertices() == ("v",)
    with pytest.raises(ValueError):
        SingularGraph(
            (
                Edge("e1", 2, ("v", None)),
                Edge("e2", 3, ("v", None)),
                Edge("e3", 6, ("v", None)),
            )
        )
    with pytest.raises(ValueError):
        SingularGraph((Edge("e1", 2, ("v", None)), Edge("e2", 2, ("v", None))))
    with pytest.raises(ValueError):
        Edge("e1", 1)


def _two_circles_desc():
    c0 = Component("S3", SingularGraph((Edge("a", 5),)))
    c1 = Component("S3", SingularGraph((Edge("b", 5),)))
    return ThreeOrbDesc((c0, c1))


def test_edge_label_multiset():
    empty = ThreeOrbDesc((Component("S3"),))
    assert edge_label_multiset(empty) == {}
    tripod = ThreeOrbDesc(
        (
            Component(
                "S3",
                SingularGraph(
                    (
                        Edge("e1", 2, ("v", "w")),
                        Edge("e2", 2, ("v", "w")),
                        Edge("e3", 5, ("v", "w")),
                    )
                ),
            ),
        )
    )
    assert edge_label_multiset(tripod) == {2: 2, 5: 1}


def test_connected_sum_smooth_sites():
    desc = _two_circles_desc()
    d1 = DiscSite("d1", 0)
    d2 = DiscSite("d2", 1)
    out, rec = zero_surgery(desc, d1, d2)
    assert out.component_count == desc.component_count - 1
    assert rec.direction == "split"
    assert rec.gamma == S2()
    assert edge_label_multiset(out) == edge_label_multiset(desc)


def test_join_edge_sites_keeps_multiset():
    desc = _two_circles_desc()
    d1 = DiscSite("d1", 0, anchor="a")
    d2 = DiscSite("d2", 1, anchor="b")
    out, rec = zero_surgery(desc, d1, d2)
    assert rec.gamma == S2(5, 5)
    assert edge_label_multiset(out) == edge_label_multiset(desc) == {5: 2}


def test_join_within_one_component():
    comp = Component("S3", SingularGraph((Edge("a", 3), Edge("b", 3))))
    desc = ThreeOrbDesc((comp,))
    out, rec = zero_surgery(desc, DiscSite("d1", 0, "a"), DiscSite("d2", 0, "b"))
    assert rec.direction == "join"
    assert out.component_count == 1
    assert edge_label_multiset(out) == {3: 2}


def test_surgery_roundtrip():
    desc = _two_circles_desc()
    out, rec = zero_surgery(desc, DiscSite("d1", 0, "a"), DiscSite("d2", 1, "b"))
    assert undo_zero_surgery(out, rec) == desc
    comp = Component("L(5,1)", SingularGraph((Edge("a", 7), Edge("b", 7))))
    desc2 = ThreeOrbDesc((comp, Component("S3")))
    out2, rec2 = zero_surgery(desc2, DiscSite("d1", 0, "a"), DiscSite("d2", 0, "b"))
    assert undo_zero_surgery(out2, rec2) == desc2


def test_surgery_errors():
    desc = _two_circles_desc()
    with pytest.raises(ValueError):
        zero_surgery(desc, DiscSite("d1", 0, "a"), DiscSite("d2", 1))  # mismatch
    with pytest.raises(ValueError):
        zero_surgery(desc, DiscSite("d", 0, "a"), DiscSite("d", 0, "a"))  # same site
    comp = Component("S3", SingularGraph((Edge("a", 3),)))
    with pytest.raises(ValueError):
        zero_surgery(
            ThreeOrbDesc((comp,)), DiscSite("d1", 0, "a"), DiscSite("d2", 0, "a")
        )  # overlapping edge sites


def test_label_set_never_grows_under_surgery():
    desc = _two_circles_desc()
    out, _ = zero_surgery(desc, DiscSite("d1", 0, "a"), DiscSite("d2", 1, "b"))
    assert edge_label_set(out) <= edge_label_set(desc)
