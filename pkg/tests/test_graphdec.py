import pytest
from hypothesis import given, settings, strategies as st

from orbiflow.orb2 import S2
from orbiflow.graphdec import (
    BaseOrb,
    Circle,
    CutSpec,
    GraphDataError,
    GraphOrb,
    Gluing,
    SeifertPiece,
    compressible_boundary_split,
    normalize,
    op1_merge,
    op2_dehn_merge,
    parse_base,
    step5_recognize,
    step_cut,
    step_possibilities,
    verify_strong,
)


def annulus_piece(pid, fibers=(), genus=0, circles=2):
    return SeifertPiece(pid, BaseOrb(genus, tuple(Circle() for _ in range(circles))), fibers)


def solid_torus(pid, r=1):
    return SeifertPiece(pid, BaseOrb(0, (Circle(),)), (r,) if r >= 2 else ())


def twisted_solid(pid, r=1):
    corners = (r,) if r >= 2 else ()
    return SeifertPiece(pid, BaseOrb(0, (Circle(mixed=True, corners=corners),)))


def hyperbolic_piece(pid, circles=1):
    # base has enough content never to be solid-toric or terminal
    return SeifertPiece(
        pid, BaseOrb(1, tuple(Circle() for _ in range(circles))), (2, 3)
    )


# --- construction and verification -------------------------------------------


def test_base_tokens_roundtrip():
    bases = [
        BaseOrb(0, (Circle(),)),
        BaseOrb(0, (Circle(), Circle())),
        BaseOrb(1, ()),
        BaseOrb(0, ()),
        BaseOrb(0, (Circle(mixed=True),)),
        BaseOrb(0, (Circle(mixed=True, corners=(4,)),)),
        BaseOrb(0, (Circle(), Circle(mixed=True))),
        BaseOrb(2, (Circle(), Circle(), Circle())),
        BaseOrb(1, (Circle(), Circle(mixed=True, corners=(2, 3))), ((5,),)),
    ]
    for b in bases:
        assert parse_base(b.token()) == b, b.token()


def test_verify_strong_detects_isotopic():
    g = GraphOrb(
        (hyperbolic_piece("P1"), hyperbolic_piece("P2")),
        (Gluing("g0", (("P1", 0), ("P2", 0)), isotopic=True),),
    )
    ok, violations = verify_strong(g)
    assert not ok
    assert "condition (2)" in violations[0]


def test_verify_strong_detects_solid_toric_neighbor():
    g = GraphOrb(
        (hyperbolic_piece("P1"), solid_torus("P2", 3)),
        (Gluing("g0", (("P1", 0), ("P2", 0)), meridian_is_fiber=True),),
    )
    ok, violations = verify_strong(g)
    assert not ok
    assert "condition (3)" in violations[0]


def test_verify_strong_passes():
    g = GraphOrb(
        (hyperbolic_piece("P1"), hyperbolic_piece("P2")),
        (Gluing("g0", (("P1", 0), ("P2", 0)), u=2),),
    )
    ok, violations = verify_strong(g)
    assert ok and not violations


def test_gluing_validation():
    with pytest.raises(GraphDataError):
        Gluing("g", (("P", 0), ("Q", 0)), isotopic=True, u=3)
    with pytest.raises(GraphDataError):
        GraphOrb(
            (hyperbolic_piece("P"), twisted_solid("Q")),
            (Gluing("g", (("P", 0), ("Q", 0))),),  # T2 glued to S2222
        )
    # slope consistency: parallel slopes demand isotopic=True
    p = SeifertPiece("P", BaseOrb(0, (Circle(), Circle())), (), ((1, 0), None))
    q = SeifertPiece("Q", BaseOrb(0, (Circle(), Circle())), (), ((2, 0), None))
    with pytest.raises(GraphDataError):
        GraphOrb((p, q), (Gluing("g", (("P", 0), ("Q", 0)), isotopic=False),))


# --- first operation -----------------------------------------------------------


def test_op1_merge_chain_to_single_piece():
    pieces = (
        annulus_piece("P1"),
        annulus_piece("P2"),
        annulus_piece("P3"),
    )
    gluings = (
        Gluing("g0", (("P1", 1), ("P2", 0)), isotopic=True),
        Gluing("g1", (("P2", 1), ("P3", 0)), isotopic=True),
    )
    g = GraphOrb(pieces, gluings)
    res = normalize(g)
    assert len(res.strong.pieces) == 1
    assert not res.strong.gluings
    assert not res.surgeries and not res.recognized
    merged = res.strong.pieces[0]
    assert merged.base.genus == 0 and merged.n_slots == 2  # still an annulus


def test_op1_merge_two_annuli():
    g = GraphOrb(
        (annulus_piece("P1"), annulus_piece("P2")),
        (Gluing("g0", (("P1", 0), ("P2", 0)), isotopic=True),),
    )
    out = op1_merge(g, "g0")
    assert len(out.pieces) == 1
    assert out.pieces[0].n_slots == 2
    assert not out.gluings


def test_op1_self_merge_closes_to_torus_base():
    g = GraphOrb(
        (annulus_piece("P1"),),
        (Gluing("g0", (("P1", 0), ("P1", 1)), isotopic=True),),
    )
    out = op1_merge(g, "g0")
    piece = out.pieces[0]
    assert piece.base.genus == 1 and piece.n_slots == 0  # closed, torus base


def test_op1_merge_requires_isotopic():
    g = GraphOrb(
        (annulus_piece("P1"), annulus_piece("P2")),
        (Gluing("g0", (("P1", 0), ("P2", 0)), u=1),),
    )
    with pytest.raises(GraphDataError):
        op1_merge(g, "g0")


def test_op1_merge_mixed_circles_close_to_mirror():
    p = SeifertPiece("P", BaseOrb(0, (Circle(mixed=True, corners=(3,)), Circle())))
    q = SeifertPiece("Q", BaseOrb(0, (Circle(mixed=True, corners=(5,)), Circle())))
    g = GraphOrb((p, q), (Gluing("g0", (("P", 0), ("Q", 0)), isotopic=True),))
    out = op1_merge(g, "g0")
    merged = out.pieces[0]
    assert merged.base.mirrors == ((3, 5),)
    assert merged.n_slots == 2


# --- second operation: Dehn merge -----------------------------------------------


def test_dehn_merge_u3():
    g = GraphOrb(
        (annulus_piece("P1"), solid_torus("ST")),
        (Gluing("g0", (("P1", 1), ("ST", 0)), u=3, meridian_is_fiber=False),),
    )
    out = op2_dehn_merge(g, "g0")
    assert len(out.pieces) == 1
    piece = out.pieces[0]
    assert piece.fibers == (3,)  # base became D2(3)
    assert piece.n_slots == 1
    assert piece.describe() == "S1xD2(3)"


def test_dehn_merge_u1_omits_cone():
    g = GraphOrb(
        (annulus_piece("P1"), solid_torus("ST")),
        (Gluing("g0", (("P1", 1), ("ST", 0)), u=1, meridian_is_fiber=False),),
    )
    out = op2_dehn_merge(g, "g0")
    assert out.pieces[0].fibers == ()
    assert out.pieces[0].describe() == "S1xD2"


def test_dehn_merge_u_from_slopes():
    p = SeifertPiece(
        "P1", BaseOrb(0, (Circle(), Circle())), (), (None, (1, 0))
    )
    st_ = SeifertPiece("ST", BaseOrb(0, (Circle(),)), (), ((2, 5),))
    g = GraphOrb(
        (p, st_),
        (Gluing("g0", (("P1", 1), ("ST", 0)), meridian_is_fiber=False),),
    )
    out = op2_dehn_merge(g, "g0")
    assert out.pieces[0].fibers == (5,)  # |det([1,0],[2,5])| = 5


def test_dehn_merge_rejects_meridian_fiber():
    g = GraphOrb(
        (annulus_piece("P1"), solid_torus("ST")),
        (Gluing("g0", (("P1", 1), ("ST", 0)), u=3, meridian_is_fiber=True),),
    )
    with pytest.raises(GraphDataError):
        op2_dehn_merge(g, "g0")


# --- cuts ------------------------------------------------------------------------


def test_step_possibilities():
    # twice-punctured torus: separating cut available
    p = SeifertPiece("P", BaseOrb(1, (Circle(), Circle())))
    assert step_possibilities(p, 0)["separating"]
    # once-punctured torus: only the nonseparating cut
    p = SeifertPiece("P", BaseOrb(1, (Circle(),)))
    poss = step_possibilities(p, 0)
    assert not poss["separating"] and poss["nonseparating"]
    # mirrored disc with two corners: reflector separating cut
    p = SeifertPiece("P", BaseOrb(0, (Circle(mixed=True, corners=(3, 5)),)))
    poss = step_possibilities(p, 0)
    assert poss["reflector_separating"] and not poss["separating"]
    # mixed annulus is terminal
    p = SeifertPiece("P", BaseOrb(0, (Circle(), Circle(mixed=True))))
    poss = step_possibilities(p, 1)
    assert not any(poss.values())


def test_step1_splits_twice_punctured_torus():
    u = SeifertPiece("U", BaseOrb(1, (Circle(), Circle())))
    w = hyperbolic_piece("W")
    g = GraphOrb(
        (u, w, solid_torus("ST", 4)),
        (
            Gluing("gW", (("U", 0), ("W", 0)), u=2),
            Gluing("gR", (("U", 1), ("ST", 0)), meridian_is_fiber=True),
        ),
    )
    out, recs = step_cut(g, "gR", "separating")
    assert len(recs) == 1
    assert recs[0].gamma == S2(4, 4)
    assert recs[0].direction == "split"
    # component split: W-side and genus-side now live apart
    assert len(out.components()) == 2
    # gluing count: the R-gluing became two cap gluings
    assert len(out.gluings) == len(g.gluings) + 1


def test_step2_on_punctured_torus():
    u = SeifertPiece("U", BaseOrb(1, (Circle(),)))
    g = GraphOrb(
        (u, solid_torus("ST", 3)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    out, recs = step_cut(g, "gR", "nonseparating")
    assert recs[0].gamma == S2(3, 3)
    assert recs[0].direction == "join"
    assert len(out.components()) == 1
    assert len(out.gluings) == len(g.gluings) + 1  # one more gluing
    # genus was consumed
    big = max(out.pieces, key=lambda p: p.n_slots)
    assert big.base.genus == 0


def test_step3_splits_corners():
    u = SeifertPiece("U", BaseOrb(0, (Circle(mixed=True, corners=(3, 5)),)))
    g = GraphOrb(
        (u, twisted_solid("ST", 2)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    out, recs = step_cut(g, "gR", "reflector_separating")
    assert recs[0].gamma == S2(2, 2, 2)
    assert len(out.components()) == 2
    corner_sets = [
        c.corners for p in out.pieces for c in p.base.circles if c.mixed and c.corners
    ]
    # the corner chain split between the two sides; the caps carry (2,)
    assert sorted(corner_sets) == [(2,), (2,), (3,), (5,)]


def test_step4_folds_other_mixed_circle():
    u = SeifertPiece("U", BaseOrb(0, (Circle(), Circle(mixed=True, corners=(7,)))))
    g = GraphOrb(
        (u, solid_torus("ST", 2)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    out, recs = step_cut(g, "gR", "reflector_nonseparating")
    assert recs[0].gamma == S2(2, 2, 2)
    assert len(out.gluings) == len(g.gluings)  # fold keeps the count
    corner_sets = sorted(
        c.corners for p in out.pieces for c in p.base.circles if c.mixed
    )
    assert corner_sets == [(2,), (7,)]  # fused circle and the mirrored cap


# --- terminal recognition ---------------------------------------------------------


def test_step5_tokens():
    assert step5_recognize(SeifertPiece("U", BaseOrb(0, (Circle(),))), 5) == "S3//Z5"
    assert (
        step5_recognize(SeifertPiece("U", BaseOrb(0, (Circle(),)), (3,)), 2)
        == "S3//(Z2xZ3)"
    )
    assert (
        step5_recognize(SeifertPiece("U", BaseOrb(0, (Circle(mixed=True),))), 4)
        == "S3//D4"
    )
    assert (
        step5_recognize(
            SeifertPiece("U", BaseOrb(0, (Circle(mixed=True, corners=(3,)),))), 2
        )
        == "(S3//(Z2xZ3))//Z2"
    )
    assert step5_recognize(SeifertPiece("U", BaseOrb(0, (Circle(),))), 1) == "S3"
    with pytest.raises(GraphDataError):
        step5_recognize(SeifertPiece("U", BaseOrb(1, (Circle(),))), 2)


def test_normalize_case2():
    g = GraphOrb(
        (SeifertPiece("U", BaseOrb(0, (Circle(),))), solid_torus("ST", 5)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    res = normalize(g)
    assert res.recognized == ("S3//Z5",)
    assert not res.strong.pieces


def test_normalize_case3():
    g = GraphOrb(
        (SeifertPiece("U", BaseOrb(0, (Circle(),)), (3,)), solid_torus("ST", 2)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    res = normalize(g)
    assert res.recognized == ("S3//(Z2xZ3)",)


def test_normalize_case4():
    g = GraphOrb(
        (SeifertPiece("U", BaseOrb(0, (Circle(mixed=True),))), twisted_solid("ST", 4)),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    res = normalize(g)
    assert res.recognized == ("S3//D4",)


def test_normalize_case5():
    g = GraphOrb(
        (
            SeifertPiece("U", BaseOrb(0, (Circle(mixed=True, corners=(3,)),))),
            twisted_solid("ST", 2),
        ),
        (Gluing("gR", (("U", 0), ("ST", 0)), meridian_is_fiber=True),),
    )
    res = normalize(g)
    assert res.recognized == ("(S3//(Z2xZ3))//Z2",)


def test_normalize_case1_and_continuation():
    # annulus shell over S1xI absorbed into a smaller solid torus, which then
    # Dehn-merges into the neighbor using the pre-supplied u
    w = annulus_piece("W")
    u = annulus_piece("U")
    g = GraphOrb(
        (w, u, solid_torus("ST", 3)),
        (
            Gluing("gW", (("W", 1), ("U", 0)), u=2, meridian_is_fiber=None),
            Gluing("gR", (("U", 1), ("ST", 0)), meridian_is_fiber=True),
        ),
    )
    res = normalize(g)
    assert any(e.op == "step5_case1" for e in res.trace)
    assert any(e.op == "op2_dehn_merge" for e in res.trace)
    # W absorbed the leftover solid torus by a u=2 filling: base becomes D2(2)
    assert len(res.strong.pieces) == 1
    final = res.strong.pieces[0]
    assert final.n_slots == 1
    assert final.fibers == (2,)


def test_normalize_case6():
    u = SeifertPiece("U", BaseOrb(0, (Circle(), Circle(mixed=True))))
    g = GraphOrb(
        (u, twisted_solid("ST", 3)),
        (Gluing("gR", (("U", 1), ("ST", 0)), meridian_is_fiber=True),),
    )
    res = normalize(g)
    assert "S3//D3" in res.recognized
    assert len(res.surgeries) == 1 and res.surgeries[0].gamma == S2(3, 3)
    # the remaining piece is the smaller solid torus with a free boundary
    assert len(res.strong.pieces) == 1
    assert res.strong.pieces[0].describe() == "S1xD2(3)"


def test_normalize_already_strong_is_fixpoint():
    g = GraphOrb(
        (hyperbolic_piece("P1"), hyperbolic_piece("P2")),
        (Gluing("g0", (("P1", 0), ("P2", 0)), u=2),),
    )
    res = normalize(g)
    assert res.strong == g
    assert not res.surgeries and not res.recognized and not res.trace


def test_normalize_idempotent():
    u = SeifertPiece("U", BaseOrb(1, (Circle(), Circle())))
    w = hyperbolic_piece("W")
    g = GraphOrb(
        (u, w, solid_torus("ST", 4)),
        (
            Gluing("gW", (("U", 0), ("W", 0)), u=2),
            Gluing("gR", (("U", 1), ("ST", 0)), meridian_is_fiber=True),
        ),
    )
    res = normalize(g)
    ok, _ = verify_strong(res.strong)
    assert ok
    res2 = normalize(res.strong)
    assert res2.strong == res.strong
    assert not res2.trace and not res2.surgeries


def test_trace_accounting_reconciles():
    u = SeifertPiece("U", BaseOrb(1, (Circle(), Circle())))
    w = hyperbolic_piece("W")
    g = GraphOrb(
        (u, w, solid_torus("ST", 4)),
        (
            Gluing("gW", (("U", 0), ("W", 0)), u=2),
            Gluing("gR", (("U", 1), ("ST", 0)), meridian_is_fiber=True),
        ),
    )
    res = normalize(g)
    assert len(g.gluings) + sum(e.d_gluings for e in res.trace) == len(
        res.strong.gluings
    )
    assert len(g.pieces) + sum(e.d_pieces for e in res.trace) == len(res.strong.pieces)


def test_compressible_boundary_split():
    g = GraphOrb((solid_torus("ST", 7), hyperbolic_piece("W")), ())
    dec = compressible_boundary_split(g, ("ST", 0))
    assert dec.solid_piece.describe() == "S1xD2(7)"
    assert {p.id for p in dec.rest.pieces} == {"W"}

    g2 = GraphOrb((hyperbolic_piece("W", circles=1),), ())
    with pytest.raises(GraphDataError):
        compressible_boundary_split(g2, ("W", 0))


def test_compressible_boundary_split_after_normalization():
    # the solid-toric certificate appears only after merging the chain
    chain = GraphOrb(
        (annulus_piece("P1"), annulus_piece("P2"), solid_torus("ST", 2)),
        (
            Gluing("g0", (("P1", 1), ("P2", 0)), isotopic=True),
            Gluing("g1", (("P2", 1), ("ST", 0)), u=3, meridian_is_fiber=False),
        ),
    )
    dec = compressible_boundary_split(chain, ("P1", 0))
    assert dec.solid_piece.is_solid_toric
    assert dec.solid_piece.fibers == (3,)


# --- randomized WELL-FORMED graphs terminate and verify -----------------------


@st.composite
def random_graph(draw):
    n = draw(st.integers(1, 5))
    pieces = []
    for i in range(n):
        genus = draw(st.integers(0, 2))
        nb = draw(st.integers(0 if genus or i else 1, 3))
        fibers = tuple(draw(st.lists(st.integers(2, 5), max_size=2)))
        pieces.append(
            SeifertPiece("P%d" % i, BaseOrb(genus, tuple(Circle() for _ in range(nb))), fibers)
        )
    slots = [(p.id, k) for p in pieces for k in range(p.n_slots)]
    gluings = []
    used = set()
    gi = 0
    for a in range(len(slots)):
        if slots[a] in used:
            continue
        if not draw(st.booleans()):
            continue
        rest = [s for s in slots[a + 1 :] if s not in used and s[0] != slots[a][0]]
        if not rest:
            continue
        b = draw(st.sampled_from(rest))
        iso = draw(st.booleans())
        if iso:
            gluings.append(Gluing("g%d" % gi, (slots[a], b), isotopic=True))
        else:
            gluings.append(
                Gluing(
                    "g%d" % gi,
                    (slots[a], b),
                    u=draw(st.integers(1, 4)),
                    meridian_is_fiber=draw(st.booleans()),
                )
            )
        used.add(slots[a])
        used.add(b)
        gi += 1
    return GraphOrb(tuple(pieces), tuple(gluings))


@settings(max_examples=60, deadline=None)
@given(random_graph())
def test_normalize_terminates_and_verifies(g):
    res = normalize(g)
    ok, violations = verify_strong(res.strong)
    assert ok, violations
    res2 = normalize(res.strong)
    assert res2.strong == res.strong and not res2.trace
    # accounting reconciles on every run
    assert len(g.gluings) + sum(e.d_gluings for e in res.trace) == len(
        res.strong.gluings
    )
