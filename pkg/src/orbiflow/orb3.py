"""Combinatorial descriptions of orientable 3-orbifolds.

An orientable 3-orbifold is specified by an orientable underlying 3-manifold
together with a labelled trivalent graph: the singular locus.  Every edge
label is an integer > 1 and edges with labels (p, q, r) meeting at a vertex
must satisfy 1/p + 1/q + 1/r > 1, so that the vertex has a neighborhood which
is a cone over an orientable spherical 2-orbifold.

Descriptions here are label-level: equality means equal canonicalized graph
plus underlying token, not diffeomorphism.  The underlying manifold is a
token from a closed vocabulary (names plus composites built by 0-surgery).

0-surgery removes the interiors of two disjoint discal suborbifolds with the
same boundary S^2//Gamma and glues in a tube I x (S^2//Gamma).  The operation
returns a record with enough splice data that the inverse (cut the tube, cap
with two discal fills) restores the original description token for token.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction

from .orb2 import S2, TwoOrbSig, is_spherical_sig


def validate_vertex(p: int, q: int, r: int) -> bool:
    """True iff labels >= 2 and 1/p + 1/q + 1/r > 1 in exact arithmetic."""
    if min(p, q, r) < 2:
        raise ValueError("edge labels must be >= 2, got (%d,%d,%d)" % (p, q, r))
    return Fraction(1, p) + Fraction(1, q) + Fraction(1, r) > 1


def vertex_link(p: int, q: int, r: int) -> TwoOrbSig:
    """The spherical 2-orbifold S2(p,q,r) linking a valid vertex."""
    if not validate_vertex(p, q, r):
        raise ValueError(
            "labels (%d,%d,%d) violate the vertex condition 1/p+1/q+1/r > 1"
            % (p, q, r)
        )
    return S2(p, q, r)


@dataclass(frozen=True)
class Edge:
    """Edge of the singular graph.  ``ends`` are vertex ids or None; a circle
    component of the singular locus is an edge with both ends None."""

    id: str
    label: int
    ends: tuple[str | None, str | None] = (None, None)

    def __post_init__(self):
        if self.label < 2:
            raise ValueError("edge %s: label must be >= 2" % self.id)


@dataclass(frozen=True)
class SingularGraph:
    edges: tuple[Edge, ...] = ()
    embedding_note: str = ""

    def __post_init__(self):
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        for v, labels in self.vertex_labels().items():
            if len(labels) != 3:
                raise ValueError(
                    "vertex %s has degree %d, must be exactly 3" % (v, len(labels))
                )
            p, q, r = labels
            if not validate_vertex(p, q, r):
                raise ValueError(
                    "vertex %s: labels (%d,%d,%d) violate 1/p+1/q+1/r > 1"
                    % (v, p, q, r)
                )

    def vertex_labels(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for e in self.edges:
            for end in e.ends:
                if end is not None:
                    out.setdefault(end, []).append(e.label)
        return out

    def vertices(self) -> tuple[str, ...]:
        return tuple(sorted(self.vertex_labels()))

    def edge(self, eid: str) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def canonical(self) -> tuple:
        return tuple(sorted((e.label, e.ends[0] or "", e.ends[1] or "") for e in self.edges))


@dataclass(frozen=True)
class Component:
    """One connected component: underlying-manifold token plus its graph part."""

    underlying: str
    graph: SingularGraph = SingularGraph()
    boundary: tuple[TwoOrbSig, ...] = ()

    def __post_init__(self):
        for b in self.boundary:
            if b.reflector_data is not None:
                raise ValueError("boundary signatures must be orientable closed/cone types")


@dataclass(frozen=True)
class ThreeOrbDesc:
    components: tuple[Component, ...]

    @property
    def component_count(self) -> int:
        return len(self.components)

    def canonical(self) -> tuple:
        return tuple(
            sorted((c.underlying, c.graph.canonical(), tuple(map(str, c.boundary))) for c in self.components)
        )

    def __eq__(self, other):
        return isinstance(other, ThreeOrbDesc) and self.canonical() == other.canonical()

    def __hash__(self):
        return hash(self.canonical())


# --- discal and solid-toric tokens -------------------------------------------

DISCAL_KINDS = ("D3", "D3(k,k)", "D3(2,2,k)", "D3(2,3,3)", "D3(2,3,4)", "D3(2,3,5)")


@dataclass(frozen=True)
class DiscalToken:
    kind: str
    k: int | None = None

    def boundary(self) -> TwoOrbSig:
        if self.kind == "D3":
            return S2()
        if self.kind == "D3(k,k)":
            return S2(self.k, self.k)
        if self.kind == "D3(2,2,k)":
            return S2(2, 2, self.k)
        return S2(*[int(x) for x in self.kind[3:-1].split(",")])

    def __str__(self):
        if self.k is None:
            return self.kind
        if self.kind == "D3(k,k)":
            return "D3(%d,%d)" % (self.k, self.k)
        return "D3(2,2,%d)" % self.k


@dataclass(frozen=True)
class SolidToricToken:
    """S1xD2, S1xD2(k), S1x~D2 and S1x~D2(k); '~' marks the Z2-twisted cases."""

    twisted: bool = False
    k: int | None = None

    def boundary(self) -> TwoOrbSig:
        return S2(2, 2, 2, 2) if self.twisted else TwoOrbSig(1, (), 0)

    def __str__(self):
        core = "S1x~D2" if self.twisted else "S1xD2"
        return core if self.k is None else "%s(%d)" % (core, self.k)


def discal_fill(s: TwoOrbSig) -> DiscalToken:
    """The unique discal 3-orbifold token whose boundary is the given
    spherical signature."""
    if not is_spherical_sig(s):
        raise ValueError("%s is not in the orientable spherical list" % s)
    c = s.cone_orders
    if len(c) == 0:
        return DiscalToken("D3")
    if len(c) == 2:
        return DiscalToken("D3(k,k)", c[0])
    if c in ((2, 3, 3), (2, 3, 4), (2, 3, 5)):
        return DiscalToken("D3(%d,%d,%d)" % c)
    return DiscalToken("D3(2,2,k)", c[2])


def edge_label_multiset(desc: ThreeOrbDesc) -> Counter:
    """Multiset of all edge labels over all components."""
    out: Counter = Counter()
    for comp in desc.components:
        for e in comp.graph.edges:
            out[e.label] += 1
    return out


def edge_label_set(desc: ThreeOrbDesc) -> frozenset:
    return frozenset(edge_label_multiset(desc))


# --- discal sites and 0-surgery ----------------------------------------------


@dataclass(frozen=True)
class DiscSite:
    """An embedded discal suborbifold named up to isotopy.

    ``anchor`` locates the site: None for a site in the regular part (smooth
    D3), or an edge id for a site straddling an interior point of that edge
    (a D3(k,k) with k the edge label).  Vertex sites are not needed by the
    algorithms here and are out of scope.
    """

    id: str
    component: int
    anchor: str | None = None

    def boundary_sig(self, desc: ThreeOrbDesc) -> TwoOrbSig:
        if self.anchor is None:
            return S2()
        k = desc.components[self.component].graph.edge(self.anchor).label
        return S2(k, k)


@dataclass(frozen=True)
class SurgeryRecord:
    gamma: TwoOrbSig
    site_ids: tuple[str, str]
    direction: str  # "split" or "join"
    splice: tuple = ()  # data needed to restore the original description

    def __post_init__(self):
        if self.direction not in ("split", "join"):
            raise ValueError("direction must be split or join")


def _fuse_edges(e1: Edge, e2: Edge, new_id: str) -> Edge:
    # The tube I x S2(k,k) carries two arcs; each joins one cut end of e1 to
    # one cut end of e2, so the two edges fuse end-to-end into two edges
    # overall.  At description level we keep labels and outer endpoints.
    return Edge(new_id, e1.label, (e1.ends[0], e2.ends[1]))


def zero_surgery(
    desc: ThreeOrbDesc, d1: DiscSite, d2: DiscSite
) -> tuple[ThreeOrbDesc, SurgeryRecord]:
    """Perform 0-surgery along two disjoint discal sites.

    The two sites must carry the same boundary signature.  Sites in distinct
    components produce a connected sum (component count drops by one); sites
    in one component add a tube to it.  The returned record restores the
    original description exactly via :func:`undo_zero_surgery`.
    """
    if d1.id == d2.id:
        raise ValueError("surgery sites must be disjoint")
    if d1.component == d2.component and d1.anchor is not None and d1.anchor == d2.anchor:
        raise ValueError("surgery sites overlap on edge %s" % d1.anchor)
    g1 = d1.boundary_sig(desc)
    g2 = d2.boundary_sig(desc)
    if g1 != g2:
        raise ValueError(
            "mismatched surgery boundaries: %s at %s vs %s at %s"
            % (g1, d1.id, g2, d2.id)
        )

    comps = list(desc.components)

    if d1.component != d2.component:
        ca, cb = sorted((d1.component, d2.component))
        a, b = comps[ca], comps[cb]
        splice = ("split", ca, cb, a, b)
        edges = list(a.graph.edges) + [
            replace(e, id="b." + e.id) for e in b.graph.edges
        ]
        if d1.anchor is not None:
            ea = a.graph.edge((d1 if d1.component == ca else d2).anchor)
            eb_raw = (d2 if d2.component == cb else d1).anchor
            eb = next(e for e in edges if e.id == "b." + eb_raw)
            edges = [e for e in edges if e.id not in (ea.id, eb.id)]
            edges.append(_fuse_edges(ea, eb, "f1." + ea.id))
            edges.append(_fuse_edges(eb, ea, "f2." + ea.id))
        merged = Component(
            underlying="(%s #_%s %s)" % (a.underlying, g1, b.underlying),
            graph=SingularGraph(tuple(edges)),
            boundary=a.boundary + b.boundary,
        )
        comps = [c for i, c in enumerate(comps) if i not in (ca, cb)]
        comps.insert(ca, merged)
    else:
        c = comps[d1.component]
        splice = ("join", d1.component, c)
        edges = list(c.graph.edges)
        if d1.anchor is not None:
            e1 = c.graph.edge(d1.anchor)
            e2 = c.graph.edge(d2.anchor)
            edges = [e for e in edges if e.id not in (e1.id, e2.id)]
            edges.append(_fuse_edges(e1, e2, "f1." + e1.id))
            edges.append(_fuse_edges(e2, e1, "f2." + e1.id))
        comps[d1.component] = Component(
            underlying="0surg(%s; %s)" % (c.underlying, g1),
            graph=SingularGraph(tuple(edges)),
            boundary=c.boundary,
        )

    rec = SurgeryRecord(
        gamma=g1,
        site_ids=(d1.id, d2.id),
        direction="split" if d1.component != d2.component else "join",
        splice=splice,
    )
    return ThreeOrbDesc(tuple(comps)), rec


def undo_zero_surgery(desc: ThreeOrbDesc, rec: SurgeryRecord) -> ThreeOrbDesc:
    """Cut along the tube's I x S2//Gamma and cap with two discal fills.

    The record's splice data holds the pre-surgery state of the affected
    component(s); the cut-and-cap replaces the surgered component by them, so
    the round trip is the identity token for token.  Only valid on the
    description the surgery produced (surgery sites are isotopy-level names,
    not stable under unrelated later edits).
    """
    comps = list(desc.components)
    if rec.splice[0] == "split":
        _, ca, cb, a, b = rec.splice
        del comps[ca]
        comps.insert(ca, a)
        comps.insert(cb, b)
    else:
        _, idx, c = rec.splice
        comps[idx] = c
    return ThreeOrbDesc(tuple(comps))
