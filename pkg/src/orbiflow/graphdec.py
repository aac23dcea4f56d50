"""Weak and strong graph orbifolds, and the normalization engine.

A graph orbifold is a collection of Seifert pieces glued along T2 or
S2(2,2,2,2) boundaries.  "Strong" additionally requires that no gluing has
isotopic circle fibrations on its two sides and that every gluing surface is
incompressible.  Incompressibility is decided by certificate: a gluing is
compressible exactly when one side is a solid-toric piece (its meridian disc
compresses the surface).  General incompressibility testing is out of scope.

``normalize`` rewrites a weak graph orbifold into a strong one plus a list of
0-surgery records and recognized closed quotients, alternating two moves to a
fixpoint:

* first operation: a gluing with isotopic fibrations is erased by extending
  the fibration across it (bases join along the shared circle);
* second operation: a gluing with a solid-toric side U' is resolved.  If the
  meridian of U' is not isotopic to a fiber of the other side U, U' is
  absorbed by a Dehn merge (base gains a cone point of order u).  Otherwise
  the base B of U is cut along an arc with endpoints on the gluing circle R:
  a separating arc splits the component as a connected sum over S2(r,r) (or
  S2(2,2,r) for arcs ending on a reflector), a nonseparating arc records a
  0-surgery on the single component, and when no arc exists B is one of six
  terminal shapes which are recognized as closed spherical quotients or
  merged into a smaller solid-toric piece.

Each cut replaces the consumed solid-toric neighbor by solid-toric *caps* on
the cut circles.  A cap's meridian disc is a sigma-fiber of the old neighbor,
whose boundary is the fiber of U over a point of R, so cap gluings always
carry meridian_is_fiber=True and the second operation keeps peeling until the
base is terminal.  Terminal merges (annulus and mixed-annulus cases) leave a
smaller solid-toric piece on a pre-existing gluing; its meridian is the old
fiber of U transported across the fibered shell, so that gluing continues as
a Dehn merge whose intersection number comes from the gluing's u field or
slope pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .orb2 import S2, TwoOrbSig
from .orb3 import SurgeryRecord


class GraphDataError(ValueError):
    """Raised when a description is malformed or lacks required fibration data."""


# --- bases --------------------------------------------------------------------


@dataclass(frozen=True)
class Circle:
    """A boundary circle of a base 2-orbifold.

    Plain circles carry a T2 boundary of the Seifert piece; mixed circles
    (one orbifold arc plus a reflector chain, with optional corner reflector
    orders) carry an S2(2,2,2,2) boundary.
    """

    mixed: bool = False
    corners: tuple[int, ...] = ()

    def __post_init__(self):
        if self.corners and not self.mixed:
            raise GraphDataError("corner orders only make sense on mixed circles")
        if any(c < 2 for c in self.corners):
            raise GraphDataError("corner orders must be >= 2")

    @property
    def tag(self) -> str:
        return "S2222" if self.mixed else "T2"


@dataclass(frozen=True)
class BaseOrb:
    """Base 2-orbifold of a Seifert piece, without exceptional-fiber cones.

    ``circles`` are the boundary slots in order.  ``mirrors`` are closed
    reflector circles (no 3-dimensional boundary above them); each is a tuple
    of corner orders.
    """

    genus: int = 0
    circles: tuple[Circle, ...] = ()
    mirrors: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.genus < 0:
            raise GraphDataError("genus must be nonnegative")

    def token(self) -> str:
        g, cs, ms = self.genus, self.circles, self.mirrors
        if not ms:
            if g == 0 and not cs:
                return "S2"
            if g == 1 and not cs:
                return "T2"
            if all(not c.mixed for c in cs):
                if g == 0 and len(cs) == 1:
                    return "D2"
                if g == 0 and len(cs) == 2:
                    return "A"
                return "F[g%d,b%d]" % (g, len(cs))
            if g == 0 and len(cs) == 1 and cs[0].mixed:
                if not cs[0].corners:
                    return "D2//Z2"
                if len(cs[0].corners) == 1:
                    return "D2//D%d" % cs[0].corners
                return "D2//D(%s)" % ",".join(map(str, cs[0].corners))
            if (
                g == 0
                and len(cs) == 2
                and not cs[0].mixed
                and cs[1].mixed
                and not cs[1].corners
            ):
                return "MA"
        parts = ["g%d" % g]
        for c in cs:
            if c.mixed:
                parts.append("m(%s)" % ",".join(map(str, c.corners)))
            else:
                parts.append("b")
        for m in ms:
            parts.append("M(%s)" % ",".join(map(str, m)))
        return "F[%s]" % ";".join(parts)

    def __str__(self):
        return self.token()


_BASE_TOKENS = {
    "S2": BaseOrb(0, ()),
    "T2": BaseOrb(1, ()),
    "D2": BaseOrb(0, (Circle(),)),
    "A": BaseOrb(0, (Circle(), Circle())),
    "D2//Z2": BaseOrb(0, (Circle(mixed=True),)),
    "MA": BaseOrb(0, (Circle(), Circle(mixed=True))),
}


def parse_base(token: str) -> BaseOrb:
    """Inverse of :meth:`BaseOrb.token` on the vocabulary used in files."""
    if token in _BASE_TOKENS:
        return _BASE_TOKENS[token]
    if token.startswith("D2//D(") and token.endswith(")"):
        corners = tuple(int(x) for x in token[6:-1].split(","))
        return BaseOrb(0, (Circle(mixed=True, corners=corners),))
    if token.startswith("D2//D"):
        return BaseOrb(0, (Circle(mixed=True, corners=(int(token[5:]),)),))
    if token.startswith("F[") and token.endswith("]"):
        body = token[2:-1]
        if ";" in body:
            parts = body.split(";")
            if not parts[0].startswith("g"):
                raise GraphDataError("bad base token %r" % token)
            genus = int(parts[0][1:])
            circles: list[Circle] = []
            mirrors: list[tuple[int, ...]] = []
            for p in parts[1:]:
                if p == "b":
                    circles.append(Circle())
                elif p.startswith("m(") and p.endswith(")"):
                    inner = p[2:-1]
                    corners = tuple(int(x) for x in inner.split(",")) if inner else ()
                    circles.append(Circle(mixed=True, corners=corners))
                elif p.startswith("M(") and p.endswith(")"):
                    inner = p[2:-1]
                    mirrors.append(tuple(int(x) for x in inner.split(",")) if inner else ())
                else:
                    raise GraphDataError("bad base token part %r in %r" % (p, token))
            return BaseOrb(genus, tuple(circles), tuple(mirrors))
        g_str, b_str = body.split(",")
        return BaseOrb(int(g_str[1:]), tuple(Circle() for _ in range(int(b_str[1:]))))
    raise GraphDataError("unknown base token %r" % token)


# --- pieces, gluings, graphs ---------------------------------------------------

Slope = tuple[int, int]


@dataclass(frozen=True)
class SeifertPiece:
    id: str
    base: BaseOrb
    fibers: tuple[int, ...] = ()  # exceptional fiber orders, each >= 2
    slopes: tuple[Slope | None, ...] = ()  # fiber class per boundary slot

    def __post_init__(self):
        if any(f < 2 for f in self.fibers):
            raise GraphDataError("piece %s: fiber orders must be >= 2" % self.id)
        object.__setattr__(self, "fibers", tuple(sorted(self.fibers)))
        if not self.slopes:
            object.__setattr__(self, "slopes", (None,) * len(self.base.circles))
        elif len(self.slopes) != len(self.base.circles):
            raise GraphDataError("piece %s: one slope entry per boundary" % self.id)

    @property
    def n_slots(self) -> int:
        return len(self.base.circles)

    def tag(self, slot: int) -> str:
        return self.base.circles[slot].tag

    @property
    def is_solid_toric(self) -> bool:
        """Over D2, D2(r), D2//Z2 or D2//Dr: the four solid-toric bases."""
        b = self.base
        if b.genus != 0 or b.mirrors or len(b.circles) != 1:
            return False
        c = b.circles[0]
        if c.mixed:
            return len(c.corners) <= 1 and not self.fibers
        return not c.corners and len(self.fibers) <= 1

    @property
    def solid_param(self) -> int:
        """The r of S1xD2(r) / S1x~D2(r); 1 when the core is unlabelled."""
        if not self.is_solid_toric:
            raise GraphDataError("piece %s is not solid-toric" % self.id)
        c = self.base.circles[0]
        if c.mixed:
            return c.corners[0] if c.corners else 1
        return self.fibers[0] if self.fibers else 1

    def describe(self) -> str:
        if self.is_solid_toric:
            c = self.base.circles[0]
            core = "S1x~D2" if c.mixed else "S1xD2"
            r = self.solid_param
            return core if r == 1 else "%s(%d)" % (core, r)
        fib = "(%s)" % ",".join(map(str, self.fibers)) if self.fibers else ""
        return "SFS[%s%s]" % (self.base.token(), fib)


@dataclass(frozen=True)
class Gluing:
    """Identification of two boundary slots.

    ``u`` is the algebraic intersection number on the gluing surface of the
    distinguished curve of one side (the meridian for a solid-toric side, the
    fiber otherwise) with the fiber of the other side; it is >= 1 exactly
    when the fibrations are not isotopic.  ``meridian_is_fiber`` states
    whether the solid-toric side's meridian is isotopic to the other side's
    fiber, and may be pre-supplied on any non-isotopic gluing for use when a
    side later becomes solid-toric.
    """

    id: str
    ends: tuple[tuple[str, int], tuple[str, int]]
    isotopic: bool = False
    u: int | None = None
    meridian_is_fiber: bool | None = None

    def __post_init__(self):
        if self.isotopic and (self.u is not None or self.meridian_is_fiber is not None):
            raise GraphDataError(
                "gluing %s: u/meridian data is forbidden when fibrations are isotopic"
                % self.id
            )
        if self.u is not None and self.u < 1:
            raise GraphDataError("gluing %s: u must be >= 1" % self.id)

    def other(self, pid: str, slot: int) -> tuple[str, int]:
        if self.ends[0] == (pid, slot):
            return self.ends[1]
        return self.ends[0]


def _slope_det(a: Slope, b: Slope) -> int:
    return abs(a[0] * b[1] - a[1] * b[0])


@dataclass(frozen=True)
class GraphOrb:
    pieces: tuple[SeifertPiece, ...] = ()
    gluings: tuple[Gluing, ...] = ()

    def __post_init__(self):
        ids = [p.id for p in self.pieces]
        if len(set(ids)) != len(ids):
            raise GraphDataError("duplicate piece ids")
        gids = [g.id for g in self.gluings]
        if len(set(gids)) != len(gids):
            raise GraphDataError("duplicate gluing ids")
        seen: set[tuple[str, int]] = set()
        for g in self.gluings:
            tags = []
            for pid, slot in g.ends:
                p = self.piece(pid)
                if not (0 <= slot < p.n_slots):
                    raise GraphDataError(
                        "gluing %s: piece %s has no boundary %d" % (g.id, pid, slot)
                    )
                if (pid, slot) in seen and g.ends[0] != g.ends[1]:
                    raise GraphDataError(
                        "boundary %s.%d appears in more than one gluing" % (pid, slot)
                    )
                seen.add((pid, slot))
                tags.append(p.tag(slot))
            if g.ends[0] == g.ends[1]:
                raise GraphDataError("gluing %s glues a boundary to itself" % g.id)
            if tags[0] != tags[1]:
                raise GraphDataError(
                    "gluing %s joins mismatched boundary types %s and %s"
                    % (g.id, tags[0], tags[1])
                )
            s0 = self.piece(g.ends[0][0]).slopes[g.ends[0][1]]
            s1 = self.piece(g.ends[1][0]).slopes[g.ends[1][1]]
            if s0 is not None and s1 is not None:
                det = _slope_det(s0, s1)
                if g.isotopic != (det == 0):
                    raise GraphDataError(
                        "gluing %s: isotopic=%s contradicts slope pair (det=%d)"
                        % (g.id, g.isotopic, det)
                    )
                if g.u is not None and g.u != det:
                    raise GraphDataError(
                        "gluing %s: u=%d contradicts slopes (det=%d)" % (g.id, g.u, det)
                    )

    def piece(self, pid: str) -> SeifertPiece:
        for p in self.pieces:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def gluing(self, gid: str) -> Gluing:
        for g in self.gluings:
            if g.id == gid:
                return g
        raise KeyError(gid)

    @property
    def free_boundaries(self) -> tuple[tuple[str, int], ...]:
        used = {end for g in self.gluings for end in g.ends}
        out = []
        for p in self.pieces:
            for i in range(p.n_slots):
                if (p.id, i) not in used:
                    out.append((p.id, i))
        return tuple(out)

    def components(self) -> list[frozenset[str]]:
        parent = {p.id: p.id for p in self.pieces}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in self.gluings:
            a, b = find(g.ends[0][0]), find(g.ends[1][0])
            if a != b:
                parent[a] = b
        groups: dict[str, set[str]] = {}
        for p in self.pieces:
            groups.setdefault(find(p.id), set()).add(p.id)
        return [frozenset(v) for v in sorted(groups.values(), key=min)]

    def resolved_u(self, g: Gluing) -> int | None:
        if g.u is not None:
            return g.u
        s0 = self.piece(g.ends[0][0]).slopes[g.ends[0][1]]
        s1 = self.piece(g.ends[1][0]).slopes[g.ends[1][1]]
        if s0 is not None and s1 is not None:
            return _slope_det(s0, s1)
        return None


def verify_strong(g: GraphOrb) -> tuple[bool, list[str]]:
    """Check the two certificate conditions of a strong decomposition.

    Condition (2): no gluing may have isotopic fibrations on its two sides.
    Condition (3): every gluing surface must be incompressible; the meridian
    disc of a solid-toric neighbor is a compressing disc, so any gluing with
    a solid-toric side fails.
    """
    violations = []
    for gl in g.gluings:
        if gl.isotopic:
            violations.append(
                "gluing %s: the two circle fibrations are isotopic "
                "(strong-decomposition condition (2))" % gl.id
            )
        for pid, slot in gl.ends:
            if g.piece(pid).is_solid_toric:
                violations.append(
                    "gluing %s: solid-toric piece %s has a meridian compressing disc "
                    "(strong-decomposition condition (3))" % (gl.id, pid)
                )
                break
    return (not violations, violations)


# --- trace and result ----------------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    op: str
    detail: str
    d_gluings: int
    d_pieces: int
    d_components: int


@dataclass(frozen=True)
class NormalizationResult:
    strong: GraphOrb
    surgeries: tuple[SurgeryRecord, ...]
    recognized: tuple[str, ...]
    trace: tuple[TraceEvent, ...]


RECOGNIZED_FORMS = (
    "S3",
    "S3//Z",
    "S3//(Z",
    "S3//D",
    "(S3//(Z",
    "LENS",
    "QUOT(S1xS2)",
)


def _sphere_quot_token(r: int, s: int = 1) -> str:
    r, s = max(r, s), min(r, s)
    if s == 1:
        return "S3" if r == 1 else "S3//Z%d" % r
    return "S3//(Z%dxZ%d)" % (s, r)


def _dihedral_token(r: int) -> str:
    # D1 is the order-two rotation group
    return "S3//Z2" if r == 1 else "S3//D%d" % r


def _dihedral_product_token(r: int, s: int) -> str:
    r, s = min(r, s), max(r, s)
    if r == 1:
        return _dihedral_token(s)
    return "(S3//(Z%dxZ%d))//Z2" % (r, s)


def _football(r: int) -> TwoOrbSig:
    # order-1 cone points are no cone points at all
    return S2() if r == 1 else S2(r, r)


def _turnover22(r: int) -> TwoOrbSig:
    return S2(2, 2) if r == 1 else S2(2, 2, r)


# --- the operations -------------------------------------------------------------


class _Builder:
    """Mutable working copy used by the operations and by normalize."""

    def __init__(self, g: GraphOrb):
        self.pieces: dict[str, SeifertPiece] = {p.id: p for p in g.pieces}
        self.order: list[str] = [p.id for p in g.pieces]
        self.gluings: dict[str, Gluing] = {gl.id: gl for gl in g.gluings}
        self.gorder: list[str] = [gl.id for gl in g.gluings]
        self.seq = itertools.count(1)

    def snapshot(self) -> GraphOrb:
        return GraphOrb(
            tuple(self.pieces[i] for i in self.order),
            tuple(self.gluings[i] for i in self.gorder),
        )

    def fresh_piece_id(self, prefix: str) -> str:
        while True:
            pid = "%s%d" % (prefix, next(self.seq))
            if pid not in self.pieces:
                return pid

    def fresh_gluing_id(self) -> str:
        while True:
            gid = "g%d" % next(self.seq)
            if gid not in self.gluings:
                return gid

    def add_piece(self, p: SeifertPiece):
        self.pieces[p.id] = p
        self.order.append(p.id)

    def drop_piece(self, pid: str):
        del self.pieces[pid]
        self.order.remove(pid)

    def add_gluing(self, g: Gluing):
        self.gluings[g.id] = g
        self.gorder.append(g.id)

    def drop_gluing(self, gid: str):
        del self.gluings[gid]
        self.gorder.remove(gid)

    def remap_end(self, old: tuple[str, int], new: tuple[str, int]):
        for gid in self.gorder:
            g = self.gluings[gid]
            if old in g.ends:
                ends = tuple(new if e == old else e for e in g.ends)
                self.gluings[gid] = replace(g, ends=ends)

    def slot_shift(self, pid: str, removed: set[int], new_pid: str, extra: int = 0):
        """Remap gluing ends after deleting boundary slots of a piece."""
        p = self.pieces[pid]
        mapping = {}
        j = 0
        for i in range(p.n_slots):
            if i in removed:
                continue
            mapping[i] = j + extra
            j += 1
        for gid in list(self.gorder):
            g = self.gluings[gid]
            ends = list(g.ends)
            changed = False
            for k, (qid, slot) in enumerate(ends):
                if qid == pid and slot in mapping:
                    ends[k] = (new_pid, mapping[slot])
                    changed = True
            if changed:
                self.gluings[gid] = replace(g, ends=tuple(ends))


def _joined_circles(ca: Circle, cb: Circle):
    """Contents produced by erasing a gluing between two boundary circles.

    Plain + plain disappears entirely; mixed + mixed closes the reflector
    chains into one closed mirror circle.
    """
    if ca.mixed != cb.mixed:
        raise GraphDataError("cannot join mixed and plain circles")
    if not ca.mixed:
        return None
    return tuple(ca.corners + cb.corners)


def op1_merge(g: GraphOrb, gid: str) -> GraphOrb:
    b = _Builder(g)
    _op1_merge(b, gid)
    return b.snapshot()


def _op1_merge(b: _Builder, gid: str) -> str:
    gl = b.gluings[gid]
    if not gl.isotopic:
        raise GraphDataError("gluing %s: fibrations are not isotopic" % gid)
    (pid, i), (qid, j) = gl.ends
    p, q = b.pieces[pid], b.pieces[qid]
    mid = b.fresh_piece_id("m")
    if pid != qid:
        mirror = _joined_circles(p.base.circles[i], q.base.circles[j])
        base = BaseOrb(
            p.base.genus + q.base.genus,
            tuple(c for k, c in enumerate(p.base.circles) if k != i)
            + tuple(c for k, c in enumerate(q.base.circles) if k != j),
            p.base.mirrors + q.base.mirrors + ((mirror,) if mirror is not None else ()),
        )
        slopes = tuple(s for k, s in enumerate(p.slopes) if k != i) + tuple(
            s for k, s in enumerate(q.slopes) if k != j
        )
        merged = SeifertPiece(mid, base, p.fibers + q.fibers, slopes)
        b.drop_gluing(gid)
        b.slot_shift(pid, {i}, mid)
        b.slot_shift(qid, {j}, mid, extra=p.n_slots - 1)
        b.drop_piece(pid)
        b.drop_piece(qid)
        b.add_piece(merged)
    else:
        mirror = _joined_circles(p.base.circles[i], p.base.circles[j])
        base = BaseOrb(
            p.base.genus + 1,
            tuple(c for k, c in enumerate(p.base.circles) if k not in (i, j)),
            p.base.mirrors + ((mirror,) if mirror is not None else ()),
        )
        slopes = tuple(s for k, s in enumerate(p.slopes) if k not in (i, j))
        merged = SeifertPiece(mid, base, p.fibers, slopes)
        b.drop_gluing(gid)
        b.slot_shift(pid, {i, j}, mid)
        b.drop_piece(pid)
        b.add_piece(merged)
    return mid


def _designate_solid(g_view, gl: Gluing):
    """Return ((solid_pid, solid_slot), (other_pid, other_slot)) or None."""
    sides = []
    for pid, slot in gl.ends:
        if g_view[pid].is_solid_toric:
            sides.append((pid, slot))
    if not sides:
        return None
    solid = sides[0]
    other = gl.other(*solid)
    return solid, other


def op2_dehn_merge(g: GraphOrb, gid: str) -> GraphOrb:
    b = _Builder(g)
    _op2_dehn_merge(b, gid)
    return b.snapshot()


def _op2_dehn_merge(b: _Builder, gid: str) -> str:
    gl = b.gluings[gid]
    des = _designate_solid(b.pieces, gl)
    if des is None:
        raise GraphDataError("gluing %s has no solid-toric side" % gid)
    (spid, _), (upid, uslot) = des
    if gl.meridian_is_fiber is not False:
        raise GraphDataError(
            "gluing %s: Dehn merge needs meridian_is_fiber=False (got %r); "
            "meridian-fiber gluings are resolved by cutting" % (gid, gl.meridian_is_fiber)
        )
    u = gl.u
    if u is None:
        s0 = b.pieces[gl.ends[0][0]].slopes[gl.ends[0][1]]
        s1 = b.pieces[gl.ends[1][0]].slopes[gl.ends[1][1]]
        if s0 is not None and s1 is not None:
            u = _slope_det(s0, s1)
    if u is None:
        raise GraphDataError(
            "gluing %s: Dehn merge needs u or slope pairs on both sides" % gid
        )
    solid = b.pieces[spid]
    upiece = b.pieces[upid]
    circle = upiece.base.circles[uslot]
    mid = b.fresh_piece_id("m")
    if circle.mixed:
        # the mirrored cap closes the reflector chain into a mirror circle
        cap_corners = (u,) if u >= 2 else ()
        base = BaseOrb(
            upiece.base.genus,
            tuple(c for k, c in enumerate(upiece.base.circles) if k != uslot),
            upiece.base.mirrors + (tuple(circle.corners + cap_corners),),
        )
        fibers = upiece.fibers
    else:
        base = BaseOrb(
            upiece.base.genus,
            tuple(c for k, c in enumerate(upiece.base.circles) if k != uslot),
            upiece.base.mirrors,
        )
        fibers = upiece.fibers + ((u,) if u >= 2 else ())
    slopes = tuple(s for k, s in enumerate(upiece.slopes) if k != uslot)
    merged = SeifertPiece(mid, base, fibers, slopes)
    b.drop_gluing(gid)
    b.slot_shift(upid, {uslot}, mid)
    b.drop_piece(upid)
    b.drop_piece(spid)
    b.add_piece(merged)
    return mid


# --- cut feasibility ------------------------------------------------------------


def _free_units(base: BaseOrb, fibers, r_slot: int) -> list[tuple[str, int]]:
    units: list[tuple[str, int]] = []
    units += [("genus", k) for k in range(base.genus)]
    units += [("fiber", k) for k in range(len(fibers))]
    units += [("slot", k) for k in range(len(base.circles)) if k != r_slot]
    units += [("mirror", k) for k in range(len(base.mirrors))]
    return units


def step_possibilities(piece: SeifertPiece, r_slot: int) -> dict[str, bool]:
    """Which of the four cut steps admits an arc for this base and R-circle."""
    base = piece.base
    c_r = base.circles[r_slot]
    units = _free_units(base, piece.fibers, r_slot)
    other_mixed = any(
        c.mixed for k, c in enumerate(base.circles) if k != r_slot
    )
    return {
        "separating": len(units) >= 2,
        "nonseparating": base.genus >= 1,
        "reflector_separating": c_r.mixed and (len(units) + len(c_r.corners)) >= 2,
        "reflector_nonseparating": other_mixed,
    }


@dataclass(frozen=True)
class CutSpec:
    """Content assignment for a separating cut: what goes to side one.

    ``fibers``/``slots``/``mirrors`` are index tuples into the piece's data;
    ``corners`` is the number of leading corner orders of the R-circle's
    reflector chain assigned to side one (reflector cuts only).
    """

    genus: int = 0
    fibers: tuple[int, ...] = ()
    slots: tuple[int, ...] = ()
    mirrors: tuple[int, ...] = ()
    corners: int = 0
    target_mixed_slot: int | None = None  # reflector_nonseparating: which circle


def _canonical_cut_spec(piece: SeifertPiece, r_slot: int, kind: str) -> CutSpec:
    base = piece.base
    if kind == "separating":
        units = _free_units(base, piece.fibers, r_slot)
        kind0, idx = units[0]
        return CutSpec(
            genus=1 if kind0 == "genus" else 0,
            fibers=(idx,) if kind0 == "fiber" else (),
            slots=(idx,) if kind0 == "slot" else (),
            mirrors=(idx,) if kind0 == "mirror" else (),
        )
    if kind == "reflector_separating":
        c_r = base.circles[r_slot]
        if c_r.corners:
            return CutSpec(corners=1)
        units = _free_units(base, piece.fibers, r_slot)
        kind0, idx = units[0]
        return CutSpec(
            genus=1 if kind0 == "genus" else 0,
            fibers=(idx,) if kind0 == "fiber" else (),
            slots=(idx,) if kind0 == "slot" else (),
            mirrors=(idx,) if kind0 == "mirror" else (),
        )
    if kind == "reflector_nonseparating":
        target = next(
            k for k, c in enumerate(base.circles) if k != r_slot and c.mixed
        )
        return CutSpec(target_mixed_slot=target)
    return CutSpec()


def _side_trivial(genus, fibers, slots, mirrors, corners) -> bool:
    # trivial sides are the nonsingular disc and the bare mirrored disc
    return not (genus or fibers or slots or mirrors or corners)


def step_cut(
    g: GraphOrb, gid: str, kind: str, cut_spec: CutSpec | None = None
) -> tuple[GraphOrb, tuple[SurgeryRecord, ...]]:
    b = _Builder(g)
    _, recs = _step_cut(b, gid, kind, cut_spec)
    return b.snapshot(), recs


def _step_cut(b: _Builder, gid: str, kind: str, cut_spec: CutSpec | None = None):
    gl = b.gluings[gid]
    des = _designate_solid(b.pieces, gl)
    if des is None:
        raise GraphDataError("gluing %s has no solid-toric side" % gid)
    if gl.meridian_is_fiber is not True:
        raise GraphDataError(
            "gluing %s: cuts apply only when the meridian is isotopic to a fiber" % gid
        )
    (spid, _), (upid, r_slot) = des
    solid = b.pieces[spid]
    r = solid.solid_param
    piece = b.pieces[upid]
    base = piece.base
    c_r = base.circles[r_slot]
    possible = step_possibilities(piece, r_slot)
    if not possible.get(kind, False):
        raise GraphDataError(
            "no %s arc exists on base %s with R at slot %d"
            % (kind, base.token(), r_slot)
        )
    if cut_spec is None:
        cut_spec = _canonical_cut_spec(piece, r_slot, kind)

    gamma = _football(r) if kind in ("separating", "nonseparating") else _turnover22(r)

    if kind in ("separating", "reflector_separating"):
        return _cut_separating(b, gid, kind, cut_spec, gamma, spid, upid, r_slot, r)
    if kind == "nonseparating":
        return _cut_nonseparating(b, gid, gamma, spid, upid, r_slot, r)
    return _cut_reflector_nonseparating(b, gid, cut_spec, gamma, spid, upid, r_slot, r)


def _make_cap(b: _Builder, mixed: bool, r: int) -> SeifertPiece:
    pid = b.fresh_piece_id("c")
    if mixed:
        corners = (r,) if r >= 2 else ()
        return SeifertPiece(pid, BaseOrb(0, (Circle(mixed=True, corners=corners),)))
    fibers = (r,) if r >= 2 else ()
    return SeifertPiece(pid, BaseOrb(0, (Circle(),)), fibers)


def _cut_separating(b, gid, kind, spec: CutSpec, gamma, spid, upid, r_slot, r):
    piece = b.pieces[upid]
    base = piece.base
    c_r = base.circles[r_slot]
    reflector_cut = kind == "reflector_separating"
    if reflector_cut and not c_r.mixed:
        raise GraphDataError("reflector cut needs a mixed R-circle")
    if spec.corners and not reflector_cut:
        raise GraphDataError("corner assignment only valid for reflector cuts")

    n_f, n_s, n_m = len(piece.fibers), piece.n_slots, len(base.mirrors)
    if spec.genus > base.genus or r_slot in spec.slots:
        raise GraphDataError("cut_spec exceeds the base content")
    if any(i >= n_f for i in spec.fibers) or any(i >= n_s for i in spec.slots) or any(
        i >= n_m for i in spec.mirrors
    ):
        raise GraphDataError("cut_spec indexes missing content")
    if spec.corners > len(c_r.corners):
        raise GraphDataError("cut_spec assigns more corners than exist")

    g1 = spec.genus
    g2 = base.genus - spec.genus
    f1 = tuple(piece.fibers[i] for i in spec.fibers)
    f2 = tuple(f for i, f in enumerate(piece.fibers) if i not in spec.fibers)
    s1 = tuple(sorted(spec.slots))
    s2 = tuple(i for i in range(n_s) if i != r_slot and i not in spec.slots)
    m1 = tuple(base.mirrors[i] for i in spec.mirrors)
    m2 = tuple(m for i, m in enumerate(base.mirrors) if i not in spec.mirrors)

    if reflector_cut:
        corners1 = c_r.corners[: spec.corners]
        corners2 = c_r.corners[spec.corners :]
        new_c1 = Circle(mixed=True, corners=corners1)
        new_c2 = Circle(mixed=True, corners=corners2)
        trivial1 = _side_trivial(g1, f1, s1, m1, corners1)
        trivial2 = _side_trivial(g2, f2, s2, m2, corners2)
        cap_mixed = (True, True)
    else:
        # the reflector chain of a mixed R goes entirely to side two; a side
        # holding only that bare chain is still trivial (the mixed-annulus
        # configuration stays terminal)
        new_c1 = Circle()
        new_c2 = Circle(mixed=True, corners=c_r.corners) if c_r.mixed else Circle()
        trivial1 = _side_trivial(g1, f1, s1, m1, ())
        trivial2 = _side_trivial(g2, f2, s2, m2, c_r.corners)
        cap_mixed = (False, c_r.mixed)
    if trivial1 or trivial2:
        raise GraphDataError(
            "separating cut on %s would leave a trivial side" % base.token()
        )

    h1 = b.fresh_piece_id("h")
    h2 = b.fresh_piece_id("h")
    base1 = BaseOrb(g1, tuple(base.circles[i] for i in s1) + (new_c1,), m1)
    base2 = BaseOrb(g2, tuple(base.circles[i] for i in s2) + (new_c2,), m2)
    side1 = SeifertPiece(h1, base1, f1, tuple(piece.slopes[i] for i in s1) + (None,))
    side2 = SeifertPiece(h2, base2, f2, tuple(piece.slopes[i] for i in s2) + (None,))

    b.drop_gluing(gid)
    for newpid, kept in ((h1, s1), (h2, s2)):
        for newslot, oldslot in enumerate(kept):
            b.remap_end((upid, oldslot), (newpid, newslot))
    b.drop_piece(upid)
    b.drop_piece(spid)
    b.add_piece(side1)
    b.add_piece(side2)

    cap1 = _make_cap(b, cap_mixed[0], r)
    cap2 = _make_cap(b, cap_mixed[1], r)
    b.add_piece(cap1)
    b.add_piece(cap2)
    b.add_gluing(
        Gluing(b.fresh_gluing_id(), ((h1, len(s1)), (cap1.id, 0)), meridian_is_fiber=True)
    )
    b.add_gluing(
        Gluing(b.fresh_gluing_id(), ((h2, len(s2)), (cap2.id, 0)), meridian_is_fiber=True)
    )
    rec = SurgeryRecord(gamma, (gid + ".1", gid + ".2"), "split")
    return b, (rec,)


def _cut_nonseparating(b, gid, gamma, spid, upid, r_slot, r):
    piece = b.pieces[upid]
    base = piece.base
    c_r = base.circles[r_slot]
    new_a = Circle()
    new_b = Circle(mixed=True, corners=c_r.corners) if c_r.mixed else Circle()
    h = b.fresh_piece_id("h")
    kept = tuple(i for i in range(piece.n_slots) if i != r_slot)
    newbase = BaseOrb(
        base.genus - 1,
        tuple(base.circles[i] for i in kept) + (new_a, new_b),
        base.mirrors,
    )
    newp = SeifertPiece(
        h, newbase, piece.fibers, tuple(piece.slopes[i] for i in kept) + (None, None)
    )
    b.drop_gluing(gid)
    for newslot, oldslot in enumerate(kept):
        b.remap_end((upid, oldslot), (h, newslot))
    b.drop_piece(upid)
    b.drop_piece(spid)
    b.add_piece(newp)
    cap_a = _make_cap(b, False, r)
    cap_b = _make_cap(b, c_r.mixed, r)
    b.add_piece(cap_a)
    b.add_piece(cap_b)
    b.add_gluing(
        Gluing(b.fresh_gluing_id(), ((h, len(kept)), (cap_a.id, 0)), meridian_is_fiber=True)
    )
    b.add_gluing(
        Gluing(
            b.fresh_gluing_id(), ((h, len(kept) + 1), (cap_b.id, 0)), meridian_is_fiber=True
        )
    )
    rec = SurgeryRecord(gamma, (gid + ".1", gid + ".2"), "join")
    return b, (rec,)


def _cut_reflector_nonseparating(b, gid, spec: CutSpec, gamma, spid, upid, r_slot, r):
    """Arc from R to the reflector chain of another mixed circle.

    Cutting fuses the two circles; we keep the bookkeeping coarse: the target
    circle's corners fold into the R-circle, one mirrored cap is glued there,
    and one 0-surgery is recorded.  Gluing count is unchanged.
    """
    piece = b.pieces[upid]
    base = piece.base
    target = spec.target_mixed_slot
    if target is None or target == r_slot or not base.circles[target].mixed:
        raise GraphDataError("reflector_nonseparating needs another mixed circle")
    if any(
        (upid, target) in g2.ends
        for g2_id, g2 in b.gluings.items()
        if g2_id != gid
    ):
        # the target circle must be unglued: its boundary is consumed by the fold
        raise GraphDataError(
            "the target mixed circle %s.%d must be a free boundary" % (upid, target)
        )
    c_r = base.circles[r_slot]
    fused = Circle(mixed=True, corners=c_r.corners + base.circles[target].corners)
    kept = tuple(i for i in range(piece.n_slots) if i not in (r_slot, target))
    h = b.fresh_piece_id("h")
    newbase = BaseOrb(base.genus, tuple(base.circles[i] for i in kept) + (fused,), base.mirrors)
    newp = SeifertPiece(
        h, newbase, piece.fibers, tuple(piece.slopes[i] for i in kept) + (None,)
    )
    b.drop_gluing(gid)
    for newslot, oldslot in enumerate(kept):
        b.remap_end((upid, oldslot), (h, newslot))
    b.drop_piece(upid)
    b.drop_piece(spid)
    b.add_piece(newp)
    cap = _make_cap(b, True, r)
    b.add_piece(cap)
    b.add_gluing(
        Gluing(b.fresh_gluing_id(), ((h, len(kept)), (cap.id, 0)), meridian_is_fiber=True)
    )
    rec = SurgeryRecord(gamma, (gid + ".1", gid + ".2"), "join")
    return b, (rec,)


# --- terminal recognition --------------------------------------------------------


def step5_recognize(piece: SeifertPiece, r: int) -> str:
    """Name the closed quotient produced by filling a terminal base with a
    solid-toric piece of parameter r whose meridian is a fiber.

    Only the four closed cases (disc, disc with one cone, mirrored disc,
    mirrored disc with one corner) are named here; the annulus cases are
    handled by the merge paths in normalize.
    """
    base = piece.base
    if base.genus or base.mirrors or len(base.circles) != 1:
        raise GraphDataError("base %s is not terminal" % base.token())
    c = base.circles[0]
    if not c.mixed:
        if len(piece.fibers) == 0:
            return _sphere_quot_token(r)
        if len(piece.fibers) == 1:
            return _sphere_quot_token(r, piece.fibers[0])
        raise GraphDataError("base %s is not terminal" % piece.describe())
    if piece.fibers:
        raise GraphDataError("base %s is not terminal" % piece.describe())
    if not c.corners:
        return _dihedral_token(r)
    if len(c.corners) == 1:
        return _dihedral_product_token(r, c.corners[0])
    raise GraphDataError("base %s is not terminal" % piece.describe())


# --- the normalization loop ------------------------------------------------------


def _continuation(b: _Builder, pid: str, slot: int):
    """Mark the gluing at (pid, slot), if any, as a meridian/fiber boundary of
    a freshly created solid-toric piece (Dehn-merge continuation)."""
    for gid in b.gorder:
        gl = b.gluings[gid]
        if (pid, slot) in gl.ends:
            u = gl.u
            if u is None:
                s0 = b.pieces[gl.ends[0][0]].slopes[gl.ends[0][1]]
                s1 = b.pieces[gl.ends[1][0]].slopes[gl.ends[1][1]]
                if s0 is not None and s1 is not None:
                    u = _slope_det(s0, s1)
            flag = gl.meridian_is_fiber
            if flag is None:
                if u is None:
                    raise GraphDataError(
                        "gluing %s: a solid-toric piece was produced next to it; "
                        "supply u, slopes, or meridian_fiber for the continuation"
                        % gid
                    )
                # the new piece's meridian is the old fiber class, and the
                # first operation already erased every isotopic gluing
                flag = False
            b.gluings[gid] = replace(gl, isotopic=False, u=u, meridian_is_fiber=flag)
            return


def normalize(g: GraphOrb) -> NormalizationResult:
    """Alternate the first and second operations to a fixpoint.

    Deterministic: operations always apply to the lowest-indexed eligible
    gluing in the current ordering.  Terminates because the first operation
    and the merge paths strictly decrease pieces+gluings, while the cut paths
    strictly decrease base content (genus, cones, circles, corners), which no
    operation increases without consuming a gluing.
    """
    b = _Builder(g)
    trace: list[TraceEvent] = []
    surgeries: list[SurgeryRecord] = []
    recognized: list[str] = []

    def stats():
        snap = b.snapshot()
        return (len(snap.gluings), len(snap.pieces), len(snap.components()))

    content = sum(
        p.base.genus + len(p.fibers) + p.n_slots + len(p.base.mirrors)
        + sum(len(c.corners) for c in p.base.circles)
        for p in b.pieces.values()
    )
    guard = 60 + 12 * (len(b.order) + len(b.gorder) + content)

    for _ in range(guard):
        before = stats()
        # first operation, exhaustively
        iso = next((gid for gid in b.gorder if b.gluings[gid].isotopic), None)
        if iso is not None:
            mid = _op1_merge(b, iso)
            closed = b.pieces[mid].n_slots == 0
            after = stats()
            trace.append(
                TraceEvent(
                    "op1_merge",
                    "gluing %s -> piece %s%s" % (iso, mid, " (closed)" if closed else ""),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            continue

        # second operation: lowest gluing with a solid-toric side
        chosen = None
        for gid in b.gorder:
            des = _designate_solid(b.pieces, b.gluings[gid])
            if des is not None:
                chosen = (gid, des)
                break
        if chosen is None:
            break
        gid, ((spid, sslot), (upid, r_slot)) = chosen
        gl = b.gluings[gid]
        solid = b.pieces[spid]
        r = solid.solid_param

        if gl.meridian_is_fiber is None:
            raise GraphDataError(
                "gluing %s touches solid-toric piece %s but carries no "
                "meridian_fiber flag" % (gid, spid)
            )

        if gl.meridian_is_fiber is False:
            mid = _op2_dehn_merge(b, gid)
            after = stats()
            trace.append(
                TraceEvent(
                    "op2_dehn_merge",
                    "gluing %s, u-filling -> piece %s" % (gid, mid),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            if b.pieces[mid].is_solid_toric and b.pieces[mid].n_slots == 1:
                _continuation(b, mid, 0)
            continue

        piece = b.pieces[upid]
        possible = step_possibilities(piece, r_slot)
        kind = next(
            (
                k
                for k in (
                    "separating",
                    "nonseparating",
                    "reflector_separating",
                    "reflector_nonseparating",
                )
                if possible[k]
            ),
            None,
        )
        if kind is not None:
            _, recs = _step_cut(b, gid, kind)
            surgeries.extend(recs)
            after = stats()
            step_name = {
                "separating": "step1_cut",
                "nonseparating": "step2_cut",
                "reflector_separating": "step3_cut",
                "reflector_nonseparating": "step4_cut",
            }[kind]
            trace.append(
                TraceEvent(
                    step_name,
                    "gluing %s over %s, cross-section %s"
                    % (gid, recs[0].gamma, recs[0].gamma),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            continue

        # terminal base: the six dead-end shapes
        base = piece.base
        c_r = base.circles[r_slot]
        n_plain_other = sum(
            1 for k, c in enumerate(base.circles) if k != r_slot and not c.mixed
        )
        if (
            base.genus == 0
            and not base.mirrors
            and not piece.fibers
            and not c_r.mixed
            and n_plain_other == 1
            and piece.n_slots == 2
        ):
            # annulus: absorb the solid torus, leaving a smaller solid torus
            other_slot = next(k for k in range(2) if k != r_slot)
            mid = b.fresh_piece_id("m")
            fibers = (r,) if r >= 2 else ()
            newp = SeifertPiece(mid, BaseOrb(0, (Circle(),)), fibers)
            b.drop_gluing(gid)
            b.remap_end((upid, other_slot), (mid, 0))
            b.drop_piece(upid)
            b.drop_piece(spid)
            b.add_piece(newp)
            _continuation(b, mid, 0)
            after = stats()
            trace.append(
                TraceEvent(
                    "step5_case1",
                    "gluing %s: annulus shell absorbed into %s" % (gid, newp.describe()),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            continue
        if (
            base.genus == 0
            and not base.mirrors
            and not piece.fibers
            and c_r.mixed
            and not c_r.corners
            and n_plain_other == 1
            and piece.n_slots == 2
        ):
            # mixed annulus: split off a dihedral quotient over S2(r,r)
            other_slot = next(
                k for k in range(2) if k != r_slot and not base.circles[k].mixed
            )
            mid = b.fresh_piece_id("m")
            fibers = (r,) if r >= 2 else ()
            newp = SeifertPiece(mid, BaseOrb(0, (Circle(),)), fibers)
            b.drop_gluing(gid)
            b.remap_end((upid, other_slot), (mid, 0))
            b.drop_piece(upid)
            b.drop_piece(spid)
            b.add_piece(newp)
            _continuation(b, mid, 0)
            token = _dihedral_token(r)
            recognized.append(token)
            surgeries.append(
                SurgeryRecord(_football(r), (gid + ".1", gid + ".2"), "split")
            )
            after = stats()
            trace.append(
                TraceEvent(
                    "step5_case6",
                    "gluing %s: %s split off, %s remains" % (gid, token, newp.describe()),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            continue
        if piece.n_slots == 1:
            token = step5_recognize(piece, r)
            b.drop_gluing(gid)
            b.drop_piece(upid)
            b.drop_piece(spid)
            recognized.append(token)
            case = (
                "step5_case2"
                if (not c_r.mixed and not piece.fibers)
                else "step5_case3"
                if not c_r.mixed
                else "step5_case4"
                if not c_r.corners
                else "step5_case5"
            )
            after = stats()
            trace.append(
                TraceEvent(
                    case,
                    "gluing %s: closed component recognized as %s" % (gid, token),
                    after[0] - before[0],
                    after[1] - before[1],
                    after[2] - before[2],
                )
            )
            continue
        raise GraphDataError(
            "no cut applies and base %s of piece %s is not terminal"
            % (base.token(), upid)
        )
    else:
        raise GraphDataError("normalization failed to terminate within its budget")

    strong = b.snapshot()
    ok, violations = verify_strong(strong)
    if not ok:
        raise GraphDataError("normalize left a non-strong result: %s" % violations)
    return NormalizationResult(
        strong, tuple(surgeries), tuple(recognized), tuple(trace)
    )


# --- compressible free boundaries -------------------------------------------------


@dataclass(frozen=True)
class BoundaryDecomposition:
    solid_piece: SeifertPiece
    rest: GraphOrb
    surgeries: tuple[SurgeryRecord, ...]
    recognized: tuple[str, ...]


def compressible_boundary_split(g: GraphOrb, free: tuple[str, int]) -> BoundaryDecomposition:
    """Split off the solid-toric piece certifying a compressible free boundary.

    The graph is normalized first; the free boundary's piece must then be
    solid-toric (the compressibility certificate).  The solid-toric piece has
    its single boundary free, so it is a whole component; it is returned
    together with the remaining strong components and the surgery records of
    the normalization.
    """
    res = normalize(g)
    strong = res.strong
    pid, slot = free
    if pid not in {p.id for p in strong.pieces}:
        # the original piece was consumed; locate the free slot by position
        frees = strong.free_boundaries
        if not frees:
            raise GraphDataError("no free boundary survives normalization")
        pid, slot = frees[0]
    piece = strong.piece(pid)
    if not piece.is_solid_toric:
        raise GraphDataError(
            "free boundary %s.%d has no compressibility certificate: piece %s "
            "is not solid-toric" % (pid, slot, piece.describe())
        )
    if (pid, slot) not in strong.free_boundaries:
        raise GraphDataError("%s.%d is not a free boundary" % (pid, slot))
    rest = GraphOrb(
        tuple(p for p in strong.pieces if p.id != pid),
        strong.gluings,
    )
    return BoundaryDecomposition(piece, rest, res.surgeries, res.recognized)
