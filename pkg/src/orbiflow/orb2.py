"""Signatures and geometry classification of compact orientable 2-orbifolds.

A closed orientable 2-orbifold is written ``S(k_1, ..., k_r)``: an oriented
surface ``S`` with cone points of orders ``k_i > 1``.  All Euler
characteristics are computed in exact rational arithmetic because the
Euclidean case is the codimension-one condition ``chi_orb = 0`` and must not
be decided in floating point.

Bounded signatures (``D2(k)``, ``D2(2,2)``, the mirrored discs ``D2//Z2`` and
``D2//Dk``) are representable; only closed ones get the four-way geometry
verdict, bounded ones classify as Discal or Other via ``classify_extended``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import inf


class GeometryClass(Enum):
    Bad = "Bad"
    Spherical = "Spherical"
    Euclidean = "Euclidean"
    Hyperbolic = "Hyperbolic"
    Discal = "Discal"
    Other = "Other"


# reflector_data tags for the two bounded mirrored cases.  "Z2" is the
# mirrored disc (boundary circle = one orbifold arc + one reflector arc);
# ("D", k) additionally carries one corner reflector point of order k.
ReflectorTag = tuple[str, int] | None


@dataclass(frozen=True, order=True)
class TwoOrbSig:
    """Signature of a compact orientable 2-orbifold.

    ``cone_orders`` is kept sorted so that signature equality is canonical.
    ``reflector_data`` is only permitted on bounded signatures.
    """

    base_genus: int = 0
    cone_orders: tuple[int, ...] = ()
    boundary_circles: int = 0
    reflector_data: ReflectorTag = None

    def __post_init__(self):
        if self.base_genus < 0 or self.boundary_circles < 0:
            raise ValueError("genus and boundary count must be nonnegative")
        cones = tuple(sorted(self.cone_orders))
        if any(k < 2 for k in cones):
            raise ValueError("every cone order must be >= 2, got %r" % (self.cone_orders,))
        object.__setattr__(self, "cone_orders", cones)
        if self.reflector_data is not None:
            tag = self.reflector_data
            if self.boundary_circles < 1:
                raise ValueError("reflector data requires a boundary circle")
            if not (tag == ("Z2", 0) or (tag[0] == "D" and tag[1] >= 2)):
                raise ValueError("unknown reflector tag %r" % (tag,))

    @property
    def is_closed(self) -> bool:
        return self.boundary_circles == 0

    def __str__(self) -> str:
        if self.reflector_data is not None:
            tag = self.reflector_data
            return "D2//Z2" if tag[0] == "Z2" else "D2//D%d" % tag[1]
        if self.boundary_circles == 0:
            head = {0: "S2", 1: "T2"}.get(self.base_genus, "G%d" % self.base_genus)
        elif self.base_genus == 0 and self.boundary_circles == 1:
            head = "D2"
        elif self.base_genus == 0 and self.boundary_circles == 2:
            head = "A2"
        else:
            head = "F[g%d,b%d]" % (self.base_genus, self.boundary_circles)
        if self.cone_orders:
            return "%s(%s)" % (head, ",".join(str(k) for k in self.cone_orders))
        return head


def sig(text_or_genus=0, cones=(), boundary=0, reflector=None) -> TwoOrbSig:
    """Convenience constructor: ``sig(0, (2,3,5))`` or named sphere shorthand."""
    return TwoOrbSig(text_or_genus, tuple(cones), boundary, reflector)


def S2(*cones: int) -> TwoOrbSig:
    return TwoOrbSig(0, cones, 0)


def T2(*cones: int) -> TwoOrbSig:
    return TwoOrbSig(1, cones, 0)


def D2(*cones: int) -> TwoOrbSig:
    return TwoOrbSig(0, cones, 1)


D2_Z2 = TwoOrbSig(0, (), 1, ("Z2", 0))


def D2_Dk(k: int) -> TwoOrbSig:
    return TwoOrbSig(0, (), 1, ("D", k))


def orb_euler_char(s: TwoOrbSig) -> Fraction:
    """Orbifold Euler characteristic, exact.

    chi_orb = chi(|S|) - sum_i (1 - 1/k_i) for cone signatures; the two
    mirrored discs are quotients of D2 resp. D2(k) by a reflection, so their
    values are half of the double cover's.
    """
    if s.reflector_data is not None:
        if s.reflector_data[0] == "Z2":
            return Fraction(1, 2)
        return Fraction(1, 2 * s.reflector_data[1])
    chi_surface = 2 - 2 * s.base_genus - s.boundary_circles
    return Fraction(chi_surface) - sum(Fraction(k - 1, k) for k in s.cone_orders)


def is_bad(s: TwoOrbSig) -> bool:
    """Teardrops S2(k) and asymmetric footballs S2(k,k') are the bad ones."""
    if not s.is_closed or s.base_genus != 0:
        return False
    c = s.cone_orders
    return len(c) == 1 or (len(c) == 2 and c[0] != c[1])


def classify_geometry(s: TwoOrbSig) -> GeometryClass:
    """Four-way geometry verdict for closed orientable signatures.

    Raises on bounded input; use :func:`classify_extended` for a total map.
    """
    if not s.is_closed:
        raise ValueError(
            "classify_geometry needs a closed signature, got %s (bounded)" % s
        )
    if is_bad(s):
        return GeometryClass.Bad
    chi = orb_euler_char(s)
    if chi > 0:
        return GeometryClass.Spherical
    if chi == 0:
        return GeometryClass.Euclidean
    return GeometryClass.Hyperbolic


def classify_extended(s: TwoOrbSig) -> GeometryClass:
    """Total classification: bounded discal quotients map to Discal, the other
    bounded signatures to Other, closed ones to the four-way verdict."""
    if s.is_closed:
        return classify_geometry(s)
    if s.reflector_data is not None:
        return GeometryClass.Discal
    if s.base_genus == 0 and s.boundary_circles == 1 and len(s.cone_orders) <= 1:
        return GeometryClass.Discal
    return GeometryClass.Other


# The finite classification lists for closed orientable signatures.  The
# parametrized families take every integer k >= 2.
SPHERICAL_FAMILIES = (
    lambda: S2(),
    lambda k: S2(k, k),
    lambda k: S2(2, 2, k),
    lambda: S2(2, 3, 3),
    lambda: S2(2, 3, 4),
    lambda: S2(2, 3, 5),
)

EUCLIDEAN_SIGS = (T2(), S2(2, 3, 6), S2(2, 4, 4), S2(3, 3, 3), S2(2, 2, 2, 2))


def spherical_sigs(max_order: int):
    """All closed spherical signatures with parameters up to ``max_order``."""
    out = [S2(), S2(2, 3, 3), S2(2, 3, 4), S2(2, 3, 5)]
    out += [S2(k, k) for k in range(2, max_order + 1)]
    out += [S2(2, 2, k) for k in range(2, max_order + 1)]
    return out


def is_spherical_sig(s: TwoOrbSig) -> bool:
    """Membership in the closed orientable spherical list."""
    if not s.is_closed or s.base_genus != 0:
        return False
    c = s.cone_orders
    if len(c) == 0:
        return True
    if len(c) == 2 and c[0] == c[1]:
        return True
    if len(c) == 3:
        return c in ((2, 3, 3), (2, 3, 4), (2, 3, 5)) or (c[0] == 2 and c[1] == 2)
    return False


@dataclass(frozen=True)
class MCGDescription:
    name: str
    order: float  # positive integer, or math.inf
    generators_note: str = ""


_MCG_TABLE = {
    T2(): MCGDescription("SL(2,Z)", inf, "linear torus automorphisms"),
    S2(2, 3, 6): MCGDescription("trivial", 1, "no label-preserving permutations"),
    S2(2, 4, 4): MCGDescription(
        "Z2", 2, "flip around the order-2 vertex exchanging the two triangles"
    ),
    S2(3, 3, 3): MCGDescription(
        "S3", 6, "rotations and flips permuting the three order-3 points"
    ),
    S2(2, 2, 2, 2): MCGDescription(
        "PSL(2,Z) x| (Z/2 x Z/2)",
        inf,
        "linear torus actions plus half rotations of the circle factors",
    ),
}


def mapping_class_group(s: TwoOrbSig) -> MCGDescription:
    """Mapping class group of a closed Euclidean signature.

    Only the closed orientable Euclidean signatures are supported; the group
    is finite exactly for the three triangle signatures.
    """
    try:
        return _MCG_TABLE[s]
    except KeyError:
        raise ValueError(
            "mapping_class_group defined only for the closed Euclidean "
            "signatures, got %s" % s
        ) from None
