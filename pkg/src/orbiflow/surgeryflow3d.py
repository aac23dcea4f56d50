"""Doubly warped Ricci flow with neck surgery on 3-orbifolds.

Metric: ds^2 + psi(s)^2 g_X on arc-length samples, where g_X is the unit
round metric on a spherical quotient X = S2//Gamma.  Sectional curvatures are
K_rad = -psi''/psi on planes containing the radial direction and
K_sph = (1 - psi'^2)/psi^2 on cross-section planes; the scalar curvature is
R = 4 K_rad + 2 K_sph.  The flow moves material nodes:

    dpsi/dt = psi'' - (1 - psi'^2)/psi,      d(ds)/dt = (2 psi''/psi) ds.

Neck regions are recognized by closeness, after rescaling, to the cylinder
over X with scalar curvature one (warp sqrt(2), unit length scale).  Surgery
cuts a detected neck at its central cross-section, discards the material
whose scalar curvature exceeds 1/h^2 (the horn side), and splices in a
rescaled standard cap with a C^1 cubic Hermite blend.  The standard cap is
the smooth warp sqrt(2) tanh(s/sqrt(2)): nonnegative in both sectional
families with R = 1 + 5 sech^2 >= 1, asymptotic to the scalar-one cylinder.

Monitors: pinching (Rm >= -Phi(R) with a configurable Hamilton-Ivey-style
Phi), volume noncollapsing on a scale, isotropy-order bound, and the product
R_min * V^(2/3) whose supremum over metrics is the sigma invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from . import _kernels
from .orb2 import S2, TwoOrbSig, is_spherical_sig


def group_order(sig: TwoOrbSig) -> int:
    """Order of Gamma for the spherical quotient S2//Gamma."""
    if not is_spherical_sig(sig):
        raise ValueError("%s is not a spherical signature" % sig)
    c = sig.cone_orders
    if len(c) == 0:
        return 1
    if len(c) == 2:
        return c[0]
    if c[:2] == (2, 2):
        return 2 * c[2]
    return {(2, 3, 3): 12, (2, 3, 4): 24, (2, 3, 5): 60}[c]


@dataclass
class WarpProfile:
    """One rotationally symmetric component."""

    s: np.ndarray
    psi: np.ndarray
    cross_section: TwoOrbSig = S2()
    ends: tuple[str, str] = ("cap", "cap")

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        if self.s.ndim != 1 or self.s.shape != self.psi.shape or self.s.size < 8:
            raise ValueError("profile needs matching 1-d arrays of >= 8 samples")
        if np.any(np.diff(self.s) <= 0):
            raise ValueError("s must be strictly increasing")
        for e in self.ends:
            if e not in ("cap", "boundary"):
                raise ValueError("end kinds are 'cap' or 'boundary'")
        if self.ends[0] == "cap" and self.psi[0] != 0.0:
            raise ValueError("cap ends start at psi = 0")
        if self.ends[1] == "cap" and self.psi[-1] != 0.0:
            raise ValueError("cap ends start at psi = 0")
        if np.any(self.psi[1:-1] <= 0.0):
            raise ValueError("psi must be positive in the interior")
        self.group = group_order(self.cross_section)

    @property
    def left_cap(self) -> bool:
        return self.ends[0] == "cap"

    @property
    def right_cap(self) -> bool:
        return self.ends[1] == "cap"

    @property
    def closed(self) -> bool:
        return self.ends == ("cap", "cap")

    def copy(self) -> "WarpProfile":
        return WarpProfile(self.s.copy(), self.psi.copy(), self.cross_section, self.ends)

    def volume(self) -> float:
        w = self.psi * self.psi
        integral = float(np.sum(0.5 * (w[1:] + w[:-1]) * np.diff(self.s)))
        return 4.0 * np.pi / self.group * integral

    def edge_labels(self) -> frozenset:
        """Labels of the singular arcs threading the component."""
        return frozenset(self.cross_section.cone_orders)

    def describe(self) -> tuple:
        return (str(self.cross_section), self.ends, tuple(sorted(self.edge_labels())))


def curvatures(p: WarpProfile):
    """(K_rad, K_sph, R) on the sample grid."""
    krad, ksph = _kernels.curvature3(p.s, p.psi, p.left_cap, p.right_cap)
    return krad, ksph, 4.0 * krad + 2.0 * ksph


def round_sphere3(sig: TwoOrbSig = S2(), n: int = 800, radius: float = 1.0) -> WarpProfile:
    s = np.linspace(0.0, np.pi * radius, n)
    psi = radius * np.sin(s / radius)
    psi[0] = 0.0
    psi[-1] = 0.0
    return WarpProfile(s, psi, sig)


def cylinder(scalar: float = 1.0, length: float = 20.0, sig: TwoOrbSig = S2(), n: int = 600) -> WarpProfile:
    # constant warp sqrt(2/scalar) has R = scalar
    s = np.linspace(0.0, length, n)
    return WarpProfile(s, np.full(n, math.sqrt(2.0 / scalar)), sig, ("boundary", "boundary"))


def dumbbell(sig: TwoOrbSig = S2(), n: int = 1600, neck: float = 0.22) -> WarpProfile:
    """Two spherical bulbs joined by a thin neck; pinches under the flow."""
    s = np.linspace(0.0, np.pi, n)
    psi = np.sin(s) * (1.0 - (1.0 - neck) * np.sin(s) ** 4)
    psi[0] = 0.0
    psi[-1] = 0.0
    return WarpProfile(s, psi, sig)


def hyperbolic_toy(n: int = 4000, length: float = 2.0) -> WarpProfile:
    """Static constant-R = -3/2 profile psi = 2 sinh(s/2), for the sigma
    formula check; one cap and one boundary end."""
    s = np.linspace(0.0, length, n)
    psi = 2.0 * np.sinh(s / 2.0)
    psi[0] = 0.0
    return WarpProfile(s, psi, S2(), ("cap", "boundary"))


# --- monitors ---------------------------------------------------------------------


@dataclass(frozen=True)
class PinchFn:
    """Phi(x) = x/ln(max(x, e)) + offset: positive, nondecreasing, with
    Phi(x)/x decreasing to zero; the offset calibrates seed data."""

    offset: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.log(np.maximum(x, np.e)) + self.offset

    @staticmethod
    def calibrated(profiles, margin: float = 0.5) -> "PinchFn":
        worst = 0.0
        for p in profiles:
            krad, ksph, R = curvatures(p)
            base = PinchFn(0.0)
            sect_min = np.minimum(krad, ksph)
            worst = min(worst, float(np.min(sect_min + base(R))))
        return PinchFn(offset=-worst + margin)


@dataclass(frozen=True)
class PinchVerdict:
    passed: bool
    worst_margin: float


def pinching_check(p: WarpProfile, phi: PinchFn) -> PinchVerdict:
    """min over samples and 2-plane families of (sectional + Phi(R))."""
    krad, ksph, R = curvatures(p)
    margin = float(np.min(np.minimum(krad, ksph) + phi(R)))
    return PinchVerdict(margin >= 0.0, margin)


@dataclass(frozen=True)
class KappaVerdict:
    passed: bool
    admissible_centers: int
    failed_centers: int
    vacuous: bool


def kappa_check(p: WarpProfile, r: float, kappa: float) -> KappaVerdict:
    """Volume noncollapsing at scale r, in the symmetric slab reduction.

    A center s0 is admissible when sup |Rm| <= r^-2 over |s - s0| <= r; it
    passes when the slab volume (cross-section area times psi^2 integrated
    over the window) is at least kappa r^3.
    """
    if r <= 0:
        raise ValueError("scale must be positive")
    krad, ksph, _ = curvatures(p)
    rm = np.maximum(np.abs(krad), np.abs(ksph))
    w = p.psi * p.psi
    admissible = failed = 0
    for i in range(p.s.size):
        lo = np.searchsorted(p.s, p.s[i] - r)
        hi = np.searchsorted(p.s, p.s[i] + r, side="right")
        if float(np.max(rm[lo:hi])) > 1.0 / (r * r):
            continue
        admissible += 1
        seg = np.diff(p.s[lo:hi])
        vol = 4.0 * np.pi / p.group * float(np.sum(0.5 * (w[lo : hi - 1] + w[lo + 1 : hi]) * seg))
        if vol < kappa * r**3:
            failed += 1
    return KappaVerdict(failed == 0, admissible, failed, admissible == 0)


def isotropy_bound(kappa: float, n: int) -> int:
    """Upper bound on isotropy-group orders for kappa-noncollapsed flows:
    floor of n * int_0^1 sinh^(n-1) ds / kappa; zero flags an impossible
    kappa."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if n not in (2, 3):
        raise ValueError("dimension 2 or 3")
    integral, _ = quad(lambda t: math.sinh(t) ** (n - 1), 0.0, 1.0)
    return int(math.floor(n * integral / kappa))


# --- necks and caps ----------------------------------------------------------------


@dataclass(frozen=True)
class NeckInfo:
    component: int
    center_index: int
    center_s: float
    scale: float  # R(center)^(-1/2)
    s_lo: float
    s_hi: float
    rescaled_length: float


def detect_neck(p: WarpProfile, eps: float = 0.25, component: int = 0) -> NeckInfo | None:
    """Longest interval that is eps-close, after rescaling, to the cylinder
    of scalar curvature one over the cross-section, if its rescaled length
    exceeds 2/eps."""
    krad, ksph, R = curvatures(p)
    d1 = np.gradient(p.psi, p.s, edge_order=2)
    flat = np.abs(d1) <= eps
    thin = np.abs(p.psi * p.psi * R / 2.0 - 1.0) <= eps
    bend = np.abs(p.psi * p.psi * krad) <= eps
    mask = flat & thin & bend
    best = None
    i = 0
    n = p.s.size
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        if j > i:
            seg = slice(i, j + 1)
            c_rel = int(np.argmin(p.psi[seg]))
            c = i + c_rel
            r_c = float(R[c])
            if r_c > 0:
                rescaled = (p.s[j] - p.s[i]) * math.sqrt(r_c)
                if rescaled >= 2.0 / eps and (best is None or rescaled > best.rescaled_length):
                    best = NeckInfo(
                        component,
                        c,
                        float(p.s[c]),
                        r_c ** -0.5,
                        float(p.s[i]),
                        float(p.s[j]),
                        rescaled,
                    )
        i = j + 1
    return best


def standard_cap(
    cross_section: TwoOrbSig = S2(), n: int = 400, extent: float = 8.0
) -> WarpProfile:
    """The model cap: psi = sqrt(2) tanh(s/sqrt(2)) on [0, extent*sqrt(2)].

    Smooth cap end, boundary end asymptotic to the scalar-curvature-one
    cylinder; R = 1 + 5 sech^2(s/sqrt(2)) >= 1 and both sectional families
    are nonnegative.
    """
    root2 = math.sqrt(2.0)
    s = np.linspace(0.0, extent * root2, n)
    psi = root2 * np.tanh(s / root2)
    psi[0] = 0.0
    return WarpProfile(s, psi, cross_section, ("cap", "boundary"))


# --- the flow with surgery ----------------------------------------------------------


@dataclass
class SurgeryParams:
    delta: float = 0.3        # neck closeness used for detection
    h: float = 0.02           # surgery scale: cut when neck scale <= h
    theta: float = 0.5        # cap-evolution horizon fraction (exposed, unused here)
    a_ext: float = 6.0        # cap extension in cylinder units
    blend_cells: int = 10
    r_ambient: float | None = None  # when given, enforce h < delta^2 * r

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ValueError("delta must sit in (0, 1/2)")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.r_ambient is not None and not (self.h < self.delta**2 * self.r_ambient):
            raise ValueError("surgery scale must satisfy h < delta^2 * r")


@dataclass(frozen=True)
class SurgeryEvent:
    t: float
    component: int
    gamma: TwoOrbSig
    center_s: float
    scale: float
    produced: tuple[int, ...]
    discarded: tuple[tuple, ...]
    pre_description: tuple[tuple, ...]


@dataclass
class FlowState:
    components: list[WarpProfile]
    t: float = 0.0
    events: list[SurgeryEvent] = field(default_factory=list)
    sigma_samples: list[tuple[float, float, float, float]] = field(default_factory=list)

    def describe(self) -> tuple[tuple, ...]:
        return tuple(c.describe() for c in self.components)

    def edge_label_set(self) -> frozenset:
        out = frozenset()
        for c in self.components:
            out |= c.edge_labels()
        return out


class NumericError(RuntimeError):
    pass


def flow_step3(state: FlowState, dt_factor: float = 0.1) -> FlowState:
    """One explicit adaptive step, the same dt on every component."""
    new = FlowState(
        [c.copy() for c in state.components],
        state.t,
        list(state.events),
        list(state.sigma_samples),
    )
    t_min = math.inf
    for c in new.components:
        seg = np.diff(c.s)
        krad, ksph, _ = curvatures(c)
        rmax = float(np.max(np.maximum(np.abs(krad), np.abs(ksph))))
        ds = float(np.min(seg))
        t_min = min(t_min, dt_factor * ds * ds / (1.0 + rmax * ds * ds))
    for c in new.components:
        status, _, _ = _kernels.flow3_chunk(
            c.s, c.psi, c.left_cap, c.right_cap, 4, dt_factor, 0.0, t_min, np.inf
        )
        if status != 0:
            raise NumericError("step collapsed a component")
    new.t += t_min
    return new


def regrid3(p: WarpProfile, n: int | None = None) -> WarpProfile:
    n = n or p.s.size
    interp = PchipInterpolator(p.s, p.psi)
    s = np.linspace(p.s[0], p.s[-1], n)
    psi = interp(s)
    if p.left_cap:
        psi[0] = 0.0
    if p.right_cap:
        psi[-1] = 0.0
    psi[1:-1] = np.maximum(psi[1:-1], 1e-300)
    return WarpProfile(s, psi, p.cross_section, p.ends)


def sigma_track(state: FlowState) -> tuple[float, float, float, float]:
    """Append and return (t, R_min, V, R_min V^(2/3)).

    R_min is the minimum of the scalar curvature over all components, V the
    total volume.  Open test profiles are admitted for diagnostics even
    though the invariant is about closed orbifolds.
    """
    r_min = math.inf
    vol = 0.0
    for c in state.components:
        _, _, R = curvatures(c)
        r_min = min(r_min, float(np.min(R)))
        vol += c.volume()
    row = (state.t, r_min, vol, r_min * vol ** (2.0 / 3.0))
    state.sigma_samples.append(row)
    return row


def sigma_monotone_verdict(samples, tol: float = 1e-6) -> bool:
    """R_min <= 0 flows should have nondecreasing R_min V^(2/3)."""
    vals = [s[3] for s in samples]
    return all(b >= a - tol for a, b in zip(vals, vals[1:]))


def _cap_side(s_keep, psi_keep, lam, params: SurgeryParams):
    """Splice a scaled standard cap onto the LEFT end of the kept arrays.

    The cap warp sqrt(2) lam tanh(x/(sqrt(2) lam)) is positioned so its value
    at the seam matches the kept warp there, the kept side is represented by
    a C2 cubic spline, and the two mix through a C2 smoothstep over the blend
    window; the output grid is uniform, so no further resampling (which would
    reintroduce curvature noise at the seam) is needed.
    """
    from scipy.interpolate import CubicSpline

    ds = float(np.median(np.diff(s_keep)))
    w = params.blend_cells * ds
    spline = CubicSpline(s_keep, psi_keep)
    psi_seam = float(psi_keep[0])
    m1 = float(spline(s_keep[0], 1))
    m1 = min(max(m1, 0.0), 0.95)
    # tangent matching: the cap radius*tanh(x/radius) meets the kept flank
    # with equal warp and slope at the junction (slope sech^2 = m1 there)
    radius = psi_seam / math.sqrt(1.0 - m1)
    v = math.atanh(min(math.sqrt(1.0 - m1), math.tanh(params.a_ext)))
    u_join = radius * v
    total = u_join + (s_keep[-1] - s_keep[0])
    n = int(round(total / ds)) + 1
    x = np.linspace(0.0, total, n)
    cap_vals = radius * np.tanh(x / radius)
    # the spline extrapolates smoothly below the seam for the fading half of
    # the blend window; clipping here would re-introduce a slope kink
    keep_vals = spline(np.minimum(x - u_join + s_keep[0], s_keep[-1]))
    chi = np.clip((x - (u_join - 0.5 * w)) / w, 0.0, 1.0)
    chi = _smooth5(chi)
    psi = (1.0 - chi) * cap_vals + chi * keep_vals
    psi[0] = 0.0
    return x, psi


def _smooth5(t):
    # zero first and second derivatives at both ends of [0, 1]
    return t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def do_surgery(state: FlowState, neck: NeckInfo, params: SurgeryParams) -> FlowState:
    """Cut the neck, discard horn material past the curvature cutoff, and
    splice standard caps scaled to the seam curvature."""
    if neck.scale > params.h:
        raise ValueError(
            "neck scale %.4g exceeds the surgery scale %.4g" % (neck.scale, params.h)
        )
    comp = state.components[neck.component]
    _, _, R = curvatures(comp)
    r_cut = 1.0 / (params.h * params.h)
    ic = neck.center_index
    pre_desc = state.describe()

    produced = []
    discarded = []
    sides = (
        (np.arange(0, ic + 1)[::-1], comp.ends[0]),  # left side, cut at right
        (np.arange(ic, comp.s.size), comp.ends[1]),  # right side, cut at left
    )
    for idx, far_end in sides:
        # idx runs from the cut outward; find the seam where R drops below
        # the cutoff
        r_side = R[idx]
        below = np.nonzero(r_side <= r_cut)[0]
        if below.size == 0 or idx.size - below[0] < 3 * params.blend_cells:
            discarded.append((str(comp.cross_section), "horn", tuple(sorted(comp.edge_labels()))))
            continue
        seam = below[0]
        lam = float(r_side[seam]) ** -0.5
        keep = idx[seam:]
        if far_end == "boundary":
            raise NumericError("surgery into a boundary end is out of scope")
        if keep[0] < keep[-1]:
            s_keep = comp.s[keep]
            psi_keep = comp.psi[keep]
            s_new, psi_new = _cap_side(s_keep, psi_keep, lam, params)
        else:
            s_keep = comp.s[keep[::-1]]
            psi_keep = comp.psi[keep[::-1]]
            flip_s = s_keep[-1] - s_keep[::-1]
            s_new, psi_new = _cap_side(flip_s, psi_keep[::-1], lam, params)
        psi_new[0] = 0.0
        if far_end == "cap":
            psi_new[-1] = 0.0
        produced.append(WarpProfile(s_new, psi_new, comp.cross_section, ("cap", far_end)))

    comps = [c for i, c in enumerate(state.components) if i != neck.component]
    first_new = len(comps)
    comps.extend(produced)
    event = SurgeryEvent(
        state.t,
        neck.component,
        comp.cross_section,
        neck.center_s,
        neck.scale,
        tuple(range(first_new, len(comps))),
        tuple(discarded),
        pre_desc,
    )
    return FlowState(comps, state.t, state.events + [event], list(state.sigma_samples))


def reconstruct_presurgery(state: FlowState, event: SurgeryEvent) -> tuple[tuple, ...]:
    """Description-level inverse of a surgery event.

    The produced components are rejoined by a 0-surgery along the recorded
    cross-section and any discarded pieces are restored, reproducing the
    pre-surgery description.
    """
    produced = [state.components[i].describe() for i in event.produced]
    labels = frozenset()
    for d in produced:
        labels |= frozenset(d[2])
    for d in event.discarded:
        labels |= frozenset(d[2])
    cross = produced[0][0] if produced else event.discarded[0][0]
    joined = (cross, ("cap", "cap"), tuple(sorted(labels)))
    others = tuple(
        c.describe()
        for i, c in enumerate(state.components)
        if i not in event.produced
    )
    return others + (joined,)


def evolve(
    state: FlowState,
    t_stop: float,
    params: SurgeryParams | None = None,
    dt_factor: float = 0.1,
    neck_eps: float | None = None,
    chunk: int = 4000,
    regrid_ratio: float = 1.10,
    sigma_every: float = 0.0,
    pinch: PinchFn | None = None,
    stop_after_events: int | None = None,
) -> FlowState:
    """Drive all components to t_stop, performing surgeries when enabled.

    When ``params`` is given, the integrator pauses whenever a component's
    scalar curvature reaches 3/h^2 (safely past the seam curvature 1/h^2),
    looks for a neck, and either operates or (for components that are
    uniformly high-curvature, like shrinking round quotients) removes the
    component as extinct.
    """
    state = FlowState(
        [c.copy() for c in state.components], state.t, list(state.events), list(state.sigma_samples)
    )
    if neck_eps is None:
        neck_eps = params.delta if params is not None else 0.3
    r_stop = np.inf if params is None else 3.0 / (params.h * params.h)
    next_sigma = state.t
    escalations = 0
    clocks = [state.t] * len(state.components)

    def advance_all(target: float) -> bool:
        """Bring every component clock to target; False when the run should
        stop early (event budget exhausted)."""
        nonlocal state, clocks, escalations, r_stop
        while True:
            pending = [i for i, tc in enumerate(clocks) if tc < target and state.components]
            if not pending:
                return True
            for ci in pending:
                c = state.components[ci]
                status, steps, t_new = _kernels.flow3_chunk(
                    c.s, c.psi, c.left_cap, c.right_cap, chunk, dt_factor,
                    clocks[ci], target, r_stop,
                )
                clocks[ci] = t_new
                seg = np.diff(c.s)
                if float(np.max(seg)) > regrid_ratio * float(np.min(seg)):
                    state.components[ci] = regrid3(c)
                if status == 1:
                    raise NumericError(
                        "warp collapsed before surgery could trigger; lower the "
                        "surgery scale h or refine the grid"
                    )
                if status != 2:
                    continue
                # paused on high curvature: operate, declare extinction, or escalate
                c = state.components[ci]
                state.t = clocks[ci]
                neck = detect_neck(c, neck_eps, ci)
                if params is not None and neck is not None and neck.scale <= params.h:
                    if pinch is not None and not pinching_check(c, pinch).passed:
                        raise NumericError("pinching failed before surgery")
                    t_surg = clocks[ci]
                    state = do_surgery(state, neck, params)
                    if pinch is not None:
                        for i in state.events[-1].produced:
                            if not pinching_check(state.components[i], pinch).passed:
                                raise NumericError("pinching failed after surgery")
                    clocks = [tc for i, tc in enumerate(clocks) if i != ci]
                    clocks += [t_surg] * len(state.events[-1].produced)
                elif _uniformly_hot(c, r_stop):
                    event = SurgeryEvent(
                        clocks[ci], ci, c.cross_section, float("nan"),
                        float(np.max(curvatures(c)[2])) ** -0.5, (),
                        (c.describe(),), state.describe(),
                    )
                    state = FlowState(
                        [x for i, x in enumerate(state.components) if i != ci],
                        clocks[ci], state.events + [event], list(state.sigma_samples),
                    )
                    clocks = [tc for i, tc in enumerate(clocks) if i != ci]
                else:
                    escalations += 1
                    if escalations > 12:
                        raise NumericError("curvature rose without a detectable neck")
                    r_stop *= 4.0
                if stop_after_events is not None and len(state.events) >= stop_after_events:
                    return False
                break  # component list changed: rebuild the pending scan
        return True

    while True:
        if sigma_every > 0 and state.t >= next_sigma - 1e-15:
            sigma_track(state)
            next_sigma += sigma_every
        if state.t >= t_stop or not state.components:
            break
        if stop_after_events is not None and len(state.events) >= stop_after_events:
            break
        target = min(t_stop, next_sigma) if sigma_every > 0 else t_stop
        if not advance_all(target):
            state.t = min(clocks) if clocks else state.t
            break
        state.t = target
    return state


def _uniformly_hot(c: WarpProfile, r_stop: float) -> bool:
    _, _, R = curvatures(c)
    return bool(np.min(R) >= 0.25 * r_stop)
