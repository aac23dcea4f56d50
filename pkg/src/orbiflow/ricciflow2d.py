"""Rotationally symmetric Ricci flow on cone surfaces.

Metric: d(xi)^2 + phi(xi)^2 d(theta)^2 on arc-length samples xi, with tips
phi = 0 and cone slope phi' = 1/k (k = 1 is a smooth pole).  Gauss curvature
is K = -phi''/phi.  The unnormalized flow is dg/dt = -2K g; the
area-preserving flow is dg/dt = (Rbar - R) g with Rbar = 2 * (2*pi*chi)/A,
followed by a homothety back to the starting area (the homothety changes
neither the curvature statistics nor the Gauss-Bonnet integral).

The smooth-football fixed points are phi = sin(xi)/k; the teardrop limit is
the shrinking soliton whose profile solves phi'' = C phi phi' - lam phi, the
reduction of K + grad^2 f = lam g under f' = C phi.  ``soliton_shoot``
integrates that equation directly and is the independent oracle for the flow
limit of ``run_to_soliton``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from . import _kernels
from .orb2 import TwoOrbSig, orb_euler_char


@dataclass
class RotProfile:
    """Arc-length sampled warped-product metric on a closed cone surface."""

    xi: np.ndarray
    phi: np.ndarray
    cone_left: int = 1
    cone_right: int = 1

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.xi.ndim != 1 or self.xi.shape != self.phi.shape or self.xi.size < 8:
            raise ValueError("profile needs matching 1-d arrays of >= 8 samples")
        if np.any(np.diff(self.xi) <= 0):
            raise ValueError("xi must be strictly increasing")
        if self.phi[0] != 0.0 or self.phi[-1] != 0.0:
            raise ValueError("tips must have phi = 0")
        if np.any(self.phi[1:-1] <= 0.0):
            raise ValueError("phi must be positive in the interior")
        if self.cone_left < 1 or self.cone_right < 1:
            raise ValueError("cone orders are >= 1")

    @property
    def signature(self) -> TwoOrbSig:
        cones = tuple(k for k in (self.cone_left, self.cone_right) if k >= 2)
        return TwoOrbSig(0, cones, 0)

    @property
    def chi(self) -> Fraction:
        return orb_euler_char(self.signature)

    def copy(self) -> "RotProfile":
        return RotProfile(self.xi.copy(), self.phi.copy(), self.cone_left, self.cone_right)

    def tip_slopes(self) -> tuple[float, float]:
        left = self.phi[1] / (self.xi[1] - self.xi[0])
        right = self.phi[-2] / (self.xi[-1] - self.xi[-2])
        return left, right


def round_sphere(n: int = 768, radius: float = 1.0) -> RotProfile:
    xi = np.linspace(0.0, np.pi * radius, n)
    phi = radius * np.sin(xi / radius)
    phi[0] = 0.0
    phi[-1] = 0.0
    return RotProfile(xi, phi, 1, 1)


def _smoothstep(x):
    # zero value/first/second derivative at both ends
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def football(k_left: int, k_right: int, n: int = 768, perturb: float = 0.0) -> RotProfile:
    """Seed profile with cone orders (k_left, k_right).

    The warp is sin(xi) shaped with the slope blending from 1/k_left to
    1/k_right through a smoothstep, so both tips keep odd expansions;
    ``perturb`` multiplies in 1 + perturb*sin^2(xi) which fixes tips and
    slopes.
    """
    xi = np.linspace(0.0, np.pi, n)
    w = 1.0 / k_left + (1.0 / k_right - 1.0 / k_left) * _smoothstep(xi / np.pi)
    phi = np.sin(xi) * w
    if perturb:
        phi = phi * (1.0 + perturb * np.sin(xi) ** 2)
    phi[0] = 0.0
    phi[-1] = 0.0
    return RotProfile(xi, phi, k_left, k_right)


def teardrop_seed(k: int, n: int = 768) -> RotProfile:
    return football(1, k, n)


@dataclass
class Flow2Params:
    dt_factor: float = 0.2       # dt = dt_factor * (min dxi)^2
    normalized: bool = True      # area-preserving normalization
    regrid_every: int = 200      # steps between resampling checks
    regrid_ratio: float = 1.05   # resample when max/min spacing exceeds this
    tol: float = 1e-4            # convergence threshold on sup|K - Kbar|

    def __post_init__(self):
        if not (0 < self.dt_factor <= 0.25):
            raise ValueError("dt_factor must sit in the explicit stability range")


def gauss_curvature(p: RotProfile) -> np.ndarray:
    if np.any(p.phi[1:-1] <= 0):
        raise ValueError("phi must be positive in the interior")
    return _kernels.curvature2(p.xi, p.phi)


def area(p: RotProfile) -> float:
    return float(_kernels.trapz_area2(p.xi, p.phi))


def gauss_bonnet(p: RotProfile) -> float:
    """Total curvature: trapezoid quadrature of K over the surface area."""
    K = gauss_curvature(p)
    f = 2.0 * np.pi * K * p.phi
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(p.xi)))


def curvature_deviation(p: RotProfile) -> float:
    """sup |K - Kbar| with Kbar = 2 pi chi / A."""
    K = gauss_curvature(p)
    kbar = 2.0 * np.pi * float(p.chi) / area(p)
    return float(np.max(np.abs(K - kbar)))


def regrid(p: RotProfile, n: int | None = None) -> RotProfile:
    """Resample to uniform arc length by monotone cubic interpolation."""
    n = n or p.xi.size
    interp = PchipInterpolator(p.xi, p.phi)
    xi = np.linspace(p.xi[0], p.xi[-1], n)
    phi = interp(xi)
    phi[0] = 0.0
    phi[-1] = 0.0
    phi[1:-1] = np.maximum(phi[1:-1], 1e-300)
    return RotProfile(xi, phi, p.cone_left, p.cone_right)


class ExtinctionError(RuntimeError):
    """The warp hit zero in the interior: extinction or pinch candidate."""

    def __init__(self, t):
        super().__init__("warp reached zero at t = %g" % t)
        self.t = t


def flow_step(p: RotProfile, params: Flow2Params) -> RotProfile:
    """One explicit midpoint step; cone boundary conditions preserved."""
    out = p.copy()
    seg = np.diff(out.xi)
    dt = params.dt_factor * float(np.min(seg)) ** 2
    chi2pi = 2.0 * np.pi * float(p.chi)
    status, _ = _kernels.flow2_chunk(
        out.xi, out.phi, 1, dt, params.normalized, chi2pi, area(p)
    )
    if status != 0:
        raise ExtinctionError(0.0)
    return out


@dataclass
class FlowSummary:
    t: float
    area: float
    total_curvature: float
    curvature_deviation: float


def run_flow(
    p: RotProfile,
    params: Flow2Params,
    t_stop: float,
    record_every: float = 0.0,
    stop_when_converged: bool = False,
):
    """Drive the flow to t_stop in chunks, regridding on distortion.

    Returns (profile, t_reached, [FlowSummary...]); raises ExtinctionError
    when the warp collapses first (unnormalized shrinking flows do).
    """
    work = p.copy()
    target_area = area(work)
    chi2pi = 2.0 * np.pi * float(p.chi)
    t = 0.0
    rows = [
        FlowSummary(t, area(work), gauss_bonnet(work), curvature_deviation(work))
    ]
    next_record = record_every
    while t < t_stop:
        seg = np.diff(work.xi)
        dt = params.dt_factor * float(np.min(seg)) ** 2
        n_chunk = params.regrid_every
        if record_every > 0:
            n_chunk = min(n_chunk, max(1, int((next_record - t) / dt) + 1))
        n_chunk = min(n_chunk, max(1, int((t_stop - t) / dt) + 1))
        status, steps = _kernels.flow2_chunk(
            work.xi, work.phi, n_chunk, dt, params.normalized, chi2pi, target_area
        )
        t += steps * dt
        if status != 0:
            raise ExtinctionError(t)
        seg = np.diff(work.xi)
        if float(np.max(seg)) > params.regrid_ratio * float(np.min(seg)):
            work = regrid(work)
        if record_every > 0 and t >= next_record:
            rows.append(
                FlowSummary(t, area(work), gauss_bonnet(work), curvature_deviation(work))
            )
            next_record += record_every
        if stop_when_converged and curvature_deviation(work) < params.tol:
            break
    rows.append(
        FlowSummary(t, area(work), gauss_bonnet(work), curvature_deviation(work))
    )
    return work, t, rows


# --- soliton machinery -----------------------------------------------------------


def soliton_fit(p: RotProfile) -> tuple[float, float, float]:
    """Least-squares fit of K = lam - C phi' and the sup-norm residual.

    The shrinking-soliton identity K g + grad^2 f = lam g reduces under
    rotational symmetry (with f' = C phi) to K + C phi' = lam pointwise, in
    both the radial and angular components, so the tensor residual sup-norm
    equals sup |K + C phi' - lam|.  Tip neighborhoods are excluded from the
    fit window because K there is one-sided extrapolation.
    """
    K = gauss_curvature(p)
    dphi = np.gradient(p.phi, p.xi, edge_order=2)
    lo, hi = 3, p.xi.size - 3
    A = np.column_stack([-dphi[lo:hi], np.ones(hi - lo)])
    sol, *_ = np.linalg.lstsq(A, K[lo:hi], rcond=None)
    C, lam = float(sol[0]), float(sol[1])
    residual = float(np.max(np.abs(K[lo:hi] + C * dphi[lo:hi] - lam)))
    return residual, C, lam


def soliton_shoot(k: int, lam: float = 0.5, n: int = 2000) -> RotProfile:
    """Shooting solution of phi'' = C phi phi' - lam phi from the smooth pole.

    Bisection finds the C whose arrival slope at the far zero of phi matches
    the cone condition phi' = -1/k; C = 0 recovers the round sphere (k = 1).
    """
    if k < 1:
        raise ValueError("cone order must be >= 1")

    def arrival(C):
        return _shoot_profile(C, lam)[2]

    # arrival slope is monotone in C: C = 0 lands at -1 (round sphere) and
    # C -> -infinity flattens the arrival toward 0, so cone targets -1/k with
    # k >= 2 bracket on the negative side
    target = -1.0 / k
    if k == 1:
        c_star = 0.0
    else:
        lo, hi = -1.0, 0.0
        fhi = arrival(hi) - target
        flo = arrival(lo) - target
        tries = 0
        while flo * fhi > 0:
            lo *= 2.0
            flo = arrival(lo) - target
            tries += 1
            if tries > 60:
                raise RuntimeError("bracketing failure for the soliton shooting")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = arrival(mid) - target
            if flo * fm <= 0:
                hi, fhi = mid, fm
            else:
                lo, flo = mid, fm
            if hi - lo < 1e-15:
                break
        c_star = 0.5 * (lo + hi)
    xs, phis, _ = _shoot_profile(c_star, lam, n_out=n)
    phis[0] = 0.0
    phis[-1] = 0.0
    return RotProfile(xs, phis, 1, k)


def _shoot_profile(C, lam, n_out: int | None = None):
    """Integrate the soliton equation from a series start at the smooth pole
    to the first zero of phi; returns (xi, phi, arrival_slope)."""

    def rhs(x, y):
        return [y[1], C * y[0] * y[1] - lam * y[0]]

    eps = 1e-8
    y0 = [eps + (C - lam) * eps**3 / 6.0, 1.0 + (C - lam) * eps**2 / 2.0]

    def hit_zero(x, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1.0
    sol = solve_ivp(
        rhs,
        (eps, 50.0),
        y0,
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
        events=hit_zero,
        max_step=0.05,
    )
    if not sol.t_events[0].size:
        raise RuntimeError("soliton shooting never returned to zero")
    L = float(sol.t_events[0][0])
    slope = float(sol.y_events[0][0][1])
    if n_out is None:
        return None, None, slope
    xs = np.linspace(0.0, L, n_out)
    phis = np.empty(n_out)
    phis[1:] = sol.sol(xs[1:])[0]
    phis[0] = 0.0
    return xs, phis, slope


def rescale_metric(p: RotProfile, c: float) -> RotProfile:
    """Homothety g -> c^2 g: lengths scale by c."""
    return RotProfile(c * p.xi, c * p.phi, p.cone_left, p.cone_right)


def run_to_soliton(
    k: int,
    params: Flow2Params | None = None,
    n: int = 768,
    residual_tol: float = 1e-4,
    max_time: float = 40.0,
):
    """Area-preserving flow from a teardrop seed until the soliton residual
    falls below residual_tol.  Returns (profile, residual)."""
    params = params or Flow2Params()
    work = teardrop_seed(k, n) if k >= 2 else round_sphere(n)
    target_area = area(work)
    chi2pi = 2.0 * np.pi * float(work.chi)
    t = 0.0
    residual = np.inf
    while t < max_time:
        seg = np.diff(work.xi)
        dt = params.dt_factor * float(np.min(seg)) ** 2
        status, steps = _kernels.flow2_chunk(
            work.xi, work.phi, params.regrid_every, dt, True, chi2pi, target_area
        )
        t += steps * dt
        if status != 0:
            raise ExtinctionError(t)
        seg = np.diff(work.xi)
        if float(np.max(seg)) > params.regrid_ratio * float(np.min(seg)):
            work = regrid(work)
        residual, _, _ = soliton_fit(work)
        if residual < residual_tol:
            return work, residual
    raise RuntimeError(
        "no soliton convergence within the step budget (residual %.3g)" % residual
    )


def compare_profiles(a: RotProfile, b: RotProfile) -> float:
    """Sup-norm distance of warps after normalizing both to lam = 1/2.

    Profiles are oriented with the smooth pole at xi = 0 and rescaled so the
    fitted soliton constant is 1/2, then compared on the overlap grid.
    """
    out = []
    for p in (a, b):
        if p.cone_left != 1:
            p = RotProfile(p.xi[-1] - p.xi[::-1], p.phi[::-1], p.cone_right, p.cone_left)
        _, _, lam = soliton_fit(p)
        out.append(rescale_metric(p, float(np.sqrt(2.0 * lam))))
    a, b = out
    L = min(a.xi[-1], b.xi[-1])
    grid = np.linspace(0.0, L, 1500)
    fa = PchipInterpolator(a.xi, a.phi)(grid)
    fb = PchipInterpolator(b.xi, b.phi)(grid)
    return float(np.max(np.abs(fa - fb)))
