"""Hot finite-difference kernels for the 2-d and 3-d flows.

Each kernel exists once, written in vectorized numpy; the module compiles
them with numba unless ``ORBIFLOW_NUMBA=0`` (or numba is unavailable), in
which case the pure-numpy versions run as-is.  ``BACKEND`` reports which path
is active.  benchmarks/bench_kernels.py compares the two.

Grids are Lagrangian: nodes are material points carrying the warp value, and
segment lengths contract or stretch with the metric, so the coordinate stays
arc length.  Tips keep warp zero; curvature at tips is one-sided quadratic
extrapolation from the three nearest interior nodes.
"""

from __future__ import annotations

import os

import numpy as np


def _extrap3(x0, x1, x2, x3, y1, y2, y3):
    # quadratic Lagrange extrapolation to x0
    l1 = (x0 - x2) * (x0 - x3) / ((x1 - x2) * (x1 - x3))
    l2 = (x0 - x1) * (x0 - x3) / ((x2 - x1) * (x2 - x3))
    l3 = (x0 - x1) * (x0 - x2) / ((x3 - x1) * (x3 - x2))
    return l1 * y1 + l2 * y2 + l3 * y3


def curvature2(xi, phi):
    """Gauss curvature K = -phi''/phi on the sample grid, tips extrapolated."""
    n = xi.shape[0]
    K = np.empty(n)
    h1 = xi[1:-1] - xi[:-2]
    h2 = xi[2:] - xi[1:-1]
    d2 = 2.0 * (h2 * phi[:-2] - (h1 + h2) * phi[1:-1] + h1 * phi[2:]) / (
        h1 * h2 * (h1 + h2)
    )
    K[1:-1] = -d2 / phi[1:-1]
    K[0] = _extrap3(xi[0], xi[1], xi[2], xi[3], K[1], K[2], K[3])
    K[n - 1] = _extrap3(
        xi[n - 1], xi[n - 2], xi[n - 3], xi[n - 4], K[n - 2], K[n - 3], K[n - 4]
    )
    return K


def trapz_area2(xi, phi):
    """Surface area 2*pi * integral of phi d(xi), trapezoid rule."""
    return 2.0 * np.pi * np.sum((phi[1:] + phi[:-1]) * 0.5 * (xi[1:] - xi[:-1]))


def _rates2(xi, phi, normalized, chi2pi):
    K = curvature2(xi, phi)
    if normalized:
        kbar = chi2pi / trapz_area2(xi, phi)
    else:
        kbar = 0.0
    dphi = (kbar - K) * phi
    kmid = 0.5 * (K[1:] + K[:-1])
    dseg = (kbar - kmid) * (xi[1:] - xi[:-1])
    return dphi, dseg


def flow2_chunk(xi, phi, nsteps, dt, normalized, chi2pi, target_area):
    """Advance nsteps midpoint steps in place.  Returns (status, steps).

    status 0: completed; 1: warp hit zero in the interior (extinction or
    pinch candidate), stopped before the offending step committed.
    """
    n = xi.shape[0]
    for step in range(nsteps):
        dphi1, dseg1 = _rates2(xi, phi, normalized, chi2pi)
        seg = xi[1:] - xi[:-1]
        phi_h = phi + 0.5 * dt * dphi1
        seg_h = seg + 0.5 * dt * dseg1
        phi_h[0] = 0.0
        phi_h[n - 1] = 0.0
        if np.min(phi_h[1:-1]) <= 0.0 or np.min(seg_h) <= 0.0:
            return 1, step
        xi_h = np.empty(n)
        xi_h[0] = 0.0
        xi_h[1:] = np.cumsum(seg_h)
        dphi2, dseg2 = _rates2(xi_h, phi_h, normalized, chi2pi)
        phi_new = phi + dt * dphi2
        seg_new = seg + dt * dseg2
        phi_new[0] = 0.0
        phi_new[n - 1] = 0.0
        if np.min(phi_new[1:-1]) <= 0.0 or np.min(seg_new) <= 0.0:
            return 1, step
        phi[:] = phi_new
        xi[0] = 0.0
        xi[1:] = np.cumsum(seg_new)
        if normalized:
            # project back to the target area; a homothety, so curvature
            # statistics and the Gauss-Bonnet integral are unchanged
            c = np.sqrt(target_area / trapz_area2(xi, phi))
            xi *= c
            phi *= c
    return 0, nsteps


def _onesided_d1(x0, x1, x2, y0, y1, y2):
    # first derivative at x0 from a quadratic through three nodes
    return (
        y0 * (1.0 / (x0 - x1) + 1.0 / (x0 - x2))
        + y1 * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (x0 - x1) / ((x2 - x0) * (x2 - x1))
    )


def curvature3(s, psi, left_cap, right_cap):
    """Sectional curvatures of ds^2 + psi^2 g_cross.

    Radial planes: K_rad = -psi''/psi, tips extrapolated.  Spherical planes:
    K_sph = (1 - psi'^2)/psi^2, evaluated through the integrated identity
    (1 - psi'^2)(s) = (1 - psi'^2)(end) + int K_rad d(psi^2) from the nearer
    end, which stays second-order accurate where psi -> 0 (the direct ratio
    is 0/0 at a cap and loses two orders).  Cap ends seed the integral with
    zero; boundary ends seed it with a one-sided derivative.
    """
    n = s.shape[0]
    krad = np.empty(n)
    ksph = np.empty(n)
    h1 = s[1:-1] - s[:-2]
    h2 = s[2:] - s[1:-1]
    denom = h1 * h2 * (h1 + h2)
    d2 = 2.0 * (h2 * psi[:-2] - (h1 + h2) * psi[1:-1] + h1 * psi[2:]) / denom
    krad[1:-1] = -d2 / psi[1:-1]
    krad[0] = _extrap3(s[0], s[1], s[2], s[3], krad[1], krad[2], krad[3])
    krad[n - 1] = _extrap3(
        s[n - 1], s[n - 2], s[n - 3], s[n - 4], krad[n - 2], krad[n - 3], krad[n - 4]
    )

    psi2 = psi * psi
    kmid = 0.5 * (krad[1:] + krad[:-1])
    dN = 2.0 * kmid * 0.5 * (psi2[1:] - psi2[:-1])

    if left_cap:
        n_left = 0.0
    else:
        d10 = _onesided_d1(s[0], s[1], s[2], psi[0], psi[1], psi[2])
        n_left = 1.0 - d10 * d10
    if right_cap:
        n_right = 0.0
    else:
        d1n = _onesided_d1(
            s[n - 1], s[n - 2], s[n - 3], psi[n - 1], psi[n - 2], psi[n - 3]
        )
        n_right = 1.0 - d1n * d1n

    mid = n // 2
    acc = n_left
    for i in range(mid + 1):
        if i > 0:
            acc += dN[i - 1]
        if psi[i] > 0.0:
            ksph[i] = acc / psi2[i]
    acc = n_right
    for i in range(n - 1, mid, -1):
        if i < n - 1:
            acc -= dN[i]
        if psi[i] > 0.0:
            ksph[i] = acc / psi2[i]
    # cap tips: the spherical curvature limits to the radial one
    if left_cap:
        ksph[0] = krad[0]
    if right_cap:
        ksph[n - 1] = krad[n - 1]
    return krad, ksph


def _rates3(s, psi, left_cap, right_cap):
    krad, ksph = curvature3(s, psi, left_cap, right_cap)
    dpsi = -(krad + ksph) * psi
    if left_cap:
        dpsi[0] = 0.0
    if right_cap:
        dpsi[s.shape[0] - 1] = 0.0
    kmid = 0.5 * (krad[1:] + krad[:-1])
    dseg = -2.0 * kmid * (s[1:] - s[:-1])
    return dpsi, dseg, krad, ksph


def flow3_chunk(s, psi, left_cap, right_cap, nsteps, dt_factor, t_start, t_stop, r_stop):
    """Advance up to nsteps adaptive midpoint steps in place.

    dt = dt_factor * (min ds)^2 / (1 + max|Rm| (min ds)^2), clamped to land
    exactly on t_stop.  Returns (status, steps, t):
    status 0 reached t_stop, 1 warp hit zero, 2 scalar curvature reached
    r_stop, 3 step budget exhausted.
    """
    n = s.shape[0]
    t = t_start
    for step in range(nsteps):
        if t >= t_stop:
            return 0, step, t
        dpsi1, dseg1, krad, ksph = _rates3(s, psi, left_cap, right_cap)
        rmax = max(np.max(np.abs(krad)), np.max(np.abs(ksph)))
        rscal = 4.0 * krad + 2.0 * ksph
        if np.max(rscal) >= r_stop:
            return 2, step, t
        ds_min = np.min(s[1:] - s[:-1])
        dt = dt_factor * ds_min * ds_min / (1.0 + rmax * ds_min * ds_min)
        if t + dt > t_stop:
            dt = t_stop - t
        seg = s[1:] - s[:-1]
        psi_h = psi + 0.5 * dt * dpsi1
        seg_h = seg + 0.5 * dt * dseg1
        if np.min(psi_h[1:-1]) <= 0.0 or np.min(seg_h) <= 0.0:
            return 1, step, t
        s_h = np.empty(n)
        s_h[0] = 0.0
        s_h[1:] = np.cumsum(seg_h)
        dpsi2, dseg2, krad, ksph = _rates3(s_h, psi_h, left_cap, right_cap)
        psi_new = psi + dt * dpsi2
        seg_new = seg + dt * dseg2
        if np.min(psi_new[1:-1]) <= 0.0 or np.min(seg_new) <= 0.0:
            return 1, step, t
        psi[:] = psi_new
        s[0] = 0.0
        s[1:] = np.cumsum(seg_new)
        t += dt
    if t >= t_stop:
        return 0, nsteps, t
    return 3, nsteps, t


BACKEND = "numpy"

if os.environ.get("ORBIFLOW_NUMBA", "1") != "0":
    try:
        from numba import njit

        _extrap3 = njit(cache=True)(_extrap3)
        _onesided_d1 = njit(cache=True)(_onesided_d1)
        curvature2 = njit(cache=True)(curvature2)
        trapz_area2 = njit(cache=True)(trapz_area2)
        _rates2 = njit(cache=True)(_rates2)
        flow2_chunk = njit(cache=True)(flow2_chunk)
        curvature3 = njit(cache=True)(curvature3)
        _rates3 = njit(cache=True)(_rates3)
        flow3_chunk = njit(cache=True)(flow3_chunk)
        BACKEND = "numba"
    except ImportError:  # pragma: no cover
        pass
