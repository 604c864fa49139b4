"""Numerical verification of the Ward identities satisfied by the limiting
1-point functions.

Each limiting intensity R obeys the integro-differential identity

    dbar C(z) = R(z) - kappa - (1/4) Lap log R(z) + indicator corrections,

where C(z) = (1/R(z)) integral of |K(z,w)|^2 / (z - w) over the plane (area
measure divided by pi), kappa is 1 except for the wall-rescaled variants, and
the confinement blend contributes (1 - c) indicator terms beyond the walls.
This module evaluates C by polar quadrature around z, applies second-order
finite differences, and reports the residual field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import limits
from .limits import LimitProfile
from .potentials import DomainError, UnsupportedError

_MIN_DENSITY = 1e-10


def kernel_square_modulus(profile: LimitProfile, z: complex, w) -> np.ndarray:
    """|K(z, w)|^2 over an array of w."""
    return np.abs(limits.limit_kernel(profile, z, w)) ** 2


def cauchy_transform(profile: LimitProfile, z: complex, L: float = 8.0,
                     n_theta: int = 128, radial_panel: float = 0.25,
                     tail_factor: float = 8.0) -> complex:
    """C(z) = (1/R(z)) integral of |K(z,w)|^2/(z - w), area measure d^2w/pi,
    by polar quadrature around z (the Jacobian cancels the singularity).

    The disk |w - z| <= L is resolved with fine panels.  Along the band the
    squared kernel decays only like 1/|w - z|^2 (sine-kernel tail), not like
    a Gaussian, so a geometric far-field extension out to tail_factor * L is
    added; without it the truncation bias dominates the Ward residual.
    """
    x = float(np.real(z))
    r0 = profile.density(x)
    if not r0 > _MIN_DENSITY:
        raise DomainError(f"1-point function too small at Re z = {x} "
                          f"({r0!r}); Cauchy transform undefined there")
    xg, wg = np.polynomial.legendre.leggauss(16)
    rho = profile.rho if math.isfinite(profile.rho) else 1.0
    # transverse reach of the squared kernel around the band, with margin
    reach = abs(x) + rho + 10.0

    edges = list(np.linspace(0.0, L, max(4, int(math.ceil(L / radial_panel))) + 1))
    while edges[-1] < tail_factor * L:
        edges.append(min(edges[-1] * 1.4, tail_factor * L))

    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (a + b) + 0.5 * (b - a) * xg
        ws = 0.5 * (b - a) * wg
        if reach >= 0.95 * a:
            # whole circle; the band factor oscillates in theta at frequency
            # up to s * rho / 2, so scale the periodic rule with the radius
            nt = max(n_theta, 16 * int(math.ceil(b * rho / 4.0)))
            theta = 2.0 * math.pi * np.arange(nt) / nt
            phase = np.exp(1j * theta)
            w = (x + 0.0j) + s[:, None] * phase[None, :]
            ksq = kernel_square_modulus(profile, x + 0.0j, w)
            # 1/(z - w) = -e^{-i theta}/s; the polar Jacobian cancels the 1/s
            ang = ksq @ np.conj(phase) * (2.0 * math.pi / nt)
            total += np.sum(ws * ang)
        else:
            # far field: only the angular window crossing the band matters;
            # the lower window is the complex conjugate of the upper one
            delta = math.asin(min(1.0, reach / a))
            tg, tw = np.polynomial.legendre.leggauss(96)
            theta = 0.5 * math.pi + delta * tg
            tws = delta * tw
            phase = np.exp(1j * theta)
            w = (x + 0.0j) + s[:, None] * phase[None, :]
            ksq = kernel_square_modulus(profile, x + 0.0j, w)
            ang = ksq @ (tws * np.conj(phase))
            total += 2.0 * np.real(np.sum(ws * ang))
    return complex(-total / (math.pi * r0))


def _rhs_constant(profile: LimitProfile) -> float:
    """The constant subtracted on the right-hand side: the limiting mean
    density in the zoom frame."""
    v = profile.variant
    if v in (limits.FREE, limits.SOFT_HARD, limits.INTERPOLATED,
             limits.HARD_ANNULUS, limits.HARD_DISK_OUTER):
        return 1.0
    if v == limits.HARD_DISK_RESCALED:
        return (limits.wall_spacing_scale(profile.tau, profile.rho) / profile.rho) ** 2
    if v == limits.GINIBRE_HARD:
        return 0.0
    if v == limits.GINIBRE_SOFT_HARD:
        return 1.0
    raise UnsupportedError(v)


def _indicator_terms(profile: LimitProfile, x: np.ndarray) -> np.ndarray:
    if profile.variant != limits.INTERPOLATED:
        return np.zeros_like(x)
    out = np.zeros_like(x)
    if not math.isinf(profile.c1):
        out += (1.0 - profile.c1) * (x < -profile.rho / 4.0)
    if not math.isinf(profile.c2):
        out += (1.0 - profile.c2) * (x > profile.rho / 4.0)
    return out


def _excluded_lines(profile: LimitProfile) -> list[float]:
    lines = [b for b in profile.support() if math.isfinite(b)]
    if profile.variant == limits.INTERPOLATED:
        lines += [-profile.rho / 4.0, profile.rho / 4.0]
    return lines


@dataclass(frozen=True)
class WardReport:
    variant: str
    x: np.ndarray
    y: np.ndarray
    residual: np.ndarray       # shape (len(y), len(x)), complex
    max_abs: float
    h: float
    L: float
    n_excluded: int


def ward_residual(profile: LimitProfile, x_grid, y_grid, h: float = 0.02,
                  L: float = 8.0, include_indicator_terms: bool = True,
                  n_theta: int = 128) -> WardReport:
    """Residual field dbar C - RHS on the grid.  Points within 3h of a wall
    or of an indicator line are excluded (the identity is stated away from
    them) and reported in the count."""
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(y_grid, dtype=float)
    lines = _excluded_lines(profile)
    ok = np.ones(x.size, dtype=bool)
    for line in lines:
        ok &= np.abs(x - line) >= 3.0 * h
    # the Laplacian stencil must stay in the region of positive density
    for off in (-h, 0.0, h):
        ok &= np.atleast_1d(profile.density(x + off)) > _MIN_DENSITY
    xs = x[ok]

    # every field depends on Re z only; evaluate per unique x and broadcast
    c_mid = np.array([cauchy_transform(profile, xv, L, n_theta) for xv in xs])
    c_lo = np.array([cauchy_transform(profile, xv - h, L, n_theta) for xv in xs])
    c_hi = np.array([cauchy_transform(profile, xv + h, L, n_theta) for xv in xs])
    # dbar = (d/dx + i d/dy)/2; C is y-independent by radial symmetry
    dbar_c = 0.5 * (c_hi - c_lo) / (2.0 * h)

    logr = {off: np.log(np.atleast_1d(profile.density(xs + off)))
            for off in (-h, 0.0, h)}
    lap_log_r = 0.25 * (logr[h] - 2.0 * logr[0.0] + logr[-h]) / h**2

    rhs = np.atleast_1d(profile.density(xs)) - _rhs_constant(profile) - lap_log_r
    if include_indicator_terms:
        rhs = rhs + _indicator_terms(profile, xs)
    res_line = dbar_c - rhs

    residual = np.full((y.size, x.size), np.nan + 0j)
    residual[:, ok] = res_line[None, :]
    max_abs = float(np.max(np.abs(res_line))) if res_line.size else math.nan
    return WardReport(variant=profile.variant, x=x, y=y, residual=residual,
                      max_abs=max_abs, h=h, L=L,
                      n_excluded=int(x.size - xs.size))
