"""Closed-form limiting 1-point functions and kernels of the thin-annulus
ensembles, for every boundary condition, plus the circular (sine-kernel)
and wide-band (Ginibre hard-edge) degenerations.

All profiles are functions of x = Re z only; the limiting point fields are
translation invariant along the imaginary direction.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special

from .potentials import DomainError, UnsupportedError

SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# building blocks


def confinement_shift(t, c1: float, c2: float, rho: float):
    """Quadratic exponent picked up outside the band [-rho/2, rho/2] under a
    confinement blend with weights (c1, c2); zero inside the band and zero
    everywhere when c1 = c2 = 1.

    Infinite weights contribute nothing here: callers replace exp(shift) by
    a hard indicator on the corresponding side.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=float)
    if not math.isinf(c1):
        out += 0.5 * (1.0 - c1) * np.minimum(t + rho / 2.0, 0.0) ** 2
    if not math.isinf(c2):
        out += 0.5 * (1.0 - c2) * np.maximum(t - rho / 2.0, 0.0) ** 2
    return out if out.shape else float(out)


def window_mass(xi, c1: float, c2: float, rho: float):
    """Total mass of a unit Gaussian centered at xi, reweighted outside the
    band by the confinement blend.  Closed form: the in-band piece plus one
    rescaled Gaussian tail per finite side; an infinite weight truncates its
    side entirely.  Equals sqrt(2*pi) for all xi when c1 = c2 = 1.
    """
    xi = np.asarray(xi, dtype=float)
    h = rho / 2.0
    out = SQRT2PI * (special.ndtr(h - xi) - special.ndtr(-h - xi))
    if not math.isinf(c1):
        beta = xi + h
        out = out + (
            math.sqrt(2.0 * math.pi / c1)
            * np.exp(-0.5 * beta**2 * (c1 - 1.0) / c1)
            * special.ndtr(-beta / math.sqrt(c1))
        )
    if not math.isinf(c2):
        alpha = xi - h
        out = out + (
            math.sqrt(2.0 * math.pi / c2)
            * np.exp(-0.5 * alpha**2 * (c2 - 1.0) / c2)
            * special.ndtr(alpha / math.sqrt(c2))
        )
    return out if out.shape else float(out)


def band_integral(u, c1: float, c2: float, rho: float):
    """Integral over the band of a unit Gaussian at u divided by the window
    mass; the core of every interpolated-confinement profile."""
    h = rho / 2.0

    def one(uv: float) -> float:
        val, _ = integrate.quad(
            lambda xi: math.exp(-0.5 * (uv - xi) ** 2) / window_mass(xi, c1, c2, rho),
            -h, h, epsabs=1e-13, epsrel=1e-11, limit=200,
        )
        return val

    u = np.asarray(u, dtype=float)
    if u.shape:
        return np.array([one(float(v)) for v in u])
    return one(float(u))


def wall_spacing_scale(tau: float, rho: float) -> float:
    """Rescaling constant for the one-sided hard wall at r_tau; continuous and
    increasing in tau, equal to rho at tau = 1."""
    if rho <= 0:
        raise DomainError(f"need rho > 0, got {rho}")
    return 1.0 / (math.sqrt((1.0 - tau) ** 2 / 4.0 + 1.0 / rho**2) + (1.0 - tau) / 2.0)


# ---------------------------------------------------------------------------
# stable helpers for hard-wall denominators


def _log_window_gauss(a: float, b: float, xi):
    """log of integral over [a, b] of exp(-(t-xi)^2/2), stable for xi far
    outside [a, b]."""
    xi = np.asarray(xi, dtype=float)
    # integral = sqrt(2 pi) * (ndtr(b - xi) - ndtr(a - xi)); do the difference
    # in log space from the side that avoids cancellation
    hi = np.asarray(special.log_ndtr(b - xi), dtype=float)
    lo = np.asarray(special.log_ndtr(a - xi), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = hi + np.log1p(-np.exp(np.minimum(lo - hi, -1e-300)))
    # reflected form when both tails are on the right of the window
    hi_r = np.asarray(special.log_ndtr(xi - a), dtype=float)
    lo_r = np.asarray(special.log_ndtr(xi - b), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff_r = hi_r + np.log1p(-np.exp(np.minimum(lo_r - hi_r, -1e-300)))
    out = np.where(xi <= 0.5 * (a + b), diff, diff_r) + 0.5 * math.log(2.0 * math.pi)
    return out if out.shape else float(out)


def _half_line_gauss_ratio(x, xi):
    """exp(-(2x - xi)^2 / 2) / integral_{-inf}^0 exp(-(t - xi)^2 / 2) dt,
    stable for xi >> 0 where the denominator underflows."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    small = xi < 5.0
    out = np.empty(np.broadcast(x, xi).shape, dtype=float)
    xb, xib = np.broadcast_arrays(x, xi)
    if np.any(small):
        den = SQRT2PI * special.ndtr(-xib[small])
        out[small] = np.exp(-0.5 * (2.0 * xb[small] - xib[small]) ** 2) / den
    big = ~small
    if np.any(big):
        # denominator = sqrt(pi/2) erfcx(xi/sqrt2) exp(-xi^2/2)
        out[big] = (
            math.sqrt(2.0 / math.pi)
            * np.exp(4.0 * xb[big] * xib[big] / 2.0 - 2.0 * xb[big] ** 2)
            / special.erfcx(xib[big] / math.sqrt(2.0))
        )
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# limit profiles


FREE = "free"
SOFT_HARD = "soft-hard"
INTERPOLATED = "interpolated"
HARD_ANNULUS = "hard-annulus"
HARD_DISK_OUTER = "hard-disk-outer"
HARD_DISK_RESCALED = "hard-disk-rescaled"
GINIBRE_SOFT_HARD = "ginibre-soft-hard"
GINIBRE_HARD = "ginibre-hard"

VARIANTS = (FREE, SOFT_HARD, INTERPOLATED, HARD_ANNULUS, HARD_DISK_OUTER,
            HARD_DISK_RESCALED, GINIBRE_SOFT_HARD, GINIBRE_HARD)


@dataclass(frozen=True)
class LimitProfile:
    variant: str
    rho: float = math.nan
    c1: float = 1.0
    c2: float = 1.0
    tau1: float = 0.0
    tau2: float = 1.0
    tau: float = 1.0

    # -- constructors

    @staticmethod
    def free(rho: float) -> "LimitProfile":
        return LimitProfile(variant=FREE, rho=float(rho))

    @staticmethod
    def soft_hard(rho: float) -> "LimitProfile":
        return LimitProfile(variant=SOFT_HARD, rho=float(rho), c1=math.inf, c2=math.inf)

    @staticmethod
    def interpolated(rho: float, c1: float, c2: float) -> "LimitProfile":
        if not (c1 > 0 and c2 > 0):
            raise DomainError(f"confinement weights must be positive, got {c1}, {c2}")
        return LimitProfile(variant=INTERPOLATED, rho=float(rho), c1=float(c1), c2=float(c2))

    @staticmethod
    def hard_annulus(rho: float, tau1: float, tau2: float) -> "LimitProfile":
        if not tau1 < tau2:
            raise DomainError(f"need tau1 < tau2, got {tau1}, {tau2}")
        return LimitProfile(variant=HARD_ANNULUS, rho=float(rho),
                            tau1=float(tau1), tau2=float(tau2))

    @staticmethod
    def hard_disk_outer(rho: float, tau: float) -> "LimitProfile":
        return LimitProfile(variant=HARD_DISK_OUTER, rho=float(rho), tau=float(tau))

    @staticmethod
    def hard_disk_rescaled(rho: float, tau: float) -> "LimitProfile":
        return LimitProfile(variant=HARD_DISK_RESCALED, rho=float(rho), tau=float(tau))

    @staticmethod
    def ginibre_soft_hard() -> "LimitProfile":
        return LimitProfile(variant=GINIBRE_SOFT_HARD)

    @staticmethod
    def ginibre_hard() -> "LimitProfile":
        return LimitProfile(variant=GINIBRE_HARD)

    # -- evaluation

    def support(self) -> tuple[float, float]:
        """Closure of {x : R(x) > 0}."""
        rho = self.rho
        if self.variant == FREE:
            return (-math.inf, math.inf)
        if self.variant in (SOFT_HARD,):
            return (-rho / 4.0, rho / 4.0)
        if self.variant == INTERPOLATED:
            lo = -rho / 4.0 if math.isinf(self.c1) else -math.inf
            hi = rho / 4.0 if math.isinf(self.c2) else math.inf
            return (lo, hi)
        if self.variant == HARD_ANNULUS:
            return (rho * (2.0 * self.tau1 - 1.0) / 4.0,
                    rho * (2.0 * self.tau2 - 1.0) / 4.0)
        if self.variant in (HARD_DISK_OUTER, HARD_DISK_RESCALED,
                            GINIBRE_SOFT_HARD, GINIBRE_HARD):
            return (-math.inf, 0.0)
        raise UnsupportedError(self.variant)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        out = np.atleast_1d(_density(self, np.atleast_1d(x)))
        return float(out[0]) if scalar else out


def _density(p: LimitProfile, x: np.ndarray) -> np.ndarray:
    rho = p.rho
    if p.variant == FREE:
        return special.ndtr(2.0 * x + rho / 2.0) - special.ndtr(2.0 * x - rho / 2.0)

    if p.variant in (SOFT_HARD, INTERPOLATED):
        c1 = math.inf if p.variant == SOFT_HARD else p.c1
        c2 = math.inf if p.variant == SOFT_HARD else p.c2
        lo, hi = p.support() if p.variant == SOFT_HARD else (
            -rho / 4.0 if math.isinf(c1) else -math.inf,
            rho / 4.0 if math.isinf(c2) else math.inf,
        )
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        if np.any(inside):
            xv = x[inside]
            vals = band_integral(2.0 * xv, c1, c2, rho)
            vals = vals * np.exp(confinement_shift(2.0 * xv, c1, c2, rho))
            out[inside] = vals
        return out

    if p.variant == HARD_ANNULUS:
        a = rho * (p.tau1 - 0.5)
        b = rho * (p.tau2 - 0.5)
        lo, hi = a / 2.0, b / 2.0
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)

        def one(xv: float) -> float:
            def f(xi):
                return math.exp(-0.5 * (2.0 * xv - xi) ** 2
                                - _log_window_gauss(a, b, xi))
            val, _ = integrate.quad(f, -rho / 2.0, rho / 2.0,
                                    epsabs=1e-13, epsrel=1e-11, limit=200)
            return val

        out[inside] = [one(float(v)) for v in x[inside]]
        return out

    if p.variant == HARD_DISK_OUTER:
        out = np.zeros_like(x)
        inside = x <= 0.0
        lo, hi = -rho * p.tau, rho * (1.0 - p.tau)

        def one(xv: float) -> float:
            val, _ = integrate.quad(
                lambda xi: float(_half_line_gauss_ratio(xv, xi)),
                lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400,
            )
            return val

        out[inside] = [one(float(v)) for v in x[inside]]
        return out

    if p.variant == HARD_DISK_RESCALED:
        scale = wall_spacing_scale(p.tau, rho) / rho
        base = LimitProfile.hard_disk_outer(rho, p.tau)
        return scale**2 * np.atleast_1d(base.density(scale * x))

    if p.variant == GINIBRE_SOFT_HARD:
        out = np.zeros_like(x)
        inside = x <= 0.0

        def one(xv: float) -> float:
            # same 2x zoom convention as the finite-width one-sided wall;
            # the wide-band limit is its formula with the cutoff removed
            val, _ = integrate.quad(
                lambda xi: math.exp(-0.5 * (2.0 * xv - xi) ** 2) / (SQRT2PI * special.ndtr(-xi)),
                -np.inf, 0.0, epsabs=1e-13, epsrel=1e-11, limit=400,
            )
            return val

        out[inside] = [one(float(v)) for v in x[inside]]
        return out

    if p.variant == GINIBRE_HARD:
        out = np.zeros_like(x)
        inside = x <= 0.0
        xv = x[inside]
        small = np.abs(xv) < 1e-4
        vals = np.empty_like(xv)
        xs = xv[~small]
        vals[~small] = (np.exp(2.0 * xs) * (2.0 * xs - 1.0) + 1.0) / (4.0 * xs**2)
        vals[small] = 0.5 + 2.0 * xv[small] / 3.0 + 0.5 * xv[small] ** 2
        out[inside] = vals
        return out

    raise UnsupportedError(p.variant)


def limit_density(profile: LimitProfile, x):
    return profile.density(x)


def cross_section_mass(profile: LimitProfile) -> float:
    """Integral of the profile over the real line.  Exactly rho/2 for the
    band-supported variants (free, confinement blends, two-sided hard
    walls)."""
    lo, hi = profile.support()
    rho = profile.rho
    pad = 0.0 if math.isfinite(rho) else 10.0
    a = lo if math.isfinite(lo) else -(abs(rho) if math.isfinite(rho) else 0) / 4.0 - 12.0 - pad
    b = hi if math.isfinite(hi) else (abs(rho) if math.isfinite(rho) else 0) / 4.0 + 12.0 + pad
    val, _ = integrate.quad(lambda t: float(profile.density(t)), a, b,
                            epsabs=1e-11, epsrel=1e-10, limit=400)
    return val


# ---------------------------------------------------------------------------
# limiting kernels


@functools.lru_cache(maxsize=64)
def _band_nodes(rho: float, npanels: int = 24, order: int = 16):
    """Fixed composite Gauss-Legendre rule on [-rho/2, rho/2]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-rho / 2.0, rho / 2.0, npanels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


@functools.lru_cache(maxsize=256)
def _kernel_quadrature(profile: LimitProfile):
    """Nodes, weights and reciprocal denominators for the band integral of the
    profile's kernel factor."""
    rho = profile.rho
    if profile.variant == FREE:
        nodes, weights = _band_nodes(rho)
        return nodes, weights, np.full(nodes.shape, 1.0 / SQRT2PI)
    if profile.variant in (SOFT_HARD, INTERPOLATED):
        c1 = math.inf if profile.variant == SOFT_HARD else profile.c1
        c2 = math.inf if profile.variant == SOFT_HARD else profile.c2
        nodes, weights = _band_nodes(rho)
        inv_den = 1.0 / window_mass(nodes, c1, c2, rho)
        return nodes, weights, inv_den
    if profile.variant == HARD_ANNULUS:
        a = rho * (profile.tau1 - 0.5)
        b = rho * (profile.tau2 - 0.5)
        nodes, weights = _band_nodes(rho)
        inv_den = np.exp(-_log_window_gauss(a, b, nodes))
        return nodes, weights, inv_den
    if profile.variant == HARD_DISK_OUTER:
        lo, hi = -rho * profile.tau, rho * (1.0 - profile.tau)
        xg, wg = np.polynomial.legendre.leggauss(16)
        npanels = max(24, int(math.ceil((hi - lo) / 0.5)))
        edges = np.linspace(lo, hi, npanels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        weights = (half[:, None] * wg[None, :]).ravel()
        inv_den = np.exp(-_log_window_gauss(-1e300, 0.0, nodes))
        return nodes, weights, inv_den
    raise UnsupportedError(f"no closed kernel for variant {profile.variant!r}")


def limit_kernel(profile: LimitProfile, z, w):
    """Limiting correlation kernel K(z, w): a Ginibre Gaussian cocycle times a
    Hermitian-analytic band factor.  Diagonal values equal the 1-point
    profile; points off the hard-wall support map to 0."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    scalar = z.ndim == 0 and w.ndim == 0
    z, w = np.atleast_1d(z), np.atleast_1d(w)
    z, w = np.broadcast_arrays(z, w)
    out = _limit_kernel(profile, z.astype(complex), w.astype(complex))
    return complex(out.ravel()[0]) if scalar else out


def _ginibre_gauss(z, w):
    return np.exp(z * np.conj(w) - 0.5 * np.abs(z) ** 2 - 0.5 * np.abs(w) ** 2)


def _stable_band_kernel(profile: LimitProfile, z, w):
    """Quadrature form of the kernel with the Gaussian cocycle folded into
    each node's exponent; the combined real part is never positive, so the
    evaluation cannot overflow anywhere in the plane."""
    rho = profile.rho
    nodes, weights, inv_den = _kernel_quadrature(profile)
    s = z + np.conj(w)
    head = z * np.conj(w) - 0.5 * np.abs(z) ** 2 - 0.5 * np.abs(w) ** 2
    if profile.variant == INTERPOLATED:
        head = head + 0.5 * (confinement_shift(2.0 * z.real, profile.c1, profile.c2, rho)
                             + confinement_shift(2.0 * w.real, profile.c1, profile.c2, rho))
    expo = head[..., None] - 0.5 * (s[..., None] - nodes[None, :]) ** 2
    out = np.einsum("k,...k->...", weights * inv_den, np.exp(expo))
    lo, hi = profile.support()
    inside = ((z.real >= lo) & (z.real <= hi) & (w.real >= lo) & (w.real <= hi))
    return np.where(inside, out, 0.0)


def _limit_kernel(profile: LimitProfile, z, w):
    rho = profile.rho
    s = z + np.conj(w)

    if profile.variant == FREE:
        if np.all(np.abs(s.imag) < 20.0):
            rt2 = math.sqrt(2.0)
            band = 0.5 * (special.erf((s + rho / 2.0) / rt2)
                          - special.erf((s - rho / 2.0) / rt2))
            return _ginibre_gauss(z, w) * band
        return _stable_band_kernel(profile, z, w)

    if profile.variant in (SOFT_HARD, INTERPOLATED, HARD_ANNULUS, HARD_DISK_OUTER):
        return _stable_band_kernel(profile, z, w)

    if profile.variant == HARD_DISK_RESCALED:
        scale = wall_spacing_scale(profile.tau, rho) / rho
        base = LimitProfile.hard_disk_outer(rho, profile.tau)
        return scale**2 * _limit_kernel(base, scale * z, scale * w)

    raise UnsupportedError(f"no closed kernel for variant {profile.variant!r}")


# ---------------------------------------------------------------------------
# circular limit


def sine_kernel(delta):
    """sin(d)/(pi*d) with the removable singularity filled in."""
    delta = np.asarray(delta, dtype=float)
    out = np.where(delta == 0.0, 1.0 / math.pi,
                   np.sin(np.where(delta == 0.0, 1.0, delta))
                   / (math.pi * np.where(delta == 0.0, 1.0, delta)))
    return out if out.shape else float(out)


def circular_kernel_modulus(rho: float, tau1: float, tau2: float, separations):
    """Modulus of the cocycle-stripped rescaled two-sided hard-wall kernel at
    pure-imaginary separation u - v, normalized by the transverse Gaussian
    mass so that the diagonal tends to 1/pi as rho -> 0."""
    a = rho / 2.0
    prof = LimitProfile.hard_annulus(rho, tau1, tau2)
    nodes, weights, inv_den = _kernel_quadrature(prof)
    seps = np.atleast_1d(np.asarray(separations, dtype=float))
    big_u = seps / a
    # the Gaussian cocycle e^{-U^2/2} cancels against the analytic factor's
    # e^{+U^2/2} exactly on the imaginary axis; integrate the reduced form
    vals = np.exp(1j * big_u[:, None] * nodes[None, :] - 0.5 * nodes[None, :] ** 2)
    integral = vals @ (weights * inv_den)
    out = (tau2 - tau1) / math.pi * np.abs(integral)
    return out if np.ndim(separations) else float(out[0])


def sine_limit_error(rho: float, tau1: float, tau2: float, separations) -> float:
    """Max deviation of the circular-limit kernel modulus from the sine
    kernel over the given pure-imaginary separations."""
    if not (0 < rho <= 0.2):
        raise DomainError(f"circular limit check expects 0 < rho <= 0.2, got {rho}")
    seps = np.atleast_1d(np.asarray(separations, dtype=float))
    got = circular_kernel_modulus(rho, tau1, tau2, seps)
    want = np.abs(sine_kernel(seps))
    return float(np.max(np.abs(got - want)))
