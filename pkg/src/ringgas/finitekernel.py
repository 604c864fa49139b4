"""Finite-n correlation kernel of the radially symmetric ensembles and its
rescaled correlation functions.

The kernel is the reproducing kernel of analytic polynomials of degree < n
under the effective radial weight,

    K(zeta, eta) = sum_{j<n} (zeta conj(eta))^j e^{-n(V(zeta)+V(eta))/2} / ||z^j||^2,

evaluated in log-magnitude plus phase form so that thin-annulus weights never
overflow.  Rescaled quantities zoom at the annulus (or at a hard wall) with
the mean interpoint spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .potentials import (
    DomainError,
    EnsembleSpec,
    cut_radius,
    effective_potential,
    integration_domain,
)
from .radialnorms import NormTable, _panel_nodes, gaussian_scale, norm_table

_LOG_CUTOFF = 40.0  # terms this far below the max are dropped


@dataclass(frozen=True)
class KernelContext:
    """Immutable bundle of an ensemble, its norm table, and the zoom frame."""
    spec: EnsembleSpec
    table: NormTable
    alpha: float  # zoom point on the positive real axis
    gamma: float  # inverse mean spacing; rescaled coords are z = gamma*(zeta - alpha)

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError(f"need gamma > 0, got {self.gamma}")


def kernel_context(spec: EnsembleSpec, table: NormTable | None = None) -> KernelContext:
    """Build the zoom frame: at the annulus (alpha = 1, gamma = n / rho for
    the built-in families) or, for a one-sided hard wall, at the wall radius
    with the spacing from the quadratic mean-spacing balance there."""
    if table is None:
        table = norm_table(spec)
    pot = spec.potential
    if spec.bc.kind == "hard-disk":
        tau = spec.bc.tau
        r = cut_radius(spec, tau)
        a = pot.laplacian(r)
        b = (1.0 - tau) / r
        spacing = (-b + math.sqrt(b**2 + 4.0 * a / spec.n)) / (2.0 * a)
        return KernelContext(spec, table, alpha=r, gamma=1.0 / spacing)
    gamma = math.sqrt(spec.n * pot.laplacian(1.0))
    return KernelContext(spec, table, alpha=1.0, gamma=gamma)


# ---------------------------------------------------------------------------
# kernel evaluation


def _log_weight_half(spec: EnsembleSpec, r: np.ndarray) -> np.ndarray:
    """-(n/2) V(r) with hard walls mapping to -inf."""
    with np.errstate(invalid="ignore"):
        return -0.5 * spec.n * effective_potential(spec, r)


def kernel_n(ctx: KernelContext, zeta: complex, eta: complex) -> complex:
    """The finite-n kernel at a pair of points; exact zero whenever either
    point carries zero weight (outside a hard wall)."""
    spec = ctx.spec
    rz, re = abs(zeta), abs(eta)
    if rz == 0.0:
        rz = 1e-300
    if re == 0.0:
        re = 1e-300
    lw = float(_log_weight_half(spec, np.array([rz]))[0]) + \
        float(_log_weight_half(spec, np.array([re]))[0])
    if not math.isfinite(lw):
        return 0.0 + 0.0j
    j = np.arange(spec.n)
    logmag = j * (math.log(rz) + math.log(re)) + lw - ctx.table.log_norms
    top = float(np.max(logmag))
    keep = logmag >= top - _LOG_CUTOFF
    phase = j[keep] * (np.angle(complex(zeta)) - np.angle(complex(eta)))
    total = np.sum(np.exp(logmag[keep] - top) * np.exp(1j * phase))
    return complex(math.exp(top) * total) if top < 700 else complex(np.exp(top) * total)


def _diag_density(ctx: KernelContext, radii: np.ndarray) -> np.ndarray:
    """K(r, r) on an array of radii, vectorized over points and degrees."""
    spec = ctx.spec
    r = np.maximum(np.asarray(radii, dtype=float), 1e-300)
    lw = 2.0 * _log_weight_half(spec, r)
    j = np.arange(spec.n)
    out = np.empty(r.shape, dtype=float)
    chunk = max(1, int(4e6 / spec.n))
    with np.errstate(divide="ignore", invalid="ignore"):
        logr2 = 2.0 * np.log(r)
        for s in range(0, r.size, chunk):
            sl = slice(s, s + chunk)
            mat = logr2[sl, None] * j[None, :] - ctx.table.log_norms[None, :]
            out[sl] = special.logsumexp(mat, axis=1) + lw[sl]
    vals = np.exp(out)
    vals[~np.isfinite(lw)] = 0.0
    return vals


def rho1_rescaled(ctx: KernelContext, z: complex) -> float:
    """Rescaled 1-point function at z in zoom coordinates: gamma^-2 K at
    zeta = alpha + z/gamma; depends on |zeta| only."""
    zeta = ctx.alpha + complex(z) / ctx.gamma
    return float(_diag_density(ctx, np.array([abs(zeta)]))[0]) / ctx.gamma**2


def rhok_rescaled(ctx: KernelContext, zs) -> float:
    """Rescaled k-point function: the k x k kernel determinant.  Capped at
    k = 8; correlations beyond that are out of scope."""
    zs = [complex(z) for z in zs]
    k = len(zs)
    if k > min(8, ctx.spec.n):
        raise DomainError(f"k-point functions support k <= 8 (and k <= n), got {k}")
    zetas = [ctx.alpha + z / ctx.gamma for z in zs]
    mat = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            mat[i, j] = kernel_n(ctx, zetas[i], zetas[j]) / ctx.gamma**2
    return float(np.linalg.det(mat).real)


def profile(ctx: KernelContext, x_grid) -> np.ndarray:
    """Rescaled 1-point function along the real zoom axis."""
    x = np.asarray(x_grid, dtype=float)
    radii = np.abs(ctx.alpha + x / ctx.gamma)
    return _diag_density(ctx, radii) / ctx.gamma**2


def total_mass(ctx: KernelContext) -> float:
    """integral of the 1-point intensity over the plane (radial quadrature of
    2 r K(r, r) dr); equals the point count n."""
    spec = ctx.spec
    lo, hi = integration_domain(spec)
    sigma = gaussian_scale(spec)
    pad = 64.0 * sigma
    a = max(lo, cut_radius_safe(spec, 0.0) - pad)
    b = cut_radius_safe(spec, 1.0) + pad
    if math.isfinite(hi):
        b = min(b, hi)
    nodes, weights = _panel_nodes(a, b, sigma / 3.0)
    vals = _diag_density(ctx, nodes)
    return float(np.sum(weights * 2.0 * nodes * vals))


def cut_radius_safe(spec: EnsembleSpec, tau: float) -> float:
    lo, hi = integration_domain(spec)
    try:
        r = cut_radius(spec, tau)
    except Exception:
        return lo if tau <= 0 else (hi if math.isfinite(hi) else 2.0)
    return min(max(r, lo), hi if math.isfinite(hi) else r)


def sup_error(ctx: KernelContext, limit_profile, x_grid) -> float:
    """sup over the grid of |finite-n rescaled density - limiting density|."""
    got = profile(ctx, x_grid)
    want = limit_profile.density(np.asarray(x_grid, dtype=float))
    return float(np.max(np.abs(got - np.atleast_1d(want))))
