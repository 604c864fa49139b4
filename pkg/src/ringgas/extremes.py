"""Exact laws of the extreme moduli.

For radially symmetric weights the ordered moduli are distributed as
independent radii, one per monomial degree, so the maximal and minimal
modulus have closed product-form distribution functions.  This module
evaluates those products exactly and provides the centering/scaling
constants under which they converge to the Gumbel law (finite confinement)
or to the exponential law (hard outer wall).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import limits
from .potentials import (
    DomainError,
    EnsembleSpec,
    UnsupportedError,
    droplet_radii,
    effective_potential,
    integration_domain,
)
from .radialnorms import NormTable, _kinks, _panel_nodes, _pivot_radius, gaussian_scale


class ConsistencyError(Exception):
    """A numerically impossible intermediate value (for example a per-degree
    tail mass above 1), signalling a quadrature inconsistency."""


# ---------------------------------------------------------------------------
# per-degree tail masses


def _segment_masses(spec: EnsembleSpec, table: NormTable,
                    edges: np.ndarray) -> np.ndarray:
    """Per-degree probability mass of every segment between consecutive
    edges: entry (i, j) = integral over [edges_i, edges_i+1] of the degree-j
    modulus density.  One shared quadrature pass serves all cut radii."""
    n = spec.n
    sigma = gaussian_scale(spec)
    node_parts, weight_parts, bounds = [], [], [0]
    for a, b in zip(edges[:-1], edges[1:]):
        nd, wt = _panel_nodes(a, b, sigma / 2.0, breakpoints=_kinks(spec))
        node_parts.append(nd)
        weight_parts.append(wt)
        bounds.append(bounds[-1] + nd.size)
    nodes = np.concatenate(node_parts)
    weights = np.concatenate(weight_parts)
    starts = np.array(bounds[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        base = math.log(2.0) + np.log(nodes) + np.log(weights) \
            - n * effective_potential(spec, nodes)
        t = 2.0 * np.log(nodes)
    base = np.where(np.isfinite(base), base, -np.inf)

    j = np.arange(n)
    # coarse bound (every 16th node) to skip degrees with negligible mass
    idx = np.unique(np.r_[0:nodes.size:16, nodes.size - 1])
    coarse = base[idx] - np.log(weights[idx]) + math.log(max(edges[-1] - edges[0], 1e-300))
    bound = np.max(coarse[None, :] + j[:, None] * t[idx][None, :], axis=1) \
        + 3.0 - table.log_norms
    keep = bound > -60.0

    out = np.zeros((edges.size - 1, n))
    js = j[keep]
    if js.size == 0:
        return out
    chunk = max(1, int(2e7 / max(nodes.size, 1)))
    for s in range(0, js.size, chunk):
        sl = js[s:s + chunk]
        # every term is a sub-probability, so plain exp cannot overflow
        mat = np.exp(base[None, :] + sl[:, None] * t[None, :]
                     - table.log_norms[sl, None])
        out[:, sl] = np.add.reduceat(mat, starts, axis=1).T
    return out


def _tail_masses(spec: EnsembleSpec, table: NormTable, cuts: np.ndarray,
                 side: str) -> np.ndarray:
    """Row i = per-degree mass outside ('outer') or inside ('inner') the
    circle of radius cuts[i]."""
    order = np.argsort(cuts)
    if np.any(order != np.arange(cuts.size)):
        out = np.empty((cuts.size, spec.n))
        out[order] = _tail_masses(spec, table, cuts[order], side)
        return out
    lo, hi = integration_domain(spec)
    if side == "outer":
        far = hi if math.isfinite(hi) else _outer_bound(spec)
        inner_edge = max(lo, min(float(cuts[0]), far))
        edges = np.unique(np.r_[inner_edge, np.clip(cuts, inner_edge, far), far])
        seg = _segment_masses(spec, table, edges)
        suffix = np.cumsum(seg[::-1], axis=0)[::-1]
        pos = np.searchsorted(edges, np.clip(cuts, inner_edge, far))
        return np.where((pos < suffix.shape[0])[:, None],
                        suffix[np.minimum(pos, suffix.shape[0] - 1)], 0.0)
    if side == "inner":
        near = max(lo, min(float(cuts[0]), _pivot_radius(spec, 0))
                   - 128.0 * gaussian_scale(spec))
        far = min(float(cuts[-1]), hi) if math.isfinite(hi) else float(cuts[-1])
        edges = np.unique(np.r_[near, np.clip(cuts, near, far), far])
        seg = _segment_masses(spec, table, edges)
        prefix = np.cumsum(seg, axis=0)
        pos = np.searchsorted(edges, np.clip(cuts, near, far)) - 1
        return np.where((pos >= 0)[:, None],
                        prefix[np.maximum(pos, 0)], 0.0)
    raise DomainError(f"unknown side {side!r}")


def _outer_bound(spec: EnsembleSpec) -> float:
    lo, hi = integration_domain(spec)
    if math.isfinite(hi):
        return hi
    return _pivot_radius(spec, spec.n) + 128.0 * gaussian_scale(spec)


def _accumulate(masses: np.ndarray) -> np.ndarray:
    """product over the degree axis of (1 - m_j), rows of cuts."""
    if np.any(masses > 1.0 + 1e-9):
        raise ConsistencyError(
            f"per-degree tail mass {float(np.max(masses))} exceeds 1: "
            "quadrature inconsistent with the cached norms")
    m = np.minimum(masses, 1.0)
    with np.errstate(divide="ignore"):
        return np.exp(np.sum(np.log1p(-m), axis=-1))


def gap_cdf_max(spec: EnsembleSpec, table: NormTable, r) -> float | np.ndarray:
    """P(max modulus <= r): the product over degrees of one minus each
    degree's mass outside the disk of radius r.  Accepts a sorted array of
    radii, sharing one quadrature pass."""
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(rr > 0):
        raise DomainError(f"need r > 0, got {r}")
    out = _accumulate(_tail_masses(spec, table, rr, "outer"))
    return float(out[0]) if np.ndim(r) == 0 else out


def gap_cdf_min(spec: EnsembleSpec, table: NormTable, r) -> float | np.ndarray:
    """P(min modulus >= r): mirror-image product with interior masses."""
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    if not np.all(rr > 0):
        raise DomainError(f"need r > 0, got {r}")
    lo, _ = integration_domain(spec)
    out = np.ones(rr.size)
    live = rr > lo
    if np.any(live):
        out[live] = _accumulate(_tail_masses(spec, table, rr[live], "inner"))
    return float(out[0]) if np.ndim(r) == 0 else out


# ---------------------------------------------------------------------------
# scaling constants


GUMBEL = "gumbel"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ScalingConstants:
    """Centering and scaling of the extreme moduli.

    regime 'gumbel' (finite confinement): max modulus ~ b_out + G/a_out and
    min modulus ~ b_in - G/a_in with G standard Gumbel.  regime 'exponential'
    (hard walls on both sides of the confinement blend): the walls are at the
    droplet edges and the rescaled gaps are exponential.
    """
    regime: str
    a_out: float = math.nan
    b_out: float = math.nan
    a_in: float = math.nan
    b_in: float = math.nan
    log_gap_out: float = math.nan  # c_n
    log_gap_in: float = math.nan   # c_n'
    wall_out: float = math.nan     # r_1
    wall_in: float = math.nan      # r_0
    slope_out: float = math.nan    # c  = 2 R_softhard(rho/4)
    slope_in: float = math.nan     # c' = 2 R_softhard(-rho/4)


def _confinement_weights(spec: EnsembleSpec) -> tuple[float, float]:
    bc = spec.bc
    if bc.kind == "free":
        return (1.0, 1.0)
    if bc.kind == "interpolated":
        return (bc.c1, bc.c2)
    raise UnsupportedError(
        f"extreme-value scaling covers free/interpolated weights only, got {bc.kind!r}")


def scaling_constants(spec: EnsembleSpec) -> ScalingConstants:
    c1, c2 = _confinement_weights(spec)
    n, rho = spec.n, spec.rho
    d = droplet_radii(spec)
    if math.isinf(c1) and math.isinf(c2):
        prof = limits.LimitProfile.soft_hard(rho)
        return ScalingConstants(
            regime=EXPONENTIAL,
            wall_out=d.r1, wall_in=d.r0,
            slope_out=2.0 * prof.density(rho / 4.0),
            slope_in=2.0 * prof.density(-rho / 4.0),
        )
    if math.isinf(c1) or math.isinf(c2):
        raise UnsupportedError(
            "mixed hard/soft confinement has no stated extreme-value law")
    cn = 2.0 * math.log(n / rho) - 2.0 * math.log(math.log(n)) \
        - 2.0 * math.log(2.0 * limits.window_mass(rho / 2.0, c1, c2, rho))
    cnp = 2.0 * math.log(n / rho) - 2.0 * math.log(math.log(n)) \
        - 2.0 * math.log(2.0 * limits.window_mass(-rho / 2.0, c1, c2, rho))
    if cn <= 0 or cnp <= 0:
        raise DomainError(
            f"n = {n} is too small for the Gumbel normalization (c_n = {cn:.3g}, "
            f"c_n' = {cnp:.3g} must be positive)")
    return ScalingConstants(
        regime=GUMBEL,
        a_out=(2.0 * n / rho) * math.sqrt(c2 * cn),
        b_out=d.r1 + (rho / (2.0 * n)) * math.sqrt(cn / c2),
        a_in=(2.0 * n / rho) * math.sqrt(c1 * cnp),
        b_in=d.r0 - (rho / (2.0 * n)) * math.sqrt(cnp / c1),
        log_gap_out=cn, log_gap_in=cnp,
        wall_out=d.r1, wall_in=d.r0,
    )


def max_radius(spec: EnsembleSpec, x: float,
               sc: ScalingConstants | None = None) -> float:
    """Radius r with {max modulus <= r} = {rescaled max <= x}."""
    sc = sc or scaling_constants(spec)
    if sc.regime == GUMBEL:
        return sc.b_out + x / sc.a_out
    if x > 0:
        raise DomainError("the hard-wall max-modulus law is supported on x <= 0")
    return sc.wall_out + spec.rho**2 * x / (sc.slope_out * spec.n**2)


def min_radius(spec: EnsembleSpec, x: float,
               sc: ScalingConstants | None = None) -> float:
    sc = sc or scaling_constants(spec)
    if sc.regime == GUMBEL:
        return sc.b_in - x / sc.a_in
    if x > 0:
        raise DomainError("the hard-wall min-modulus law is supported on x <= 0")
    return sc.wall_in - spec.rho**2 * x / (sc.slope_in * spec.n**2)


def omega_cdf(spec: EnsembleSpec, table: NormTable, x: float) -> float:
    """P(rescaled max modulus <= x): exact, via the gap product."""
    return gap_cdf_max(spec, table, max_radius(spec, x))


def u_cdf(spec: EnsembleSpec, table: NormTable, x: float) -> float:
    """P(rescaled min modulus <= x): exact, via the mirror gap product."""
    return gap_cdf_min(spec, table, min_radius(spec, x))


def expected_exceedances(spec: EnsembleSpec, table: NormTable, x: float) -> float:
    """Sum over degrees of the outer tail masses beyond the Gumbel radius;
    tends to e^-x, and -log omega_cdf agrees with it to second order."""
    sc = scaling_constants(spec)
    if sc.regime != GUMBEL:
        raise UnsupportedError("exceedance sums are defined for the Gumbel regime")
    r = max_radius(spec, x, sc)
    return float(np.sum(_tail_masses(spec, table, np.array([r]), "outer")))


def reference_law(regime: str, x):
    x = np.asarray(x, dtype=float)
    if regime == GUMBEL:
        out = np.exp(-np.exp(-x))
    elif regime == EXPONENTIAL:
        out = np.where(x <= 0, np.exp(np.minimum(x, 0.0)), 1.0)
    else:
        raise DomainError(f"unknown regime {regime!r}")
    return out if out.shape else float(out)


@dataclass(frozen=True)
class GapCurve:
    """Exact extreme-modulus CDFs on a grid, next to the limiting law."""
    x: np.ndarray
    max_cdf: np.ndarray   # P(rescaled max <= x)
    min_cdf: np.ndarray   # P(rescaled min <= x)
    reference: np.ndarray
    regime: str

    @property
    def sup_distance_max(self) -> float:
        return float(np.max(np.abs(self.max_cdf - self.reference)))

    @property
    def sup_distance_min(self) -> float:
        return float(np.max(np.abs(self.min_cdf - self.reference)))


def gap_curve(spec: EnsembleSpec, table: NormTable, xs) -> GapCurve:
    sc = scaling_constants(spec)
    xs = np.sort(np.asarray(xs, dtype=float))
    r_max = np.array([max_radius(spec, float(x), sc) for x in xs])
    r_min = np.array([min_radius(spec, float(x), sc) for x in xs])
    mx = np.asarray(gap_cdf_max(spec, table, r_max))
    # min radii decrease in x; evaluate on the sorted radii then undo
    order = np.argsort(r_min)
    mn = np.empty_like(r_min)
    mn[order] = np.asarray(gap_cdf_min(spec, table, r_min[order]))
    return GapCurve(x=xs, max_cdf=mx, min_cdf=mn,
                    reference=np.atleast_1d(reference_law(sc.regime, xs)),
                    regime=sc.regime)
