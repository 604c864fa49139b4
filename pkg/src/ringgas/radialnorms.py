"""Log-domain evaluation of the radial monomial norms

    ||z^j||^2 = integral over the radial domain of 2 r^(2j+1) exp(-n V(r)) dr

that normalize the rotation-invariant orthogonal polynomials.  Everything is
carried in log space: for thin-annulus weights the norms span thousands of
orders of magnitude across degrees.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy import special

from . import limits
from .potentials import (
    DomainError,
    EnsembleSpec,
    SolverError,
    cut_radius,
    effective_potential,
    integration_domain,
    spec_hash,
)


# ---------------------------------------------------------------------------
# generic log-domain quadrature


def _panel_nodes(lo: float, hi: float, width: float, order: int = 16,
                 breakpoints: tuple[float, ...] = ()):
    """Composite Gauss-Legendre nodes and weights on [lo, hi] with panels of
    roughly the requested width; panel edges are aligned with any interior
    breakpoints (kinks of the integrand)."""
    cuts = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]
    xg, wg = np.polynomial.legendre.leggauss(order)
    nodes_parts, weights_parts = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        npanels = max(1, int(math.ceil((b - a) / width)))
        npanels = min(npanels, 1 << 14)
        edges = np.linspace(a, b, npanels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        nodes_parts.append((mid[:, None] + half[:, None] * xg[None, :]).ravel())
        weights_parts.append((half[:, None] * wg[None, :]).ravel())
    return np.concatenate(nodes_parts), np.concatenate(weights_parts)


def log_radial_integral(log_f, lo: float, hi: float, pivot: float, sigma: float,
                        breakpoints: tuple[float, ...] = ()) -> float:
    """log of integral exp(log_f(s)) ds over [lo, hi] for a unimodal
    integrand peaked near the pivot with Gaussian scale sigma.

    The window around the pivot is widened until the integrand has decayed
    by 80 in log at both ends (or the domain is exhausted), then resolved
    with composite 16-node panels of width sigma / 2.
    """
    if not lo < hi:
        raise DomainError(f"empty integration domain [{lo}, {hi}]")
    pivot = min(max(pivot, lo), hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        peak = float(log_f(np.array([pivot]))[0])
    half = 16.0 * sigma
    for _ in range(60):
        a = max(lo, pivot - half)
        b = min(hi, pivot + half)
        with np.errstate(divide="ignore", invalid="ignore"):
            va = float(log_f(np.array([a]))[0]) if a > lo else -math.inf
            vb = float(log_f(np.array([b]))[0]) if b < hi else -math.inf
        if va < peak - 80.0 and vb < peak - 80.0:
            break
        half *= 2.0
    width = max(sigma / 2.0, (b - a) / (1 << 12))
    nodes, weights = _panel_nodes(a, b, width, breakpoints=breakpoints)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = log_f(nodes) + np.log(weights)
    return float(special.logsumexp(vals))


def log_monomial_norm(n: int, j: int, q, lo: float = 0.0, hi: float = math.inf,
                      pivot: float | None = None, sigma: float | None = None) -> float:
    """log ||z^j||^2 for an arbitrary radial weight exp(-n q(r)); the degrees
    of freedom of the engine exposed directly, mainly for cross-checking
    against weights with known closed-form norms."""

    def log_f(s):
        s = np.asarray(s, dtype=float)
        return math.log(2.0) + (2 * j + 1) * np.log(s) - n * np.asarray(q(s), dtype=float)

    if pivot is None:
        top = hi if math.isfinite(hi) else 10.0 * (abs(lo) + 1.0) + 100.0
        res = optimize.minimize_scalar(
            lambda s: -float(log_f(np.array([s]))[0]),
            bounds=(max(lo, 1e-12), top), method="bounded",
            options={"xatol": 1e-12},
        )
        pivot = float(res.x)
    if sigma is None:
        h = max(1e-6 * max(pivot, 1e-6), 1e-12)
        f0 = float(log_f(np.array([pivot]))[0])
        fm = float(log_f(np.array([pivot - h]))[0])
        fp = float(log_f(np.array([pivot + h]))[0])
        curv = -(fp - 2.0 * f0 + fm) / h**2
        sigma = 1.0 / math.sqrt(curv) if curv > 0 else 0.1 * max(pivot, 1.0)
    return log_radial_integral(log_f, lo, hi, pivot, sigma)


# ---------------------------------------------------------------------------
# ensemble norms


def radial_exponent(spec: EnsembleSpec, j: int, r):
    """Per-point exponent v(r) such that the degree-j radial density is
    proportional to 2 r exp(-n v(r)): the effective potential minus the
    degree term."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = effective_potential(spec, r) - (2.0 * j / spec.n) * np.log(r)
    return out if out.shape else float(out)


def gaussian_scale(spec: EnsembleSpec) -> float:
    """Radial width of a single degree's modulus distribution, widened when a
    confinement weight below 1 fattens the exterior tail."""
    sigma = spec.rho / (2.0 * spec.n)
    bc = spec.bc
    if bc.kind == "interpolated":
        cmin = min(1.0, bc.c1, bc.c2)
        sigma /= math.sqrt(cmin)
    return sigma


def _pivot_radius(spec: EnsembleSpec, j: int) -> float:
    tau = j / spec.n
    lo, hi = integration_domain(spec)
    try:
        r = cut_radius(spec, tau)
    except (DomainError, SolverError):
        r = hi if tau >= 1 else lo
    return min(max(r, lo + 1e-300), hi if math.isfinite(hi) else r)


def log_weighted_norm(spec: EnsembleSpec, j: int) -> float:
    """log ||z^j||^2 under the ensemble's effective radial weight, by
    adaptive log-domain quadrature around the degree's own pivot radius."""
    lo, hi = integration_domain(spec)
    n = spec.n

    def log_f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return math.log(2.0) + (2 * j + 1) * np.log(s) - n * effective_potential(spec, s)

    return log_radial_integral(log_f, lo, hi if math.isfinite(hi) else
                               _pivot_radius(spec, j) + 1.0 + 200.0 * gaussian_scale(spec),
                               _pivot_radius(spec, j), gaussian_scale(spec),
                               breakpoints=_kinks(spec))


def asymptotic_log_norm(spec: EnsembleSpec, j: int) -> float:
    """Laplace-method approximation to log ||z^j||^2, accurate to O(1/n)
    uniformly in the degree: the exponent at the degree's pivot radius times
    a boundary-condition-dependent Gaussian window mass."""
    n, rho, bc = spec.n, spec.rho, spec.bc
    tau = j / n
    xi = rho * (tau - 0.5)
    if bc.kind in ("free", "interpolated"):
        c1 = bc.c1 if bc.kind == "interpolated" else 1.0
        c2 = bc.c2 if bc.kind == "interpolated" else 1.0
        log_window = math.log(limits.window_mass(xi, c1, c2, rho))
        r = cut_radius(spec, tau)
    elif bc.kind == "hard-annulus":
        a = rho * (bc.tau1 - 0.5)
        b = rho * (bc.tau2 - 0.5)
        log_window = float(limits._log_window_gauss(a, b, xi))
        r = cut_radius(spec, min(max(tau, bc.tau1), bc.tau2))
    elif bc.kind == "hard-disk":
        b = rho * (bc.tau - 0.5)
        log_window = float(special.log_ndtr(b - xi)) + 0.5 * math.log(2.0 * math.pi)
        r = cut_radius(spec, min(tau, bc.tau))
    else:
        raise DomainError(f"unknown boundary condition {bc.kind!r}")
    v = float(radial_exponent(spec, j, r))
    return -n * v + math.log(rho / n) + log_window


# ---------------------------------------------------------------------------
# batched tables


def _kinks(spec: EnsembleSpec) -> tuple[float, ...]:
    """Radii where the effective potential loses smoothness."""
    if spec.bc.kind == "interpolated":
        from .potentials import droplet_radii
        d = droplet_radii(spec)
        return (d.r0, d.r1)
    return ()


def _shared_grid(spec: EnsembleSpec):
    """One composite quadrature grid that resolves every degree's peak."""
    lo, hi = integration_domain(spec)
    sigma = gaussian_scale(spec)
    pad = 64.0 * sigma
    a = max(lo, _pivot_radius(spec, 0) - pad)
    b = _pivot_radius(spec, spec.n) + pad
    if math.isfinite(hi):
        b = min(b, hi)
    return _panel_nodes(a, b, sigma / 2.0, breakpoints=_kinks(spec))


def _log_norms_batch(spec: EnsembleSpec, degrees: np.ndarray) -> np.ndarray:
    nodes, weights = _shared_grid(spec)
    n = spec.n
    with np.errstate(divide="ignore", invalid="ignore"):
        base = math.log(2.0) + np.log(nodes) + np.log(weights) - n * effective_potential(spec, nodes)
        t = 2.0 * np.log(nodes)
    out = np.empty(degrees.shape, dtype=float)
    chunk = max(1, int(2e7 / max(nodes.size, 1)))
    for start in range(0, degrees.size, chunk):
        js = degrees[start:start + chunk]
        mat = base[None, :] + js[:, None] * t[None, :]
        out[start:start + chunk] = special.logsumexp(mat, axis=1)
    return out


@dataclass(frozen=True)
class NormTable:
    """All monomial norms of one ensemble, in log space."""
    spec: EnsembleSpec
    log_norms: np.ndarray  # shape (n,), entry j = log ||z^j||^2

    def __post_init__(self):
        if self.log_norms.shape != (self.spec.n,):
            raise DomainError("norm table length must equal the point count")


def norm_table(spec: EnsembleSpec, cache: bool = True) -> NormTable:
    """Build (or load from the on-disk cache) the full table of log norms for
    degrees 0 .. n-1."""
    cache_dir = os.environ.get("ACRE_CACHE_DIR") if cache else None
    path = None
    if cache_dir:
        path = os.path.join(cache_dir, f"norms-{spec_hash(spec)}.csv")
        if os.path.exists(path):
            return read_norm_table(path, spec)
    table = NormTable(spec, _log_norms_batch(spec, np.arange(spec.n)))
    if path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(norm_table_csv(table))
        os.replace(tmp, path)
    return table


def norm_table_csv(table: NormTable) -> str:
    buf = io.StringIO()
    buf.write(f"# spec_hash={spec_hash(table.spec)}\n")
    buf.write(f"# n={table.spec.n} rho={table.spec.rho!r}\n")
    buf.write("degree,log_norm\n")
    for j, v in enumerate(table.log_norms):
        buf.write(f"{j},{float(v)!r}\n")
    return buf.getvalue()


def read_norm_table(path: str, spec: EnsembleSpec) -> NormTable:
    want = spec_hash(spec)
    vals = np.empty(spec.n, dtype=float)
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# spec_hash="):
                got = line.split("=", 1)[1]
                if got != want:
                    raise DomainError(f"cached table is for a different ensemble "
                                      f"({got} != {want})")
            elif line and not line.startswith("#") and not line.startswith("degree"):
                j_s, v_s = line.split(",")
                vals[int(j_s)] = float(v_s)
    return NormTable(spec, vals)


def table_digest(table: NormTable) -> str:
    """Hex digest of the table contents, for reproducibility checks."""
    h = hashlib.sha256()
    h.update(spec_hash(table.spec).encode())
    h.update(np.ascontiguousarray(table.log_norms).tobytes())
    return h.hexdigest()[:16]
