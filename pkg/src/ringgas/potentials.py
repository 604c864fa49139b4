"""Radially symmetric external potentials and their droplet geometry.

A potential is Q(zeta) = g(|zeta|) with g normalized so that g(1) = 0 and
g'(1) = 1.  The gas then concentrates on a thin annulus around the unit
circle whose inner/outer radii solve r g'(r) = 0 and r g'(r) = 2.  Boundary
conditions modify Q outside the annulus: a confinement blend toward the
obstacle function, or hard walls at cut radii r_tau with r g'(r_tau) = 2 tau.
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize


class DomainError(ValueError):
    """A parameter or evaluation point is outside the supported domain."""


class SolverError(RuntimeError):
    """A root solve failed (no bracket or no convergence)."""


class UnsupportedError(ValueError):
    """Operation not defined for this boundary condition."""


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class RadialPotential:
    """Radial profile g(r) = sum_i coef_i r^pow_i - 2*log_weight*log(r) + shift.

    All built-in families fit this closed form, which keeps derivatives exact.
    `shift` is chosen at construction so that g(1) = 0.
    """

    family: str
    powers: tuple[tuple[float, float], ...]  # (coefficient, exponent) pairs
    log_weight: float
    shift: float

    def g(self, r):
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, self.shift, dtype=float)
        for c, p in self.powers:
            out += c * r**p
        if self.log_weight != 0.0:
            with np.errstate(divide="ignore"):
                out -= 2.0 * self.log_weight * np.log(r)
        return out if out.shape else float(out)

    def g1(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        for c, p in self.powers:
            out += c * p * r ** (p - 1.0)
        if self.log_weight != 0.0:
            with np.errstate(divide="ignore"):
                out -= 2.0 * self.log_weight / r
        return out if out.shape else float(out)

    def g2(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        for c, p in self.powers:
            out += c * p * (p - 1.0) * r ** (p - 2.0)
        if self.log_weight != 0.0:
            with np.errstate(divide="ignore"):
                out += 2.0 * self.log_weight / r**2
        return out if out.shape else float(out)

    def g3(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        for c, p in self.powers:
            out += c * p * (p - 1.0) * (p - 2.0) * r ** (p - 3.0)
        if self.log_weight != 0.0:
            with np.errstate(divide="ignore"):
                out -= 4.0 * self.log_weight / r**3
        return out if out.shape else float(out)

    def radial_slope(self, r):
        """r * g'(r), the strictly increasing function whose level sets
        define the droplet and all cut radii."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=float)
        for c, p in self.powers:
            out += c * p * r**p
        out -= 2.0 * self.log_weight
        return out if out.shape else float(out)

    def laplacian(self, r):
        """Quarter-Laplacian of Q at radius r: (g'' + g'/r) / 4."""
        r = np.asarray(r, dtype=float)
        out = self.g2(r) + self.g1(r) / r
        out = out / 4.0
        return out if out.shape else float(out)


def make_induced_ginibre(n: int, rho: float) -> RadialPotential:
    """Quadratic-plus-log profile a*r^2 - 2*b*log(r), with a = n/rho^2 and
    b = a - 1/2 so that g'(1) = 1 and the quarter-Laplacian equals n/rho^2
    identically."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if rho <= 0:
        raise DomainError(f"need rho > 0, got {rho}")
    a = n / rho**2
    b = a - 0.5
    if b < 0:
        raise DomainError(
            f"negative log weight: need n >= rho^2/2, got n={n}, rho={rho}"
        )
    return RadialPotential(
        family="induced-ginibre",
        powers=((a, 2.0),),
        log_weight=b,
        shift=-a,
    )


def make_power_log(n: int, rho: float, exponent: float) -> RadialPotential:
    """Profile A*r^(2*lambda) - 2*B*log(r) with A, B fixed by the same
    normalization as the quadratic family; exponent = 1 reproduces it."""
    if exponent <= 0:
        raise DomainError(f"need exponent > 0, got {exponent}")
    if n < 1 or rho <= 0:
        raise DomainError(f"need n >= 1 and rho > 0, got n={n}, rho={rho}")
    lam = float(exponent)
    amp = n / (lam**2 * rho**2)
    log_weight = lam * amp - 0.5
    if log_weight < 0:
        raise DomainError(
            f"negative log weight: need n >= exponent*rho^2/2, got n={n}"
        )
    return RadialPotential(
        family="power-log",
        powers=((amp, 2.0 * lam),),
        log_weight=log_weight,
        shift=-amp,
    )


def make_custom(coeffs, log_weight: float) -> RadialPotential:
    """Profile sum_k coeffs[k] * r^(2(k+1)) - 2*log_weight*log(r), rescaled so
    g'(1) = 1 and shifted so g(1) = 0.  Assumption checks are deferred to
    validate_spec; a custom profile may legitimately fail them."""
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise DomainError("need at least one power coefficient")
    slope = sum(2.0 * (k + 1) * c for k, c in enumerate(coeffs)) - 2.0 * float(log_weight)
    if slope <= 0:
        raise DomainError(f"cannot normalize: g'(1) = {slope} <= 0")
    scale = 1.0 / slope
    powers = tuple((c * scale, 2.0 * (k + 1)) for k, c in enumerate(coeffs))
    beta = float(log_weight) * scale
    shift = -sum(c for c, _ in powers)
    return RadialPotential(
        family="custom", powers=powers, log_weight=beta, shift=shift
    )


# ---------------------------------------------------------------------------
# boundary conditions


FREE = "free"
INTERPOLATED = "interpolated"
HARD_ANNULUS = "hard-annulus"
HARD_DISK = "hard-disk"


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str
    c1: float = 1.0
    c2: float = 1.0
    tau1: float = 0.0
    tau2: float = 1.0
    tau: float = 1.0

    @staticmethod
    def free() -> "BoundaryCondition":
        return BoundaryCondition(kind=FREE)

    @staticmethod
    def interpolated(c1: float, c2: float) -> "BoundaryCondition":
        if not (c1 > 0 and c2 > 0):  # inf compares fine
            raise DomainError(f"confinement weights must be in (0, inf], got {c1}, {c2}")
        return BoundaryCondition(kind=INTERPOLATED, c1=float(c1), c2=float(c2))

    @staticmethod
    def hard_annulus(tau1: float, tau2: float) -> "BoundaryCondition":
        if not tau1 < tau2:
            raise DomainError(f"need tau1 < tau2, got {tau1}, {tau2}")
        return BoundaryCondition(kind=HARD_ANNULUS, tau1=float(tau1), tau2=float(tau2))

    @staticmethod
    def hard_disk(tau: float) -> "BoundaryCondition":
        if not 0 < tau <= 1:
            raise DomainError(f"need tau in (0, 1], got {tau}")
        return BoundaryCondition(kind=HARD_DISK, tau=float(tau))

    @property
    def is_hard(self) -> bool:
        return self.kind in (HARD_ANNULUS, HARD_DISK)


@dataclass(frozen=True)
class EnsembleSpec:
    """A finite-n ensemble: particle count, droplet width, radial profile,
    and boundary condition."""

    n: int
    rho: float
    potential: RadialPotential
    bc: BoundaryCondition

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need n >= 1, got {self.n}")
        if self.rho <= 0:
            raise DomainError(f"need rho > 0, got {self.rho}")

    def with_n(self, n: int) -> "EnsembleSpec":
        """Same ensemble at a different particle count; the confinement
        strength scales with n, so normalized families are rebuilt."""
        pot = self.potential
        if pot.family == "induced-ginibre":
            pot = make_induced_ginibre(int(n), self.rho)
        elif pot.family == "power-log":
            pot = make_power_log(int(n), self.rho, pot.powers[0][1] / 2.0)
        return EnsembleSpec(n=int(n), rho=self.rho, potential=pot, bc=self.bc)


def induced_ginibre_spec(n, rho, bc=None) -> EnsembleSpec:
    bc = bc if bc is not None else BoundaryCondition.free()
    return EnsembleSpec(n=int(n), rho=float(rho),
                        potential=make_induced_ginibre(int(n), float(rho)), bc=bc)


# ---------------------------------------------------------------------------
# droplet and cut radii


@dataclass(frozen=True)
class Droplet:
    r0: float
    r1: float
    rho_n: float  # sqrt(n / laplacian(1)); equals the declared rho for built-ins


def _solve_radial_slope(pot: RadialPotential, target: float) -> float:
    """Radius where r*g'(r) equals target.  Closed form for single power
    families, otherwise a bracketed solve polished by Newton."""
    if len(pot.powers) == 1:
        c, p = pot.powers[0]
        num = target + 2.0 * pot.log_weight
        if num < 0:
            raise DomainError(
                f"r*g'(r) = {target} unreachable: range is ({-2.0 * pot.log_weight}, inf)"
            )
        return (num / (c * p)) ** (1.0 / p)

    lo = 1e-8
    flo = pot.radial_slope(lo) - target
    if flo > 0:
        if target == 0.0 and pot.log_weight == 0.0:
            return 0.0
        raise SolverError(
            f"no bracket for r*g'(r) = {target}: already above target at r={lo}"
        )
    hi = 2.0
    for _ in range(200):
        if pot.radial_slope(hi) - target > 0:
            break
        hi *= 2.0
    else:
        raise SolverError(f"no sign change for r*g'(r) = {target} up to r={hi}")
    root = optimize.brentq(lambda r: pot.radial_slope(r) - target, lo, hi,
                           xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # two Newton steps tighten the residual to solver tolerance
    for _ in range(2):
        f = pot.radial_slope(root) - target
        df = pot.g1(root) + root * pot.g2(root)
        if df != 0:
            root -= f / df
    return float(root)


@functools.lru_cache(maxsize=4096)
def droplet_radii(spec: EnsembleSpec) -> Droplet:
    """Inner and outer droplet radii, solving r g'(r) = 0 and = 2."""
    pot = spec.potential
    r0 = _solve_radial_slope(pot, 0.0)
    r1 = _solve_radial_slope(pot, 2.0)
    if not r0 < 1.0 < r1:
        raise SolverError(f"droplet radii ({r0}, {r1}) do not straddle r = 1")
    rho_n = math.sqrt(spec.n / pot.laplacian(1.0))
    return Droplet(r0=r0, r1=r1, rho_n=rho_n)


def cut_radius(spec: EnsembleSpec, tau: float) -> float:
    """The radius r_tau with r_tau * g'(r_tau) = 2*tau.  tau = 0 and tau = 1
    give the droplet radii; tau = 1/2 gives exactly 1 for normalized
    profiles."""
    return _solve_radial_slope(spec.potential, 2.0 * float(tau))


# ---------------------------------------------------------------------------
# obstacle function and effective potentials


def obstacle(spec: EnsembleSpec, r):
    """The obstacle function: equals Q on the droplet, is constant inside it,
    and grows like 2 log r outside.  C^1 across both droplet radii."""
    d = droplet_radii(spec)
    pot = spec.potential
    r = np.asarray(r, dtype=float)
    out = np.asarray(pot.g(r), dtype=float).copy()
    inner = r < d.r0
    outer = r > d.r1
    if np.any(inner):
        out[inner] = pot.g(d.r0)
    if np.any(outer):
        out[outer] = 2.0 * np.log(r[outer]) - 2.0 * math.log(d.r1) + pot.g(d.r1)
    return out if out.shape else float(out)


def effective_potential(spec: EnsembleSpec, r):
    """Boundary-condition-modified potential at radius r; +inf marks hard
    truncation and is consumed as zero weight downstream."""
    bc = spec.bc
    pot = spec.potential
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    q = np.asarray(pot.g(r), dtype=float)

    if bc.kind == FREE:
        out = q
    elif bc.kind == INTERPOLATED:
        d = droplet_radii(spec)
        out = q.copy()
        qc = np.asarray(obstacle(spec, r), dtype=float)
        inner = r < d.r0
        outer = r > d.r1
        if math.isinf(bc.c1):
            out[inner] = np.inf
        elif np.any(inner):
            out[inner] = bc.c1 * q[inner] + (1.0 - bc.c1) * qc[inner]
        if math.isinf(bc.c2):
            out[outer] = np.inf
        elif np.any(outer):
            out[outer] = bc.c2 * q[outer] + (1.0 - bc.c2) * qc[outer]
    elif bc.kind == HARD_ANNULUS:
        lo = cut_radius(spec, bc.tau1)
        hi = cut_radius(spec, bc.tau2)
        out = np.where((r >= lo) & (r <= hi), q, np.inf)
    elif bc.kind == HARD_DISK:
        hi = cut_radius(spec, bc.tau)
        out = np.where(r <= hi, q, np.inf)
    else:
        raise UnsupportedError(f"unknown boundary condition {bc.kind!r}")
    return float(out[0]) if scalar else out


def integration_domain(spec: EnsembleSpec) -> tuple[float, float]:
    """Support of the weight e^{-n Q_eff}: (0, inf) unless hard walls cut it."""
    bc = spec.bc
    if bc.kind == HARD_ANNULUS:
        lo, hi = cut_radius(spec, bc.tau1), cut_radius(spec, bc.tau2)
        if not lo < hi:
            raise DomainError(f"empty hard annulus: [{lo}, {hi}]")
        return lo, hi
    if bc.kind == HARD_DISK:
        return 0.0, cut_radius(spec, bc.tau)
    if bc.kind == INTERPOLATED:
        d = droplet_radii(spec)
        lo = d.r0 if math.isinf(bc.c1) else 0.0
        hi = d.r1 if math.isinf(bc.c2) else math.inf
        return lo, hi
    return 0.0, math.inf


# ---------------------------------------------------------------------------
# equilibrium measure


@dataclass(frozen=True)
class EquilibriumDensity:
    density: object  # value(s) of the absolutely continuous part at r
    masses: tuple[float, float]  # point masses on the inner / outer wall circles
    note: str = ""


def equilibrium_density(spec: EnsembleSpec, r) -> EquilibriumDensity:
    """Absolutely continuous density (w.r.t. normalized area measure) at
    radius r plus the total masses of the singular wall components."""
    bc = spec.bc
    d = droplet_radii(spec)
    note = ""
    if bc.kind == FREE:
        lo, hi, m_in, m_out = d.r0, d.r1, 0.0, 0.0
    elif bc.kind == INTERPOLATED:
        if math.isinf(bc.c1) and math.isinf(bc.c2):
            lo, hi, m_in, m_out = d.r0, d.r1, 0.0, 0.0
        elif bc.c1 == 1.0 and bc.c2 == 1.0:
            lo, hi, m_in, m_out = d.r0, d.r1, 0.0, 0.0
        else:
            lo, hi, m_in, m_out = d.r0, d.r1, 0.0, 0.0
            note = ("finite confinement weights leave the equilibrium measure "
                    "unchanged; returning the free-boundary answer")
    elif bc.kind == HARD_ANNULUS:
        t1, t2 = max(bc.tau1, 0.0), min(bc.tau2, 1.0)
        if not t1 < t2:
            raise DomainError("hard annulus excludes the droplet entirely")
        lo, hi = cut_radius(spec, t1), cut_radius(spec, t2)
        m_in, m_out = t1, 1.0 - t2
    elif bc.kind == HARD_DISK:
        lo, hi = d.r0, cut_radius(spec, bc.tau)
        m_in, m_out = 0.0, 1.0 - bc.tau
    else:
        raise UnsupportedError(f"unknown boundary condition {bc.kind!r}")

    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    # the ac part laplacian(r) integrates (against 2 r dr) to 1 minus the
    # wall masses: laplacian = (1/4r) d(r g')/dr and r g' runs over [0, 2]
    dens = np.where((r >= lo) & (r <= hi),
                    spec.potential.laplacian(np.maximum(r, 1e-300)), 0.0)
    value = float(dens[0]) if scalar else dens
    return EquilibriumDensity(density=value, masses=(m_in, m_out), note=note)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    min_subharmonicity: float
    g_at_one: float
    slope_at_one_minus_one: float
    third_derivative_ratio: float
    growth_margin: float
    rho_estimated: float
    rho_declared: float
    flags: tuple[tuple[str, bool], ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.flags)


def validate_spec(spec: EnsembleSpec) -> ValidationReport:
    """Sampled checks of the standing assumptions: subharmonicity near the
    droplet, the g(1) = 0 / g'(1) = 1 normalization, boundedness of g''',
    logarithmic growth at infinity, and the declared width parameter."""
    pot = spec.potential
    d = droplet_radii(spec)
    lo = max(d.r0 / 2.0, 1e-6)
    grid = np.geomspace(lo, 2.0 * d.r1, 512)
    sub = pot.laplacian(grid)
    min_sub = float(np.min(sub))
    g1v = float(pot.g(1.0))
    slope_err = float(pot.g1(1.0)) - 1.0
    near = np.linspace(max(0.5, d.r0 / 2.0), 2.0 * d.r1, 128)
    g3max = float(np.max(np.abs(pot.g3(near))))
    g3_ratio = g3max / spec.n
    r_far = 1e3
    growth = float(pot.g(r_far)) / (2.0 * math.log(r_far))
    rho_est = d.rho_n
    flags = (
        ("subharmonic", min_sub >= -1e-12),
        ("normalized_value", abs(g1v) <= 1e-12),
        ("normalized_slope", abs(slope_err) <= 1e-12),
        ("third_derivative_finite", math.isfinite(g3_ratio)),
        ("logarithmic_growth", growth > 1.0),
        ("width_parameter", abs(rho_est - spec.rho) <= 0.1 * spec.rho + 1e-9),
    )
    return ValidationReport(
        min_subharmonicity=min_sub,
        g_at_one=g1v,
        slope_at_one_minus_one=slope_err,
        third_derivative_ratio=g3_ratio,
        growth_margin=growth,
        rho_estimated=rho_est,
        rho_declared=spec.rho,
        flags=flags,
    )


# ---------------------------------------------------------------------------
# spec files (flat key=value text) and hashing


_KNOWN_KEYS = {
    "family", "n", "rho", "exponent", "coeffs", "log_weight",
    "bc.kind", "bc.c1", "bc.c2", "bc.tau1", "bc.tau2", "bc.tau",
}


def _parse_scalar(s: str) -> float:
    if s.strip().lower() == "inf":
        return math.inf
    return float(s)


def parse_spec_text(text: str) -> EnsembleSpec:
    kv: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        kv[key.strip()] = val.strip()

    unknown = sorted(set(kv) - _KNOWN_KEYS)
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    for req in ("family", "n", "rho"):
        if req not in kv:
            raise DomainError(f"missing required key {req!r}")

    n = int(kv["n"])
    rho = float(kv["rho"])
    family = kv["family"]
    if family == "induced-ginibre":
        pot = make_induced_ginibre(n, rho)
    elif family == "power-log":
        pot = make_power_log(n, rho, float(kv.get("exponent", "1")))
    elif family == "custom":
        if "coeffs" not in kv:
            raise DomainError("custom family needs key 'coeffs'")
        coeffs = [float(c) for c in kv["coeffs"].split(",")]
        pot = make_custom(coeffs, float(kv.get("log_weight", "0")))
    else:
        raise DomainError(f"unknown family {family!r}")

    kind = kv.get("bc.kind", FREE)
    if kind == FREE:
        bc = BoundaryCondition.free()
    elif kind == INTERPOLATED:
        bc = BoundaryCondition.interpolated(
            _parse_scalar(kv.get("bc.c1", "1")), _parse_scalar(kv.get("bc.c2", "1"))
        )
    elif kind == HARD_ANNULUS:
        bc = BoundaryCondition.hard_annulus(
            float(kv.get("bc.tau1", "0")), float(kv.get("bc.tau2", "1"))
        )
    elif kind == HARD_DISK:
        bc = BoundaryCondition.hard_disk(float(kv.get("bc.tau", "1")))
    else:
        raise DomainError(f"unknown bc.kind {kind!r}")
    return EnsembleSpec(n=n, rho=rho, potential=pot, bc=bc)


def load_spec(path) -> EnsembleSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_text(fh.read())


def spec_hash(spec: EnsembleSpec) -> str:
    """Content hash identifying an ensemble, used for cache keys and CSV headers."""
    pot = spec.potential
    canon = "|".join(
        [
            f"n={spec.n}",
            f"rho={spec.rho!r}",
            f"family={pot.family}",
            "powers=" + ";".join(f"{c!r}^{p!r}" for c, p in pot.powers),
            f"logw={pot.log_weight!r}",
            f"shift={pot.shift!r}",
            f"bc={spec.bc.kind}",
            f"c=({spec.bc.c1!r},{spec.bc.c2!r})",
            f"tau=({spec.bc.tau1!r},{spec.bc.tau2!r},{spec.bc.tau!r})",
        ]
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
