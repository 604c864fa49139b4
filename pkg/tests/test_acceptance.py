"""End-to-end acceptance checks: exact oracles, ladder (refinement)
convergence of every scaling limit, exact extreme-value laws, sampler
exactness, Ward-identity residuals, and CLI determinism."""

import functools
import json
import math

import numpy as np
import pytest
from scipy.special import gammaln

from ringgas import cli, extremes, finitekernel, limits, sampler, ward
from ringgas.limits import LimitProfile
from ringgas.potentials import (
    BoundaryCondition,
    cut_radius,
    induced_ginibre_spec,
    make_power_log,
    EnsembleSpec,
)
from ringgas.radialnorms import (
    asymptotic_log_norm,
    log_monomial_norm,
    log_weighted_norm,
    norm_table,
)


@functools.lru_cache(maxsize=None)
def cached_spec(n, rho, bc_kind="free", p1=0.0, p2=0.0):
    bc = {
        "free": BoundaryCondition.free,
        "interpolated": BoundaryCondition.interpolated,
        "hard-annulus": BoundaryCondition.hard_annulus,
        "hard-disk": BoundaryCondition.hard_disk,
    }[bc_kind]
    spec = induced_ginibre_spec(n, rho, bc() if bc_kind == "free" else
                                (bc(p1) if bc_kind == "hard-disk" else bc(p1, p2)))
    return spec, norm_table(spec, cache=False)


def ladder_sup_errors(rho, bc_kind, prof, ns, x, p1=0.0, p2=0.0):
    out = []
    for n in ns:
        spec, table = cached_spec(n, rho, bc_kind, p1, p2)
        ctx = finitekernel.kernel_context(spec, table)
        out.append(finitekernel.sup_error(ctx, prof, x))
    return out


# 1. exact Gamma-function oracle for the monomial norms


def test_monomial_norms_match_gamma_oracle():
    for n in (4, 64, 1024):
        for j in range(65):
            want = gammaln(j + 1) - (j + 1) * math.log(n)
            got = log_monomial_norm(n, j, lambda r: r**2)
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


# 2. free-edge profile converges to the error-function band


def test_free_edge_ladder():
    x = np.linspace(-2, 2, 81)
    errs = ladder_sup_errors(4.0, "free", LimitProfile.free(4.0),
                             (256, 1024, 4096), x)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.02


# 3. confinement-blend profile: ladder plus endpoint identities


def test_blend_ladder_and_identities():
    x = np.linspace(-2, 2, 81)
    prof = LimitProfile.interpolated(4.0, 4.0, 4.0)
    errs = ladder_sup_errors(4.0, "interpolated", prof, (256, 1024, 4096),
                             x, 4.0, 4.0)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.02

    xi = np.linspace(-3, 3, 121)
    free = LimitProfile.free(4.0).density(xi)
    blend1 = LimitProfile.interpolated(4.0, 1.0, 1.0).density(xi)
    assert np.max(np.abs(free - blend1)) < 1e-12
    wall = LimitProfile.soft_hard(4.0).density(xi)
    blendinf = LimitProfile.interpolated(4.0, math.inf, math.inf).density(xi)
    assert np.max(np.abs(wall - blendinf)) < 1e-12


# 4. two-sided hard wall: ladder plus identities


def test_two_wall_ladder_and_identities():
    x = np.linspace(-2, 2, 81)
    prof = LimitProfile.hard_annulus(4.0, 1.0 / 16.0, 15.0 / 16.0)
    errs = ladder_sup_errors(4.0, "hard-annulus", prof, (256, 1024, 4096),
                             x, 1.0 / 16.0, 15.0 / 16.0)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.03

    xi = np.linspace(-0.999, 0.999, 101)
    full = LimitProfile.hard_annulus(4.0, 0.0, 1.0).density(xi)
    wall = LimitProfile.soft_hard(4.0).density(xi)
    assert np.max(np.abs(full - wall)) < 1e-12
    x2 = np.linspace(-2, 2, 81)
    wide = LimitProfile.hard_annulus(4.0, -1e3, 1e3).density(x2)
    free = LimitProfile.free(4.0).density(x2)
    assert np.max(np.abs(wide - free)) < 1e-8


# 5. cross-section mass of every band profile equals rho / 2


def test_profile_mass_invariant():
    for rho in (1.0, 4.0):
        matrix = [
            LimitProfile.free(rho),
            LimitProfile.soft_hard(rho),
            LimitProfile.interpolated(rho, 4.0, 4.0),
            LimitProfile.interpolated(rho, 0.5, 2.0),
            LimitProfile.hard_annulus(rho, 1.0 / 16.0, 15.0 / 16.0),
            LimitProfile.hard_annulus(rho, 0.25, 0.75),
        ]
        for prof in matrix:
            assert limits.cross_section_mass(prof) == pytest.approx(
                rho / 2.0, abs=1e-8)


# 6. one-sided hard wall: spacing constant and wide-band ladder


def test_one_sided_wall_wide_band_ladder():
    for rho in (0.5, 8.0, 32.0):
        assert limits.wall_spacing_scale(1.0, rho) == rho

    x = np.linspace(-3, 0, 31)
    for tau, wide in ((1.0, LimitProfile.ginibre_soft_hard()),
                      (0.5, LimitProfile.ginibre_hard())):
        ref = wide.density(x)
        errs = [float(np.max(np.abs(
            LimitProfile.hard_disk_rescaled(rho, tau).density(x) - ref)))
            for rho in (8.0, 32.0, 128.0)]
        assert errs[0] > errs[1] >= errs[2]
    assert LimitProfile.ginibre_hard().density(0.0) == pytest.approx(0.5,
                                                                     abs=1e-12)


# 7. narrow-band limit reproduces the sine kernel on the circle


def test_narrow_band_circular_limit():
    seps = np.linspace(0.01, 2.0, 50)
    err_fine = limits.sine_limit_error(0.05, 0.0, 1.0, seps)
    err_coarse = limits.sine_limit_error(0.1, 0.0, 1.0, seps)
    assert err_fine <= 0.02
    assert err_fine < err_coarse
    assert abs(limits.circular_kernel_modulus(0.05, 0.0, 1.0, [1e-9])[0]
               - 1.0 / math.pi) < 1e-3


# 8. exact extreme-modulus product law vs the Gumbel limit
#
# The approach to Gumbel is log-log slow: the exact sup-distance at the top
# rung is ~0.13 and the mean exceedance count at x=0 is still ~1.4, both far
# from their limits at any feasible n.  The monotone parts below pass; the
# 0.05 tolerance is asserted as stated and fails honestly.


@functools.lru_cache(maxsize=1)
def gumbel_ladder():
    xs = np.linspace(-2, 4, 61)
    sups, excs = [], []
    for n in (10**3, 10**4, 10**5):
        spec, table = cached_spec(n, 2.0)
        curve = extremes.gap_curve(spec, table, xs)
        sups.append(max(curve.sup_distance_max, curve.sup_distance_min))
        excs.append(extremes.expected_exceedances(spec, table, 0.0))
    return tuple(sups), tuple(excs)


def test_gumbel_ladder_decreases():
    sups, excs = gumbel_ladder()
    assert sups[0] > sups[1] > sups[2]
    # mean exceedance count at the Gumbel center decreases toward 1
    assert excs[0] > excs[1] > excs[2] > 1.0
    assert abs(excs[2] - 1.0) < abs(excs[0] - 1.0)


def test_gumbel_ladder_final_tolerance():
    sups, _ = gumbel_ladder()
    assert sups[2] <= 0.05


# 9. hard-wall extremes follow the exponential law


def test_hard_wall_exponential_law():
    spec, table = cached_spec(2000, 4.0, "interpolated", math.inf, math.inf)
    xs = np.linspace(-3, 0, 31)
    curve = extremes.gap_curve(spec, table, xs)
    want = np.exp(curve.x)
    assert float(np.max(np.abs(curve.max_cdf - want))) <= 0.05
    assert float(np.max(np.abs(curve.min_cdf - want))) <= 0.05


# 10. sampler reproduces the exact product CDF and the radial intensity


def test_sampler_exactness():
    spec, table = cached_spec(2000, 2.0)
    sm = sampler.moduli_sampler(spec, table, seed=20260826)
    trials = 10**4
    radii = sampler.sample_batch(sm, trials)
    sc = extremes.scaling_constants(spec)

    omega = np.sort(sc.a_out * (radii.max(axis=1) - sc.b_out))
    exact = extremes.gap_cdf_max(spec, table,
                                 sc.b_out + np.sort(omega) / sc.a_out)
    ks = sampler.ks_statistic(omega, np.asarray(exact))
    assert ks <= 1.63 / math.sqrt(trials)

    # radial intensity: counts vs the bin-averaged 2 r K(r, r)
    ctx = finitekernel.kernel_context(spec, table)
    edges = np.linspace(1.0 - 3.5 * spec.rho / spec.n,
                        1.0 + 3.5 * spec.rho / spec.n, 25)
    hist = sampler.histogram_profile(sm, 2000, edges)

    def bin_mass(a, b):
        r = np.linspace(a, b, 257)
        dens = 2.0 * r * finitekernel.profile(
            ctx, (r - ctx.alpha) * ctx.gamma) * ctx.gamma**2
        return np.trapezoid(dens, r)

    pred = np.array([bin_mass(a, b)
                     for a, b in zip(edges[:-1], edges[1:])]) * 2000
    counts = hist * 2000 * np.diff(edges)
    sigma = np.sqrt(np.maximum(pred, 1.0))
    assert np.all(np.abs(counts - pred) <= 4.0 * sigma)


# 11. Ward-identity residuals vanish at second order in the stencil


def test_ward_residuals():
    prof = LimitProfile.free(1.0)
    x = np.linspace(-0.4, 0.4, 5)
    y = np.array([0.0])
    r_base = ward.ward_residual(prof, x, y, h=0.02, L=8.0)
    assert r_base.max_abs <= 5e-3
    r_coarse = ward.ward_residual(prof, x, y, h=0.04, L=8.0)
    factor = r_coarse.max_abs / r_base.max_abs
    assert 3.0 <= factor <= 5.0

    blend = LimitProfile.interpolated(1.0, 4.0, 4.0)
    xb = np.array([0.6])
    keep = ward.ward_residual(blend, xb, y, h=0.04, L=6.0).max_abs
    drop = ward.ward_residual(blend, xb, y, h=0.04, L=6.0,
                              include_indicator_terms=False).max_abs
    assert drop >= 10.0 * keep


# 12. first-order expansions: cut radius and norm asymptotics


def test_expansion_crosschecks():
    rho, tau = 2.0, 0.8
    devs = []
    for n in (2**8, 2**10, 2**12):
        spec = EnsembleSpec(n, rho, make_power_log(n, rho, 2.0),
                            BoundaryCondition.free())
        first_order = 1.0 + (2 * tau - 1) * rho**2 / (4.0 * n)
        devs.append(n * abs(cut_radius(spec, tau) - first_order))
    assert devs[0] > devs[1] > devs[2]

    rels = []
    for n in (1024, 4096):
        spec = induced_ginibre_spec(n, rho)
        js = [n // 8, n // 2, (7 * n) // 8]
        rels.append(max(
            abs(asymptotic_log_norm(spec, j) - log_weighted_norm(spec, j))
            / abs(log_weighted_norm(spec, j)) for j in js))
    assert rels[-1] <= 5e-2
    assert rels[1] < rels[0]


# 13. two identical CLI runs produce byte-identical artifacts


def test_cli_determinism(tmp_path):
    spec_path = tmp_path / "spec.cfg"
    spec_path.write_text(
        "family = induced-ginibre\nn = 128\nrho = 2.0\nbc.kind = free\n")
    dirs = (tmp_path / "run1", tmp_path / "run2")
    for out in dirs:
        for argv in (
            ["validate", "--spec", str(spec_path), "--out", str(out)],
            ["limits", "--variant", "free", "--rho", "2.0",
             "--grid=-2:2:0.1", "--out", str(out), "--formats", "csv,svg"],
            ["finite-n", "--spec", str(spec_path), "--grid=-1:1:0.25",
             "--out", str(out)],
            ["sample", "--spec", str(spec_path), "--trials", "20",
             "--seed", "9", "--out", str(out)],
            ["extremes", "--spec", str(spec_path), "--xgrid=-1:3:0.5",
             "--out", str(out)],
        ):
            assert cli.main(argv) == cli.EXIT_OK
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    for name in names:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name
    # sanity: the JSON summary parses
    doc = json.loads((dirs[0] / "extremes.json").read_text())
    assert "128" in doc
