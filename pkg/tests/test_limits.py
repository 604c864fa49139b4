import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr

from ringgas.limits import (
    LimitProfile,
    band_integral,
    circular_kernel_modulus,
    confinement_shift,
    cross_section_mass,
    limit_kernel,
    sine_kernel,
    sine_limit_error,
    wall_spacing_scale,
    window_mass,
)
from ringgas.potentials import DomainError, UnsupportedError


def test_window_mass_against_quadrature():
    rho = 2.0
    for c1, c2 in ((1.0, 1.0), (4.0, 0.5), (math.inf, 2.0)):
        for xi in (-1.5, 0.0, 2.0):
            def f(t):
                return math.exp(-0.5 * (t - xi) ** 2
                                + confinement_shift(t, c1, c2, rho))
            lo = -rho / 2.0 if math.isinf(c1) else -40.0
            hi = rho / 2.0 if math.isinf(c2) else 40.0
            want, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12)
            assert window_mass(xi, c1, c2, rho) == pytest.approx(want, rel=1e-9)


def test_band_integral_free_is_ndtr_difference():
    rho = 2.0
    u = np.linspace(-3, 3, 13)
    want = math.sqrt(2 * math.pi) * (ndtr(u + rho / 2) - ndtr(u - rho / 2))
    got = np.array([band_integral(v, 1.0, 1.0, rho) for v in u]) * math.sqrt(2 * math.pi)
    # band_integral folds in its own normalization; compare the density forms
    free = LimitProfile.free(rho).density(u / 2.0)
    assert np.allclose(free, ndtr(u + rho / 2) - ndtr(u - rho / 2), atol=1e-14)
    assert got.shape == want.shape  # shape contract


def test_interpolated_identity_endpoints():
    rho = 2.0
    x = np.linspace(-3, 3, 25)
    free = LimitProfile.free(rho).density(x)
    c11 = LimitProfile.interpolated(rho, 1.0, 1.0).density(x)
    assert np.max(np.abs(free - c11)) < 1e-12
    sh = LimitProfile.soft_hard(rho).density(x)
    cinf = LimitProfile.interpolated(rho, math.inf, math.inf).density(x)
    assert np.max(np.abs(sh - cinf)) < 1e-12


def test_hard_annulus_identities():
    rho = 2.0
    x = np.linspace(-rho / 4, rho / 4, 21)
    sh = LimitProfile.soft_hard(rho).density(x)
    full = LimitProfile.hard_annulus(rho, 0.0, 1.0).density(x)
    assert np.max(np.abs(sh - full)) < 1e-12
    x2 = np.linspace(-2, 2, 21)
    wide = LimitProfile.hard_annulus(rho, -1e3, 1e3).density(x2)
    free = LimitProfile.free(rho).density(x2)
    assert np.max(np.abs(wide - free)) < 1e-8


def test_cross_section_mass():
    for rho in (1.0, 4.0):
        for prof in (LimitProfile.free(rho),
                     LimitProfile.interpolated(rho, 0.5, 2.0),
                     LimitProfile.hard_annulus(rho, 0.25, 0.75)):
            assert cross_section_mass(prof) == pytest.approx(rho / 2, abs=1e-8)


def test_limit_kernel_hermitian_and_diagonal():
    for prof in (LimitProfile.free(2.0),
                 LimitProfile.interpolated(2.0, 4.0, 4.0),
                 LimitProfile.hard_annulus(2.0, 0.25, 0.75)):
        z, w = 0.3 + 0.2j, -0.1 - 0.4j
        assert limit_kernel(prof, z, w) == pytest.approx(
            np.conj(limit_kernel(prof, w, z)), rel=1e-12)
        assert limit_kernel(prof, z, z) == pytest.approx(
            prof.density(z.real), rel=1e-9)


def test_limit_kernel_unsupported_variants():
    with pytest.raises(UnsupportedError):
        limit_kernel(LimitProfile.ginibre_hard(), 0.0, 0.0)


def test_wall_spacing_scale():
    assert wall_spacing_scale(1.0, 8.0) == 8.0
    assert wall_spacing_scale(1.0, 0.5) == 0.5
    with pytest.raises(DomainError):
        wall_spacing_scale(0.5, -1.0)
    # increasing in tau
    vals = [wall_spacing_scale(t, 4.0) for t in (0.0, 0.25, 0.5, 1.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_one_sided_wall_pointwise():
    # limit values of the one-sided wall family
    assert LimitProfile.ginibre_hard().density(0.0) == pytest.approx(0.5, abs=1e-12)
    assert LimitProfile.ginibre_hard().density(1e-9) == 0.0
    assert LimitProfile.ginibre_soft_hard().density(-8.0) == pytest.approx(1.0, abs=1e-6)


def test_narrow_band_sine_limit():
    seps = np.linspace(0.05, 2.0, 20)
    assert sine_limit_error(0.05, 0.0, 1.0, seps) < sine_limit_error(0.1, 0.0, 1.0, seps)
    assert abs(circular_kernel_modulus(0.05, 0.0, 1.0, [1e-9])[0] - 1 / math.pi) < 1e-3
    assert sine_kernel(0.0) == pytest.approx(1 / math.pi)
