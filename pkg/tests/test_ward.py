import numpy as np
import pytest

from ringgas.limits import LimitProfile
from ringgas.ward import cauchy_transform, kernel_square_modulus, ward_residual


def test_cauchy_transform_real_and_planar():
    prof = LimitProfile.free(1.0)
    c0 = cauchy_transform(prof, 0.3 + 0.0j)
    c1 = cauchy_transform(prof, 0.3 + 0.7j)
    assert abs(c0.imag) < 1e-6
    # translation invariance along the band: C depends on Re z only
    assert c0.real == pytest.approx(c1.real, abs=1e-6)


def test_kernel_square_modulus_positive():
    prof = LimitProfile.free(1.0)
    z = 0.1 + 0.2j
    w = -0.3 + 0.5j
    v = kernel_square_modulus(prof, z, w)
    assert v >= 0
    assert v == pytest.approx(kernel_square_modulus(prof, w, z), rel=1e-12)


def test_free_residual_small():
    prof = LimitProfile.free(1.0)
    rep = ward_residual(prof, np.array([-0.5, 0.0, 0.5]), np.array([0.0]),
                        h=0.04, L=8.0)
    assert rep.max_abs < 1e-3
    assert rep.n_excluded == 0


def test_cutoff_stability():
    # the far-field extension makes the residual nearly independent of L
    prof = LimitProfile.free(1.0)
    x = np.array([0.0])
    y = np.array([0.0])
    r6 = ward_residual(prof, x, y, h=0.04, L=6.0).max_abs
    r8 = ward_residual(prof, x, y, h=0.04, L=8.0).max_abs
    assert abs(r6 - r8) < 1e-6


def test_excluded_points_near_walls():
    prof = LimitProfile.soft_hard(1.0)
    x = np.array([-0.26, -0.24, 0.0])  # wall at -0.25
    rep = ward_residual(prof, x, np.array([0.0]), h=0.02, L=6.0)
    assert rep.n_excluded >= 2
    assert np.isnan(rep.residual[0, 0]) and np.isnan(rep.residual[0, 1])


def test_interpolated_indicator_ablation():
    prof = LimitProfile.interpolated(1.0, 4.0, 4.0)
    x = np.array([0.6])
    y = np.array([0.0])
    keep = ward_residual(prof, x, y, h=0.04, L=6.0).max_abs
    drop = ward_residual(prof, x, y, h=0.04, L=6.0,
                         include_indicator_terms=False).max_abs
    assert drop > 10.0 * keep
