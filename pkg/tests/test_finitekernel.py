import numpy as np
import pytest

from ringgas.finitekernel import (
    kernel_context,
    kernel_n,
    profile,
    rho1_rescaled,
    rhok_rescaled,
    sup_error,
    total_mass,
)
from ringgas.limits import LimitProfile
from ringgas.potentials import BoundaryCondition, DomainError, induced_ginibre_spec
from ringgas.radialnorms import norm_table


def ctx_for(bc=None, n=64, rho=2.0):
    spec = induced_ginibre_spec(n, rho, bc)
    return kernel_context(spec, norm_table(spec, cache=False))


@pytest.mark.parametrize("bc", [
    None,
    BoundaryCondition.interpolated(4.0, 4.0),
    BoundaryCondition.hard_annulus(0.25, 0.75),
    BoundaryCondition.hard_disk(1.0),
])
def test_total_mass_is_point_count(bc):
    ctx = ctx_for(bc)
    assert total_mass(ctx) == pytest.approx(64.0, rel=1e-8)


def test_kernel_hermitian():
    ctx = ctx_for()
    z, w = 1.01 + 0.003j, 0.99 - 0.001j
    assert kernel_n(ctx, z, w) == pytest.approx(np.conj(kernel_n(ctx, w, z)),
                                                rel=1e-12)


def test_kernel_vanishes_past_hard_wall():
    ctx = ctx_for(BoundaryCondition.hard_annulus(0.25, 0.75))
    assert kernel_n(ctx, 1.5, 1.0) == 0.0
    assert kernel_n(ctx, 1.0, 0.1) == 0.0


def test_rho1_matches_profile():
    ctx = ctx_for()
    for x in (-1.0, 0.0, 0.7):
        assert rho1_rescaled(ctx, x) == pytest.approx(
            float(profile(ctx, [x])[0]), rel=1e-12)


def test_rho2_factorizes_at_separation():
    # along-band separation: both points stay in the bulk, so the kernel
    # cross terms are negligible and the 2-point function factorizes
    ctx = ctx_for(n=256)
    z = 0.0
    w = 12.0j
    r2 = rhok_rescaled(ctx, [z, w])
    r1r1 = rho1_rescaled(ctx, z) * rho1_rescaled(ctx, w)
    # cross term decays like 1/separation^2 along the band, never faster
    assert 0.0 < r1r1 - r2 < 1e-2 * r1r1


def test_rhok_cap():
    ctx = ctx_for(n=16)
    with pytest.raises(DomainError):
        rhok_rescaled(ctx, [0.1j * k for k in range(9)])


def test_free_profile_near_limit():
    ctx = ctx_for(n=1024, rho=2.0)
    x = np.linspace(-2, 2, 21)
    assert sup_error(ctx, LimitProfile.free(2.0), x) < 5e-3


def test_hard_disk_context_spacing():
    # at tau = 1 the wall spacing constant equals rho, so gamma = n / rho
    ctx = ctx_for(BoundaryCondition.hard_disk(1.0), n=256, rho=2.0)
    assert ctx.gamma == pytest.approx(256 / 2.0, rel=1e-10)
