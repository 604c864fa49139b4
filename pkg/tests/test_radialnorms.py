import math

import numpy as np
import pytest
from scipy.special import gammaln

from ringgas.potentials import BoundaryCondition, DomainError, induced_ginibre_spec
from ringgas.radialnorms import (
    asymptotic_log_norm,
    gaussian_scale,
    log_monomial_norm,
    log_weighted_norm,
    norm_table,
    norm_table_csv,
    read_norm_table,
    table_digest,
)


def gamma_oracle(n: int, j: int) -> float:
    # 2 int_0^inf r^(2j+1) e^(-n r^2) dr = j! / n^(j+1)
    return gammaln(j + 1) - (j + 1) * math.log(n)


def test_gamma_oracle_small():
    for n in (4, 64):
        for j in (0, 1, 7, 32):
            got = log_monomial_norm(n, j, lambda r: r**2)
            assert got == pytest.approx(gamma_oracle(n, j), rel=1e-12)


def test_free_table_matches_closed_form():
    # the quadratic-plus-log weight has an exact Gamma-function norm
    n, rho = 64, 2.0
    spec = induced_ginibre_spec(n, rho)
    a = n / rho**2
    b = a - 0.5
    table = norm_table(spec, cache=False)
    j = np.arange(n)
    exact = n * a + gammaln(j + n * b + 1) - (j + n * b + 1) * np.log(n * a)
    assert np.max(np.abs(table.log_norms - exact)) < 1e-10


@pytest.mark.parametrize("bc", [
    BoundaryCondition.free(),
    BoundaryCondition.interpolated(4.0, 4.0),
    BoundaryCondition.interpolated(0.5, 2.0),
    BoundaryCondition.hard_annulus(0.25, 0.75),
    BoundaryCondition.hard_disk(0.8),
])
def test_batch_matches_per_degree(bc):
    spec = induced_ginibre_spec(48, 1.5, bc)
    table = norm_table(spec, cache=False)
    for j in (0, 11, 24, 47):
        assert table.log_norms[j] == pytest.approx(log_weighted_norm(spec, j),
                                                   rel=1e-10, abs=1e-10)


def test_asymptotic_norm_tracks_exact():
    spec = induced_ginibre_spec(512, 2.0)
    for j in (64, 256, 448):
        rel = abs(asymptotic_log_norm(spec, j) - log_weighted_norm(spec, j)) / \
            abs(log_weighted_norm(spec, j))
        assert rel < 0.05


def test_gaussian_scale_widens_for_weak_confinement():
    free = induced_ginibre_spec(64, 2.0)
    weak = induced_ginibre_spec(64, 2.0, BoundaryCondition.interpolated(0.25, 1.0))
    assert gaussian_scale(weak) == pytest.approx(2.0 * gaussian_scale(free))


def test_table_roundtrip_and_digest(tmp_path):
    spec = induced_ginibre_spec(32, 1.0)
    table = norm_table(spec, cache=False)
    path = tmp_path / "norms.csv"
    path.write_text(norm_table_csv(table))
    back = read_norm_table(str(path), spec)
    assert np.array_equal(back.log_norms, table.log_norms)
    assert table_digest(back) == table_digest(table)
    with pytest.raises(DomainError):
        read_norm_table(str(path), induced_ginibre_spec(32, 1.5))


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ACRE_CACHE_DIR", str(tmp_path))
    spec = induced_ginibre_spec(32, 1.0)
    first = norm_table(spec)
    assert any(p.name.startswith("norms-") for p in tmp_path.iterdir())
    second = norm_table(spec)
    assert np.array_equal(first.log_norms, second.log_norms)
