"""Numerics for almost-circular determinantal ensembles: finite-n correlation
kernels from radial monomial norms, boundary scaling limits, exact extreme-
modulus laws, a moduli sampler, and Ward-identity residual checks."""

__version__ = "0.1.0"

from .potentials import (
    BoundaryCondition,
    DomainError,
    EnsembleSpec,
    RadialPotential,
    SolverError,
    UnsupportedError,
    cut_radius,
    droplet_radii,
    effective_potential,
    equilibrium_density,
    induced_ginibre_spec,
    load_spec,
    make_custom,
    make_induced_ginibre,
    make_power_log,
    parse_spec_text,
    spec_hash,
    validate_spec,
)
from .limits import (
    LimitProfile,
    VARIANTS,
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
from .radialnorms import (
    NormTable,
    asymptotic_log_norm,
    gaussian_scale,
    log_monomial_norm,
    log_weighted_norm,
    norm_table,
    norm_table_csv,
    read_norm_table,
)
from .finitekernel import (
    KernelContext,
    kernel_context,
    kernel_n,
    profile,
    rho1_rescaled,
    rhok_rescaled,
    sup_error,
    total_mass,
)
from .extremes import (
    ConsistencyError,
    GapCurve,
    ScalingConstants,
    expected_exceedances,
    gap_cdf_max,
    gap_cdf_min,
    gap_curve,
    max_radius,
    min_radius,
    omega_cdf,
    reference_law,
    scaling_constants,
    u_cdf,
)
from .sampler import (
    ModuliSampler,
    degree_cdf,
    ecdf_extremes,
    histogram_profile,
    ks_statistic,
    moduli_sampler,
    sample_batch,
    sample_moduli,
)
from .ward import (
    WardReport,
    cauchy_transform,
    kernel_square_modulus,
    ward_residual,
)
