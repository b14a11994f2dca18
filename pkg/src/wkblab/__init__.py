"""Numerical laboratory for semiclassical nonlinear Schrodinger
dynamics: a split-step reference solver, the WKB approximation stack
(limit system, exact hyperbolic system, small-time cascades, first
corrector), exact changes of frame, and instability experiments."""

from .errors import (
    BlowupError,
    BoundaryDecayError,
    CausticError,
    ConfigError,
    CurlError,
    MassDriftError,
    NumericalError,
    SymmetrizerError,
    WkblabError,
)
from .grid import (
    Field,
    Grid,
    check_boundary_decay,
    dealias,
    field_from_values,
    field_to_csv,
    homogeneous_sobolev_norm,
    l2_inner,
    l2_norm,
    make_grid,
    mass,
    read_field,
    sobolev_norm,
    spectral_centroid,
    spectral_gradient,
    spectral_laplacian,
    write_field,
)
from .nonlinearity import (
    IDENTITY_WEIGHT,
    Cubic,
    HarmonicPotential,
    NoNonlinearity,
    Nonlinearity,
    NoPotential,
    Potential,
    Power,
    SampledPotential,
    ScaledCubic,
    SmoothDefocusing,
    TimeWeight,
    harmonic_weight,
    weak_trap_weight,
    weak_weight,
)
from .dynamics import (
    EvolveConfig,
    EvolveResult,
    WaveFunction,
    default_timestep,
    evolve,
    init_data,
    strang_step,
    weak_transport_reference,
)
from .wkb import (
    DEFAULT_CAUSTIC_TOL,
    CorrectorPair,
    HyperbolicState,
    LimitPair,
    LimitTrajectory,
    TaylorCascade,
    corrector_evolve,
    euler_variables,
    grenier_energy,
    grenier_phase,
    grenier_reconstruct,
    grenier_step,
    hessian_max,
    init_hyperbolic,
    limit_system_step,
    limit_trajectory,
    phase_approximant,
    phase_from_velocity,
    taylor_cascade,
)
from .approx import (
    DivergenceReport,
    divergence_report,
    ode_instability_prediction,
    ode_solution,
    projective_distance,
)
from .transforms import (
    conformal_from_psi,
    conformal_h,
    conformal_psi_time,
    conformal_start,
    conformal_to_psi,
    conformal_u_time,
    dilate,
    free_time,
    harmonic_time,
    lens_from_free,
    lens_to_free,
    parabolic_h,
    parabolic_rescale,
    refined_grid,
    translate,
)
from .experiments import (
    SCENARIOS,
    ScenarioResult,
    SweepConfig,
    fit_loglog,
    nonlinearity_from_dict,
    potential_from_dict,
    profile_field,
    run_scenario,
    weight_from_dict,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
