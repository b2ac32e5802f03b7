"""oscsim: classical oscillator dynamics mapped to Hermitian evolutions.

Spring-mass systems (forced, nonlinear, time-dependent) are reduced step by
step to a time-independent Hermitian flow: forced systems embed into larger
conservative ones, time-dependent stiffness embeds into quadratic nonlinear
oscillators, quadratic oscillators map to a quadratic Schrodinger equation,
and that equation is Carleman-linearized and symmetrized.  Every construction
is cross-checked against independent ODE integrators at desk scale.
"""

from .carleman import (
    CarlemanGenerator,
    NLSSystem,
    SymmetrizedGenerator,
    aleph_normalization,
    build_carleman_generator,
    build_symmetrized,
    compute_delta,
    evolve_and_decode,
    expectation_value,
    select_eta,
    select_truncation_order,
    symmetrization_error,
    truncation_error_study,
)
from .forcing import (
    ForcedEmbedding,
    build_embedding,
    embedding_error_sweep,
    kinetic_energy_fraction,
    select_m_f,
    verify_embedding,
)
from .integrators import (
    IntegratorConfig,
    Trajectory,
    check_norm_bounds,
    integrate_forced,
    integrate_linear,
    integrate_nls,
    integrate_nonlinear,
    integrate_time_dependent,
    log_norm_2,
    log_norm_inf,
)
from .nonlinear_reduction import (
    NLSReduction,
    check_d2_identity,
    reduce_to_nls,
    simulate_nonlinear_oscillator,
)
from .oscillator import (
    ForcingSpec,
    NonlinearOscillatorSystem,
    OscillatorSystem,
    TimeDependentStiffnessSpec,
    amplitude_phase_from_ic,
    build_b_factor,
    build_incidence,
)
from .resources import (
    ResourceReport,
    dilation_block_encode,
    dilation_defects,
    estimate_resources,
    hamiltonian_subnormalization,
)
from .schrodingerize import (
    QuantumEncoding,
    decode,
    encode,
    evolve_hermitian,
    harmonic_pipeline,
)
from .td_embedding import (
    TDEmbedding,
    build_td_embedding,
    build_td_forced_embedding,
    check_symbolic,
    pair_index,
    pair_index_inverse,
    verify_td_embedding,
)

__version__ = "0.1.0"
