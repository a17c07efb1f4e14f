"""Discrete-time Weyl and Dirac quantum walks on cubic and BCC lattices."""
from .evolution import (
    FieldState,
    approximation_bound,
    evolve_spectral,
    evolve_truncated,
    overlap,
    step_position,
)
from .lattice import GridSpec, wavevector_of_slot, wrap_difference
from .observables import (
    commutator_expectation,
    kinematic_operators,
    marginal,
    mean_position,
    mean_position_decomposition,
    newton_wigner_mean,
    position_series,
    probability_distribution,
)
from .states import (
    ParticleStateSpec,
    band_concentration,
    branch_decompose,
    gaussian_particle_state,
    localized_state,
    superposition_state,
)
from .walks import (
    Degenerate,
    WalkModel,
    diffusion_tensor,
    dirac_unitary,
    dispersion,
    eigensystem,
    group_velocity,
    interpolating_hamiltonian,
    transition_matrices,
    weyl_unitary,
)

__version__ = "0.1.0"
