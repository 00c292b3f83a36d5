"""Variational simulation of star-geometry quantum impurity models.

Ground states via VQE with compact (sparse) ansatzes, spectral moments via
recursive state fitting, and causal Green's functions via moment-driven
block Lanczos, with an exact-diagonalization oracle and a shot-noise
measurement model for verification.
"""

from .ansatz import (AnsatzSpec, FAMILY_KUCJ, FAMILY_UCCGSD, GeneratorTerm,
                     ParameterVector, enumerate_generators, parameter_blocks,
                     parameter_count, prepare_state, random_parameters,
                     reference_state, sector_reference_index, zero_parameters)
from .ed import exact_ground_state, exact_lehmann_gf, exact_moments
from .fermion import (FermionOperator, SpinOrbitalLayout, jordan_wigner,
                      number_operator, total_number, total_sz)
from .greens import (CausalityError, PoleRepresentation, SpectralMoments,
                     block_lanczos, filter_poles, imaginary_time_gf,
                     matsubara_gf, reconstruct_moments, spectral_from_operator_moments,
                     spectral_function, wasserstein_distance)
from .models import (SitePartition, StarImpurityModel, build_single_site,
                     build_two_site, single_site_model, two_site_model)
from .moments import (FIT_ANSATZ, FIT_ORACLE, FitError, MomentRun,
                      fit_target_state, noisy_scalar_remeasure,
                      propagated_moment_std, recursive_moments)
from .pauli import PauliString, QubitOperator
from .sectors import SectorBasis
from .statevector import (ShotConfig, StateVector, apply_number_diagonal,
                          apply_pauli_rotation, apply_pauli_string,
                          expectation, sample_expectation,
                          sample_transition_amplitude, transition_amplitude)
from .vqe import (OptimizerConfig, VqeResult, energy, minimize_energy,
                  warm_start_schedule)

__version__ = "0.1.0"
