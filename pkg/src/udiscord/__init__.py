"""Unitary-invariant discord, its optimization-free modification, and the
geometric measure for N-qubit density matrices."""

from .errors import InvalidArgument, NotADensityMatrix, ResourceLimit
from .geometric import (
    GeometricResult,
    geometric_distance_oracle,
    geometric_measure,
    geometric_measure_of_matrix,
)
from .invariant import (
    McEstimate,
    NormalizationConstants,
    averaged_discord,
    averaged_mutual_information,
    compute_normalization_constants,
    load_constants,
    min_over_bipartitions,
    modified_averaged_discord,
    modified_normalized_discord,
    normalized_invariant_discord,
    reduced_pair_discord,
    reduced_pair_spectrum,
    save_constants,
)
from .linalg import (
    BipartiteSplit,
    OrderedSpectrum,
    frobenius_dist_sq,
    hermitian_eig,
    kron,
    ordered_spectrum,
    partial_trace,
)
from .measures import (
    OptimizerConfig,
    classical_correlation_sup,
    classical_mutual_information,
    measure_two_side,
    mutual_information,
    two_side_discord,
    von_neumann_entropy,
)
from .su_param import (
    MeasurementBasis,
    generator,
    haar_unitary,
    local_projectors,
    sample_params,
    su4_full,
    su4_reduced,
)
from .thermal import (
    HamiltonianSpec,
    analytic_qg,
    hamiltonian_matrix,
    thermal_spectrum,
    thermal_sweep,
)

__version__ = "0.1.0"
