"""Informational completeness of truncated continuous-variable measurements.

Builds quadrature and photon-counting POVM operators on finite Fock
subspaces, counts the linearly independent elements they induce, checks
the closed-form rule m(2d-m), and verifies completeness operationally via
simulated homodyne data and maximum-likelihood reconstruction.
"""

from .completeness import (
    BINNED_POVM,
    CONTINUOUS_FUNCTIONAL,
    MeasurementSpec,
    RankReport,
    SweepTable,
    default_phases,
    design_matrix,
    displaced_counting_rank,
    min_phases_for_completeness,
    numerical_rank,
    povm_span_rank,
    predicted_rank,
    rank_for,
    sweep_table,
)
from .fock import (
    DensityMatrix,
    FockVector,
    QuadraturePoint,
    SupportSet,
    coherent_amplitudes,
    hermite_function,
    hermite_function_table,
    hermite_poly,
    hermitian_to_real_vector,
    homodyne_pdf,
    homodyne_pdf_grid,
    photon_number_probability,
    quadrature_amplitude,
)
from .povm import (
    BinLayout,
    PovmSet,
    build_binned_quadrature_povm,
    default_x_max,
    displaced_number_operator,
    povm_deficit,
    quadrature_bin_operator,
)
from .tomo import (
    MeasurementData,
    ReconstructionResult,
    ambiguity_witness,
    bin_samples,
    fidelity,
    ml_reconstruct,
    sample_homodyne,
    simulate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "BINNED_POVM",
    "CONTINUOUS_FUNCTIONAL",
    "BinLayout",
    "DensityMatrix",
    "FockVector",
    "MeasurementData",
    "MeasurementSpec",
    "PovmSet",
    "QuadraturePoint",
    "RankReport",
    "ReconstructionResult",
    "SupportSet",
    "SweepTable",
    "ambiguity_witness",
    "bin_samples",
    "build_binned_quadrature_povm",
    "coherent_amplitudes",
    "default_phases",
    "default_x_max",
    "design_matrix",
    "displaced_counting_rank",
    "displaced_number_operator",
    "fidelity",
    "hermite_function",
    "hermite_function_table",
    "hermite_poly",
    "hermitian_to_real_vector",
    "homodyne_pdf",
    "homodyne_pdf_grid",
    "min_phases_for_completeness",
    "ml_reconstruct",
    "numerical_rank",
    "photon_number_probability",
    "povm_deficit",
    "povm_span_rank",
    "predicted_rank",
    "quadrature_amplitude",
    "rank_for",
    "sample_homodyne",
    "simulate_dataset",
    "sweep_table",
]
