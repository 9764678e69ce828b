"""Spectra, bound states, scattering and beam propagation for PT-symmetric
tight-binding lattices."""

__version__ = "0.1.0"

from .lattice import (
    CustomLabel,
    Hamiltonian,
    LatticeFileError,
    LatticeModel,
    ModelALabel,
    ModelBLabel,
    PTSymmetryReport,
    assemble_hamiltonian,
    build_model_a,
    build_model_b,
    check_pt_symmetry,
    load_custom,
    save_custom,
)
from .modes import (
    AssociatedFunction,
    ExceptionalPointReport,
    ModeResidual,
    ModeVector,
    associated_function,
    exceptional_point_check,
    jordan_family,
    residual,
    type2_bic_closed_form,
)
from .propagation import (
    GrowthClassification,
    PropagationOverflowError,
    PropagationTrace,
    classify_growth,
    intensity_map,
    power_trace,
    propagate,
)
from .scattering import (
    FeaturelessCurveError,
    ScatteringResult,
    SpectralFeature,
    core_half_width,
    find_spectral_feature,
    solve_scattering,
    transmission_model_a_analytic,
    transmittance_scan,
)
from .spectrum import (
    BracketError,
    CriticalPoint,
    EigenPair,
    EigensolverError,
    LocalizationFit,
    ScanPoint,
    SpectrumReport,
    classify_localization,
    classify_spectrum,
    eigendecompose,
    find_boc_disappearance,
    find_threshold,
    spectrum_scan,
)

__all__ = [name for name in dir() if not name.startswith("_")]
