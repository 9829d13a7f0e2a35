//! Dense complex matrix algebra for unitary pairs: norms, spectra, the
//! relation defect `ε = ‖V⁻¹U²V − U³‖`, the commutator defect
//! `δ = ‖UV⁻¹UV − V⁻¹UVU‖`, the witness overlap and phase alignment.

pub(crate) mod matrix;
mod pair;
mod spectrum;

pub use matrix::{operator_norm, ComplexMatrix, StateVector, C64};
pub use pair::{
    commutator_defect, defect_report, phase_align, relation_defect, witness_overlap, DefectReport, NormKind,
    PhaseAlignment, UnitaryPair, DEFAULT_UNITARITY_TOLERANCE,
};
pub use spectrum::{
    unitary_spectrum, unitary_spectrum_with_tolerance, EigenGroup, SpectralDecomposition, DEFAULT_GROUPING_TOLERANCE,
    SPECTRUM_UNITARITY_LIMIT,
};
