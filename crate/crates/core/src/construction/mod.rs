//! Explicit realizations of `V⁻¹U²V = U³`.
//!
//! * [`lattice`]: permutations of `ℕ₀ × ℤ` with `U` the vertical shift and `V`
//!   a lift of a bijection from the orbits of `U³` to the orbits of `U²`.
//!   Here `V⁻¹UV` does not commute with `U`.
//! * [`truncation`]: compressions of lattice words to finite windows.
//! * [`cyclic`]: exact finite-dimensional pairs on `ℤ_L`.

pub mod cyclic;
pub mod lattice;
pub mod truncation;

pub use cyclic::{cyclic_multiplier, cyclic_pair, pentagonal_triple};
pub use lattice::{
    apply_word, lattice_witness_points, shift_u, shift_u_inv, verify_intertwining, word_path, Anchor, IdentityMap,
    LatticeBijection, LatticePoint, OrbitBijection, OrbitId, WitnessPoints,
};
pub use truncation::{
    truncate, truncated_pair, truncation_defect_report, Truncation, TruncationMode, TruncationReport, Window,
};
