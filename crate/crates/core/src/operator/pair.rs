use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, StateVector, C64};
use crate::circle::CircleAngle;
use crate::error::{Error, Result};
use crate::word::{Letter, Word};

pub const DEFAULT_UNITARITY_TOLERANCE: f64 = 1e-10;

/// Two operators of equal dimension, normally unitaries.
///
/// `V⁻¹` is always taken to be `V†`. For compressed lattice generators, which
/// are partial isometries rather than unitaries, `(PVP)† = PV⁻¹P`, so the same
/// convention gives the compression of the inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryPair {
    u: ComplexMatrix,
    v: ComplexMatrix,
    v_adj: ComplexMatrix,
    u_adj: ComplexMatrix,
}

impl UnitaryPair {
    pub fn new(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(u, v, DEFAULT_UNITARITY_TOLERANCE)
    }

    pub fn with_tolerance(u: ComplexMatrix, v: ComplexMatrix, tolerance: f64) -> Result<Self> {
        for m in [&u, &v] {
            let residual = m.unitarity_residual();
            if residual > tolerance {
                return Err(Error::NotUnitary { residual, tolerance });
            }
        }
        Self::unchecked(u, v)
    }

    /// Skips the unitarity check. Used for truncated (compressed) generators.
    pub fn unchecked(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                actual: v.dim(),
            });
        }
        let (u_adj, v_adj) = (u.adjoint(), v.adjoint());
        Ok(UnitaryPair { u, v, u_adj, v_adj })
    }

    pub fn identity(d: usize) -> Self {
        Self::unchecked(ComplexMatrix::identity(d), ComplexMatrix::identity(d)).expect("equal dimensions")
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    pub fn unitarity_residuals(&self) -> (f64, f64) {
        (self.u.unitarity_residual(), self.v.unitarity_residual())
    }

    fn letter(&self, l: Letter) -> &ComplexMatrix {
        match l {
            Letter::U => &self.u,
            Letter::UInv => &self.u_adj,
            Letter::V => &self.v,
            Letter::VInv => &self.v_adj,
        }
    }

    /// The matrix of a word, multiplied in written order.
    pub fn evaluate(&self, word: &Word) -> ComplexMatrix {
        word.letters()
            .iter()
            .fold(ComplexMatrix::identity(self.dim()), |acc, &l| &acc * self.letter(l))
    }

    /// `V⁻¹U²V − U³`.
    pub fn relation_difference(&self) -> ComplexMatrix {
        &self.evaluate(&Word::relation_lhs()) - &self.evaluate(&Word::relation_rhs())
    }

    /// `UV⁻¹UV − V⁻¹UVU`.
    pub fn commutator_difference(&self) -> ComplexMatrix {
        &self.evaluate(&Word::commutator_left()) - &self.evaluate(&Word::commutator_right())
    }

    pub fn direct_sum(&self, other: &UnitaryPair) -> UnitaryPair {
        Self::unchecked(self.u.direct_sum(&other.u), self.v.direct_sum(&other.v)).expect("equal dimensions")
    }

    /// `(WUW†, WVW†)`.
    pub fn conjugated(&self, w: &ComplexMatrix) -> UnitaryPair {
        Self::unchecked(self.u.conjugate_by(w), self.v.conjugate_by(w)).expect("equal dimensions")
    }

    pub fn with_u(&self, u: ComplexMatrix) -> Result<UnitaryPair> {
        Self::unchecked(u, self.v.clone())
    }

    /// `(e^{ηA}U, e^{ηB}V)` for independent random skew-Hermitian `A`, `B`
    /// of unit operator norm.
    pub fn perturbed<R: Rng + ?Sized>(&self, eta: f64, rng: &mut R) -> UnitaryPair {
        let d = self.dim();
        let a = ComplexMatrix::random_skew_hermitian(d, rng).scale(C64::new(eta, 0.0));
        let b = ComplexMatrix::random_skew_hermitian(d, rng).scale(C64::new(eta, 0.0));
        Self::unchecked(&a.exp_skew_hermitian() * &self.u, &b.exp_skew_hermitian() * &self.v).expect("equal dimensions")
    }
}

/// `ε = ‖V⁻¹U²V − U³‖`.
pub fn relation_defect(pair: &UnitaryPair) -> f64 {
    pair.relation_difference().operator_norm()
}

/// `δ = ‖UV⁻¹UV − V⁻¹UVU‖`.
pub fn commutator_defect(pair: &UnitaryPair) -> f64 {
    pair.commutator_difference().operator_norm()
}

/// `⟨UV⁻¹UVψ, V⁻¹UVUψ⟩`.
pub fn witness_overlap(pair: &UnitaryPair, psi: &StateVector) -> Result<C64> {
    if psi.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            actual: psi.dim(),
        });
    }
    psi.ensure_normalized()?;
    let a = psi.apply(&pair.evaluate(&Word::commutator_left()))?;
    let b = psi.apply(&pair.evaluate(&Word::commutator_right()))?;
    a.inner(&b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Operator,
    NormalizedFrobenius,
}

impl NormKind {
    pub fn apply(self, m: &ComplexMatrix) -> f64 {
        match self {
            NormKind::Operator => m.operator_norm(),
            NormKind::NormalizedFrobenius => m.normalized_frobenius_norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub epsilon: f64,
    pub delta: f64,
    pub unitarity_residuals: (f64, f64),
    pub norm_kind: NormKind,
}

pub fn defect_report(pair: &UnitaryPair, norm_kind: NormKind) -> DefectReport {
    DefectReport {
        epsilon: norm_kind.apply(&pair.relation_difference()),
        delta: norm_kind.apply(&pair.commutator_difference()),
        unitarity_residuals: pair.unitarity_residuals(),
        norm_kind,
    }
}

#[derive(Clone, Debug)]
pub struct PhaseAlignment {
    /// `U' = e^{2πiα} U`.
    pub alpha: CircleAngle,
    pub aligned: UnitaryPair,
    /// `‖V⁻¹U'²V − U'³‖`.
    pub residual: f64,
    /// `tr((U³)† V⁻¹U²V)` vanished, so no phase is preferred and `α = 0`.
    pub degenerate: bool,
}

/// Removes a global phase from the relation.
///
/// With `θ = arg tr((U³)† V⁻¹U²V)`, the scalar `e^{iθ}` minimizes
/// `‖V⁻¹U²V − e^{iθ}U³‖_F`, and `U' = e^{iθ}U` satisfies
/// `V⁻¹U'²V − U'³ = e^{2iθ}(V⁻¹U²V − e^{iθ}U³)`.
pub fn phase_align(pair: &UnitaryPair) -> PhaseAlignment {
    let lhs = pair.evaluate(&Word::relation_lhs());
    let rhs = pair.evaluate(&Word::relation_rhs());
    let t = (&rhs.adjoint() * &lhs).trace();
    let degenerate = t.norm() <= 1e-12 * (pair.dim().max(1) as f64);
    let alpha = if degenerate {
        CircleAngle::ZERO
    } else {
        CircleAngle::from_phase(t)
    };
    let aligned = pair.with_u(pair.u().scale(alpha.to_phase())).expect("same dimension");
    let residual = relation_defect(&aligned);
    PhaseAlignment {
        alpha,
        aligned,
        residual,
        degenerate,
    }
}
