use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lattice::{apply_letter, apply_word, LatticeBijection, LatticePoint, OrbitBijection};
use crate::error::{Error, Result};
use crate::operator::matrix::{ONE, ZERO};
use crate::operator::{witness_overlap, ComplexMatrix, NormKind, StateVector, UnitaryPair};
use crate::word::{Letter, Word};

/// `{0..cols−1} × {−half_height..half_height}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub cols: u64,
    pub half_height: i64,
}

impl Window {
    pub fn new(cols: u64, half_height: i64) -> Result<Self> {
        if cols < 1 || half_height < 1 {
            return Err(Error::InvalidArgument(format!(
                "window needs cols ≥ 1 and half_height ≥ 1, got {cols} and {half_height}"
            )));
        }
        Ok(Window { cols, half_height })
    }

    fn height(&self) -> usize {
        (2 * self.half_height + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.cols as usize * self.height()
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        p.x < self.cols && p.y.abs() <= self.half_height
    }

    /// Basis index, x-major then y ascending.
    pub fn index(&self, p: LatticePoint) -> Option<usize> {
        self.contains(p)
            .then(|| p.x as usize * self.height() + (p.y + self.half_height) as usize)
    }

    pub fn point(&self, i: usize) -> LatticePoint {
        let h = self.height();
        LatticePoint {
            x: (i / h) as u64,
            y: (i % h) as i64 - self.half_height,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.dim()).map(|i| self.point(i))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationMode {
    /// `P·W·P` for the whole word `W`.
    Pxp,
    /// `(PgP)(PhP)…` over the letters of the word.
    Composed,
}

impl fmt::Display for TruncationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruncationMode::Pxp => "pxp",
            TruncationMode::Composed => "composed",
        })
    }
}

impl FromStr for TruncationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pxp" => Ok(TruncationMode::Pxp),
            "composed" => Ok(TruncationMode::Composed),
            _ => Err(Error::InvalidArgument(format!("unknown truncation mode `{s}`"))),
        }
    }
}

/// Compressions of lattice words to a window.
#[derive(Clone, Debug)]
pub struct Truncation<B: LatticeBijection = OrbitBijection> {
    bijection: B,
    window: Window,
    mode: TruncationMode,
}

impl Truncation<OrbitBijection> {
    pub fn new(window: Window, mode: TruncationMode) -> Self {
        Truncation {
            bijection: OrbitBijection::standard(),
            window,
            mode,
        }
    }
}

impl<B: LatticeBijection> Truncation<B> {
    pub fn with_bijection(bijection: B, window: Window, mode: TruncationMode) -> Self {
        Truncation {
            bijection,
            window,
            mode,
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn mode(&self) -> TruncationMode {
        self.mode
    }

    /// Image of `p` under the compressed word, or `None` when the column of
    /// `p` is zero.
    pub fn image(&self, word: &Word, p: LatticePoint) -> Option<LatticePoint> {
        if !self.window.contains(p) {
            return None;
        }
        match self.mode {
            TruncationMode::Pxp => Some(apply_word(&self.bijection, word, p)).filter(|q| self.window.contains(*q)),
            TruncationMode::Composed => word.action_order().try_fold(p, |q, l| {
                Some(apply_letter(&self.bijection, l, q)).filter(|r| self.window.contains(*r))
            }),
        }
    }

    /// Column images in basis order.
    pub fn columns(&self, word: &Word) -> Vec<Option<usize>> {
        self.window
            .points()
            .map(|p| self.image(word, p).and_then(|q| self.window.index(q)))
            .collect()
    }

    pub fn matrix(&self, word: &Word) -> ComplexMatrix {
        let d = self.window.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for (j, image) in self.columns(word).into_iter().enumerate() {
            if let Some(i) = image {
                m[(i, j)] = ONE;
            }
        }
        ComplexMatrix::from_inner(m)
    }

    pub fn pair(&self) -> UnitaryPair {
        UnitaryPair::unchecked(
            self.matrix(&Word::new(vec![Letter::U])),
            self.matrix(&Word::new(vec![Letter::V])),
        )
        .expect("equal dimensions")
    }

    /// Whether every intermediate image of `p` under `word` stays in the window.
    pub fn path_contained(&self, word: &Word, p: LatticePoint) -> bool {
        self.window.contains(p)
            && word
                .action_order()
                .try_fold(p, |q, l| {
                    Some(apply_letter(&self.bijection, l, q)).filter(|r| self.window.contains(*r))
                })
                .is_some()
    }

    pub fn report(&self) -> TruncationReport {
        let (lhs, rhs) = (Word::relation_lhs(), Word::relation_rhs());
        let relation = &self.matrix(&lhs) - &self.matrix(&rhs);
        let (cl, cr) = (Word::commutator_left(), Word::commutator_right());
        let commutator = &self.matrix(&cl) - &self.matrix(&cr);

        let (lhs_cols, rhs_cols) = (self.columns(&lhs), self.columns(&rhs));
        let d = self.window.dim();
        let zero_columns = lhs_cols.iter().zip(&rhs_cols).filter(|(a, b)| a == b).count();
        let interior = self
            .window
            .points()
            .filter(|&p| self.path_contained(&lhs, p) && self.path_contained(&rhs, p))
            .count();

        let origin = self
            .window
            .index(LatticePoint::ORIGIN)
            .expect("window contains the origin");
        let psi = StateVector::basis(d, origin);
        let overlap = witness_overlap(&self.pair(), &psi).expect("unit basis vector of matching dimension");
        let witness_contained = [&cl, &cr].iter().all(|w| self.path_contained(w, LatticePoint::ORIGIN));

        TruncationReport {
            window: self.window,
            mode: self.mode,
            dim: d,
            relation_defect: NormKind::Operator.apply(&relation),
            relation_defect_frobenius: NormKind::NormalizedFrobenius.apply(&relation),
            commutator_defect: NormKind::Operator.apply(&commutator),
            zero_defect_fraction: zero_columns as f64 / d as f64,
            interior_count: interior,
            interior_fraction: interior as f64 / d as f64,
            witness_overlap_re: overlap.re,
            witness_overlap_im: overlap.im,
            witness_contained,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub window: Window,
    pub mode: TruncationMode,
    pub dim: usize,
    /// Operator norm of `T(V⁻¹U²V) − T(U³)`.
    pub relation_defect: f64,
    pub relation_defect_frobenius: f64,
    /// Operator norm of `T(UV⁻¹UV) − T(V⁻¹UVU)`.
    pub commutator_defect: f64,
    /// Basis vectors on which the relation defect column is exactly zero.
    pub zero_defect_fraction: f64,
    /// Basis vectors whose full paths under both relation words stay in the
    /// window. The set only grows with the window; the fraction need not.
    pub interior_count: usize,
    pub interior_fraction: f64,
    pub witness_overlap_re: f64,
    pub witness_overlap_im: f64,
    /// Both commutator paths of the origin stay in the window.
    pub witness_contained: bool,
}

/// Compression of `word` (standard lattice pair) to `window`.
pub fn truncate(word: &Word, window: Window, mode: TruncationMode) -> ComplexMatrix {
    Truncation::new(window, mode).matrix(word)
}

pub fn truncated_pair(window: Window, mode: TruncationMode) -> UnitaryPair {
    Truncation::new(window, mode).pair()
}

pub fn truncation_defect_report(window: Window, mode: TruncationMode) -> TruncationReport {
    Truncation::new(window, mode).report()
}
