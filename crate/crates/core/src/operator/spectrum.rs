use nalgebra::{DMatrix, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64};
use crate::circle::{circle_dist, CircleAngle};
use crate::error::{Error, Result};

/// Residual above which a matrix is not treated as unitary by the eigensolver.
pub const SPECTRUM_UNITARITY_LIMIT: f64 = 1e-6;

/// Eigenphases closer than this are merged into one projector.
pub const DEFAULT_GROUPING_TOLERANCE: f64 = 1e-8;

// Eigenvalues of the Hermitian part closer than this are re-split by the
// anti-Hermitian part; large enough that the first stage never has to resolve
// nearly degenerate subspaces.
const FIRST_STAGE_CLUSTER: f64 = 1e-4;

// Generic rotation so that the Hermitian part rarely folds two eigenphases
// onto the same value.
const ROTATION: f64 = 0.377_964_473_009_227_2;

/// Indices of eigenphases merged into one eigenspace.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    pub angle: CircleAngle,
    pub members: Vec<usize>,
}

/// `U = Σ e^{2πiλ} P_λ` for a unitary `U`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    angles: Vec<CircleAngle>,
    eigenvectors: ComplexMatrix,
    groups: Vec<EigenGroup>,
    tolerance: f64,
}

impl SpectralDecomposition {
    /// Eigenphases with multiplicity, sorted ascending in `[0, 1)`.
    pub fn angles(&self) -> &[CircleAngle] {
        &self.angles
    }

    /// Column `k` is an eigenvector for `angles()[k]`.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn grouping_tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Orthogonal projector onto the span of the given eigenvector columns.
    pub fn projector_onto(&self, members: &[usize]) -> ComplexMatrix {
        let d = self.eigenvectors.dim();
        let cols: Vec<_> = members
            .iter()
            .map(|&k| self.eigenvectors.inner().column(k).into_owned())
            .collect();
        let q = if cols.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        ComplexMatrix::from_inner(&q * q.adjoint())
    }

    pub fn projector(&self, group: usize) -> ComplexMatrix {
        self.projector_onto(&self.groups[group].members)
    }

    /// `‖U − Σ e^{2πiλ} P_λ‖` using the grouped angles.
    pub fn reconstruction_residual(&self, u: &ComplexMatrix) -> f64 {
        let mut acc = ComplexMatrix::zeros(u.dim());
        for (g, group) in self.groups.iter().enumerate() {
            acc = &acc + &self.projector(g).scale(group.angle.to_phase());
        }
        (u - &acc).operator_norm()
    }

    /// `‖Σ P_λ − I‖_F` and the largest Gram block `‖Q_a†Q_b − δ_ab I‖_F`,
    /// which controls `‖P_a P_b − δ_ab P_a‖` for the projectors `P = QQ†`.
    pub fn projector_residuals(&self) -> (f64, f64) {
        let w = self.eigenvectors.inner();
        let d = w.nrows();
        let completeness = (w * w.adjoint() - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let gram = &(w.adjoint() * w - DMatrix::<C64>::identity(d, d));
        let mut worst: f64 = 0.0;
        for ga in &self.groups {
            for gb in &self.groups {
                let block: f64 = ga
                    .members
                    .iter()
                    .flat_map(|&i| gb.members.iter().map(move |&j| gram[(i, j)].norm_sqr()))
                    .sum();
                worst = worst.max(block.sqrt());
            }
        }
        (completeness, worst)
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(M − M†)/(2i)`.
fn skew_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

fn sorted_eigen(h: DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let cols: Vec<_> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    Ok((vals, DMatrix::from_columns(&cols)))
}

/// Orthonormal eigenbasis of a unitary using only Hermitian eigensolvers.
///
/// The Hermitian part of `e^{-iθ}U` has eigenvalues `cos(2πλ − θ)`, which can
/// fold two different eigenphases together. Each cluster of nearby values is
/// split again by the anti-Hermitian part compressed onto the cluster.
fn unitary_eigenbasis(u: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let d = u.nrows();
    let rotated = u * C64::from_polar(1.0, -ROTATION);
    let (vals, vecs) = sorted_eigen(hermitian_part(&rotated))?;

    let mut columns = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && vals[end] - vals[end - 1] <= FIRST_STAGE_CLUSTER {
            end += 1;
        }
        let q = vecs.columns(start, end - start).into_owned();
        if end - start == 1 {
            columns.push(q.column(0).into_owned());
        } else {
            let compressed = q.adjoint() * &rotated * &q;
            let (_, w) = sorted_eigen(skew_part(&compressed))?;
            let refined = &q * w;
            columns.extend(refined.column_iter().map(|c| c.into_owned()));
        }
        start = end;
    }
    Ok(DMatrix::from_columns(&columns))
}

/// Chains sorted angles into groups whose consecutive gaps are within `tol`,
/// joining the last group to the first across the wraparound.
fn group_angles(angles: &[CircleAngle], tol: f64) -> Vec<EigenGroup> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..angles.len() {
        match groups.last_mut() {
            Some(g) if circle_dist(angles[*g.last().unwrap()], angles[k]) <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    if groups.len() > 1 {
        let last = groups.last().unwrap();
        let first = &groups[0];
        if circle_dist(angles[*last.last().unwrap()], angles[first[0]]) <= tol {
            let mut tail = groups.pop().unwrap();
            tail.extend(groups[0].iter().copied());
            groups[0] = tail;
        }
    }
    groups
        .into_iter()
        .map(|members| {
            let mean: C64 = members.iter().map(|&k| angles[k].to_phase()).sum();
            EigenGroup {
                angle: CircleAngle::from_phase(mean),
                members,
            }
        })
        .collect()
}

pub fn unitary_spectrum(u: &ComplexMatrix) -> Result<SpectralDecomposition> {
    unitary_spectrum_with_tolerance(u, DEFAULT_GROUPING_TOLERANCE)
}

pub fn unitary_spectrum_with_tolerance(u: &ComplexMatrix, tolerance: f64) -> Result<SpectralDecomposition> {
    let residual = u.unitarity_residual();
    if residual > SPECTRUM_UNITARITY_LIMIT {
        return Err(Error::NotUnitary {
            residual,
            tolerance: SPECTRUM_UNITARITY_LIMIT,
        });
    }
    let d = u.dim();
    if d == 0 {
        return Ok(SpectralDecomposition {
            angles: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0),
            groups: Vec::new(),
            tolerance,
        });
    }
    let basis = unitary_eigenbasis(u.inner())?;
    let uw = u.inner() * &basis;
    let mut pairs: Vec<(CircleAngle, usize)> = (0..d)
        .map(|k| (CircleAngle::from_phase(basis.column(k).dotc(&uw.column(k))), k))
        .collect();
    pairs.sort_by(|a, b| a.0.value().total_cmp(&b.0.value()));
    let angles: Vec<CircleAngle> = pairs.iter().map(|p| p.0).collect();
    let cols: Vec<_> = pairs.iter().map(|p| basis.column(p.1).into_owned()).collect();
    let groups = group_angles(&angles, tolerance);
    Ok(SpectralDecomposition {
        angles,
        eigenvectors: ComplexMatrix::from_inner(DMatrix::from_columns(&cols)),
        groups,
        tolerance,
    })
}
