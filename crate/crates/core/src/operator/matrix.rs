use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::circle::CircleAngle;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// A square matrix of double-precision complex numbers with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix(m))
    }

    pub(crate) fn from_inner(m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        ComplexMatrix(m)
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::NotSquare { rows: d, cols: r.len() });
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        ComplexMatrix(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(d, d))
    }

    /// `diag(e^{2πiλ₀}, …)`.
    pub fn diagonal_phases(angles: &[CircleAngle]) -> Self {
        let d = angles.len();
        ComplexMatrix(DMatrix::from_fn(
            d,
            d,
            |i, j| if i == j { angles[i].to_phase() } else { ZERO },
        ))
    }

    /// Permutation matrix sending basis vector `e_j` to `e_{images[j]}`.
    pub fn permutation(images: &[usize]) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &i in images {
            if i >= d || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation")));
            }
        }
        let mut m = DMatrix::zeros(d, d);
        for (j, &i) in images.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        Ok(ComplexMatrix(m))
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `R`'s diagonal moved into `Q`.
    pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..d {
            let rjj = r[(j, j)];
            let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
            let mut col = q.column_mut(j);
            col *= phase;
        }
        ComplexMatrix(q)
    }

    /// Random skew-Hermitian matrix with i.i.d. Gaussian entries, scaled to
    /// unit operator norm.
    pub fn random_skew_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let a = (&g - g.adjoint()) * C64::new(0.5, 0.0);
        let m = ComplexMatrix(a);
        let n = m.operator_norm();
        if n > 0.0 {
            m.scale(C64::new(1.0 / n, 0.0))
        } else {
            m
        }
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn scale(&self, z: C64) -> Self {
        ComplexMatrix(&self.0 * z)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(self.dim());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `self ⊕ other`, block diagonal.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.0);
        m.view_mut((a, a), (b, b)).copy_from(&other.0);
        ComplexMatrix(m)
    }

    /// `W · self · W†`.
    pub fn conjugate_by(&self, w: &ComplexMatrix) -> Self {
        ComplexMatrix(&w.0 * &self.0 * w.0.adjoint())
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.0.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        self.0.clone().singular_values().iter().copied().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖M‖_F / √d`; equals 1 on unitaries.
    pub fn normalized_frobenius_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.frobenius_norm() / (self.dim() as f64).sqrt()
    }

    /// `‖M†M − I‖`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.0.adjoint() * &self.0 - DMatrix::identity(self.dim(), self.dim());
        ComplexMatrix(g).operator_norm()
    }

    /// Matrix exponential of a skew-Hermitian matrix through the spectral
    /// decomposition of the Hermitian matrix `−iA`; the result is unitary to
    /// working precision.
    pub fn exp_skew_hermitian(&self) -> Self {
        let d = self.dim();
        if d == 0 {
            return self.clone();
        }
        let h = &self.0 * C64::new(0.0, -1.0);
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let w = eig.eigenvectors;
        let phases = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::from_polar(1.0, eig.eigenvalues[i])
            } else {
                ZERO
            }
        });
        ComplexMatrix(&w * phases * w.adjoint())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

/// Free-function form of [`ComplexMatrix::operator_norm`].
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    m.operator_norm()
}

/// A vector in `ℂ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<C64>);

impl StateVector {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(StateVector(DVector::from_vec(coeffs)))
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(coeffs: Vec<C64>) -> Result<Self> {
        let v = Self::new(coeffs)?;
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(StateVector(v.0.unscale(n)))
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[i] = ONE;
        StateVector(v)
    }

    /// Uniformly random unit vector.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        loop {
            let v = DVector::from_fn(d, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let n = v.norm();
            if n > 0.0 {
                return StateVector(v.unscale(n));
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= Self::NORM_TOLERANCE
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.0.dotc(&other.0))
    }

    pub fn apply(&self, m: &ComplexMatrix) -> Result<StateVector> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                actual: self.dim(),
            });
        }
        Ok(StateVector(m.apply(&self.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_examples() {
        for d in [1, 2, 5, 17] {
            assert!((ComplexMatrix::identity(d).operator_norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ComplexMatrix::zeros(4).operator_norm(), 0.0);
        let m = ComplexMatrix::from_rows(&[vec![C64::new(0.0, 2.0), ZERO], vec![ZERO, ZERO]]).unwrap();
        assert!((m.operator_norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let r = ComplexMatrix::new(DMatrix::zeros(2, 3));
        assert!(matches!(r, Err(Error::NotSquare { rows: 2, cols: 3 })));
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexMatrix::new(m), Err(Error::NonFinite)));
        assert!(ComplexMatrix::permutation(&[0, 0]).is_err());
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 3, 8, 33] {
            let w = ComplexMatrix::random_unitary(d, &mut rng);
            assert!(w.unitarity_residual() < 1e-12);
            assert!((w.operator_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.3;
        let a = ComplexMatrix::from_rows(&[vec![ZERO, C64::new(-t, 0.0)], vec![C64::new(t, 0.0), ZERO]]).unwrap();
        let r = a.exp_skew_hermitian();
        let expected = ComplexMatrix::from_rows(&[
            vec![C64::new(t.cos(), 0.0), C64::new(-t.sin(), 0.0)],
            vec![C64::new(t.sin(), 0.0), C64::new(t.cos(), 0.0)],
        ])
        .unwrap();
        assert!((&r - &expected).operator_norm() < 1e-14);
        let back = &r * &a.scale(C64::new(-1.0, 0.0)).exp_skew_hermitian();
        assert!((&back - &ComplexMatrix::identity(2)).operator_norm() < 1e-12);
    }

    #[test]
    fn submultiplicative_and_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = rng.random_range(1..9);
            let a = ComplexMatrix::random_skew_hermitian(d, &mut rng).scale(C64::new(1.7, 0.4));
            let b = ComplexMatrix::random_unitary(d, &mut rng).scale(C64::new(0.3, 0.0));
            let w = ComplexMatrix::random_unitary(d, &mut rng);
            assert!((&a * &b).operator_norm() <= a.operator_norm() * b.operator_norm() + 1e-9);
            assert!(((&w * &a).operator_norm() - a.operator_norm()).abs() < 1e-9);
            assert!((a.conjugate_by(&w).operator_norm() - a.operator_norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn state_inner_product() {
        let e0 = StateVector::basis(3, 0);
        let e1 = StateVector::basis(3, 1);
        assert_eq!(e0.inner(&e1).unwrap(), ZERO);
        assert_eq!(e0.inner(&e0).unwrap(), ONE);
        assert!(e0.inner(&StateVector::basis(2, 0)).is_err());
        assert!(StateVector::normalized(vec![ZERO, ZERO]).is_err());
        let s = StateVector::normalized(vec![ONE, ONE]).unwrap();
        assert!(s.is_normalized());
    }
}
