//! Finite-dimensional consequences of `V⁻¹U²V ≈ U³`.
//!
//! In dimension `d` every eigenphase of `U` is, up to `3^d·d·ε`, a rational
//! `μ/N_d`. The maps `λ ↦ 3λ/2` permute these blocks, `V` moves eigenvectors
//! between matching blocks only, and the commutator defect obeys
//! `δ < 4d³N_dε` whenever `ε < 1/(6·3^d·d·N_d)`.

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::circle::{nearest_numerator, three_halves_numerator, CircleAngle, WitnessConstants};
use crate::error::{Error, Result};
use crate::operator::{
    commutator_defect, relation_defect, unitary_spectrum, ComplexMatrix, SpectralDecomposition, StateVector,
    UnitaryPair, C64,
};

/// Equality tolerance for eigenphases in exact mode.
pub const EXACT_TOLERANCE: f64 = 1e-10;

/// Circle distance below which two eigenphases count as antipodal.
pub const ANTIPODE_TOLERANCE: f64 = 1e-8;

/// Thresholds below this are beneath double-precision resolution of `ε`.
pub const RESOLVABLE_THRESHOLD: f64 = 1e-11;

/// Multiplier on `tol·d` for the commutator defect of exact pairs.
pub const EXACT_SLACK: f64 = 100.0;

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearEigenvalue {
    pub lambda: CircleAngle,
    /// Circle distance from `lambda` to `beta`.
    pub gap: f64,
    /// `‖Sξ − e^{2πiβ}ξ‖`.
    pub delta_hat: f64,
}

/// The eigenphase of `S` nearest to `beta`, which lies within `δ̂` of it.
pub fn near_eigenvalue(s: &ComplexMatrix, xi: &StateVector, beta: CircleAngle) -> Result<NearEigenvalue> {
    if xi.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            actual: xi.dim(),
        });
    }
    xi.ensure_normalized()?;
    let sxi = s.apply(xi.coeffs());
    let delta_hat = (sxi - xi.coeffs() * beta.to_phase()).norm();
    if delta_hat >= 1.0 {
        return Err(Error::Precondition(format!(
            "‖Sξ − e^(2πiβ)ξ‖ = {delta_hat} is not below 1"
        )));
    }
    let spectrum = unitary_spectrum(s)?;
    let (lambda, gap) = spectrum
        .angles()
        .iter()
        .map(|&a| (a, a.dist(beta)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidArgument("empty matrix".into()))?;
    if gap > delta_hat + 1e-12 {
        return Err(Error::BoundViolation(format!(
            "eigenphase gap {gap} exceeds δ̂ = {delta_hat}"
        )));
    }
    Ok(NearEigenvalue { lambda, gap, delta_hat })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralChain {
    /// Positions in the input spectrum.
    pub indices: Vec<usize>,
    pub angles: Vec<CircleAngle>,
    /// `|3λ_k − 2λ_{k+1}|` on the circle.
    pub step_residuals: Vec<f64>,
    /// First `(k, n)` with `λ_k` and `λ_{k+n}` equal (exact mode) or in the
    /// same block.
    pub repeat: Option<(usize, usize)>,
    /// Some `λ_k` had no admissible successor.
    pub hypothesis_violated: bool,
    pub epsilon: f64,
}

impl SpectralChain {
    pub fn exact_mode(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Every step residual is below `ε` (or within the exact tolerance).
    pub fn steps_valid(&self) -> bool {
        self.step_residuals.iter().all(|&r| {
            if self.exact_mode() {
                r <= EXACT_TOLERANCE
            } else {
                r < self.epsilon
            }
        })
    }
}

fn check_spectrum_size(spectrum: &[CircleAngle], d: u32) -> Result<()> {
    if spectrum.len() > d as usize {
        return Err(Error::Precondition(format!(
            "{} eigenphases exceed d = {d}",
            spectrum.len()
        )));
    }
    Ok(())
}

/// Greedy chain `λ₀ = spectrum[start]`, `3λ_k ≈ 2λ_{k+1}`.
///
/// `eps = 0` requires `3λ_k = 2λ_{k+1}` up to [`EXACT_TOLERANCE`]. Among
/// admissible successors the smallest residual wins, then the smallest index.
pub fn spectral_chain(spectrum: &[CircleAngle], eps: f64, d: u32, start: usize) -> Result<SpectralChain> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} must be finite and non-negative"
        )));
    }
    check_spectrum_size(spectrum, d)?;
    if start >= spectrum.len() {
        return Err(Error::InvalidArgument(format!(
            "start {start} outside a spectrum of size {}",
            spectrum.len()
        )));
    }
    let exact = eps == 0.0;
    let n = n_d_for(d)?;
    let blocks: Vec<BigUint> = spectrum.iter().map(|&a| nearest_numerator(a, &n).numerator).collect();
    let same = |i: usize, j: usize| {
        if exact {
            spectrum[i].dist(spectrum[j]) <= EXACT_TOLERANCE
        } else {
            blocks[i] == blocks[j]
        }
    };
    let admissible = |r: f64| if exact { r <= EXACT_TOLERANCE } else { r < eps };

    let mut indices = vec![start];
    let mut step_residuals = Vec::new();
    let mut repeat = None;
    let mut hypothesis_violated = false;
    while indices.len() < d as usize + 1 {
        let last = spectrum[*indices.last().unwrap()];
        let target = last * 3;
        let next = spectrum
            .iter()
            .enumerate()
            .map(|(j, &a)| (j, (target - a * 2).abs()))
            .filter(|&(_, r)| admissible(r))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((j, r)) = next else {
            hypothesis_violated = true;
            break;
        };
        let m = indices.len();
        indices.push(j);
        step_residuals.push(r);
        if let Some(k) = (0..m).find(|&k| same(indices[k], j)) {
            repeat = Some((k, m - k));
            break;
        }
    }
    Ok(SpectralChain {
        angles: indices.iter().map(|&i| spectrum[i]).collect(),
        indices,
        step_residuals,
        repeat,
        hypothesis_violated,
        epsilon: eps,
    })
}

/// One chain from every starting eigenphase.
pub fn spectral_chains(spectrum: &[CircleAngle], eps: f64, d: u32) -> Result<Vec<SpectralChain>> {
    (0..spectrum.len())
        .map(|s| spectral_chain(spectrum, eps, d, s))
        .collect()
}

fn n_d_for(d: u32) -> Result<BigUint> {
    Ok(WitnessConstants::compute(d as i64)?.n_d)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub angle: CircleAngle,
    #[serde(with = "biguint_string")]
    pub numerator: BigUint,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueCertificate {
    pub d: u32,
    #[serde(with = "biguint_string")]
    pub n_d: BigUint,
    pub entries: Vec<CertificateEntry>,
}

impl EigenvalueCertificate {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    /// Every residual is below `3^d·d·ε`.
    pub fn passes_at(&self, eps: f64) -> bool {
        let level = 3f64.powi(self.d as i32) * self.d as f64 * eps;
        self.entries.iter().all(|e| e.residual < level)
    }
}

/// Nearest `μ/N_d` for each eigenphase.
pub fn eigenvalue_certificate(spectrum: &[CircleAngle], d: u32) -> Result<EigenvalueCertificate> {
    check_spectrum_size(spectrum, d)?;
    let n = n_d_for(d)?;
    let entries = spectrum
        .iter()
        .map(|&angle| {
            let near = nearest_numerator(angle, &n);
            CertificateEntry {
                angle,
                numerator: near.numerator,
                residual: near.residual,
            }
        })
        .collect();
    Ok(EigenvalueCertificate { d, n_d: n, entries })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    #[serde(with = "biguint_string")]
    pub numerator: BigUint,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub d: u32,
    #[serde(with = "biguint_string")]
    pub n_d: BigUint,
    /// Sorted by numerator.
    pub blocks: Vec<Block>,
    pub angles: Vec<CircleAngle>,
}

impl BlockPartition {
    pub fn block_of(&self, index: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.members.contains(&index))
    }

    pub fn numerator_of(&self, index: usize) -> Option<&BigUint> {
        self.block_of(index).map(|b| &self.blocks[b].numerator)
    }

    /// Smallest circle distance between angles in different blocks.
    pub fn min_cross_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (a, ba) in self.blocks.iter().enumerate() {
            for bb in &self.blocks[a + 1..] {
                for &i in &ba.members {
                    for &j in &bb.members {
                        let d = self.angles[i].dist(self.angles[j]);
                        best = Some(best.map_or(d, |b: f64| b.min(d)));
                    }
                }
            }
        }
        best
    }

    /// Cross-block pairs are more than `2/(3N_d)` apart.
    pub fn separated(&self) -> bool {
        let limit = 2.0 / (3.0 * self.n_d_f64());
        self.min_cross_separation().is_none_or(|s| s > limit)
    }

    fn n_d_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.n_d).unwrap_or(f64::INFINITY)
    }

    /// Numerator `μ'` with `2μ' ≡ 3μ (mod N_d)`.
    pub fn three_halves(&self, numerator: &BigUint) -> BigUint {
        three_halves_numerator(numerator, &self.n_d)
    }
}

/// Groups eigenphases by nearest numerator over `N_d`.
pub fn block_partition(spectrum: &[CircleAngle], d: u32) -> Result<BlockPartition> {
    let cert = eigenvalue_certificate(spectrum, d)?;
    let mut blocks: Vec<Block> = Vec::new();
    for (i, e) in cert.entries.iter().enumerate() {
        match blocks.iter_mut().find(|b| b.numerator == e.numerator) {
            Some(b) => b.members.push(i),
            None => blocks.push(Block {
                numerator: e.numerator.clone(),
                members: vec![i],
            }),
        }
    }
    blocks.sort_by(|a, b| a.numerator.cmp(&b.numerator));
    Ok(BlockPartition {
        d,
        n_d: cert.n_d,
        blocks,
        angles: spectrum.to_vec(),
    })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    /// Largest `‖P_{λ'}VP_λ‖` or `‖P_λV⁻¹P_{λ'}‖` over incompatible pairs.
    pub max_cross_norm: f64,
    pub epsilon: f64,
    /// `3N_dε`.
    pub bound: f64,
    pub in_regime: bool,
    pub pairs_checked: usize,
}

impl SuppressionReport {
    pub fn within_bound(&self) -> bool {
        self.max_cross_norm <= self.bound
    }
}

fn block_norm(m: &DMatrix<C64>, rows: &[usize], cols: &[usize]) -> f64 {
    let b = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    if b.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    b.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Norms of `V` between eigenspaces of `U` whose blocks are not related by
/// `μ ↦ 3μ/2`.
///
/// `partition` must be built from `decomposition.angles()` so that member
/// indices address eigenvector columns.
pub fn off_block_suppression(
    pair: &UnitaryPair,
    decomposition: &SpectralDecomposition,
    partition: &BlockPartition,
) -> Result<SuppressionReport> {
    if decomposition.angles().len() != pair.dim() || partition.angles.as_slice() != decomposition.angles() {
        return Err(Error::InvalidArgument(
            "partition does not match the decomposition".into(),
        ));
    }
    let constants = WitnessConstants::compute(partition.d as i64)?;
    let epsilon = relation_defect(pair);
    let w = decomposition.eigenvectors().inner();
    let v_eig = w.adjoint() * pair.v().inner() * w;
    let v_inv_eig = w.adjoint() * pair.v().inner().adjoint() * w;

    let mut max_cross_norm: f64 = 0.0;
    let mut pairs_checked = 0;
    for group in decomposition.groups() {
        let mu = partition
            .numerator_of(group.members[0])
            .ok_or_else(|| Error::InvalidArgument("eigenphase missing from partition".into()))?;
        let image = partition.three_halves(mu);
        for other in decomposition.groups() {
            let mu_other = partition
                .numerator_of(other.members[0])
                .expect("partition covers every index");
            if *mu_other == image {
                continue;
            }
            pairs_checked += 1;
            max_cross_norm = max_cross_norm
                .max(block_norm(&v_eig, &other.members, &group.members))
                .max(block_norm(&v_inv_eig, &group.members, &other.members));
        }
    }
    let n = num_traits::ToPrimitive::to_f64(&constants.n_d).unwrap_or(f64::INFINITY);
    Ok(SuppressionReport {
        max_cross_norm,
        epsilon,
        bound: 3.0 * n * epsilon,
        in_regime: constants.below_threshold(epsilon),
        pairs_checked,
    })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactVerdict {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// `100·tol·d`.
    pub delta_tolerance: f64,
    pub commutator_ok: bool,
    /// Two eigenphases of `U` at circle distance `1/2`.
    pub antipodal_pair: Option<(CircleAngle, CircleAngle)>,
    pub passed: bool,
}

fn find_antipode(angles: &[CircleAngle]) -> Option<(CircleAngle, CircleAngle)> {
    for (i, &a) in angles.iter().enumerate() {
        for &b in &angles[i + 1..] {
            if (a.dist(b) - 0.5).abs() <= ANTIPODE_TOLERANCE {
                return Some((a, b));
            }
        }
    }
    None
}

/// For a pair with `ε ≤ tol`: `δ ≤ 100·tol·d` and no antipodal eigenphases.
pub fn verify_exact_implication(pair: &UnitaryPair, tol: f64) -> Result<ExactVerdict> {
    let epsilon = relation_defect(pair);
    if epsilon > tol {
        return Err(Error::Precondition(format!(
            "relation defect {epsilon} exceeds tolerance {tol}"
        )));
    }
    let d = pair.dim();
    let delta = commutator_defect(pair);
    let delta_tolerance = EXACT_SLACK * tol * d as f64;
    let spectrum = unitary_spectrum(pair.u())?;
    let angles: Vec<CircleAngle> = spectrum.groups().iter().map(|g| g.angle).collect();
    let antipodal_pair = find_antipode(&angles);
    let commutator_ok = delta <= delta_tolerance;
    Ok(ExactVerdict {
        d,
        epsilon,
        delta,
        delta_tolerance,
        commutator_ok,
        passed: commutator_ok && antipodal_pair.is_none(),
        antipodal_pair,
    })
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    InRegime,
    OutOfRegime,
    /// The threshold lies below the resolution at which `ε` is computed.
    Unresolvable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub d: u32,
    pub epsilon: f64,
    pub delta: f64,
    /// `1/(6·3^d·d·N_d)` as an exact fraction.
    pub epsilon_threshold: String,
    pub epsilon_threshold_f64: f64,
    /// `4d³N_d`, exact.
    pub bound_coefficient: String,
    /// `4d³N_dε`.
    pub bound: f64,
    pub regime: Regime,
    pub in_regime: bool,
    pub bound_satisfied: bool,
    /// `ε ≤ 1e-10`; the bound is then read with the exact-pair slack.
    pub exact_mode: bool,
}

impl WitnessVerdict {
    /// In regime implies bound satisfied.
    pub fn consistent(&self) -> bool {
        !self.in_regime || self.bound_satisfied
    }
}

pub fn verify_quantitative(pair: &UnitaryPair) -> Result<WitnessVerdict> {
    verify_quantitative_at(pair, pair.dim() as u32)
}

/// Verdict with dimension bound `d ≥ dim`.
pub fn verify_quantitative_at(pair: &UnitaryPair, d: u32) -> Result<WitnessVerdict> {
    if (d as usize) < pair.dim() {
        return Err(Error::InvalidArgument(format!(
            "d = {d} below the pair dimension {}",
            pair.dim()
        )));
    }
    let c = WitnessConstants::compute(d as i64)?;
    let epsilon = relation_defect(pair);
    let delta = commutator_defect(pair);
    let regime = if epsilon == 0.0 {
        Regime::InRegime
    } else if c.epsilon_threshold < RESOLVABLE_THRESHOLD {
        Regime::Unresolvable
    } else if c.below_threshold(epsilon) {
        Regime::InRegime
    } else {
        Regime::OutOfRegime
    };
    let exact_mode = epsilon <= EXACT_TOLERANCE;
    let bound = c.bound_coefficient * epsilon;
    let bound_satisfied = if exact_mode {
        delta <= bound.max(EXACT_SLACK * EXACT_TOLERANCE * d as f64)
    } else {
        exact_less(delta, &c.bound_coefficient_exact, epsilon)
    };
    Ok(WitnessVerdict {
        d,
        epsilon,
        delta,
        epsilon_threshold: c.threshold_string(),
        epsilon_threshold_f64: c.epsilon_threshold,
        bound_coefficient: c.bound_coefficient_exact.to_string(),
        bound,
        in_regime: regime == Regime::InRegime,
        regime,
        bound_satisfied,
        exact_mode,
    })
}

/// `δ < k·ε` on the exact values of the doubles.
fn exact_less(delta: f64, k: &BigUint, epsilon: f64) -> bool {
    match (BigRational::from_float(delta), BigRational::from_float(epsilon)) {
        (Some(a), Some(b)) => a < b * BigRational::from_integer(BigInt::from(k.clone())),
        _ => false,
    }
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
