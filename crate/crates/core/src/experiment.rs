//! Simulated swap tests for the two checks an experimenter can run:
//! (i) `|⟨V⁻¹U²Vφ, U³φ⟩|² = 1` on many states `φ`, and
//! (ii) `⟨UV⁻¹UVψ, V⁻¹UVUψ⟩ = 0` on a witness state `ψ`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{StateVector, UnitaryPair, C64};
use crate::word::Word;

/// Two-sided failure probability of the reported intervals.
pub const CONFIDENCE_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapSample {
    pub accept: bool,
}

/// `(1 + |⟨φ,ψ⟩|²)/2` for unit vectors.
pub fn acceptance_probability(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    phi.ensure_normalized()?;
    psi.ensure_normalized()?;
    let o = phi.inner(psi)?;
    Ok(((1.0 + o.norm_sqr()) / 2.0).clamp(0.5, 1.0))
}

pub fn swap_test_sample<R: Rng + ?Sized>(phi: &StateVector, psi: &StateVector, rng: &mut R) -> Result<SwapSample> {
    Ok(SwapSample {
        accept: rng.random_bool(acceptance_probability(phi, psi)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    pub n: u64,
    pub accepts: u64,
    pub accept_rate: f64,
    /// `clamp(2·rate − 1, 0, 1)`.
    pub overlap_sq_estimate: f64,
    /// Hoeffding half-width for the squared overlap at 99%.
    pub hoeffding_halfwidth: f64,
    /// `2·rate − 1` fell below 0.
    pub clamped: bool,
}

impl OverlapEstimate {
    pub fn from_counts(n: u64, accepts: u64) -> Result<Self> {
        if n == 0 || accepts > n {
            return Err(Error::InvalidArgument(format!("{accepts} accepts out of {n} samples")));
        }
        let accept_rate = accepts as f64 / n as f64;
        let raw = 2.0 * accept_rate - 1.0;
        Ok(OverlapEstimate {
            n,
            accepts,
            accept_rate,
            overlap_sq_estimate: raw.clamp(0.0, 1.0),
            hoeffding_halfwidth: hoeffding_halfwidth(n),
            clamped: raw < 0.0,
        })
    }

    pub fn contains(&self, t: f64) -> bool {
        (self.overlap_sq_estimate - t).abs() <= self.hoeffding_halfwidth
    }
}

/// `2·sqrt(ln(2/α)/(2n))`: the rate interval doubled by the estimator.
pub fn hoeffding_halfwidth(n: u64) -> f64 {
    2.0 * ((2.0 / CONFIDENCE_ALPHA).ln() / (2.0 * n as f64)).sqrt()
}

/// `n` swap tests accepting with probability `(1 + t)/2`.
pub fn sample_overlap<R: Rng + ?Sized>(overlap_sq: f64, n: u64, rng: &mut R) -> Result<OverlapEstimate> {
    if !(0.0..=1.0 + 1e-12).contains(&overlap_sq) {
        return Err(Error::InvalidArgument(format!(
            "squared overlap {overlap_sq} outside [0, 1]"
        )));
    }
    let p = ((1.0 + overlap_sq) / 2.0).clamp(0.5, 1.0);
    let accepts = (0..n).filter(|_| rng.random_bool(p)).count() as u64;
    OverlapEstimate::from_counts(n, accepts)
}

pub fn estimate_overlap<R: Rng + ?Sized>(
    phi: &StateVector,
    psi: &StateVector,
    n: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    let p = acceptance_probability(phi, psi)?;
    sample_overlap(2.0 * p - 1.0, n, rng)
}

/// `|⟨x, y⟩|²` for the outputs of two words.
///
/// Outputs of compressed generators can lose norm. The missing weight is
/// modeled as leaking into flag states orthogonal to everything else, so it
/// contributes nothing to the overlap.
pub fn output_overlap_sq(x: &StateVector, y: &StateVector) -> Result<f64> {
    for v in [x, y] {
        if v.norm() > 1.0 + StateVector::NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm: v.norm() });
        }
    }
    Ok(x.inner(y)?.norm_sqr().min(1.0))
}

fn word_outputs(pair: &UnitaryPair, a: &Word, b: &Word, phi: &StateVector) -> Result<(StateVector, StateVector)> {
    if phi.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            actual: phi.dim(),
        });
    }
    phi.ensure_normalized()?;
    Ok((phi.apply(&pair.evaluate(a))?, phi.apply(&pair.evaluate(b))?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolStep {
    /// `V⁻¹U²Vφ` against `U³φ`.
    #[serde(rename = "i")]
    Relation,
    /// `UV⁻¹UVψ` against `V⁻¹UVUψ`.
    #[serde(rename = "ii")]
    Commutator,
}

impl ProtocolStep {
    pub fn words(self) -> (Word, Word) {
        match self {
            ProtocolStep::Relation => (Word::relation_lhs(), Word::relation_rhs()),
            ProtocolStep::Commutator => (Word::commutator_left(), Word::commutator_right()),
        }
    }

    pub fn exact_overlap_sq(self, pair: &UnitaryPair, state: &StateVector) -> Result<f64> {
        let (a, b) = self.words();
        let (x, y) = word_outputs(pair, &a, &b, state)?;
        output_overlap_sq(&x, &y)
    }

    pub fn run<R: Rng + ?Sized>(
        self,
        pair: &UnitaryPair,
        state: &StateVector,
        n: u64,
        rng: &mut R,
    ) -> Result<OverlapEstimate> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        sample_overlap(self.exact_overlap_sq(pair, state)?, n, rng)
    }
}

/// Estimates `|⟨V⁻¹U²Vφ, U³φ⟩|²`.
pub fn protocol_step_i<R: Rng + ?Sized>(
    pair: &UnitaryPair,
    phi: &StateVector,
    n: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    ProtocolStep::Relation.run(pair, phi, n, rng)
}

/// Estimates `|⟨UV⁻¹UVψ, V⁻¹UVUψ⟩|²`.
pub fn protocol_step_ii<R: Rng + ?Sized>(
    pair: &UnitaryPair,
    psi: &StateVector,
    n: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    ProtocolStep::Commutator.run(pair, psi, n, rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState {
    pub id: String,
    pub state: StateVector,
}

impl LabeledState {
    pub fn new(id: impl Into<String>, state: StateVector) -> Self {
        LabeledState { id: id.into(), state }
    }
}

/// The computational basis followed by `random` Haar-random states.
pub fn probe_states(d: usize, random: usize, seed: u64) -> Vec<LabeledState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<LabeledState> = (0..d)
        .map(|i| LabeledState::new(format!("e{i}"), StateVector::basis(d, i)))
        .collect();
    out.extend((0..random).map(|k| LabeledState::new(format!("random{k}"), StateVector::random(d, &mut rng))));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub step: ProtocolStep,
    pub state_id: String,
    pub words: [String; 2],
    pub estimate: OverlapEstimate,
    /// The value the swap tests sample from.
    pub exact_overlap_sq: f64,
    pub seed: u64,
    /// Index of the random substream used for this record.
    pub stream: u64,
    pub timestamp: String,
}

/// Step (i) on every state in `states`, then step (ii) on every state in
/// `witnesses`. Record `k` samples from ChaCha8 stream `k` of `seed`.
pub fn run_protocol(
    pair: &UnitaryPair,
    states: &[LabeledState],
    witnesses: &[LabeledState],
    n: u64,
    seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    let jobs: Vec<(ProtocolStep, &LabeledState)> = states
        .iter()
        .map(|s| (ProtocolStep::Relation, s))
        .chain(witnesses.iter().map(|s| (ProtocolStep::Commutator, s)))
        .collect();
    jobs.par_iter()
        .enumerate()
        .map(|(k, (step, s))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let exact = step.exact_overlap_sq(pair, &s.state)?;
            let estimate = step.run(pair, &s.state, n, &mut rng)?;
            let (a, b) = step.words();
            Ok(ExperimentRecord {
                step: *step,
                state_id: s.id.clone(),
                words: [a.to_string(), b.to_string()],
                estimate,
                exact_overlap_sq: exact,
                seed,
                stream: k as u64,
                timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            })
        })
        .collect()
}

/// `<base>/<timestamp>-<seed>`.
pub fn run_directory(base: &Path, started: DateTime<Utc>, seed: u64) -> PathBuf {
    base.join(format!("{}-{seed}", started.format("%Y%m%dT%H%M%SZ")))
}

/// Writes `records.jsonl` into `dir`, creating it.
pub fn persist_records(dir: &Path, records: &[ExperimentRecord]) -> Result<PathBuf> {
    let io = |e: std::io::Error| Error::Format(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join("records.jsonl");
    let mut f = fs::File::create(&path).map_err(io)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r)?).map_err(io)?;
    }
    Ok(path)
}

pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let s = fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    s.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// `φ = e₀` and `ψ = √t·e₀ + √(1−t)·e₁`, so `|⟨φ,ψ⟩|² = t`.
pub fn planted_states(t: f64) -> Result<(StateVector, StateVector)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("planted overlap {t} outside [0, 1]")));
    }
    let phi = StateVector::basis(2, 0);
    let psi = StateVector::new(vec![C64::new(t.sqrt(), 0.0), C64::new((1.0 - t).sqrt(), 0.0)])?;
    Ok((phi, psi))
}
