//! Derivative-free search over pairs of unitaries for large commutator defect
//! at small relation defect.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::WitnessConstants;
use crate::construction::pentagonal_triple;
use crate::error::{Error, Result};
use crate::operator::{commutator_defect, relation_defect, unitary_spectrum, ComplexMatrix, UnitaryPair, C64};

/// Weight on the budget violation in constrained mode.
pub const CONSTRAINT_PENALTY: f64 = 1e6;

/// Relative gap below which the top singular value counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub d: usize,
    pub gamma: f64,
    /// Polls per restart; the starting point is evaluated for free.
    pub max_evaluations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub initial_step: f64,
    pub shrink: f64,
    pub min_step: f64,
    /// Constrained mode: maximize `δ` subject to `ε ≤ budget`.
    pub epsilon_budget: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            d: 2,
            gamma: 1.0,
            max_evaluations: 2000,
            restarts: 4,
            seed: 0,
            initial_step: 0.25,
            shrink: 0.5,
            min_step: 1e-9,
            epsilon_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.d < 1 {
            return bad("d must be at least 1");
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and non-negative");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial step must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if self.min_step.is_nan() || self.min_step <= 0.0 {
            return bad("minimum step must be positive");
        }
        if let Some(b) = self.epsilon_budget {
            if !(b >= 0.0 && b.is_finite()) {
                return bad("epsilon budget must be finite and non-negative");
            }
        }
        Ok(())
    }

    pub fn objective(&self) -> Objective {
        match self.epsilon_budget {
            Some(budget) => Objective::Constrained { budget },
            None => Objective::Penalty { gamma: self.gamma },
        }
    }

    pub fn parameter_count(&self) -> usize {
        2 * self.d * self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Objective {
    /// `ε − γδ`.
    Penalty { gamma: f64 },
    /// `max(0, ε − budget)·10⁶ − δ`.
    Constrained { budget: f64 },
}

impl Objective {
    pub fn value(self, epsilon: f64, delta: f64) -> f64 {
        match self {
            Objective::Penalty { gamma } => epsilon - gamma * delta,
            Objective::Constrained { budget } => (epsilon - budget).max(0.0) * CONSTRAINT_PENALTY - delta,
        }
    }
}

/// `ε(pair) − γ·δ(pair)`.
pub fn objective(pair: &UnitaryPair, gamma: f64) -> f64 {
    Objective::Penalty { gamma }.value(relation_defect(pair), commutator_defect(pair))
}

// ---------------------------------------------------------------------------

fn dimension_of(len: usize) -> Result<usize> {
    let d = ((len / 2) as f64).sqrt().round() as usize;
    if len == 0 || 2 * d * d != len {
        return Err(Error::InvalidArgument(format!(
            "{len} parameters is not 2·d² for any d ≥ 1"
        )));
    }
    Ok(d)
}

/// `d²` reals → skew-Hermitian `A`: first the `d` imaginary diagonal parts,
/// then `(re, im)` of each strict-lower entry, row by row.
fn generator(p: &[f64], d: usize) -> ComplexMatrix {
    let mut a = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for i in 0..d {
        a[(i, i)] = C64::new(0.0, p[i]);
    }
    let mut k = d;
    for i in 1..d {
        for j in 0..i {
            let z = C64::new(p[k], p[k + 1]);
            a[(i, j)] = z;
            a[(j, i)] = -z.conj();
            k += 2;
        }
    }
    ComplexMatrix::new(a).expect("finite parameters")
}

fn generator_params(a: &ComplexMatrix) -> Vec<f64> {
    let d = a.dim();
    let mut p: Vec<f64> = (0..d).map(|i| a.get(i, i).im).collect();
    for i in 1..d {
        for j in 0..i {
            // average with the mirrored entry to stay exactly skew-Hermitian
            let z = (a.get(i, j) - a.get(j, i).conj()) * 0.5;
            p.extend([z.re, z.im]);
        }
    }
    p
}

/// `(exp A, exp B)` from `2d²` reals.
pub fn parameterize(params: &[f64]) -> Result<UnitaryPair> {
    let d = dimension_of(params.len())?;
    if params.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (pa, pb) = params.split_at(d * d);
    UnitaryPair::new(
        generator(pa, d).exp_skew_hermitian(),
        generator(pb, d).exp_skew_hermitian(),
    )
}

/// A skew-Hermitian logarithm of a unitary, from its eigendecomposition.
pub fn unitary_log(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let s = unitary_spectrum(u)?;
    let w = s.eigenvectors().inner();
    let d = u.dim();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(0.0, std::f64::consts::TAU * s.angles()[i].centered())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    ComplexMatrix::new(w * diag * w.adjoint())
}

/// Parameters whose [`parameterize`] reproduces `pair` up to rounding.
pub fn params_from_pair(pair: &UnitaryPair) -> Result<Vec<f64>> {
    let mut p = generator_params(&unitary_log(pair.u())?);
    p.extend(generator_params(&unitary_log(pair.v())?));
    Ok(p)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub objective: f64,
    /// Larger of `‖U†U − I‖`, `‖V†V − I‖`.
    pub unitarity_residual: f64,
}

impl Candidate {
    pub fn evaluate(params: Vec<f64>, objective: Objective) -> Result<Self> {
        let pair = parameterize(&params)?;
        let (epsilon, delta) = (relation_defect(&pair), commutator_defect(&pair));
        let (ru, rv) = pair.unitarity_residuals();
        Ok(Candidate {
            objective: objective.value(epsilon, delta),
            params,
            epsilon,
            delta,
            unitarity_residual: ru.max(rv),
        })
    }

    pub fn pair(&self) -> UnitaryPair {
        parameterize(&self.params).expect("parameters were valid when evaluated")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub restart: usize,
    /// Polls spent when the improvement was found.
    pub evaluation: usize,
    pub objective: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartResult {
    pub restart: usize,
    pub initial: Candidate,
    pub best: Candidate,
    pub evaluations: usize,
    pub events: Vec<TraceEvent>,
    /// Largest `δ` among evaluated points with `ε ≤ budget` (constrained mode).
    pub best_feasible_delta: Option<f64>,
    pub max_unitarity_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub restarts: Vec<RestartResult>,
    /// Pareto-optimal `(ε, δ)` among improvement events: no other event has
    /// smaller `ε` and larger `δ`.
    pub frontier: Vec<(f64, f64)>,
}

impl SearchTrace {
    pub fn total_evaluations(&self) -> usize {
        self.restarts.iter().map(|r| r.evaluations).sum()
    }

    pub fn monotone(&self) -> bool {
        self.restarts
            .iter()
            .all(|r| r.events.windows(2).all(|w| w[1].objective <= w[0].objective))
    }

    pub fn best_feasible_delta(&self) -> Option<f64> {
        self.restarts
            .iter()
            .filter_map(|r| r.best_feasible_delta)
            .reduce(f64::max)
    }

    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.restarts.iter().flat_map(|r| r.events.iter())
    }

    /// One JSON object per improvement event.
    pub fn to_jsonl(&self) -> String {
        self.events()
            .map(|e| serde_json::to_string(e).expect("event serializes") + "\n")
            .collect()
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn random_start(config: &SearchConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let scale = 1.0 / (config.d as f64).sqrt();
    (0..config.parameter_count())
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn pattern_search(config: &SearchConfig, restart: usize, start: Vec<f64>) -> Result<RestartResult> {
    let objective = config.objective();
    let budget = config.epsilon_budget;
    let initial = Candidate::evaluate(start, objective)?;
    let mut best = initial.clone();
    let mut step = config.initial_step;
    let mut evaluations = 0;
    let mut max_unitarity_residual = initial.unitarity_residual;
    let feasible = |c: &Candidate| budget.filter(|&b| c.epsilon <= b).map(|_| c.delta);
    let mut best_feasible_delta = feasible(&initial);
    let event = |c: &Candidate, evaluation: usize, step: f64| TraceEvent {
        restart,
        evaluation,
        objective: c.objective,
        epsilon: c.epsilon,
        delta: c.delta,
        step,
    };
    let mut events = vec![event(&initial, 0, step)];

    'outer: while step >= config.min_step && evaluations < config.max_evaluations {
        let mut improved = false;
        for i in 0..best.params.len() {
            for sign in [1.0, -1.0] {
                if evaluations >= config.max_evaluations {
                    break 'outer;
                }
                let mut p = best.params.clone();
                p[i] += sign * step;
                let c = Candidate::evaluate(p, objective)?;
                evaluations += 1;
                max_unitarity_residual = max_unitarity_residual.max(c.unitarity_residual);
                if let Some(delta) = feasible(&c) {
                    best_feasible_delta = Some(best_feasible_delta.map_or(delta, |b: f64| b.max(delta)));
                }
                if c.objective < best.objective {
                    best = c;
                    events.push(event(&best, evaluations, step));
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= config.shrink;
        }
    }
    Ok(RestartResult {
        restart,
        initial,
        best,
        evaluations,
        events,
        best_feasible_delta,
        max_unitarity_residual,
    })
}

fn pareto(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut front: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if front.last().is_none_or(|q| p.1 > q.1) {
            front.push(p);
        }
    }
    front
}

/// Pattern search from `restarts` starting points in parallel.
///
/// Restart `r` draws its start from the ChaCha8 stream `r` of `seed`; when
/// `initial` is given it replaces the start of restart 0. The winner is the
/// smallest `(objective, restart)`.
pub fn optimize_from(config: &SearchConfig, initial: Option<Vec<f64>>) -> Result<(Candidate, SearchTrace)> {
    config.validate()?;
    if let Some(p) = &initial {
        if p.len() != config.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: config.parameter_count(),
                actual: p.len(),
            });
        }
    }
    let results: Vec<RestartResult> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(config.seed, r);
            let start = match (&initial, r) {
                (Some(p), 0) => p.clone(),
                _ => random_start(config, &mut rng),
            };
            pattern_search(config, r, start)
        })
        .collect::<Result<_>>()?;
    let best = results
        .iter()
        .min_by(|a, b| {
            a.best
                .objective
                .total_cmp(&b.best.objective)
                .then(a.restart.cmp(&b.restart))
        })
        .map(|r| r.best.clone())
        .expect("at least one restart");
    let points: Vec<(f64, f64)> = results
        .iter()
        .flat_map(|r| r.events.iter().map(|e| (e.epsilon, e.delta)))
        .collect();
    Ok((
        best,
        SearchTrace {
            frontier: pareto(&points),
            restarts: results,
        },
    ))
}

pub fn optimize(config: &SearchConfig) -> Result<(Candidate, SearchTrace)> {
    optimize_from(config, None)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon_budget: f64,
    pub best_delta: f64,
    /// `4d³N_d·budget`.
    pub bound: f64,
    /// `best_delta / bound`; `0` when nothing beyond `δ = 0` was found.
    pub ratio: f64,
    pub evaluations: usize,
    /// The budget is below `1/(6·3^d·d·N_d)`.
    pub in_regime: bool,
}

impl ScanRow {
    pub const CSV_HEADER: &'static str = "epsilon_budget,best_delta,bound,ratio,evaluations";

    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{}",
            self.epsilon_budget, self.best_delta, self.bound, self.ratio, self.evaluations
        )
    }
}

pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut s = String::from(ScanRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Exact pair in dimension `d`: copies of the pentagonal triple padded with
/// the trivial `1×1` pair.
pub fn exact_start(d: usize) -> Result<Vec<f64>> {
    if d < 1 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    let mut blocks = vec![pentagonal_triple(); d / 3];
    blocks.extend(std::iter::repeat_n(UnitaryPair::identity(1), d % 3));
    let pair = blocks
        .iter()
        .skip(1)
        .fold(blocks[0].clone(), |acc, b| acc.direct_sum(b));
    params_from_pair(&pair)
}

/// Largest feasible `δ` found under each relation-defect budget.
///
/// Restart 0 of every budget starts at [`exact_start`]. The step floor is
/// lowered to `budget/10` when that is smaller than `min_step`.
pub fn tightness_scan(d: usize, epsilon_grid: &[f64], config: &SearchConfig) -> Result<Vec<ScanRow>> {
    let constants = WitnessConstants::compute(d as i64)?;
    let start = exact_start(d)?;
    epsilon_grid
        .iter()
        .map(|&budget| {
            let min_step = if budget > 0.0 {
                config.min_step.min(budget / 10.0)
            } else {
                config.min_step
            };
            let cfg = SearchConfig {
                d,
                epsilon_budget: Some(budget),
                min_step,
                ..config.clone()
            };
            let (_, trace) = optimize_from(&cfg, Some(start.clone()))?;
            let best_delta = trace.best_feasible_delta().unwrap_or(0.0);
            let bound = constants.bound_coefficient * budget;
            let ratio = if best_delta == 0.0 {
                0.0
            } else if bound == 0.0 {
                f64::INFINITY
            } else {
                best_delta / bound
            };
            Ok(ScanRow {
                epsilon_budget: budget,
                best_delta,
                bound,
                ratio,
                evaluations: trace.total_evaluations(),
                in_regime: constants.below_threshold(budget),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub coordinates: Vec<usize>,
    pub h: f64,
    /// Central differences with steps `h`, `h/2`, `h/4`.
    pub estimates: Vec<[f64; 3]>,
    /// `(D(h) − D(h/2)) / (D(h/2) − D(h/4))`, near 4 at smooth points.
    pub richardson_ratios: Vec<f64>,
    /// Largest `|D(h) − D(h/2)|`.
    pub max_discrepancy: f64,
    /// The top singular values of both defect matrices are simple.
    pub smooth: bool,
}

fn top_gap(m: &ComplexMatrix) -> f64 {
    let mut s: Vec<f64> = m.inner().clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    match s.as_slice() {
        [a, b, ..] if *a > 0.0 => (a - b) / a,
        [a, ..] if *a > 0.0 => 1.0,
        _ => 0.0,
    }
}

/// Finite-difference probe of the penalty objective at up to 10 random
/// coordinates.
pub fn gradient_check(params: &[f64], gamma: f64, h: f64, seed: u64) -> Result<GradientCheck> {
    let pair = parameterize(params)?;
    let smooth = top_gap(&pair.relation_difference()) > DEGENERACY_TOLERANCE
        && top_gap(&pair.commutator_difference()) > DEGENERACY_TOLERANCE;
    let f = |p: &[f64]| parameterize(p).map(|q| objective(&q, gamma));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coordinates = sample(&mut rng, params.len(), params.len().min(10)).into_vec();
    let mut estimates = Vec::new();
    for &i in &coordinates {
        let mut e = [0.0; 3];
        for (k, step) in [h, h / 2.0, h / 4.0].into_iter().enumerate() {
            let (mut plus, mut minus) = (params.to_vec(), params.to_vec());
            plus[i] += step;
            minus[i] -= step;
            e[k] = (f(&plus)? - f(&minus)?) / (2.0 * step);
        }
        estimates.push(e);
    }
    let richardson_ratios = estimates.iter().map(|e| (e[0] - e[1]) / (e[1] - e[2])).collect();
    let max_discrepancy = estimates.iter().map(|e| (e[0] - e[1]).abs()).fold(0.0, f64::max);
    Ok(GradientCheck {
        coordinates,
        h,
        estimates,
        richardson_ratios,
        max_discrepancy,
        smooth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::cyclic_pair;
    use crate::operator::ComplexMatrix;

    #[test]
    fn zero_parameters_give_identity() {
        let p = parameterize(&[0.0; 8]).unwrap();
        assert_eq!(p.u(), &ComplexMatrix::identity(2));
        assert_eq!(p.v(), &ComplexMatrix::identity(2));
        assert!(parameterize(&[0.0; 7]).is_err());
        assert!(parameterize(&[]).is_err());
    }

    #[test]
    fn planar_rotation() {
        let theta = 0.3;
        // A = [[0, −θ], [θ, 0]]: strict-lower entry θ
        let p = parameterize(&[0.0, 0.0, theta, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let (c, s) = (theta.cos(), theta.sin());
        let expected = [[c, -s], [s, c]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert!((p.u().get(i, j) - C64::new(x, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn exp_inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params: Vec<f64> = (0..18).map(|_| rng.sample(StandardNormal)).collect();
        let a = generator(&params[..9], 3);
        let prod = &a.exp_skew_hermitian() * &a.scale(C64::new(-1.0, 0.0)).exp_skew_hermitian();
        assert!((&prod - &ComplexMatrix::identity(3)).operator_norm() <= 1e-12);
        let pair = parameterize(&params).unwrap();
        let back = parameterize(&params_from_pair(&pair).unwrap()).unwrap();
        assert!((pair.u() - back.u()).operator_norm() < 1e-10);
        assert!((pair.v() - back.v()).operator_norm() < 1e-10);
    }

    #[test]
    fn objective_examples() {
        assert_eq!(objective(&UnitaryPair::identity(3), 5.0), 0.0);
        assert_eq!(objective(&cyclic_pair(5).unwrap(), 1.0), 0.0);
        let u = ComplexMatrix::diagonal_phases(&[
            crate::circle::CircleAngle::ZERO,
            crate::circle::CircleAngle::new(1.0 / 3.0),
        ]);
        let p = UnitaryPair::new(u, ComplexMatrix::identity(2)).unwrap();
        assert!((objective(&p, 2.0) - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn objective_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let p = UnitaryPair::new(
                ComplexMatrix::random_unitary(3, &mut rng),
                ComplexMatrix::random_unitary(3, &mut rng),
            )
            .unwrap();
            let w = ComplexMatrix::random_unitary(3, &mut rng);
            assert!((objective(&p, 0.7) - objective(&p.conjugated(&w), 0.7)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let cfg = SearchConfig {
            d: 2,
            max_evaluations: 0,
            restarts: 2,
            seed: 3,
            ..Default::default()
        };
        let (best, trace) = optimize(&cfg).unwrap();
        for r in &trace.restarts {
            assert_eq!(r.initial, r.best);
            assert_eq!(r.evaluations, 0);
        }
        assert!(trace.restarts.iter().any(|r| r.best == best));
    }

    #[test]
    fn search_improves_and_is_deterministic() {
        let cfg = SearchConfig {
            d: 2,
            gamma: 1.0,
            max_evaluations: 5000,
            restarts: 3,
            seed: 11,
            ..Default::default()
        };
        let (best, trace) = optimize(&cfg).unwrap();
        assert!(trace.monotone());
        for r in &trace.restarts {
            assert!(r.best.objective <= r.initial.objective);
            assert!(r.max_unitarity_residual <= 1e-10);
            assert!(r.evaluations <= 5000);
        }
        let (best2, trace2) = optimize(&cfg).unwrap();
        assert_eq!(best, best2);
        assert_eq!(trace, trace2);
        assert_eq!(trace.to_jsonl(), trace2.to_jsonl());
    }

    #[test]
    fn seeded_at_exact_pair() {
        let start = params_from_pair(&cyclic_pair(5).unwrap()).unwrap();
        for gamma in [0.0, 1.0, 10.0] {
            let cfg = SearchConfig {
                d: 5,
                gamma,
                max_evaluations: 300,
                restarts: 1,
                ..Default::default()
            };
            let (best, trace) = optimize_from(&cfg, Some(start.clone())).unwrap();
            let r = &trace.restarts[0];
            assert!(r.initial.epsilon < 1e-12 && r.initial.delta < 1e-12);
            assert!(best.objective <= r.initial.objective);
            assert!(best.objective <= 1e-12);
        }
    }

    #[test]
    fn frontier_is_pareto() {
        let f = pareto(&[(0.1, 0.5), (0.2, 0.4), (0.05, 0.1), (0.3, 0.9), (0.05, 0.2)]);
        assert_eq!(f, vec![(0.05, 0.2), (0.1, 0.5), (0.3, 0.9)]);
    }

    #[test]
    fn exact_start_is_exact() {
        for d in 1..=7 {
            let p = exact_start(d).unwrap();
            assert_eq!(p.len(), 2 * d * d);
            let pair = parameterize(&p).unwrap();
            assert!(relation_defect(&pair) < 1e-12, "d = {d}");
        }
        assert!(exact_start(0).is_err());
    }

    #[test]
    fn scan_small() {
        let cfg = SearchConfig {
            max_evaluations: 200,
            restarts: 2,
            seed: 1,
            ..Default::default()
        };
        let rows = tightness_scan(3, &[0.0], &cfg).unwrap();
        assert!(rows[0].best_delta <= 1e-9);
        let rows = tightness_scan(2, &[1.0], &cfg).unwrap();
        assert!(rows[0].best_delta <= 2.0 + 1e-12);
        assert!(rows[0].best_delta > 0.0);
        let csv = scan_to_csv(&rows);
        assert!(csv.starts_with("epsilon_budget,best_delta,bound,ratio,evaluations\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn gradient_at_origin_vanishes() {
        let g = gradient_check(&[0.0; 18], 0.0, 1e-3, 0).unwrap();
        assert!(!g.smooth);
        for e in &g.estimates {
            assert!(e.iter().all(|x| x.abs() <= 1e-5));
        }
    }

    #[test]
    fn commutator_defect_degenerate_in_dimension_two() {
        // both words have the same determinant, so the difference has two
        // equal singular values
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params: Vec<f64> = (0..8).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        assert!(!gradient_check(&params, 0.5, 1e-2, 7).unwrap().smooth);
    }

    #[test]
    fn gradient_richardson_at_smooth_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params: Vec<f64> = (0..18).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.7).collect();
        let g = gradient_check(&params, 0.5, 1e-2, 7).unwrap();
        assert!(g.smooth);
        assert_eq!(g.coordinates.len(), 10);
        for r in &g.richardson_ratios {
            assert!((r - 4.0).abs() <= 0.5, "{:?}", g.richardson_ratios);
        }
    }
}
