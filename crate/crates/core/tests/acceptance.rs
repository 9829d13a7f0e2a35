use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bswl_core::circle::{n_d, CircleAngle, WitnessConstants};
use bswl_core::construction::{
    cyclic_pair, lattice_witness_points, pentagonal_triple, shift_u, truncated_pair, verify_intertwining, LatticePoint,
    OrbitBijection, TruncationMode, Window,
};
use bswl_core::error::Error;
use bswl_core::experiment::{probe_states, protocol_step_i, protocol_step_ii, sample_overlap};
use bswl_core::operator::{
    commutator_defect, relation_defect, unitary_spectrum, witness_overlap, ComplexMatrix, StateVector, UnitaryPair, C64,
};
use bswl_core::search::{optimize, tightness_scan, SearchConfig};
use bswl_core::witness::{
    block_partition, eigenvalue_certificate, near_eigenvalue, off_block_suppression, verify_exact_implication,
    verify_quantitative_at, Regime,
};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn oracle_n_d(d: u32) -> BigUint {
    let mut l = BigUint::from(1u32);
    for i in 1..=d {
        let term = BigUint::from(3u32).pow(i) - BigUint::from(2u32).pow(i);
        l = l.lcm(&term);
    }
    BigUint::from(3u32).pow(d) * l
}

fn constants() -> Outcome {
    let expected = ["3", "45", "2565", "100035", "63322155", "1329765255"];
    let mut bad = Vec::new();
    for (d, want) in (1..=6).zip(expected) {
        let got = n_d(d).to_string();
        if got != want || got != oracle_n_d(d).to_string() {
            bad.push(format!("d={d}: {got}"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "N_1..N_6 exact".into()
        } else {
            bad.join(", ")
        },
    )
}

fn cyclic_exact() -> Outcome {
    let mut worst: (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut antipodal = false;
    for l in [5u64, 7, 11, 25] {
        let pair = cyclic_pair(l).expect("valid length");
        worst.0 = worst.0.max(relation_defect(&pair));
        worst.1 = worst.1.max(commutator_defect(&pair));
        let spectrum = unitary_spectrum(pair.u()).expect("unitary");
        let cert = eigenvalue_certificate(spectrum.angles(), l as u32).expect("certificate");
        worst.2 = worst.2.max(cert.max_residual());
        antipodal |= verify_exact_implication(&pair, 1e-10)
            .expect("exact pair")
            .antipodal_pair
            .is_some();
    }
    outcome(
        worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-10 && !antipodal,
        format!(
            "max eps {:.1e}, max delta {:.1e}, max residual {:.1e}, antipodal {antipodal}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn lattice_witness() -> Outcome {
    let window = Window::new(3, 6).expect("window");
    let v = OrbitBijection::standard();
    let sample: Vec<LatticePoint> = window
        .points()
        .filter(|&p| window.contains(shift_u(shift_u(shift_u(p)))))
        .collect();
    let intertwines = verify_intertwining(&v, &sample);
    let distinct = lattice_witness_points(&v).distinct();
    let pair = truncated_pair(window, TruncationMode::Composed);
    let psi = StateVector::basis(window.dim(), window.index(LatticePoint::ORIGIN).expect("origin"));
    let overlap = witness_overlap(&pair, &psi).expect("overlap").norm();
    outcome(
        intertwines && distinct && overlap == 0.0,
        format!(
            "{} points intertwined: {intertwines}, distinct witnesses: {distinct}, overlap {overlap:e}",
            sample.len()
        ),
    )
}

fn random_exact_pair(rng: &mut ChaCha8Rng) -> UnitaryPair {
    let lengths = [1u64, 5, 7, 11, 13, 17, 19, 23, 25, 29];
    let mut pair = cyclic_pair(lengths[rng.random_range(0..lengths.len())]).expect("valid length");
    loop {
        let l = lengths[rng.random_range(0..lengths.len())];
        if pair.dim() + l as usize > 30 || rng.random_bool(0.4) {
            break;
        }
        pair = pair.direct_sum(&cyclic_pair(l).expect("valid length"));
    }
    pair.conjugated(&ComplexMatrix::random_unitary(pair.dim(), rng))
}

fn conjugated_sums() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        worst = worst.max(commutator_defect(&random_exact_pair(&mut rng)));
    }
    outcome(worst <= 1e-9, format!("100 pairs, max delta {worst:.2e}"))
}

fn perturbed_triple() -> Outcome {
    let constants = WitnessConstants::compute(3).expect("d = 3");
    let base = pentagonal_triple();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_cross: f64 = 0.0;
    for _ in 0..100 {
        let pair = base.perturbed(1e-8, &mut rng);
        let eps = relation_defect(&pair);
        let delta = commutator_defect(&pair);
        let spectrum = unitary_spectrum(pair.u()).expect("unitary");
        let partition = block_partition(spectrum.angles(), 3).expect("partition");
        let cross = off_block_suppression(&pair, &spectrum, &partition)
            .expect("suppression")
            .max_cross_norm;
        let ok = eps > 0.0 && constants.below_threshold(eps) && delta < 277020.0 * eps && cross <= 3.0 * 2565.0 * eps;
        if !ok {
            failures += 1;
        }
        worst_ratio = worst_ratio.max(delta / (277020.0 * eps));
        worst_cross = worst_cross.max(cross / (3.0 * 2565.0 * eps));
    }
    outcome(
        failures == 0,
        format!("{failures} failures, max delta/bound {worst_ratio:.2e}, max cross/bound {worst_cross:.2e}"),
    )
}

fn near_eigenvalue_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut cases, mut failures) = (0, 0);
    while cases < 200 {
        let d = rng.random_range(1..=8);
        let w = ComplexMatrix::random_unitary(d, &mut rng);
        let phases: Vec<CircleAngle> = (0..d).map(|_| CircleAngle::new(rng.random())).collect();
        let s = ComplexMatrix::diagonal_phases(&phases).conjugate_by(&w);
        let k = rng.random_range(0..d);
        let mut v = w.inner().column(k).into_owned();
        let noise = StateVector::random(d, &mut rng);
        v += noise.coeffs() * C64::new(rng.random_range(0.0..0.5), 0.0);
        let xi = StateVector::normalized(v.iter().copied().collect()).expect("nonzero");
        let beta = phases[k] + CircleAngle::new(rng.random_range(-0.1..0.1));
        match near_eigenvalue(&s, &xi, beta) {
            Ok(r) => {
                cases += 1;
                if r.gap.is_nan() || r.gap >= r.delta_hat {
                    failures += 1;
                }
            }
            Err(Error::Precondition(_)) => continue,
            Err(_) => {
                cases += 1;
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{cases} cases, {failures} with gap >= delta_hat"),
    )
}

fn swap_calibration() -> Outcome {
    let mut misses = Vec::new();
    for (i, t) in [0.0, 0.5, 1.0].into_iter().enumerate() {
        let miss = (0..100u64)
            .filter(|&rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 * i as u64 + rep);
                let e = sample_overlap(t, 100_000, &mut rng).expect("valid overlap");
                (e.overlap_sq_estimate - t).abs() > 0.02
            })
            .count();
        misses.push(miss);
    }
    let calibrated = misses.iter().all(|&m| m <= 1);

    let window = Window::new(3, 6).expect("window");
    let lattice = truncated_pair(window, TruncationMode::Composed);
    let psi = StateVector::basis(window.dim(), window.index(LatticePoint::ORIGIN).expect("origin"));
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let step_ii = protocol_step_ii(&lattice, &psi, 100_000, &mut rng)
        .expect("step ii")
        .overlap_sq_estimate;

    let mut step_i_min: f64 = 1.0;
    for l in [5u64, 7, 11, 25] {
        let pair = cyclic_pair(l).expect("valid length");
        for s in probe_states(pair.dim(), 5, l) {
            let e = protocol_step_i(&pair, &s.state, 100_000, &mut rng).expect("step i");
            step_i_min = step_i_min.min(e.overlap_sq_estimate);
        }
    }
    outcome(
        calibrated && step_ii <= 0.02 && step_i_min >= 0.98,
        format!(
            "misses per planted value {misses:?}, lattice step (ii) {step_ii:.4}, min cyclic step (i) {step_i_min:.4}"
        ),
    )
}

fn search_sanity() -> Outcome {
    let config = SearchConfig {
        d: 2,
        max_evaluations: 300,
        restarts: 3,
        seed: 9,
        ..SearchConfig::default()
    };
    let deterministic = optimize(&config).expect("search") == optimize(&config).expect("search");

    let threshold = WitnessConstants::compute(3).expect("d = 3").epsilon_threshold;
    let grid: Vec<f64> = [1e-3, 1e-2, 1e-1, 0.5].iter().map(|k| k * threshold).collect();
    let scan_config = SearchConfig {
        max_evaluations: 600,
        restarts: 2,
        seed: 4,
        ..SearchConfig::default()
    };
    let rows = tightness_scan(3, &grid, &scan_config).expect("scan");
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let bounded = rows.iter().all(|r| r.in_regime && r.ratio < 1.0);
    outcome(
        deterministic && bounded,
        format!(
            "deterministic {deterministic}, {} rows, max ratio {max_ratio:.3e}",
            rows.len()
        ),
    )
}

fn regime_honesty() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pair = cyclic_pair(5).expect("valid length").perturbed(1e-9, &mut rng);
    let v = verify_quantitative_at(&pair, 5).expect("verdict");
    outcome(
        v.epsilon > 0.0 && v.regime == Regime::Unresolvable && !v.in_regime,
        format!(
            "eps {:.2e}, threshold {:.2e}, regime {:?}",
            v.epsilon, v.epsilon_threshold_f64, v.regime
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 constants", Duration::from_millis(100), constants),
        ("2 exact cyclic realizations", Duration::from_secs(5), cyclic_exact),
        ("3 lattice witness", Duration::from_secs(1), lattice_witness),
        ("4 conjugated direct sums", Duration::from_secs(30), conjugated_sums),
        ("5 perturbed triple at d=3", Duration::from_secs(10), perturbed_triple),
        ("6 near eigenvalue", Duration::from_secs(5), near_eigenvalue_suite),
        ("7 swap calibration", Duration::from_secs(60), swap_calibration),
        ("8 search determinism and scan", Duration::from_secs(300), search_sanity),
        ("9 regime honesty", Duration::from_secs(60), regime_honesty),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let ok = out.ok && elapsed < limit;
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} ({:.3}s, limit {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
