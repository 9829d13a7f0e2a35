use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bswl_core::circle::{n_d, nearest_numerator, CircleAngle, WitnessConstants};
use bswl_core::construction::{
    apply_word, cyclic_pair, shift_u, truncation_defect_report, verify_intertwining, LatticePoint, OrbitBijection,
    TruncationMode, Window,
};
use bswl_core::experiment::OverlapEstimate;
use bswl_core::operator::{commutator_defect, relation_defect, ComplexMatrix, UnitaryPair};
use bswl_core::witness::{verify_quantitative_at, Regime};
use bswl_core::word::Word;

fn cyclic_length() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![1u64, 5, 7, 11, 13, 17, 19, 23, 25])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circle_distance_is_a_metric(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let (a, b, c) = (CircleAngle::new(a), CircleAngle::new(b), CircleAngle::new(c));
        prop_assert!(a.dist(b) <= 0.5);
        prop_assert_eq!(a.dist(b), b.dist(a));
        prop_assert!(a.dist(c) <= a.dist(b) + b.dist(c) + 1e-15);
    }

    #[test]
    fn nearest_numerator_is_within_half_step(a in 0.0..1.0f64, q in 1u64..100_000) {
        let near = nearest_numerator(CircleAngle::new(a), &BigUint::from(q));
        prop_assert!(near.numerator < BigUint::from(q));
        prop_assert!(near.residual <= 0.5 / q as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn n_d_divides_the_next(d in 1u32..12) {
        let (a, b) = (n_d(d), n_d(d + 1));
        prop_assert_eq!(&b % &a, BigUint::from(0u32));
    }

    #[test]
    fn conjugated_cyclic_sums_commute(l1 in cyclic_length(), l2 in cyclic_length(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = cyclic_pair(l1).unwrap().direct_sum(&cyclic_pair(l2).unwrap());
        let pair = pair.conjugated(&ComplexMatrix::random_unitary(pair.dim(), &mut rng));
        prop_assert!(relation_defect(&pair) < 1e-11);
        prop_assert!(commutator_defect(&pair) < 1e-11);
    }

    #[test]
    fn defects_are_conjugation_invariant(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = UnitaryPair::new(
            ComplexMatrix::random_unitary(d, &mut rng),
            ComplexMatrix::random_unitary(d, &mut rng),
        ).unwrap();
        let w = ComplexMatrix::random_unitary(d, &mut rng);
        let conj = pair.conjugated(&w);
        prop_assert!((relation_defect(&pair) - relation_defect(&conj)).abs() < 1e-12);
        prop_assert!((commutator_defect(&pair) - commutator_defect(&conj)).abs() < 1e-12);
        prop_assert!(relation_defect(&pair) <= 2.0 + 1e-12);
        prop_assert!(commutator_defect(&pair) <= 2.0 + 1e-12);
    }

    #[test]
    fn perturbations_at_d3_respect_the_bound(seed in any::<u64>(), eta in 1e-10..1e-7f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pair = bswl_core::construction::pentagonal_triple().perturbed(eta, &mut rng);
        let v = verify_quantitative_at(&pair, 3).unwrap();
        prop_assert!(v.consistent());
        prop_assert_eq!(v.regime, Regime::InRegime);
        prop_assert!(v.bound_satisfied);
    }

    #[test]
    fn lattice_intertwines_everywhere(x in 0u64..40, y in -1000i64..1000) {
        let v = OrbitBijection::standard();
        prop_assert!(verify_intertwining(&v, &[LatticePoint::new(x, y)]));
    }

    #[test]
    fn lattice_relation_holds_pointwise(x in 0u64..40, y in -1000i64..1000) {
        let v = OrbitBijection::standard();
        let p = LatticePoint::new(x, y);
        prop_assert_eq!(
            apply_word(&v, &Word::relation_lhs(), p),
            apply_word(&v, &Word::relation_rhs(), p)
        );
        prop_assert_eq!(apply_word(&v, &Word::new(vec![]), p), p);
        prop_assert_eq!(shift_u(p).y, y + 1);
    }

    #[test]
    fn compressed_relation_is_exact(cols in 1u64..4, half_height in 1i64..6) {
        let r = truncation_defect_report(Window::new(cols, half_height).unwrap(), TruncationMode::Pxp);
        prop_assert_eq!(r.relation_defect, 0.0);
        prop_assert!(r.interior_count <= r.dim);
    }

    #[test]
    fn overlap_estimate_is_clamped(n in 1u64..10_000, frac in 0.0..=1.0f64) {
        let accepts = ((n as f64) * frac).floor() as u64;
        let e = OverlapEstimate::from_counts(n, accepts).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.overlap_sq_estimate));
        prop_assert!(e.hoeffding_halfwidth > 0.0);
    }
}

#[test]
fn threshold_string_is_exact() {
    let c = WitnessConstants::compute(3).unwrap();
    assert_eq!(c.threshold_string(), "1/1246590");
    assert_eq!(c.bound_coefficient_exact.to_string(), "277020");
    assert!(WitnessConstants::compute(0).is_err());
}
