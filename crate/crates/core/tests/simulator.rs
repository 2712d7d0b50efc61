mod common;

use common::*;
use proptest::prelude::*;
use shiftlab_core::catalog::find_entry;
use shiftlab_core::simulator::{classify, run_trajectory, ConvergenceClass, TrajectoryRecord, DEFAULT_TOL};
use shiftlab_core::{basis_vector, seminorm};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trajectory_matches_recomputed_means(op in operator(), x in vector(6), n_max in 8usize..40) {
        let t = run_trajectory(&op, &x, &[0, 2], n_max);
        prop_assert_eq!(t.rows.len(), 2 * n_max);
        let big = op.with_capacity(x.support_len() + n_max + 2);
        for r in t.rows.iter().step_by(5) {
            let c = seminorm(&big.cesaro_mean(&x, r.n), r.k, &big.space);
            let p = seminorm(&big.iterate(&x, r.n), r.k, &big.space) / r.n as f64;
            if c.is_finite() {
                prop_assert!(rel(c, r.cesaro) <= 1e-10, "cesaro n={} k={}: {} vs {}", r.n, r.k, c, r.cesaro);
            }
            if p.is_finite() {
                prop_assert!(rel(p, r.power_over_n) <= 1e-10, "power n={} k={}: {} vs {}", r.n, r.k, p, r.power_over_n);
            }
        }
    }

    // the classes depend on the stored rows and nothing else
    #[test]
    fn classification_is_a_function_of_the_rows(op in operator(), x in vector(6)) {
        let t = run_trajectory(&op, &x, &[0, 1, 3], 32);
        let copy = TrajectoryRecord { rows: t.rows.clone(), ..t.clone() };
        prop_assert_eq!(classify(&t, DEFAULT_TOL), classify(&copy, DEFAULT_TOL));
    }
}

#[test]
fn delta0_on_entire_functions_stays_bounded() {
    let e = find_entry("delta0-infinite").unwrap();
    let t = run_trajectory(&e.op, &basis_vector(5), &[0, 1, 2, 3], 64);
    for (k, c) in classify(&t, DEFAULT_TOL) {
        assert!(c.class.is_bounded(), "k = {k}: {:?}", c);
    }
}

#[test]
fn derivative_iterates_vanish_after_the_degree() {
    let e = find_entry("ddz-infinite").unwrap();
    let t = run_trajectory(&e.op, &basis_vector(5), &[0, 1, 2], 64);
    assert!(t.rows.iter().filter(|r| r.n >= 6).all(|r| r.power_over_n == 0.0 && r.support_width == 0));
    assert!(t.rows.iter().filter(|r| r.n < 6).all(|r| r.power_over_n > 0.0));
}

#[test]
fn growing_cesaro_means_are_flagged() {
    // doubling weights on the disc: ||T^n e_0||_k = (2 e^{-1/(k+1)})^n, which
    // decays for k = 0 and grows for k = 3
    let e = find_entry("delta0-finite").unwrap();
    let op = shiftlab_core::ShiftOperator::new(
        shiftlab_core::ShiftKind::Forward,
        shiftlab_core::WeightSequence::new(shiftlab_core::WeightFamily::Constant(2.0)),
        e.op.space.clone(),
    );
    let t = run_trajectory(&op, &basis_vector(0), &[0, 3], 48);
    let c = classify(&t, DEFAULT_TOL);
    assert_eq!(c[0].1.class, ConvergenceClass::ConvergesToZero);
    assert_eq!(c[1].1.class, ConvergenceClass::Diverges);
}
