#![allow(dead_code)]

use proptest::prelude::*;
use shiftlab_core::{
    make_power_series_space, ExponentSequence, FiniteVector, PNorm, SeriesType, ShiftKind, ShiftOperator, SpaceSpec,
    WeightFamily, WeightSequence,
};

pub fn kind() -> impl Strategy<Value = ShiftKind> {
    prop_oneof![Just(ShiftKind::Backward), Just(ShiftKind::Forward)]
}

pub fn alpha() -> impl Strategy<Value = ExponentSequence> {
    prop_oneof![
        Just(ExponentSequence::Linear),
        Just(ExponentSequence::Logarithmic),
        (0.3f64..1.5).prop_map(|theta| ExponentSequence::Power { theta }),
    ]
}

pub fn series_type() -> impl Strategy<Value = SeriesType> {
    prop_oneof![Just(SeriesType::Finite), Just(SeriesType::Infinite)]
}

pub fn p_norm() -> impl Strategy<Value = PNorm> {
    prop_oneof![Just(PNorm::Finite(1.0)), Just(PNorm::Finite(2.0)), Just(PNorm::Infinity), Just(PNorm::Zero)]
}

pub fn space() -> impl Strategy<Value = SpaceSpec> {
    (alpha(), series_type(), p_norm()).prop_map(|(a, t, p)| make_power_series_space(a, t, p).unwrap())
}

/// Linear exponents and weights kept away from the threshold cases: constant
/// weights with `|ln|w|| >= 0.4` (or `|w| = 1`), polynomial-type weights with
/// exponent 0 or at least 0.5 in size. Near the thresholds the critical `k`,
/// `l` or iterate count lies far outside a small budget.
pub fn linear_operator() -> impl Strategy<Value = ShiftOperator> {
    let space = (series_type(), p_norm()).prop_map(|(t, p)| make_power_series_space(ExponentSequence::Linear, t, p).unwrap());
    let w = prop_oneof![
        (0.4f64..0.69, any::<bool>(), any::<bool>()).prop_map(|(e, up, neg)| {
            let m = if up { e.exp() } else { (-e).exp() };
            WeightFamily::Constant(if neg { -m } else { m })
        }),
        Just(WeightFamily::Constant(1.0)),
        (0.5f64..2.0).prop_map(|theta| WeightFamily::Polynomial { theta }),
        prop_oneof![-1.0f64..-0.5, 0.5f64..1.0]
            .prop_map(|gamma| WeightFamily::ExpAlpha { gamma, alpha: ExponentSequence::Logarithmic }),
        Just(WeightFamily::SqrtShifted),
        Just(WeightFamily::Sqrt),
        Just(WeightFamily::ReciprocalFactorial),
    ];
    (kind(), w, space).prop_map(|(k, w, s)| ShiftOperator::new(k, WeightSequence::new(w), s))
}

/// Weight families whose window products stay within a few hundred orders
/// of magnitude for `m <= 50`.
pub fn weights() -> impl Strategy<Value = WeightFamily> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(WeightFamily::Constant),
        (0.0f64..2.0).prop_map(|theta| WeightFamily::Polynomial { theta }),
        Just(WeightFamily::SqrtShifted),
        Just(WeightFamily::Sqrt),
        Just(WeightFamily::ReciprocalFactorial),
        (-1.0f64..1.0).prop_map(|gamma| WeightFamily::ExpAlpha { gamma, alpha: ExponentSequence::Logarithmic }),
    ]
}

pub fn operator() -> impl Strategy<Value = ShiftOperator> {
    (kind(), weights(), space()).prop_map(|(k, w, s)| ShiftOperator::new(k, WeightSequence::new(w), s))
}

pub fn vector(max_len: usize) -> impl Strategy<Value = FiniteVector> {
    prop::collection::vec(prop_oneof![3 => -4.0f64..4.0, 1 => Just(0.0)], 1..=max_len).prop_map(FiniteVector::new)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
