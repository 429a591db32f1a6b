use gs_operators::bezier::{bezier_row, bezier_weight, Alpha, TruncationPolicy};
use gs_operators::basis::{basis_tail, basis_weight, truncation_index, Regime};
use proptest::prelude::*;

/// Weights by the ratio recurrence `p_{k+1}/p_k`, started from `p_0`.
fn brute_row(n: u64, c: i64, x: f64, len: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut p = match c {
        0 => (-nf * x).exp(),
        -1 => (1.0 - x).powf(nf),
        _ => (1.0 + c as f64 * x).powf(-nf / c as f64),
    };
    let mut row = Vec::with_capacity(len);
    for k in 0..len {
        row.push(p);
        let kf = k as f64;
        p *= match c {
            0 => nf * x / (kf + 1.0),
            -1 => (nf - kf) / (kf + 1.0) * x / (1.0 - x),
            _ => {
                let cf = c as f64;
                (nf / cf + kf) / (kf + 1.0) * cf * x / (1.0 + cf * x)
            }
        };
        if c == -1 && k as u64 >= n {
            p = 0.0;
        }
    }
    row
}

fn tail_of(row: &[f64], k: usize) -> f64 {
    row[k..].iter().rev().sum()
}

#[test]
fn weights_match_recurrence() {
    for &(n, c, x) in &[(10u64, 0i64, 0.7), (25, -1, 0.3), (40, 1, 1.5), (12, 2, 0.4), (30, 3, 2.0)] {
        let row = brute_row(n, c, x, 400);
        let r = Regime::new(c).unwrap();
        let top = if c == -1 { n as usize } else { 60 };
        for (k, &expected) in row.iter().enumerate().take(top + 1) {
            let got = basis_weight(n, k as u64, r, x).unwrap();
            assert!(
                (got - expected).abs() <= 1e-13 * expected.max(1e-300) + 1e-300,
                "n={n} c={c} x={x} k={k}: {got:e} vs {expected:e}"
            );
        }
    }
}

#[test]
fn tails_match_summation() {
    for &(n, c, x) in &[(10u64, 0i64, 0.7), (25, -1, 0.3), (40, 1, 1.5), (12, 2, 0.4)] {
        let row = brute_row(n, c, x, 2000);
        let r = Regime::new(c).unwrap();
        for k in [0usize, 1, 3, 7, 15, 25] {
            let expected = tail_of(&row, k);
            let got = basis_tail(n, k as u64, r, x).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * expected + 1e-300,
                "n={n} c={c} x={x} k={k}: {got:e} vs {expected:e}"
            );
        }
    }
}

#[test]
fn deep_tail_keeps_relative_accuracy() {
    // far right of the mode the summed tail is dominated by its first term
    let r = Regime::new(0).unwrap();
    let j = basis_tail(10, 80, r, 1.0).unwrap();
    let row = brute_row(10, 0, 1.0, 200);
    let expected = tail_of(&row, 80);
    assert!(expected > 0.0 && expected < 1e-40);
    assert!((j / expected - 1.0).abs() < 1e-10, "{j:e} vs {expected:e}");
}

#[test]
fn bezier_weight_oracle() {
    let row = brute_row(30, 0, 1.0, 400);
    let a = Alpha::new(1.5).unwrap();
    let r = Regime::new(0).unwrap();
    for k in 0..80 {
        let j0 = tail_of(&row, k);
        let j1 = tail_of(&row, k + 1);
        let expected = j0.powf(1.5) - j1.powf(1.5);
        let got = bezier_weight(30, k as u64, r, 1.0, a).unwrap();
        // the oracle subtracts two numbers of size j0^1.5
        let oracle_noise = 4.0 * f64::EPSILON * j0.powf(1.5);
        assert!(
            (got - expected).abs() <= 1e-12 * expected + oracle_noise,
            "k={k}: {got:e} vs {expected:e}"
        );
    }
}

#[test]
fn truncation_index_is_minimal() {
    let r = Regime::new(1).unwrap();
    let k = truncation_index(50, r, 2.0, 1e-12, 1_000_000).unwrap();
    assert!(basis_tail(50, k, r, 2.0).unwrap() < 1e-12);
    assert!(basis_tail(50, k - 1, r, 2.0).unwrap() >= 1e-12);
}

fn regime() -> impl Strategy<Value = i64> {
    prop_oneof![Just(-1i64), Just(0), Just(1), Just(2), Just(3)]
}

fn point(c: i64) -> impl Strategy<Value = f64> {
    if c == -1 {
        (0.0f64..=1.0).boxed()
    } else {
        (0.0f64..5.0).boxed()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_of_unity((c, x) in regime().prop_flat_map(|c| (Just(c), point(c))), n in 1u64..300) {
        let row = bezier_row(n, Regime::new(c).unwrap(), x, Alpha::ONE, &TruncationPolicy::default()).unwrap();
        prop_assert!((row.total() + row.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tails_nonincreasing((c, x) in regime().prop_flat_map(|c| (Just(c), point(c))), n in 1u64..200, k in 0u64..150) {
        let r = Regime::new(c).unwrap();
        let kk = if c == -1 { k.min(n) } else { k };
        let a = basis_tail(n, kk, r, x).unwrap();
        let b = basis_tail(n, kk + 1, r, x).unwrap();
        prop_assert!(b <= a + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn bezier_weights_sum_to_one(
        (c, x) in regime().prop_flat_map(|c| (Just(c), point(c))),
        n in 1u64..200,
        alpha in 1.0f64..4.0,
    ) {
        let a = Alpha::new(alpha).unwrap();
        let row = bezier_row(n, Regime::new(c).unwrap(), x, a, &TruncationPolicy::default()).unwrap();
        prop_assert!(row.weights.iter().all(|&q| q >= 0.0));
        prop_assert!((row.total() + row.residual - 1.0).abs() < 1e-11);
    }

    #[test]
    fn alpha_domination(
        (c, x) in regime().prop_flat_map(|c| (Just(c), point(c))),
        n in 1u64..200,
        k in 0u64..120,
        alpha in 1.0f64..5.0,
    ) {
        let r = Regime::new(c).unwrap();
        let kk = if c == -1 { k.min(n) } else { k };
        let q = bezier_weight(n, kk, r, x, Alpha::new(alpha).unwrap()).unwrap();
        let p = basis_weight(n, kk, r, x).unwrap();
        prop_assert!(q <= alpha * p + 1e-12, "q={q:e} p={p:e}");
    }
}
