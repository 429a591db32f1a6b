use gs_operators::basis::{basis_tail, basis_weight, Regime};
use gs_operators::function::{FnIntegrand, Formula, Growth};
use gs_operators::{
    apply_base, apply_bezier, kernel_density, partial_mass, Catalogue, OperatorParams, QuadratureSpec, TruncationPolicy,
};
use proptest::prelude::*;

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn tr() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn power(k: i32) -> FnIntegrand<impl Fn(f64) -> f64 + Sync> {
    FnIntegrand::new(
        move |t: f64| t.powi(k),
        Growth {
            order: k as f64,
            constant: 1.0,
        },
    )
}

#[test]
fn listed_values() {
    let one = power(0);
    for &(n, m, c, x) in &[(10u64, 0i64, 0i64, 0.3), (50, 1, 1, 2.0), (7, 0, -1, 0.6), (30, -1, 2, 0.9)] {
        let p = OperatorParams::new(n, m, c, 1.0).unwrap();
        assert!((apply_base(&p, &one, x, &q(), &tr()).unwrap().value - 1.0).abs() < 1e-10);
    }
    let p = OperatorParams::new(50, 0, 1, 1.0).unwrap();
    assert!((apply_base(&p, &power(1), 0.7, &q(), &tr()).unwrap().value - 0.7).abs() < 1e-8);
    let p = OperatorParams::new(10, 0, 0, 1.0).unwrap();
    assert!((apply_base(&p, &power(2), 1.0, &q(), &tr()).unwrap().value - 1.2).abs() < 1e-8);
}

#[test]
fn cubic_against_closed_form() {
    let p = OperatorParams::new(40, 1, 1, 1.0).unwrap();
    let x = 0.5;
    // (e1 e2 x³ + 6 e1 x² + 6x) / (d1 d2), e_j = n+(m+j)c, d_j = n+(m−j)c
    let (e1, e2, d1, d2) = (42.0, 43.0, 40.0, 39.0);
    let exact = (e1 * e2 * x * x * x + 6.0 * e1 * x * x + 6.0 * x) / (d1 * d2);
    let got = apply_bezier(&p, &power(3), x, &q(), &tr()).unwrap().value;
    assert!((got / exact - 1.0).abs() < 1e-7, "{got} vs {exact}");
}

#[test]
fn normalization_for_every_alpha() {
    let one = power(0);
    for alpha in [1.0, 1.5, 2.5] {
        for &(n, m, c, x) in &[(20u64, 0i64, 0i64, 0.5), (50, 2, 1, 2.0), (20, -1, -1, 0.1), (100, 1, 2, 1.0)] {
            let p = OperatorParams::new(n, m, c, alpha).unwrap();
            let v = apply_bezier(&p, &one, x, &q(), &tr()).unwrap().value;
            assert!((v - 1.0).abs() < 1e-10, "alpha={alpha} n={n} m={m} c={c} x={x}: {v}");
        }
    }
}

/// Absolutely continuous part `w Σ_{k≥1} Q_k p_{b,k−1}(t)` summed directly.
fn brute_density(n: u64, m: i64, c: i64, alpha: f64, x: f64, t: f64) -> f64 {
    let r = Regime::new(c).unwrap();
    let a = (n as i64 + m * c) as u64;
    let w = (n as i64 + (m + 1) * c) as f64;
    let b = (n as i64 + (m + 2) * c) as u64;
    // for c = −1 the k = a term is the atom at 1
    let top = if c == -1 { a - 1 } else { 400 };
    let mut sum = 0.0;
    for k in 1..=top {
        let qk = basis_tail(a, k, r, x).unwrap().powf(alpha) - basis_tail(a, k + 1, r, x).unwrap().powf(alpha);
        sum += qk * basis_weight(b, k - 1, r, t).unwrap();
    }
    w * sum
}

#[test]
fn density_spot_values() {
    for &(n, m, c, alpha, x, t) in &[
        (30u64, 0i64, 0i64, 1.5, 1.0, 1.0),
        (30, 0, 0, 1.0, 1.0, 0.8),
        (20, 1, 1, 2.0, 0.5, 0.7),
        (15, 0, -1, 1.5, 0.4, 0.3),
        (12, 1, 2, 1.0, 1.2, 0.9),
    ] {
        let p = OperatorParams::new(n, m, c, alpha).unwrap();
        let got = kernel_density(&p, x, t).unwrap();
        let expected = brute_density(n, m, c, alpha, x, t);
        assert!(
            (got / expected - 1.0).abs() < 1e-10,
            "n={n} m={m} c={c} alpha={alpha} x={x} t={t}: {got:e} vs {expected:e}"
        );
    }
}

#[test]
fn total_mass_reaches_one() {
    for &(n, m, c, alpha, x) in &[(30u64, 0i64, 0i64, 1.5, 1.0), (50, 1, 1, 2.0, 2.0), (25, 0, -1, 2.5, 0.7)] {
        let p = OperatorParams::new(n, m, c, alpha).unwrap();
        let big = if c == -1 { 1.0 } else { 1e4 };
        let total = partial_mass(&p, x, big).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
        assert!(partial_mass(&p, x, -1.0).is_err());
    }
}

#[test]
fn endpoint_interpolation() {
    let cat = Catalogue::builtin();
    let f = cat.get("sin").unwrap();
    for &c in &[-1i64, 0, 1, 2] {
        let p = OperatorParams::new(40, 1, c, 1.0).unwrap();
        assert_eq!(apply_base(&p, f, 0.0, &q(), &tr()).unwrap().value, f.eval(0.0));
    }
    let p = OperatorParams::new(40, 1, -1, 2.0).unwrap();
    assert_eq!(apply_bezier(&p, f, 1.0, &q(), &tr()).unwrap().value, f.eval(1.0));
}

/// `ζ(x;y) ≤ 2αx(1+cx)/(n(x−y)²)` for `y < x` and the mirrored right-hand
/// estimate for `z > x`.
#[test]
fn kernel_mass_estimates() {
    let mut worst: f64 = 0.0;
    for &n in &[100u64, 400, 1600] {
        for &c in &[-1i64, 0, 1, 2] {
            for &m in &[0i64, 1] {
                for &alpha in &[1.0, 2.0] {
                    let p = OperatorParams::new(n, m, c, alpha).unwrap();
                    let xs: &[f64] = if c == -1 { &[0.25, 0.5, 0.75] } else { &[0.25, 0.5, 1.0, 2.0] };
                    for &x in xs {
                        let rhs = |d: f64| 2.0 * alpha * x * (1.0 + c as f64 * x) / (n as f64 * d * d);
                        let y = x / 2.0;
                        let z = if c == -1 { (x + 1.0) / 2.0 } else { 2.0 * x };
                        let left = partial_mass(&p, x, y).unwrap();
                        let right = 1.0 - partial_mass(&p, x, z).unwrap();
                        assert!(left <= rhs(x - y), "left n={n} c={c} m={m} alpha={alpha} x={x}");
                        assert!(right <= rhs(z - x), "right n={n} c={c} m={m} alpha={alpha} x={x}");
                        worst = worst.max(left / rhs(x - y)).max(right / rhs(z - x));
                    }
                }
            }
        }
    }
    assert!(worst < 1.0);
}

#[test]
fn bounded_by_sup() {
    let cat = Catalogue::builtin();
    for id in ["sin", "tent", "step", "exp_decay", "sine_bump"] {
        let f = cat.get(id).unwrap();
        let sup = f.sup().unwrap();
        for &(n, m, c, alpha, x) in &[(20u64, 0i64, 0i64, 2.5, 1.3), (60, 1, 1, 1.5, 0.4), (30, 0, -1, 3.0, 0.5)] {
            let p = OperatorParams::new(n, m, c, alpha).unwrap();
            let v = apply_bezier(&p, f, x, &q(), &tr()).unwrap().value;
            assert!(v.abs() <= sup + 1e-10, "{id}: {v}");
        }
    }
}

fn cell() -> impl Strategy<Value = (OperatorParams, f64)> {
    (prop_oneof![Just(-1i64), Just(0), Just(1), Just(2)], 20u64..200, -1i64..3, 1.0f64..3.0)
        .prop_filter_map("invalid parameters", |(c, n, m, alpha)| OperatorParams::new(n, m, c, alpha).ok())
        .prop_flat_map(|p| {
            let hi = if p.c.is_bounded() { 1.0 } else { 3.0 };
            (Just(p), 0.01f64..hi)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reduces_to_base_at_alpha_one((p, x) in cell()) {
        let cat = Catalogue::builtin();
        let f = cat.get("sin").unwrap();
        let p1 = p.base();
        let a = apply_bezier(&p1, f, x, &q(), &tr()).unwrap();
        let b = apply_base(&p1, f, x, &q(), &tr()).unwrap();
        prop_assert!((a.value - b.value).abs() <= 10.0 * (a.error + b.error));
    }

    #[test]
    fn linear_and_positive((p, x) in cell(), s in -3.0f64..3.0) {
        let cat = Catalogue::builtin();
        let f = cat.get("tent").unwrap();
        let g = cat.get("exp_decay").unwrap();
        let h = FnIntegrand::new(move |t: f64| {
            let tent = Formula::Tent { center: 1.0, half_width: 1.0, height: 1.0 };
            tent.eval(t) + s * (-t).exp()
        }, Growth::BOUNDED)
        .with_breakpoints(vec![0.0, 1.0, 2.0]);
        let ff = apply_bezier(&p, f, x, &q(), &tr()).unwrap();
        let gg = apply_bezier(&p, g, x, &q(), &tr()).unwrap();
        let hh = apply_bezier(&p, &h, x, &q(), &tr()).unwrap();
        prop_assert!((hh.value - ff.value - s * gg.value).abs() <= hh.error + ff.error + s.abs() * gg.error);
        prop_assert!(ff.value >= -ff.error && gg.value >= 0.0);
    }
}
