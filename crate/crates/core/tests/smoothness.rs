use std::sync::Arc;

use gs_operators::basis::Regime;
use gs_operators::smoothness::{
    aux_fx, dt_modulus, lipschitz_seminorm, total_variation, weighted_modulus, ModulusRequest, Piece, PieceShape,
};
use gs_operators::{BvProfile, Catalogue, Window};
use gs_operators::function::{Formula, Growth, SmoothnessClass, TestFunction};

fn cat() -> Catalogue {
    Catalogue::builtin()
}

fn square() -> TestFunction {
    TestFunction::new(
        "square",
        Formula::Power { exponent: 2.0 },
        Growth { order: 2.0, constant: 1.0 },
        vec![SmoothnessClass::WeightedC2 { m: 1.0 }],
    )
}

#[test]
fn lipschitz_seminorm_values() {
    let c = cat();
    let w = Window::new(0.0, 4.0).unwrap();
    assert_eq!(lipschitz_seminorm(c.get("one").unwrap(), 0.5, w, 100).unwrap().value, 0.0);
    let coarse = lipschitz_seminorm(c.get("sqrt").unwrap(), 1.0, w, 100).unwrap().value;
    let fine = lipschitz_seminorm(c.get("sqrt").unwrap(), 1.0, w, 200).unwrap().value;
    assert!(coarse > 0.9 && coarse <= 1.0 + 1e-6);
    assert!(fine >= coarse && fine <= 1.0 + 1e-6);
}

#[test]
fn dt_modulus_values() {
    let c = cat();
    let w = Window::new(0.0, 10.0).unwrap();
    let req = |f, delta, beta| ModulusRequest {
        f,
        delta,
        beta,
        window: w,
        grid_density: 100,
    };
    let r0 = Regime::new(0).unwrap();
    assert_eq!(dt_modulus(&req(c.get("one").unwrap(), 0.3, 0.5), r0).unwrap().value, 0.0);
    let e1 = c.get("e1").unwrap();
    assert!((dt_modulus(&req(e1, 0.1, 0.0), r0).unwrap().value - 0.1).abs() < 1e-6);
    let f = c.get("sin").unwrap();
    let mut last = 0.0;
    for delta in [0.01, 0.05, 0.1, 0.2, 0.4] {
        let v = dt_modulus(&req(f, delta, 0.5), r0).unwrap().value;
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn classical_modulus_at_beta_zero() {
    // ω(sin 2t; δ) = 2 sin(δ) for δ ≤ π/2
    let f = cat().get("sin").unwrap().clone();
    let req = ModulusRequest {
        f: &f,
        delta: 0.2,
        beta: 0.0,
        window: Window::new(0.0, 10.0).unwrap(),
        grid_density: 200,
    };
    let v = dt_modulus(&req, Regime::new(1).unwrap()).unwrap();
    assert!((v.value - 2.0 * 0.2f64.sin()).abs() < 4.0 * v.spacing, "{}", v.value);
}

#[test]
fn weighted_modulus_of_square() {
    // sup_y h(2y − h)/(1 + y²) is attained at y = (h + √(h² + 4))/2
    let h: f64 = 0.1;
    let y = (h + (h * h + 4.0).sqrt()) / 2.0;
    let exact = h * (2.0 * y - h) / (1.0 + y * y);
    let f = square();
    let w = Window::default();
    let coarse = weighted_modulus(&f, h, w, 100).unwrap().value;
    let fine = weighted_modulus(&f, h, w, 1000).unwrap().value;
    assert!((fine / exact - 1.0).abs() < 1e-2);
    assert!((coarse / fine - 1.0).abs() < 1e-2);
    assert!(coarse <= fine + 1e-15 && fine <= exact + 1e-15);
}

#[test]
fn weighted_modulus_properties() {
    let c = cat();
    let w = Window::default();
    assert_eq!(weighted_modulus(c.get("one").unwrap(), 0.2, w, 100).unwrap().value, 0.0);
    for id in ["e2", "sin", "sqrt", "sat_square", "tent"] {
        let f = c.get(id).unwrap();
        let om = |d: f64| weighted_modulus(f, d, w, 100).unwrap().value;
        let base = om(0.1);
        for lambda in [0.5, 2.0, 7.3] {
            assert!(om(lambda * 0.1) <= (lambda + 1.0) * base, "{id} lambda={lambda}");
        }
        for r in [2.0, 3.0, 5.0] {
            assert!(om(r * 0.1) <= r * base * (1.0 + 1e-12), "{id} r={r}");
        }
        let mut last = f64::INFINITY;
        for k in 1..=4 {
            let v = om(10f64.powi(-k));
            assert!(v <= last);
            last = v;
        }
        // √t decays like √δ, the others like δ
        assert!(last <= 0.05 * base, "{id}: {last} vs {base}");
    }
}

fn piece(start: f64, end: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Piece {
    Piece {
        start,
        end,
        shape: PieceShape::Monotone,
        value: Arc::new(g),
    }
}

#[test]
fn total_variation_values() {
    let constant = BvProfile::new(
        vec![Piece {
            start: 0.0,
            end: 3.0,
            shape: PieceShape::Constant,
            value: Arc::new(|_| 4.0),
        }],
        vec![],
    )
    .unwrap();
    assert_eq!(total_variation(&constant, 0.0, 3.0).unwrap(), 0.0);
    let ramp = BvProfile::new(vec![piece(0.0, 2.0, |t| t)], vec![]).unwrap();
    assert_eq!(total_variation(&ramp, 0.0, 2.0).unwrap(), 2.0);
    let v = BvProfile::new(vec![piece(0.0, 1.0, |t| 1.0 - t), piece(1.0, 2.0, |t| t - 1.0)], vec![]).unwrap();
    assert_eq!(total_variation(&v, 0.0, 2.0).unwrap(), 2.0);
    let (a, b, c) = (0.2, 1.3, 1.9);
    let split = total_variation(&v, a, b).unwrap() + total_variation(&v, b, c).unwrap();
    assert!((split - total_variation(&v, a, c).unwrap()).abs() < 1e-15);
}

#[test]
fn smooth_piece_variation_matches_oscillation() {
    // sin 2t on [0, π]: derivative 2cos 2t, variation 4
    let f = cat().get("sin").unwrap().clone();
    let prof = BvProfile::derivative_of(&f).unwrap();
    let tv = total_variation(&prof, 0.0, std::f64::consts::PI).unwrap();
    assert!((tv - 8.0).abs() < 1e-10, "{tv}");
}

#[test]
fn aux_function() {
    let c = cat();
    let f = c.get("sin").unwrap();
    assert_eq!(aux_fx(f, 1.0, 1.0).unwrap(), 0.0);
    assert_eq!(aux_fx(f, 1.0, 1.5).unwrap(), f.eval(1.5) - f.eval(1.0));
    assert_eq!(aux_fx(f, 1.0, 0.5).unwrap(), f.eval(0.5) - f.eval(1.0));
    let step = c.get("step").unwrap();
    assert_eq!(aux_fx(step, 1.0, 1.01).unwrap(), 0.0);
    assert_eq!(aux_fx(step, 1.0, 0.99).unwrap(), 0.0);
    assert!(aux_fx(f, 1.0, -0.5).is_err());
}

#[test]
fn left_variation_sum_of_abs_profile() {
    // g(t) = |t − x| on [0, x] is monotone, so V_{x−x/k}^x g = x/k
    let x = 1.5;
    let g = BvProfile::new(vec![piece(0.0, x, move |t| (t - x).abs()), piece(x, 4.0, move |t| t - x)], vec![]).unwrap();
    let n: u64 = 400;
    let kmax = (n as f64).sqrt() as u64;
    let sum: f64 = (1..=kmax).map(|k| total_variation(&g, x - x / k as f64, x).unwrap()).sum();
    let harmonic: f64 = (1..=kmax).map(|k| x / k as f64).sum();
    assert!((sum - harmonic).abs() < 1e-13);
}
