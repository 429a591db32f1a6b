//! Right-hand sides of the four rate-of-convergence estimates, the harness
//! comparing them with actual operator errors, and empirical order fits.

use std::collections::HashMap;
use std::f64::consts::SQRT_2;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::bezier::TruncationPolicy;
use crate::error::{Error, Result};
use crate::function::{Side, TestFunction};
use crate::moments;
use crate::operator::{self, OperatorParams, QuadratureSpec};
use crate::smoothness::{self, BvProfile, ModulusRequest, Window};

/// Which estimate a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// `|F(f;x) − f(x)| ≤ αM(δ/x)^{γ/2}` for `f ∈ Lip_M(γ)`.
    Lipschitz,
    /// `|F(f;x) − f(x)| ≤ C ω_{φ^β}(f; φ^{1−β}(x)/√n)` for bounded continuous `f`.
    DitzianTotik,
    /// `|F(f;x) − f(x)| ≤ C (1+x)^{5/2} Ω(f; 1/√n)` for `|f| ≤ M(1+x²)`.
    Weighted,
    /// Term-by-term estimate for absolutely continuous `f` with `f′` of bounded variation.
    BoundedVariation,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Lipschitz,
        Theorem::DitzianTotik,
        Theorem::Weighted,
        Theorem::BoundedVariation,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Theorem::Lipschitz => "lipschitz",
            Theorem::DitzianTotik => "ditzian_totik",
            Theorem::Weighted => "weighted",
            Theorem::BoundedVariation => "bounded_variation",
        }
    }

    /// Class a function must carry for the estimate to apply.
    pub fn required_class(self) -> &'static str {
        match self {
            Theorem::Lipschitz => "lipschitz",
            Theorem::DitzianTotik => "bounded-continuous",
            Theorem::Weighted => "weighted-c2",
            Theorem::BoundedVariation => "dbv",
        }
    }
}

/// Reading of the Lipschitz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzForm {
    /// `αM(δ/x)^{γ/2}`.
    #[default]
    AsStated,
    /// `αM δ^γ / x^{γ/2}`, what the Hölder step of the argument yields.
    ProofConsistent,
}

/// Reading of the bounded-variation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvForm {
    /// Right-hand variation sum weighted by `2αx(1+cx)/n`, last term `|f(x+)|`.
    #[default]
    AsPrinted,
    /// Right-hand sum weighted by `2α(1+cx)/n` like the left one, last term `|f′(x+)|`.
    DerivationConsistent,
}

/// Knobs shared by every bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSettings {
    pub beta: f64,
    pub window: Window,
    pub grid_density: usize,
    /// Frozen constant of the weighted estimate.
    pub weighted_constant: f64,
    pub lipschitz_form: LipschitzForm,
    pub bv_form: BvForm,
}

/// Constant of the weighted estimate, frozen from [`calibrate_weighted`] on
/// [`CalibrationGrid::default`].
pub const WEIGHTED_CONSTANT: f64 = 0.54;

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            beta: 0.5,
            window: Window::default(),
            grid_density: 100,
            weighted_constant: WEIGHTED_CONSTANT,
            lipschitz_form: LipschitzForm::AsStated,
            bv_form: BvForm::AsPrinted,
        }
    }
}

impl BoundSettings {
    /// Window clipped to the domain of the regime.
    fn window_for(&self, params: &OperatorParams) -> Result<Window> {
        Window::new(self.window.a, self.window.b.min(params.c.upper_end()))
    }
}

/// One named term of a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub value: f64,
}

fn comp(name: &str, value: f64) -> Component {
    Component {
        name: name.to_string(),
        value,
    }
}

/// Comparison of an operator error with a bound at one `(params, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: Theorem,
    pub function: String,
    pub params: OperatorParams,
    pub x: f64,
    pub operator_value: f64,
    pub target: f64,
    pub empirical_error: f64,
    /// Numerical error estimate of `operator_value`.
    pub tolerance: f64,
    pub bound_value: f64,
    pub components: Vec<Component>,
    /// `false` when an unevaluable term was left out of `bound_value`.
    pub complete: bool,
    pub satisfied: bool,
}

impl BoundReport {
    /// `empirical_error / bound_value`; infinite for a zero bound with nonzero error.
    pub fn ratio(&self) -> f64 {
        if self.bound_value > 0.0 {
            self.empirical_error / self.bound_value
        } else if self.empirical_error <= self.tolerance {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// `αM(δ/x)^{γ/2}` or its proof-consistent counterpart.
pub fn bound_lipschitz(params: &OperatorParams, x: f64, gamma: f64, m: f64, form: LipschitzForm) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Setting(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let delta = moments::delta_n(params, x)?;
    let alpha = params.alpha.value();
    Ok(match form {
        LipschitzForm::AsStated => alpha * m * (delta / x).powf(gamma / 2.0),
        LipschitzForm::ProofConsistent => alpha * m * delta.powf(gamma) / x.powf(gamma / 2.0),
    })
}

/// `2 max(2, 2^{β+1/2}(1+√2)√α)`.
pub fn dt_constant(beta: f64, alpha: f64) -> f64 {
    2.0 * 2f64.max(2f64.powf(beta + 0.5) * (1.0 + SQRT_2) * alpha.sqrt())
}

/// `C ω_{φ^β}(f; φ^{1−β}(x)/√n)` with its pieces.
pub fn bound_dt(params: &OperatorParams, x: f64, f: &TestFunction, settings: &BoundSettings) -> Result<(f64, Vec<Component>)> {
    f.require("bounded-continuous")?;
    dt_with(params, x, settings, |delta, window| {
        let req = ModulusRequest {
            f,
            delta,
            beta: settings.beta,
            window,
            grid_density: settings.grid_density,
        };
        Ok(smoothness::dt_modulus(&req, params.c)?.value)
    })
}

fn dt_with(
    params: &OperatorParams,
    x: f64,
    settings: &BoundSettings,
    modulus: impl FnOnce(f64, Window) -> Result<f64>,
) -> Result<(f64, Vec<Component>)> {
    params.validate()?;
    params.c.check(x)?;
    let beta = settings.beta;
    let delta = params.c.phi(x).powf(1.0 - beta) / (params.n as f64).sqrt();
    let constant = dt_constant(beta, params.alpha.value());
    let omega = if delta > 0.0 {
        modulus(delta, settings.window_for(params)?)?
    } else {
        0.0
    };
    Ok((
        constant * omega,
        vec![comp("constant", constant), comp("delta", delta), comp("modulus", omega)],
    ))
}

/// `C (1+x)^{5/2} Ω(f; 1/√n)` with its pieces.
pub fn bound_weighted(params: &OperatorParams, x: f64, f: &TestFunction, settings: &BoundSettings) -> Result<(f64, Vec<Component>)> {
    weighted_with(params, x, settings, |delta, window| {
        Ok(smoothness::weighted_modulus(f, delta, window, settings.grid_density)?.value)
    })
}

fn weighted_with(
    params: &OperatorParams,
    x: f64,
    settings: &BoundSettings,
    modulus: impl FnOnce(f64, Window) -> Result<f64>,
) -> Result<(f64, Vec<Component>)> {
    params.validate()?;
    params.c.check(x)?;
    let delta = 1.0 / (params.n as f64).sqrt();
    let omega = modulus(delta, settings.window_for(params)?)?;
    let weight = (1.0 + x).powf(2.5);
    let c = settings.weighted_constant;
    Ok((
        c * weight * omega,
        vec![comp("constant", c), comp("weight", weight), comp("modulus", omega)],
    ))
}

/// Moduli keyed by step, window and regime bound; they do not depend on `m`,
/// `α` or, for the weighted modulus, on `x`.
#[derive(Debug, Default)]
struct ModulusCache(Mutex<HashMap<(u64, u64, u64, i64), f64>>);

impl ModulusCache {
    fn get(&self, delta: f64, window: Window, c: i64, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
        let key = (delta.to_bits(), window.a.to_bits(), window.b.to_bits(), c);
        if let Some(&v) = self.0.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let v = compute()?;
        self.0.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// Every term of the bounded-variation estimate. Returns the sum, the terms
/// and whether the opaque remainder could be set to zero (support of `f`
/// inside `[0, 2x]`).
pub fn bound_bv(params: &OperatorParams, x: f64, f: &TestFunction, form: BvForm) -> Result<(f64, Vec<Component>, bool)> {
    params.validate()?;
    params.c.check(x)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x = {x} must be positive")));
    }
    let profile = BvProfile::aux_derivative(f, x)?;
    let alpha = params.alpha.value();
    let n = params.n as f64;
    let cx1 = 1.0 + params.c.as_f64() * x;
    let s_n = (2.0 * alpha * x * cx1 / n).sqrt();
    let a_n = 2.0 * alpha * cx1 / n;
    let root = n.sqrt();
    let kmax = root.floor() as u64;

    let d_left = f.derivative(x, Side::Left);
    let d_right = f.derivative(x, Side::Right);
    let f_x = f.eval(x);
    let f_right = f.limit(x, Side::Right);

    let tv = |a: f64, b: f64| smoothness::total_variation(&profile, a.max(0.0), b);
    let mut left_sum = 0.0;
    let mut right_sum = 0.0;
    for k in 1..=kmax {
        let h = x / k as f64;
        left_sum += tv(x - h, x)?;
        right_sum += tv(x, x + h)?;
    }
    let right_coef = match form {
        BvForm::AsPrinted => 2.0 * alpha * x * cx1 / n,
        BvForm::DerivationConsistent => a_n,
    };
    let last = match form {
        BvForm::AsPrinted => f_right.abs(),
        BvForm::DerivationConsistent => d_right.abs(),
    };
    let residual_known = f.support_end().is_some_and(|s| s <= 2.0 * x);

    let terms = vec![
        comp("derivative_mean", (d_right + alpha * d_left).abs() * s_n / (alpha + 1.0)),
        comp("derivative_jump", alpha / (alpha + 1.0) * (d_right - d_left).abs() * s_n),
        comp("left_variation_sum", a_n * left_sum),
        comp("left_variation_near", x / root * tv(x - x / root, x)?),
        comp("doubling_gap", a_n / x * (f.eval(2.0 * x) - f_x - x * d_right).abs()),
        comp("right_variation_sum", right_coef * right_sum),
        comp("right_variation_near", x / root * tv(x, x + x / root)?),
        comp("value", a_n / x * f_x.abs()),
        comp("one_sided", s_n * last),
    ];
    let total = terms.iter().map(|t| t.value).sum();
    let mut terms = terms;
    terms.push(comp("remainder", if residual_known { 0.0 } else { f64::NAN }));
    Ok((total, terms, residual_known))
}

/// Evaluates one estimate for one function across parameter cells, caching
/// what does not depend on the cell.
pub struct Verifier<'a> {
    pub f: &'a TestFunction,
    pub theorem: Theorem,
    pub settings: BoundSettings,
    pub quad: QuadratureSpec,
    pub trunc: TruncationPolicy,
    lipschitz: Option<(f64, f64)>,
    moduli: ModulusCache,
}

impl<'a> Verifier<'a> {
    pub fn new(
        f: &'a TestFunction,
        theorem: Theorem,
        settings: BoundSettings,
        quad: QuadratureSpec,
        trunc: TruncationPolicy,
    ) -> Result<Self> {
        f.require(theorem.required_class())?;
        let lipschitz = match theorem {
            Theorem::Lipschitz => {
                let (gamma, _) = f.lipschitz().expect("class checked above");
                let m = smoothness::lipschitz_seminorm(f, gamma, settings.window, settings.grid_density)?.value;
                Some((gamma, m))
            }
            _ => None,
        };
        Ok(Self {
            f,
            theorem,
            settings,
            quad,
            trunc,
            lipschitz,
            moduli: ModulusCache::default(),
        })
    }

    /// `(γ, M)` used by the Lipschitz estimate.
    pub fn lipschitz_constants(&self) -> Option<(f64, f64)> {
        self.lipschitz
    }

    pub fn cell(&self, params: &OperatorParams, x: f64) -> Result<BoundReport> {
        let eval = operator::apply_bezier(params, self.f, x, &self.quad, &self.trunc)?;
        let target = self.f.eval(x);
        let mut complete = true;
        let (bound_value, components) = match self.theorem {
            Theorem::Lipschitz => {
                let (gamma, m) = self.lipschitz.expect("set for this theorem");
                let stated = bound_lipschitz(params, x, gamma, m, LipschitzForm::AsStated)?;
                let proof = bound_lipschitz(params, x, gamma, m, LipschitzForm::ProofConsistent)?;
                let chosen = match self.settings.lipschitz_form {
                    LipschitzForm::AsStated => stated,
                    LipschitzForm::ProofConsistent => proof,
                };
                (
                    chosen,
                    vec![
                        comp("gamma", gamma),
                        comp("m", m),
                        comp("as_stated", stated),
                        comp("proof_consistent", proof),
                    ],
                )
            }
            Theorem::DitzianTotik => {
                let s = &self.settings;
                dt_with(params, x, s, |delta, window| {
                    self.moduli.get(delta, window, params.c.c(), || {
                        let req = ModulusRequest {
                            f: self.f,
                            delta,
                            beta: s.beta,
                            window,
                            grid_density: s.grid_density,
                        };
                        Ok(smoothness::dt_modulus(&req, params.c)?.value)
                    })
                })?
            }
            Theorem::Weighted => {
                let s = &self.settings;
                weighted_with(params, x, s, |delta, window| {
                    self.moduli.get(delta, window, 0, || {
                        Ok(smoothness::weighted_modulus(self.f, delta, window, s.grid_density)?.value)
                    })
                })?
            }
            Theorem::BoundedVariation => {
                let (total, terms, known) = bound_bv(params, x, self.f, self.settings.bv_form)?;
                complete = known;
                (total, terms)
            }
        };
        let empirical_error = (eval.value - target).abs();
        Ok(BoundReport {
            theorem: self.theorem,
            function: self.f.id.clone(),
            params: *params,
            x,
            operator_value: eval.value,
            target,
            empirical_error,
            tolerance: eval.error,
            bound_value,
            components,
            complete,
            satisfied: empirical_error <= bound_value + eval.error,
        })
    }
}

/// Reports for every `(params, x)` pair, in grid order.
pub fn verify(
    params_grid: &[OperatorParams],
    f: &TestFunction,
    x_grid: &[f64],
    theorem: Theorem,
    settings: &BoundSettings,
    quad: &QuadratureSpec,
    trunc: &TruncationPolicy,
) -> Result<Vec<BoundReport>> {
    let v = Verifier::new(f, theorem, *settings, *quad, *trunc)?;
    let mut out = Vec::with_capacity(params_grid.len() * x_grid.len());
    for p in params_grid {
        for &x in x_grid {
            if p.c.contains(x) {
                out.push(v.cell(p, x)?);
            }
        }
    }
    Ok(out)
}

/// Least-squares fit of `log error` against `log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub n_values: Vec<u64>,
    pub errors: Vec<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit `log e = a + s log n`. Errors at or below `floor` make the fit
/// meaningless and are reported as [`Error::DegenerateFit`].
pub fn empirical_order(n_values: &[u64], errors: &[f64], floor: f64) -> Result<OrderFit> {
    if n_values.len() != errors.len() || n_values.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 paired points, got {} n-values and {} errors",
            n_values.len(),
            errors.len()
        )));
    }
    if n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DegenerateFit("n-values must increase".into()));
    }
    let span = n_values[n_values.len() - 1] as f64 / n_values[0] as f64;
    if span < 100.0 {
        return Err(Error::DegenerateFit(format!("n-values span {span:.1}x, below two decades")));
    }
    if let Some(e) = errors.iter().find(|&&e| !(e > floor)) {
        return Err(Error::DegenerateFit(format!("error {e:e} is at the tolerance floor {floor:e}")));
    }
    let xs: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(OrderFit {
        n_values: n_values.to_vec(),
        errors: errors.to_vec(),
        fitted_slope: slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// `n = 50, 100, …, 6400`.
pub fn default_order_grid() -> Vec<u64> {
    (0..8).map(|i| 50u64 << i).collect()
}

/// Floor below which an error is indistinguishable from numerical noise.
pub fn error_floor(quad: &QuadratureSpec, value: f64) -> f64 {
    100.0 * quad.tolerance * value.abs().max(1.0)
}

/// Operator errors `|F(f;x) − f(x)|` along `n_values` with the other
/// parameters fixed, then fitted.
pub fn order_sweep(
    template: &OperatorParams,
    f: &TestFunction,
    x: f64,
    n_values: &[u64],
    quad: &QuadratureSpec,
    trunc: &TruncationPolicy,
) -> Result<(Vec<f64>, Result<OrderFit>)> {
    let target = f.eval(x);
    let mut errors = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let p = OperatorParams { n, ..*template };
        p.validate()?;
        let v = operator::apply_bezier(&p, f, x, quad, trunc)?;
        errors.push((v.value - target).abs());
    }
    let fit = empirical_order(n_values, &errors, error_floor(quad, target));
    Ok((errors, fit))
}

/// Grid on which the weighted constant is calibrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationGrid {
    pub n: Vec<u64>,
    pub m: Vec<i64>,
    pub c: Vec<i64>,
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub functions: Vec<String>,
    pub safety_factor: f64,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            n: vec![25, 50, 100],
            m: vec![0, 1],
            c: vec![-1, 0, 1, 2],
            alpha: vec![1.0, 2.0],
            x: vec![0.25, 0.5, 1.0, 2.0],
            functions: ["e2", "sqrt", "sin", "sat_square", "tent", "exp_decay"]
                .map(String::from)
                .to_vec(),
            safety_factor: 1.5,
        }
    }
}

/// Largest `|F(f;x) − f(x)| / ((1+x)^{5/2} Ω(f; 1/√n))` over the grid, times
/// the safety factor.
pub fn calibrate_weighted(
    grid: &CalibrationGrid,
    catalogue: &crate::catalogue::Catalogue,
    settings: &BoundSettings,
    quad: &QuadratureSpec,
    trunc: &TruncationPolicy,
) -> Result<f64> {
    let unit = BoundSettings {
        weighted_constant: 1.0,
        ..*settings
    };
    let mut worst: f64 = 0.0;
    for id in &grid.functions {
        let f = catalogue.get(id)?;
        let v = Verifier::new(f, Theorem::Weighted, unit, *quad, *trunc)?;
        for &n in &grid.n {
            for &m in &grid.m {
                for &c in &grid.c {
                    for &alpha in &grid.alpha {
                        let Ok(p) = OperatorParams::new(n, m, c, alpha) else {
                            continue;
                        };
                        if p.check_growth(f.growth.order).is_err() {
                            continue;
                        }
                        for &x in &grid.x {
                            if !p.c.contains(x) {
                                continue;
                            }
                            let r = v.cell(&p, x)?;
                            if r.bound_value > 0.0 {
                                worst = worst.max(r.empirical_error / r.bound_value);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(worst * grid.safety_factor)
}
