//! Application of the summation-integral operators `L` and their Bézier
//! variants `F` to a function.
//!
//! With `a = n + mc`, `w = n + (m+1)c` and `b = n + (m+2)c`,
//!
//! ```text
//! F(f; x) = Q_0 f(0) + w Σ_{k≥1} Q_k ∫ p_{b,k−1}(t) f(t) dt      (+ Q_a f(1) when c = −1)
//! ```
//!
//! where `Q_k` are the Bézier weights of order `a` (`Q = p` for `L`). The sum
//! over `k` is folded into a single kernel `K(x,t) = w Σ Q_k p_{b,k−1}(t)`
//! which is integrated once by adaptive Gauss–Kronrod quadrature after a
//! regime-dependent change of variable.

use serde::{Deserialize, Serialize};

use crate::basis::{self, Regime};
use crate::bezier::{self, Alpha, BezierRow, TruncationPolicy};
use crate::error::{Error, Result};
use crate::function::Integrand;
use crate::quadrature;
use crate::special;

/// The quadruple `(n, m, c, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub n: u64,
    pub m: i64,
    pub c: Regime,
    pub alpha: Alpha,
}

impl OperatorParams {
    pub fn new(n: u64, m: i64, c: i64, alpha: f64) -> Result<Self> {
        let p = Self {
            n,
            m,
            c: Regime::new(c)?,
            alpha: Alpha::new(alpha)?,
        };
        p.validate()?;
        Ok(p)
    }

    /// `n + (m + shift) c`.
    pub fn order(&self, shift: i64) -> i64 {
        self.n as i64 + (self.m + shift) * self.c.c()
    }

    /// Order `n + mc` of the outer basis.
    pub fn outer_order(&self) -> u64 {
        self.order(0) as u64
    }

    /// The factor `n + (m+1)c` in front of the sum.
    pub fn weight_order(&self) -> u64 {
        self.order(1) as u64
    }

    /// Order `n + (m+2)c` of the inner basis.
    pub fn inner_order(&self) -> u64 {
        self.order(2) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        for shift in 0..=2 {
            if self.order(shift) <= 0 {
                return Err(Error::InvalidParams(format!(
                    "n + (m+{shift})c = {} must be positive (n = {}, m = {}, c = {})",
                    self.order(shift),
                    self.n,
                    self.m,
                    self.c
                )));
            }
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: Alpha) -> Self {
        Self { alpha, ..self }
    }

    /// The same operator with `α = 1`.
    pub fn base(self) -> Self {
        self.with_alpha(Alpha::ONE)
    }

    /// Largest admissible growth order of `f` (exclusive), infinite when
    /// every polynomial is integrable.
    pub fn growth_limit(&self) -> f64 {
        if self.c.c() >= 1 {
            self.weight_order() as f64 / self.c.as_f64()
        } else {
            f64::INFINITY
        }
    }

    pub fn check_growth(&self, order: f64) -> Result<()> {
        let limit = self.growth_limit();
        if order < limit {
            Ok(())
        } else {
            Err(Error::Integrability { growth: order, limit })
        }
    }
}

/// Change of variable used on the `t`-integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    /// `t` itself on `[0, 1]` for `c = −1`, `u = st/(1+st)` with `s = max(c, 1)` otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Initial panels across the bulk of the kernel.
    pub nodes: usize,
    #[serde(default)]
    pub scheme: Substitution,
    /// Relative tolerance against `∫|f K|`.
    pub tolerance: f64,
    /// Maximum number of panels after refinement.
    pub refinement_limit: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 16,
            scheme: Substitution::Auto,
            tolerance: 1e-12,
            refinement_limit: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::Setting("quadrature nodes must be at least 2".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Setting("quadrature tolerance must be positive".into()));
        }
        if self.refinement_limit < self.nodes + 4 {
            return Err(Error::Setting("refinement_limit is below the initial panel count".into()));
        }
        Ok(())
    }
}

/// Value of an operator application with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    /// Conservative total error estimate.
    pub error: f64,
    pub quadrature_error: f64,
    /// Neglected kernel mass `J_K^α`.
    pub truncation_residual: f64,
    /// Number of `k` terms kept.
    pub terms: usize,
    pub panels: usize,
    pub converged: bool,
}

impl Evaluation {
    fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            quadrature_error: 0.0,
            truncation_residual: 0.0,
            terms: 1,
            panels: 0,
            converged: true,
        }
    }
}

/// Ratio `p_{b,j+1}(t) / p_{b,j}(t)` of inner basis weights.
#[derive(Debug, Clone, Copy)]
enum Step {
    Poisson { lambda: f64 },
    Binomial { order: f64, odds: f64 },
    NegBinomial { shape: f64, s: f64 },
}

impl Step {
    fn new(c: Regime, b: f64, t: f64) -> Self {
        match c.c() {
            0 => Step::Poisson { lambda: b * t },
            -1 => Step::Binomial {
                order: b,
                odds: t / (1.0 - t),
            },
            cc => {
                let ct = cc as f64 * t;
                Step::NegBinomial {
                    shape: b / cc as f64,
                    s: ct / (1.0 + ct),
                }
            }
        }
    }

    fn ratio(&self, j: f64) -> f64 {
        match *self {
            Step::Poisson { lambda } => lambda / (j + 1.0),
            Step::Binomial { order, odds } => (order - j) / (j + 1.0) * odds,
            Step::NegBinomial { shape, s } => (shape + j) / (j + 1.0) * s,
        }
    }

    fn mode(&self) -> f64 {
        match *self {
            Step::Poisson { lambda } => lambda.floor(),
            Step::Binomial { order, odds } => ((order + 1.0) * odds / (1.0 + odds)).floor(),
            Step::NegBinomial { shape, s } => {
                if shape > 1.0 {
                    ((shape - 1.0) * s / (1.0 - s)).floor()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Relative cut-off when walking away from the mode of `j ↦ p_{b,j}(t)`.
const WALK_CUTOFF: f64 = 1e-20;

/// The kernel `M(x, t)` at fixed `x`: continuous part plus atoms at `t = 0`
/// and, for `c = −1`, at `t = 1`.
#[derive(Debug, Clone)]
pub struct Kernel {
    params: OperatorParams,
    x: f64,
    row: BezierRow,
    /// Indices `k` with a continuous component, `1..=last`.
    last: usize,
    atom_one: f64,
}

impl Kernel {
    pub fn new(params: &OperatorParams, x: f64, trunc: &TruncationPolicy) -> Result<Self> {
        params.validate()?;
        params.c.check(x)?;
        let a = params.outer_order();
        let row = bezier::bezier_row(a, params.c, x, params.alpha, trunc)?;
        let kept = row.len() - 1;
        let (last, atom_one) = if params.c.is_bounded() && kept as u64 == a {
            (kept - 1, row.weights[kept])
        } else {
            (kept, 0.0)
        };
        Ok(Self {
            params: *params,
            x,
            row,
            last,
            atom_one,
        })
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn row(&self) -> &BezierRow {
        &self.row
    }

    pub fn atom_at_zero(&self) -> f64 {
        self.row.weights[0]
    }

    pub fn atom_at_one(&self) -> f64 {
        self.atom_one
    }

    pub fn residual(&self) -> f64 {
        self.row.residual
    }

    /// Absolutely continuous part `w Σ_{k≥1} Q_k p_{b,k−1}(t)`.
    pub fn density(&self, t: f64) -> f64 {
        if self.last == 0 || t <= 0.0 || t >= self.params.c.upper_end() || !t.is_finite() {
            return 0.0;
        }
        let c = self.params.c;
        let b = self.params.inner_order() as f64;
        let w = self.params.weight_order() as f64;
        let step = Step::new(c, b, t);
        let j_hi = (self.last - 1) as f64;
        let j0 = step.mode().clamp(0.0, j_hi);
        let p0 = basis::log_weight_unchecked(b, j0, c, t).exp();
        if p0 == 0.0 {
            return 0.0;
        }
        let q = &self.row.weights;
        let floor = p0 * WALK_CUTOFF;
        let mut sum = q[j0 as usize + 1] * p0;
        let mut p = p0;
        let mut j = j0;
        while j < j_hi {
            p *= step.ratio(j);
            j += 1.0;
            if p < floor {
                break;
            }
            sum += q[j as usize + 1] * p;
        }
        let mut p = p0;
        let mut j = j0;
        while j > 0.0 {
            let r = step.ratio(j - 1.0);
            if r <= 0.0 {
                break;
            }
            p /= r;
            j -= 1.0;
            if p < floor {
                break;
            }
            sum += q[j as usize + 1] * p;
        }
        w * sum
    }

    /// Distribution function at `y` of the `k`-th component `w p_{b,k−1}(t) dt`.
    fn component_cdf(&self, k: usize, y: f64) -> f64 {
        let kf = k as f64;
        let a = self.params.outer_order() as f64;
        let w = self.params.weight_order() as f64;
        match self.params.c.c() {
            0 => special::gamma_p(kf, self.params.n as f64 * y),
            -1 => {
                if y >= 1.0 {
                    1.0
                } else {
                    special::beta_reg(kf, a - kf, y, 1.0 - y)
                }
            }
            cc => {
                let cy = cc as f64 * y;
                special::beta_reg(kf, w / cc as f64, cy / (1.0 + cy), 1.0 / (1.0 + cy))
            }
        }
    }

    /// `ζ(x; y) = ∫_0^y M(x, t) dt`, counting the atom at 0 once `y > 0`.
    pub fn partial_mass(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut total = self.atom_at_zero();
        for k in 1..=self.last {
            let q = self.row.weights[k];
            if q > 0.0 {
                total += q * self.component_cdf(k, y);
            }
        }
        if self.params.c.is_bounded() && y >= 1.0 {
            total += self.atom_one;
        }
        total.min(1.0)
    }

    /// Range `[lo, hi]` in `t` holding all but a negligible part of the
    /// continuous mass.
    fn bulk(&self) -> (f64, f64) {
        let a = self.params.outer_order() as f64;
        let cf = self.params.c.as_f64();
        let q = &self.row.weights;
        let mut acc = 0.0;
        let mut k_lo = 1;
        for (k, &qk) in q.iter().enumerate().take(self.last + 1).skip(1) {
            acc += qk;
            k_lo = k;
            if acc > 1e-16 {
                break;
            }
        }
        let spread = |mu: f64| {
            let v = (mu * (1.0 + cf * mu)).max(1.0 / a) / a;
            v.sqrt()
        };
        let mu_lo = k_lo as f64 / a;
        let mu_hi = self.last.max(1) as f64 / a;
        let lo = (mu_lo - 9.0 * spread(mu_lo)).max(0.0);
        let mut hi = mu_hi + 12.0 * spread(mu_hi);
        if self.params.c.is_bounded() {
            hi = hi.min(1.0);
        }
        (lo, hi)
    }

    /// Breakpoints in the integration variable and the map back to `t`.
    fn layout(&self, extra: &[f64], panels: usize) -> (Vec<f64>, Map) {
        let map = Map::new(self.params.c);
        let (lo, hi) = self.bulk();
        let mut ts = vec![0.0, lo, hi];
        for i in 1..panels {
            ts.push(lo + (hi - lo) * i as f64 / panels as f64);
        }
        ts.extend(extra.iter().copied().filter(|&p| p > 0.0 && p < self.params.c.upper_end()));
        let mut us: Vec<f64> = ts.into_iter().map(|t| map.to_u(t)).collect();
        us.push(1.0);
        us.sort_by(f64::total_cmp);
        us.dedup();
        (us, map)
    }
}

/// `t ↦ u` substitution and its inverse.
#[derive(Debug, Clone, Copy)]
struct Map {
    scale: f64,
    identity: bool,
}

impl Map {
    fn new(c: Regime) -> Self {
        Self {
            scale: c.as_f64().max(1.0),
            identity: c.is_bounded(),
        }
    }

    fn to_u(self, t: f64) -> f64 {
        if self.identity {
            t
        } else {
            let st = self.scale * t;
            st / (1.0 + st)
        }
    }

    /// `(t, dt/du)`.
    fn to_t(self, u: f64) -> (f64, f64) {
        if self.identity {
            (u, 1.0)
        } else {
            let v = 1.0 - u;
            (u / (self.scale * v), 1.0 / (self.scale * v * v))
        }
    }
}

fn endpoint_value<I: Integrand + ?Sized>(params: &OperatorParams, f: &I, x: f64) -> Option<f64> {
    if x == 0.0 {
        Some(f.value(0.0))
    } else if params.c.is_bounded() && x == 1.0 {
        Some(f.value(1.0))
    } else {
        None
    }
}

/// Integrate `f` against a prepared kernel.
pub fn apply_kernel<I: Integrand + ?Sized>(kernel: &Kernel, f: &I, quad: &QuadratureSpec) -> Result<Evaluation> {
    quad.validate()?;
    let params = kernel.params;
    let growth = f.growth();
    params.check_growth(growth.order)?;
    if let Some(v) = endpoint_value(&params, f, kernel.x) {
        return Ok(Evaluation::exact(v));
    }
    let (breaks, map) = kernel.layout(&f.breakpoints(), quad.nodes);
    let integrand = |u: f64| {
        let (t, jac) = map.to_t(u);
        let k = kernel.density(t);
        if k == 0.0 {
            0.0
        } else {
            f.value(t) * k * jac
        }
    };
    let abs_tol = quad.tolerance * 1e-3;
    let int = quadrature::integrate(integrand, &breaks, quad.tolerance, abs_tol, quad.refinement_limit);

    let mut value = kernel.atom_at_zero() * f.value(0.0) + int.value;
    if kernel.atom_one != 0.0 {
        value += kernel.atom_one * f.value(1.0);
    }
    let (_, hi) = kernel.bulk();
    let residual = kernel.residual();
    let trunc_err = 2.0 * residual * growth.bound(2.0 * hi + 1.0);
    Ok(Evaluation {
        value,
        error: int.error + trunc_err,
        quadrature_error: int.error,
        truncation_residual: residual,
        terms: kernel.row.len(),
        panels: int.panels,
        converged: int.converged,
    })
}

/// `L_{n,m}^c(f; x)`; `params.alpha` is ignored.
pub fn apply_base<I: Integrand + ?Sized>(
    params: &OperatorParams,
    f: &I,
    x: f64,
    quad: &QuadratureSpec,
    trunc: &TruncationPolicy,
) -> Result<Evaluation> {
    apply_bezier(&params.base(), f, x, quad, trunc)
}

/// `F_{n,m}^{c,α}(f; x)`.
pub fn apply_bezier<I: Integrand + ?Sized>(
    params: &OperatorParams,
    f: &I,
    x: f64,
    quad: &QuadratureSpec,
    trunc: &TruncationPolicy,
) -> Result<Evaluation> {
    params.validate()?;
    params.c.check(x)?;
    params.check_growth(f.growth().order)?;
    if let Some(v) = endpoint_value(params, f, x) {
        return Ok(Evaluation::exact(v));
    }
    let kernel = Kernel::new(params, x, trunc)?;
    apply_kernel(&kernel, f, quad)
}

/// Continuous part of `M(x, t)` with the default truncation policy.
pub fn kernel_density(params: &OperatorParams, x: f64, t: f64) -> Result<f64> {
    params.c.check(t)?;
    Ok(Kernel::new(params, x, &TruncationPolicy::default())?.density(t))
}

/// `ζ(x; y)` with the default truncation policy.
pub fn partial_mass(params: &OperatorParams, x: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("y = {y} must be nonnegative")));
    }
    Ok(Kernel::new(params, x, &TruncationPolicy::default())?.partial_mass(y))
}
