//! Closed-form moments of `L_{n,m}^c`.
//!
//! Raw moments `L(e_i; x)` for `i ≤ 4`, the central moments `μ_2`, `μ_4` and
//! the large-`n` bounds `μ_2 ≤ C x(1+cx)/n`, `μ_4 ≤ C (x(1+cx))²/n²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorParams;

/// Which closed form to use for `μ_4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mu4Form {
    /// Cubic coefficient `24c²(13n + (13m+1)c)`; disagrees with the raw moments once `c ≠ 0`.
    #[default]
    AsPrinted,
    /// Cubic coefficient `24c(n + (m+7)c)`, which agrees with the raw moments.
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRequest {
    pub order: usize,
    pub central: bool,
    pub params: OperatorParams,
    pub x: f64,
}

impl MomentRequest {
    pub fn raw(order: usize, params: OperatorParams, x: f64) -> Self {
        Self {
            order,
            central: false,
            params,
            x,
        }
    }

    pub fn central(order: usize, params: OperatorParams, x: f64) -> Self {
        Self {
            order,
            central: true,
            params,
            x,
        }
    }

    pub fn evaluate(&self, form: Mu4Form) -> Result<f64> {
        if self.central {
            central_moment(self, form)
        } else {
            raw_moment(self)
        }
    }
}

/// `n + (m − j)c`, checked positive.
fn denominator(params: &OperatorParams, j: i64) -> Result<f64> {
    let d = params.order(-j);
    if d <= 0 {
        return Err(Error::Domain(format!(
            "denominator n + (m-{j})c = {d} is not positive (n = {}, m = {}, c = {})",
            params.n, params.m, params.c
        )));
    }
    Ok(d as f64)
}

fn check(req: &MomentRequest) -> Result<()> {
    req.params.validate()?;
    req.params.c.check(req.x)?;
    if req.order > 4 {
        return Err(Error::UnsupportedOrder(req.order));
    }
    Ok(())
}

pub fn raw_moment(req: &MomentRequest) -> Result<f64> {
    check(req)?;
    let p = &req.params;
    let x = req.x;
    let e = |j: i64| p.order(j) as f64;
    Ok(match req.order {
        0 => 1.0,
        1 => x,
        2 => {
            let d1 = denominator(p, 1)?;
            (e(1) * x * x + 2.0 * x) / d1
        }
        3 => {
            let d = denominator(p, 1)? * denominator(p, 2)?;
            (e(1) * e(2) * x.powi(3) + 6.0 * e(1) * x * x + 6.0 * x) / d
        }
        _ => {
            let d = denominator(p, 1)? * denominator(p, 2)? * denominator(p, 3)?;
            (e(1) * e(2) * e(3) * x.powi(4)
                + 12.0 * e(1) * e(2) * x.powi(3)
                + 36.0 * e(1) * x * x
                + 24.0 * x)
                / d
        }
    })
}

/// `μ_s(x) = L((t − x)^s; x)`.
pub fn central_moment(req: &MomentRequest, form: Mu4Form) -> Result<f64> {
    check(req)?;
    let p = &req.params;
    let x = req.x;
    let c = p.c.as_f64();
    let n = p.n as f64;
    let m = p.m as f64;
    Ok(match req.order {
        0 => 1.0,
        1 => 0.0,
        2 => 2.0 * x * (1.0 + c * x) / denominator(p, 1)?,
        3 => {
            let raw = |k| raw_moment(&MomentRequest::raw(k, *p, x));
            raw(3)? - 3.0 * x * raw(2)? + 3.0 * x * x * raw(1)? - x.powi(3)
        }
        _ => {
            let d = denominator(p, 1)? * denominator(p, 2)? * denominator(p, 3)?;
            let cubic = match form {
                Mu4Form::AsPrinted => 24.0 * c * c * (13.0 * n + (13.0 * m + 1.0) * c),
                Mu4Form::Corrected => 24.0 * c * (n + (m + 7.0) * c),
            };
            (12.0 * c * c * (n + (m + 7.0) * c) * x.powi(4)
                + cubic * x.powi(3)
                + 12.0 * (n + (m + 9.0) * c) * x * x
                + 24.0 * x)
                / d
        }
    })
}

/// Constants in the large-`n` moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentBoundConstants {
    pub c2: f64,
    pub c4: f64,
}

impl Default for MomentBoundConstants {
    fn default() -> Self {
        Self { c2: 3.0, c4: 60.0 }
    }
}

/// Threshold `n_0 = 20 (1 + |m|)(1 + |c|)` above which the bounds are claimed.
pub fn asymptotic_threshold(params: &OperatorParams) -> u64 {
    20 * (1 + params.m.unsigned_abs()) * (1 + params.c.c().unsigned_abs())
}

/// `C x(1+cx)/n` for order 2 and `C (x(1+cx))²/n²` for order 4.
pub fn central_moment_bound(order: usize, params: &OperatorParams, x: f64, k: &MomentBoundConstants) -> Result<f64> {
    params.validate()?;
    params.c.check(x)?;
    let n0 = asymptotic_threshold(params);
    if params.n < n0 {
        return Err(Error::NotAsymptotic { n: params.n, n0 });
    }
    let n = params.n as f64;
    let v = x * (1.0 + params.c.as_f64() * x);
    match order {
        2 => Ok(k.c2 * v / n),
        4 => Ok(k.c4 * v * v / (n * n)),
        _ => Err(Error::UnsupportedOrder(order)),
    }
}

/// `δ(x) = √(2x(1+cx)/(n + (m−1)c))`.
pub fn delta_n(params: &OperatorParams, x: f64) -> Result<f64> {
    params.validate()?;
    params.c.check(x)?;
    Ok((2.0 * x * (1.0 + params.c.as_f64() * x) / denominator(params, 1)?).sqrt())
}
