//! Basis weights `p_{n,k}(x;c)` and their upper tails `J_{n,k}(x,c)`.
//!
//! The three regimes are the Poisson weights (`c = 0`), binomial weights
//! (`c = −1`, `x ∈ [0,1]`) and negative-binomial weights with real shape
//! `n/c` (`c ≥ 1`). Tails go through the regularized incomplete gamma and
//! beta functions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// The regime parameter `c ∈ {−1, 0, 1, 2, …}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Regime(i64);

impl Regime {
    pub fn new(c: i64) -> Result<Self> {
        if c < -1 {
            return Err(Error::Domain(format!("regime c = {c} is below -1")));
        }
        Ok(Self(c))
    }

    pub fn c(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `c = −1` lives on `[0, 1]`; every other regime on `[0, ∞)`.
    pub fn is_bounded(self) -> bool {
        self.0 == -1
    }

    pub fn upper_end(self) -> f64 {
        if self.is_bounded() {
            1.0
        } else {
            f64::INFINITY
        }
    }

    pub fn contains(self, x: f64) -> bool {
        x >= 0.0 && x <= self.upper_end()
    }

    pub fn check(self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("x = {x} outside the domain of regime c = {}", self.0)))
        }
    }

    /// `φ(x) = √(x(1 + cx))`.
    pub fn phi(self, x: f64) -> f64 {
        (x * (1.0 + self.as_f64() * x)).max(0.0).sqrt()
    }
}

impl TryFrom<i64> for Regime {
    type Error = Error;

    fn try_from(c: i64) -> Result<Self> {
        Self::new(c)
    }
}

impl From<Regime> for i64 {
    fn from(r: Regime) -> i64 {
        r.0
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn check_args(n: u64, c: Regime, x: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("basis order n must be positive".into()));
    }
    c.check(x)
}

/// Log of `p_{n,k}(x;c)`; `−∞` where the weight vanishes.
pub fn log_basis_weight(n: u64, k: u64, c: Regime, x: f64) -> Result<f64> {
    check_args(n, c, x)?;
    if c.is_bounded() && k > n {
        return Err(Error::Domain(format!("index k = {k} exceeds binomial order n = {n}")));
    }
    Ok(log_weight_unchecked(n as f64, k as f64, c, x))
}

pub fn basis_weight(n: u64, k: u64, c: Regime, x: f64) -> Result<f64> {
    log_basis_weight(n, k, c, x).map(f64::exp)
}

/// `J_{n,k}(x,c) = Σ_{j ≥ k} p_{n,j}(x;c)`. For `c = −1` the index `k = n + 1`
/// is accepted and gives the empty tail 0.
pub fn basis_tail(n: u64, k: u64, c: Regime, x: f64) -> Result<f64> {
    check_args(n, c, x)?;
    if c.is_bounded() && k > n + 1 {
        return Err(Error::Domain(format!("index k = {k} exceeds binomial order n = {n}")));
    }
    Ok(tail_unchecked(n as f64, k, c, x))
}

/// Arguments are assumed valid; `n` may be a real order.
pub(crate) fn log_weight_unchecked(n: f64, k: f64, c: Regime, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    match c.c() {
        0 => special::ln_poisson_mass(k, n * x),
        -1 => {
            if k > n {
                f64::NEG_INFINITY
            } else {
                special::ln_binomial_mass(k, n, x, 1.0 - x)
            }
        }
        cc => {
            let cx = cc as f64 * x;
            let q = 1.0 / (1.0 + cx);
            let s = cx / (1.0 + cx);
            special::ln_neg_binomial_mass(k, n / cc as f64, q, s)
        }
    }
}

pub(crate) fn tail_unchecked(n: f64, k: u64, c: Regime, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    let kf = k as f64;
    match c.c() {
        0 => special::gamma_p(kf, n * x),
        -1 => {
            if kf > n {
                0.0
            } else if x == 1.0 {
                1.0
            } else {
                special::beta_reg(kf, n - kf + 1.0, x, 1.0 - x)
            }
        }
        cc => {
            let cx = cc as f64 * x;
            special::beta_reg(kf, n / cc as f64, cx / (1.0 + cx), 1.0 / (1.0 + cx))
        }
    }
}

/// Mean and variance of the weight distribution `k ↦ p_{n,k}(x;c)`.
pub(crate) fn weight_moments(n: f64, c: Regime, x: f64) -> (f64, f64) {
    let mean = n * x;
    (mean, mean * (1.0 + c.as_f64() * x))
}

/// Smallest `K` with `J_{n,K}(x,c) < eps`.
pub fn truncation_index(n: u64, c: Regime, x: f64, eps: f64, k_max: u64) -> Result<u64> {
    check_args(n, c, x)?;
    let nf = n as f64;
    let tail = |k: u64| tail_unchecked(nf, k, c, x);
    if x == 0.0 {
        return Ok(1);
    }
    let (mean, var) = weight_moments(nf, c, x);
    let sd = var.sqrt().max(1.0);
    let cap = if c.is_bounded() { k_max.min(n + 1) } else { k_max };

    let mut hi = (mean + sd).ceil().max(1.0) as u64;
    let mut step = sd;
    while hi < cap && tail(hi) >= eps {
        step *= 2.0;
        hi = (mean + step).ceil() as u64;
    }
    if hi >= cap {
        hi = cap;
        if tail(hi) >= eps {
            return Err(Error::Truncation {
                k_max,
                residual: tail(hi),
            });
        }
    }
    // tail(lo) >= eps > tail(hi)
    let mut lo = 0u64;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
