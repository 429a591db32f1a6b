//! Bézier weights `Q^{(α)}_{n,k} = J_{n,k}^α − J_{n,k+1}^α`.

use serde::{Deserialize, Serialize};

use crate::basis::{self, Regime};
use crate::error::{Error, Result};

/// Bézier exponent, a real `α ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha >= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Alpha(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// Where to cut the infinite sum over `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    pub epsilon_tail: f64,
    pub k_max: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            epsilon_tail: 1e-12,
            k_max: 1_000_000,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_tail > 0.0 && self.epsilon_tail <= 1e-3) {
            return Err(Error::Setting(format!(
                "epsilon_tail = {} must lie in (0, 1e-3]",
                self.epsilon_tail
            )));
        }
        if self.k_max == 0 {
            return Err(Error::Setting("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// `J^α − (J − p)^α` without cancellation, given `p ≤ J`.
pub(crate) fn q_from_tail(tail: f64, weight: f64, alpha: Alpha) -> f64 {
    if alpha.is_one() {
        return weight;
    }
    if tail <= 0.0 || weight <= 0.0 {
        return 0.0;
    }
    let ratio = (weight / tail).min(1.0);
    let a = alpha.value();
    if ratio == 1.0 {
        return tail.powf(a);
    }
    -tail.powf(a) * (a * (-ratio).ln_1p()).exp_m1()
}

pub fn bezier_weight(n: u64, k: u64, c: Regime, x: f64, alpha: Alpha) -> Result<f64> {
    let p = basis::basis_weight(n, k, c, x)?;
    if alpha.is_one() {
        return Ok(p);
    }
    let tail = basis::basis_tail(n, k, c, x)?;
    Ok(q_from_tail(tail, p, alpha))
}

/// The truncated row `Q_0, …, Q_{K−1}` together with the neglected mass `J_K^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierRow {
    pub weights: Vec<f64>,
    pub residual: f64,
    /// Tails `J_0, …, J_{K−1}` used to build the weights.
    pub tails: Vec<f64>,
}

impl BezierRow {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().enumerate().map(|(k, &q)| (k as u64, q))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Row of basis weights and tails for order `n` (possibly real), truncated at
/// `K` from [`basis::truncation_index`].
pub(crate) fn basis_row(n: u64, c: Regime, x: f64, policy: &TruncationPolicy) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    policy.validate()?;
    let big_k = basis::truncation_index(n, c, x, policy.epsilon_tail, policy.k_max)?;
    let nf = n as f64;
    let weights: Vec<f64> = (0..big_k)
        .map(|k| basis::log_weight_unchecked(nf, k as f64, c, x).exp())
        .collect();
    let residual = basis::tail_unchecked(nf, big_k, c, x);
    // tails by summing from the top keeps relative accuracy deep in the tail
    let mut tails = vec![0.0; weights.len()];
    let mut acc = residual;
    for k in (0..weights.len()).rev() {
        acc += weights[k];
        tails[k] = acc;
    }
    Ok((weights, tails, residual))
}

pub fn bezier_row(n: u64, c: Regime, x: f64, alpha: Alpha, policy: &TruncationPolicy) -> Result<BezierRow> {
    let (p, tails, residual) = basis_row(n, c, x, policy)?;
    let weights = if alpha.is_one() {
        p
    } else {
        p.iter()
            .zip(&tails)
            .map(|(&pk, &jk)| q_from_tail(jk, pk, alpha))
            .collect()
    };
    Ok(BezierRow {
        weights,
        residual: residual.powf(alpha.value()),
        tails,
    })
}
