//! Test functions with the analytic metadata the bound evaluators need.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|f(t)| ≤ constant · (1 + t^order)` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    pub order: f64,
    pub constant: f64,
}

impl Growth {
    pub const BOUNDED: Growth = Growth {
        order: 0.0,
        constant: 1.0,
    };

    pub fn bound(&self, t: f64) -> f64 {
        self.constant * (1.0 + t.abs().powf(self.order))
    }
}

/// Anything the operators can be applied to.
pub trait Integrand: Sync {
    fn value(&self, t: f64) -> f64;

    fn growth(&self) -> Growth;

    /// Points where the function or its derivative is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// A closure with declared growth, for ad-hoc integrands.
pub struct FnIntegrand<F> {
    pub f: F,
    pub growth: Growth,
    pub breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(f: F, growth: Growth) -> Self {
        Self {
            f,
            growth,
            breakpoints: Vec::new(),
        }
    }

    /// Points where `f` or its derivative may jump.
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }
}

impl<F: Fn(f64) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn growth(&self) -> Growth {
        self.growth
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// Closed-form shapes understood by the catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Formula {
    /// `value`
    Constant { value: f64 },
    /// `t^exponent`
    Power { exponent: f64 },
    /// `sin(frequency · t)`
    Sine { frequency: f64 },
    /// `exp(−rate · t)`
    ExpDecay { rate: f64 },
    /// `1 / (t + shift)`
    Reciprocal { shift: f64 },
    /// `t² / (1 + t²)`
    SaturatingSquare,
    /// `height · max(0, 1 − |t − center| / half_width)`
    Tent {
        center: f64,
        half_width: f64,
        height: f64,
    },
    /// `t (support − t)` on `[0, support]`, zero beyond.
    CappedParabola { support: f64 },
    /// `sin²(π t / support)` on `[0, support]`, zero beyond.
    SineSquaredBump { support: f64 },
    /// `low` for `t < at`, `high` for `t ≥ at`.
    Step { at: f64, low: f64, high: f64 },
}

/// How the derivative behaves on one smooth piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeShape {
    Constant,
    Monotone,
    /// Smooth, with a closed-form second derivative.
    Smooth,
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Formula {
    /// Serialized `kind` tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Formula::Constant { .. } => "constant",
            Formula::Power { .. } => "power",
            Formula::Sine { .. } => "sine",
            Formula::ExpDecay { .. } => "exp_decay",
            Formula::Reciprocal { .. } => "reciprocal",
            Formula::SaturatingSquare => "saturating_square",
            Formula::Tent { .. } => "tent",
            Formula::CappedParabola { .. } => "capped_parabola",
            Formula::SineSquaredBump { .. } => "sine_squared_bump",
            Formula::Step { .. } => "step",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Formula::Constant { value } => value.is_finite(),
            Formula::Power { exponent } => exponent.is_finite() && exponent >= 0.0,
            Formula::Sine { frequency } => frequency.is_finite() && frequency > 0.0,
            Formula::ExpDecay { rate } => rate.is_finite() && rate > 0.0,
            Formula::Reciprocal { shift } => shift.is_finite() && shift > 0.0,
            Formula::SaturatingSquare => true,
            Formula::Tent {
                center,
                half_width,
                height,
            } => half_width > 0.0 && center - half_width >= 0.0 && height.is_finite(),
            Formula::CappedParabola { support } | Formula::SineSquaredBump { support } => {
                support.is_finite() && support > 0.0
            }
            Formula::Step { at, low, high } => at > 0.0 && low.is_finite() && high.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Catalogue(format!("invalid formula parameters: {self:?}")))
        }
    }

    /// Sorted interior breakpoints in `(0, ∞)`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let pts = match *self {
            Formula::Tent {
                center, half_width, ..
            } => vec![center - half_width, center, center + half_width],
            Formula::CappedParabola { support } | Formula::SineSquaredBump { support } => vec![support],
            Formula::Step { at, .. } => vec![at],
            _ => Vec::new(),
        };
        pts.into_iter().filter(|&p| p > 0.0).collect()
    }

    /// Points where the function itself jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match *self {
            Formula::Step { at, low, high } if low != high => vec![at],
            _ => Vec::new(),
        }
    }

    /// Upper end of the support when it is compact.
    pub fn support_end(&self) -> Option<f64> {
        match *self {
            Formula::Constant { value: 0.0 } => Some(0.0),
            Formula::Tent {
                center, half_width, ..
            } => Some(center + half_width),
            Formula::CappedParabola { support } | Formula::SineSquaredBump { support } => Some(support),
            _ => None,
        }
    }

    /// Index of the piece that `t` belongs to, approaching from `side`.
    fn piece_index(&self, t: f64, side: Side) -> usize {
        self.breakpoints()
            .iter()
            .filter(|&&p| match side {
                Side::Left => p < t,
                Side::Right => p <= t,
            })
            .count()
    }

    fn piece_value(&self, piece: usize, t: f64) -> f64 {
        match *self {
            Formula::Constant { value } => value,
            Formula::Power { exponent } => {
                if exponent == 0.0 {
                    1.0
                } else {
                    t.powf(exponent)
                }
            }
            Formula::Sine { frequency } => (frequency * t).sin(),
            Formula::ExpDecay { rate } => (-rate * t).exp(),
            Formula::Reciprocal { shift } => 1.0 / (t + shift),
            Formula::SaturatingSquare => t * t / (1.0 + t * t),
            Formula::Tent {
                center,
                half_width,
                height,
            } => match self.tent_piece(piece) {
                1 => height * (1.0 - (center - t) / half_width),
                2 => height * (1.0 - (t - center) / half_width),
                _ => 0.0,
            },
            Formula::CappedParabola { support } => {
                if piece == 0 {
                    t * (support - t)
                } else {
                    0.0
                }
            }
            Formula::SineSquaredBump { support } => {
                if piece == 0 {
                    (PI * t / support).sin().powi(2)
                } else {
                    0.0
                }
            }
            Formula::Step { low, high, .. } => {
                if piece == 0 {
                    low
                } else {
                    high
                }
            }
        }
    }

    fn piece_derivative(&self, piece: usize, t: f64) -> f64 {
        match *self {
            Formula::Constant { .. } | Formula::Step { .. } => 0.0,
            Formula::Power { exponent } => {
                if exponent == 0.0 {
                    0.0
                } else if exponent == 1.0 {
                    1.0
                } else {
                    exponent * t.powf(exponent - 1.0)
                }
            }
            Formula::Sine { frequency } => frequency * (frequency * t).cos(),
            Formula::ExpDecay { rate } => -rate * (-rate * t).exp(),
            Formula::Reciprocal { shift } => -1.0 / ((t + shift) * (t + shift)),
            Formula::SaturatingSquare => 2.0 * t / (1.0 + t * t).powi(2),
            Formula::Tent {
                half_width, height, ..
            } => match self.tent_piece(piece) {
                1 => height / half_width,
                2 => -height / half_width,
                _ => 0.0,
            },
            Formula::CappedParabola { support } => {
                if piece == 0 {
                    support - 2.0 * t
                } else {
                    0.0
                }
            }
            Formula::SineSquaredBump { support } => {
                if piece == 0 {
                    PI / support * (2.0 * PI * t / support).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// Second derivative on pieces whose derivative is [`DerivativeShape::Smooth`].
    fn piece_second_derivative(&self, piece: usize, t: f64) -> f64 {
        match *self {
            Formula::Sine { frequency } => -frequency * frequency * (frequency * t).sin(),
            Formula::SaturatingSquare => {
                let s = 1.0 + t * t;
                (2.0 - 6.0 * t * t) / (s * s * s)
            }
            Formula::SineSquaredBump { support } if piece == 0 => {
                let w = PI / support;
                2.0 * w * w * (2.0 * w * t).cos()
            }
            _ => 0.0,
        }
    }

    fn piece_shape(&self, piece: usize) -> DerivativeShape {
        match *self {
            Formula::Constant { .. } | Formula::Step { .. } | Formula::Tent { .. } => DerivativeShape::Constant,
            Formula::Power { exponent } => {
                if exponent == 0.0 || exponent == 1.0 {
                    DerivativeShape::Constant
                } else {
                    DerivativeShape::Monotone
                }
            }
            Formula::ExpDecay { .. } | Formula::Reciprocal { .. } => DerivativeShape::Monotone,
            Formula::Sine { .. } | Formula::SaturatingSquare => DerivativeShape::Smooth,
            Formula::CappedParabola { .. } => {
                if piece == 0 {
                    DerivativeShape::Monotone
                } else {
                    DerivativeShape::Constant
                }
            }
            Formula::SineSquaredBump { .. } => {
                if piece == 0 {
                    DerivativeShape::Smooth
                } else {
                    DerivativeShape::Constant
                }
            }
        }
    }

    /// Map a piece index to rising (1) / falling (2) / flat (0, 3) for the
    /// tent, whose left foot may sit at the origin.
    fn tent_piece(&self, piece: usize) -> usize {
        match *self {
            Formula::Tent {
                center, half_width, ..
            } if center - half_width <= 0.0 => piece + 1,
            _ => piece,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.piece_value(self.piece_index(t, Side::Right), t)
    }

    pub fn limit(&self, t: f64, side: Side) -> f64 {
        self.piece_value(self.piece_index(t, side), t)
    }

    /// One-sided derivative `f′(t−)` or `f′(t+)`.
    pub fn derivative(&self, t: f64, side: Side) -> f64 {
        self.piece_derivative(self.piece_index(t, side), t)
    }
}

/// Hypotheses a function may satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothnessClass {
    /// Continuous with `sup |f| ≤ sup`.
    BoundedContinuous { sup: f64 },
    /// Bounded, possibly discontinuous.
    Bounded { sup: f64 },
    /// `|f(t) − f(x)| ≤ m |t − x|^γ / (t + x)^{γ/2}`.
    Lipschitz { gamma: f64, m: f64 },
    /// `|f(t)| ≤ m (1 + t²)`.
    WeightedC2 { m: f64 },
    /// Absolutely continuous with derivative of bounded variation.
    Dbv,
}

impl SmoothnessClass {
    pub fn tag(&self) -> &'static str {
        match self {
            SmoothnessClass::BoundedContinuous { .. } => "bounded-continuous",
            SmoothnessClass::Bounded { .. } => "bounded",
            SmoothnessClass::Lipschitz { .. } => "lipschitz",
            SmoothnessClass::WeightedC2 { .. } => "weighted-c2",
            SmoothnessClass::Dbv => "dbv",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SmoothnessClass::BoundedContinuous { sup } | SmoothnessClass::Bounded { sup } => sup >= 0.0,
            SmoothnessClass::Lipschitz { gamma, m } => gamma > 0.0 && gamma <= 1.0 && m >= 0.0,
            SmoothnessClass::WeightedC2 { m } => m >= 0.0,
            SmoothnessClass::Dbv => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Catalogue(format!("invalid class parameters: {self:?}")))
        }
    }
}

/// A catalogued function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub formula: Formula,
    pub growth: Growth,
    #[serde(default)]
    pub classes: Vec<SmoothnessClass>,
}

impl TestFunction {
    pub fn new(id: impl Into<String>, formula: Formula, growth: Growth, classes: Vec<SmoothnessClass>) -> Self {
        Self {
            id: id.into(),
            description: String::new(),
            formula,
            growth,
            classes,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.formula.eval(t)
    }

    pub fn limit(&self, t: f64, side: Side) -> f64 {
        self.formula.limit(t, side)
    }

    pub fn derivative(&self, t: f64, side: Side) -> f64 {
        self.formula.derivative(t, side)
    }

    pub fn jumps(&self) -> Vec<f64> {
        self.formula.jumps()
    }

    pub fn support_end(&self) -> Option<f64> {
        self.formula.support_end()
    }

    pub fn has_class(&self, tag: &str) -> bool {
        self.classes.iter().any(|c| c.tag() == tag)
    }

    pub fn lipschitz(&self) -> Option<(f64, f64)> {
        self.classes.iter().find_map(|c| match *c {
            SmoothnessClass::Lipschitz { gamma, m } => Some((gamma, m)),
            _ => None,
        })
    }

    /// `sup |f|` when the function is declared bounded.
    pub fn sup(&self) -> Option<f64> {
        self.classes.iter().find_map(|c| match *c {
            SmoothnessClass::BoundedContinuous { sup } | SmoothnessClass::Bounded { sup } => Some(sup),
            _ => None,
        })
    }

    pub fn weighted_constant(&self) -> Option<f64> {
        self.classes.iter().find_map(|c| match *c {
            SmoothnessClass::WeightedC2 { m } => Some(m),
            _ => None,
        })
    }

    pub fn require(&self, tag: &'static str) -> Result<()> {
        if self.has_class(tag) {
            Ok(())
        } else {
            Err(Error::ClassMismatch {
                function: self.id.clone(),
                required: tag,
            })
        }
    }

    /// Pieces `(start, end, shape)` of `f′` on `[0, ∞)`.
    pub fn derivative_pieces(&self) -> Vec<(f64, f64, DerivativeShape)> {
        let mut edges = vec![0.0];
        edges.extend(self.formula.breakpoints());
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[0], w[1], self.formula.piece_shape(i)))
            .collect()
    }

    pub(crate) fn piece_derivative(&self, piece: usize, t: f64) -> f64 {
        self.formula.piece_derivative(piece, t)
    }

    pub(crate) fn piece_second_derivative(&self, piece: usize, t: f64) -> f64 {
        self.formula.piece_second_derivative(piece, t)
    }

    /// Check parameters and that the declared growth and bounds hold on a
    /// sample grid.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Catalogue("empty function id".into()));
        }
        self.formula.validate()?;
        for c in &self.classes {
            c.validate()?;
        }
        if !(self.growth.order >= 0.0 && self.growth.constant >= 0.0) {
            return Err(Error::Catalogue(format!("`{}`: invalid growth metadata", self.id)));
        }
        let sup = self.sup();
        let wc2 = self.weighted_constant();
        for i in 0..=5000 {
            let t = i as f64 * 0.01;
            let v = self.eval(t).abs();
            let slack = 1e-12 * (1.0 + v);
            if v > self.growth.bound(t) + slack {
                return Err(Error::Catalogue(format!("`{}`: growth bound fails at t = {t}", self.id)));
            }
            if sup.is_some_and(|s| v > s + slack) {
                return Err(Error::Catalogue(format!("`{}`: sup bound fails at t = {t}", self.id)));
            }
            if wc2.is_some_and(|m| v > m * (1.0 + t * t) + slack) {
                return Err(Error::Catalogue(format!("`{}`: weighted bound fails at t = {t}", self.id)));
            }
        }
        if self.has_class("dbv") && !self.jumps().is_empty() {
            return Err(Error::Catalogue(format!("`{}`: a function with jumps cannot be DBV", self.id)));
        }
        Ok(())
    }
}

impl Integrand for TestFunction {
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }

    fn growth(&self) -> Growth {
        self.growth
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.formula.breakpoints()
    }
}
