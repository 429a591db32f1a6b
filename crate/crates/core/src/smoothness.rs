//! Grid estimators for the moduli of smoothness and exact total variation of
//! piecewise-described functions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::Regime;
use crate::error::{Error, Result};
use crate::function::{DerivativeShape, Side, TestFunction};
use crate::quadrature;

/// A grid supremum and the spacing of the grid it was taken over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEstimate {
    pub value: f64,
    pub spacing: f64,
}

/// Compact window `[a, b]` standing in for `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let w = Self { a, b };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_finite() && self.b.is_finite() && self.a >= 0.0 && self.a < self.b {
            Ok(())
        } else {
            Err(Error::EmptyWindow(self.a, self.b))
        }
    }

    /// `a, a + 1/d, a + 2/d, …` below `b`, then `b`. Doubling `d` gives a
    /// superset.
    pub fn grid(&self, density: usize) -> Vec<f64> {
        let h = 1.0 / density as f64;
        let count = ((self.b - self.a) * density as f64).ceil() as usize;
        let mut pts: Vec<f64> = (0..count)
            .map(|i| self.a + i as f64 * h)
            .take_while(|&t| t < self.b)
            .collect();
        pts.push(self.b);
        pts
    }
}

impl Default for Window {
    fn default() -> Self {
        Self { a: 0.0, b: 50.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusRequest<'a> {
    pub f: &'a TestFunction,
    pub delta: f64,
    pub beta: f64,
    pub window: Window,
    pub grid_density: usize,
}

impl ModulusRequest<'_> {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Setting(format!("delta = {} must be positive", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Setting(format!("beta = {} must lie in [0, 1]", self.beta)));
        }
        check_density(self.grid_density)
    }
}

fn check_density(density: usize) -> Result<()> {
    if density < 100 {
        return Err(Error::Setting(format!("grid density {density} is below 100")));
    }
    Ok(())
}

/// Grid estimate of the least `M` with
/// `|f(t) − f(x)| ≤ M |t − x|^γ / (t + x)^{γ/2}`.
pub fn lipschitz_seminorm(f: &TestFunction, gamma: f64, window: Window, grid_density: usize) -> Result<GridEstimate> {
    window.validate()?;
    check_density(grid_density)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Setting(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let pts = window.grid(grid_density);
    let vals: Vec<f64> = pts.iter().map(|&t| f.eval(t)).collect();
    let mut sup: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            let d = (vals[i] - vals[j]).abs();
            if d == 0.0 {
                continue;
            }
            let ratio = d * (pts[i] + pts[j]).powf(gamma / 2.0) / (pts[i] - pts[j]).powf(gamma);
            sup = sup.max(ratio);
        }
    }
    Ok(GridEstimate {
        value: sup,
        spacing: 1.0 / grid_density as f64,
    })
}

/// Ditzian–Totik modulus
/// `sup_{0<i≤δ} sup_x |f(x + iφ^β(x)/2) − f(x − iφ^β(x)/2)|`
/// over grid points `x` of the window with both arguments in the domain.
pub fn dt_modulus(req: &ModulusRequest<'_>, c: Regime) -> Result<GridEstimate> {
    req.validate()?;
    let steps = req.grid_density;
    let xs = req.window.grid(req.grid_density);
    let upper = c.upper_end();
    let mut sup: f64 = 0.0;
    for &x in &xs {
        let scale = c.phi(x).powf(req.beta) / 2.0;
        for j in 1..=steps {
            let h = req.delta * j as f64 / steps as f64 * scale;
            let (lo, hi) = (x - h, x + h);
            if lo < 0.0 || hi > upper {
                continue;
            }
            sup = sup.max((req.f.eval(hi) - req.f.eval(lo)).abs());
        }
    }
    Ok(GridEstimate {
        value: sup,
        spacing: 1.0 / req.grid_density as f64,
    })
}

/// Weighted modulus `Ω(f; δ) = sup_{x, 0<h≤δ} |f(x+h) − f(x)| / (1 + (x+h)²)`.
pub fn weighted_modulus(f: &TestFunction, delta: f64, window: Window, grid_density: usize) -> Result<GridEstimate> {
    f.require("weighted-c2")?;
    window.validate()?;
    check_density(grid_density)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Setting(format!("delta = {delta} must be positive")));
    }
    let steps = grid_density;
    let mut sup: f64 = 0.0;
    for x in window.grid(grid_density) {
        let fx = f.eval(x);
        for j in 1..=steps {
            let y = x + delta * j as f64 / steps as f64;
            sup = sup.max((f.eval(y) - fx).abs() / (1.0 + y * y));
        }
    }
    Ok(GridEstimate {
        value: sup,
        spacing: 1.0 / grid_density as f64,
    })
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shape of `g` on one piece.
#[derive(Clone)]
pub enum PieceShape {
    Constant,
    Monotone,
    /// Smooth with the given derivative `g′`.
    Smooth(RealFn),
}

impl std::fmt::Debug for PieceShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PieceShape::Constant => write!(f, "Constant"),
            PieceShape::Monotone => write!(f, "Monotone"),
            PieceShape::Smooth(_) => write!(f, "Smooth"),
        }
    }
}

/// `g` on `[start, end]`, with `value` continuous on the closed piece.
#[derive(Clone)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub shape: PieceShape,
    pub value: RealFn,
}

impl std::fmt::Debug for Piece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Piece")
            .field("start", &self.start)
            .field("end", &self.end)
            .field("shape", &self.shape)
            .finish()
    }
}

/// Piecewise description of a function of bounded variation. At a shared
/// endpoint the value is taken from the right piece unless overridden.
#[derive(Debug, Clone)]
pub struct BvProfile {
    pieces: Vec<Piece>,
    overrides: Vec<(f64, f64)>,
}

impl BvProfile {
    pub fn new(pieces: Vec<Piece>, overrides: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InconsistentProfile("no pieces".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.start < p.end) {
                return Err(Error::InconsistentProfile(format!(
                    "piece {i} has empty range [{}, {}]",
                    p.start, p.end
                )));
            }
            if i > 0 && pieces[i - 1].end != p.start {
                return Err(Error::InconsistentProfile(format!("gap or overlap before piece {i}")));
            }
            if let PieceShape::Monotone | PieceShape::Constant = p.shape {
                check_shape(i, p)?;
            }
        }
        Ok(Self { pieces, overrides })
    }

    pub fn start(&self) -> f64 {
        self.pieces[0].start
    }

    pub fn end(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].end
    }

    /// Value at `t`, right-continuous except at overridden points.
    pub fn value(&self, t: f64) -> f64 {
        if let Some(&(_, v)) = self.overrides.iter().find(|&&(p, _)| p == t) {
            return v;
        }
        let idx = self
            .pieces
            .iter()
            .rposition(|p| p.start <= t)
            .unwrap_or(0);
        let piece = &self.pieces[idx];
        (piece.value)(t.min(piece.end))
    }

    /// Profile of `f′` for a DBV function.
    pub fn derivative_of(f: &TestFunction) -> Result<Self> {
        f.require("dbv")?;
        let owned = Arc::new(f.clone());
        let pieces = f
            .derivative_pieces()
            .into_iter()
            .enumerate()
            .map(|(i, (start, end, shape))| derivative_piece(&owned, i, start, end, shape, 0.0))
            .collect();
        Self::new(pieces, Vec::new())
    }

    /// Profile of `(f′)_x`: `f′(t) − f′(x−)` left of `x`, `0` at `x`,
    /// `f′(t) − f′(x+)` right of `x`.
    pub fn aux_derivative(f: &TestFunction, x: f64) -> Result<Self> {
        f.require("dbv")?;
        if !(x > 0.0) {
            return Err(Error::Domain(format!("x = {x} must be positive")));
        }
        let owned = Arc::new(f.clone());
        let left = f.derivative(x, Side::Left);
        let right = f.derivative(x, Side::Right);
        let mut pieces = Vec::new();
        for (i, (start, end, shape)) in f.derivative_pieces().into_iter().enumerate() {
            if end <= x {
                pieces.push(derivative_piece(&owned, i, start, end, shape, left));
            } else if start >= x {
                pieces.push(derivative_piece(&owned, i, start, end, shape, right));
            } else {
                pieces.push(derivative_piece(&owned, i, start, x, shape, left));
                pieces.push(derivative_piece(&owned, i, x, end, shape, right));
            }
        }
        Self::new(pieces, vec![(x, 0.0)])
    }
}

fn derivative_piece(f: &Arc<TestFunction>, i: usize, start: f64, end: f64, shape: DerivativeShape, shift: f64) -> Piece {
    let g = Arc::clone(f);
    let value: RealFn = Arc::new(move |t| g.piece_derivative(i, t) - shift);
    let shape = match shape {
        DerivativeShape::Constant => PieceShape::Constant,
        DerivativeShape::Monotone => PieceShape::Monotone,
        DerivativeShape::Smooth => {
            let h = Arc::clone(f);
            PieceShape::Smooth(Arc::new(move |t| h.piece_second_derivative(i, t)))
        }
    };
    Piece {
        start,
        end,
        shape,
        value,
    }
}

/// Reject pieces declared constant or monotone that are visibly not.
fn check_shape(i: usize, p: &Piece) -> Result<()> {
    let hi = if p.end.is_finite() { p.end } else { p.start + 100.0 };
    let samples: Vec<f64> = (0..=64)
        .map(|j| p.start + (hi - p.start) * j as f64 / 64.0)
        .map(|t| (p.value)(t))
        .filter(|v| v.is_finite())
        .collect();
    let scale = samples.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let ok = match p.shape {
        PieceShape::Constant => samples.windows(2).all(|w| (w[1] - w[0]).abs() <= tol),
        _ => {
            samples.windows(2).all(|w| w[1] >= w[0] - tol) || samples.windows(2).all(|w| w[1] <= w[0] + tol)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InconsistentProfile(format!("piece {i} is not {:?}", p.shape)))
    }
}

/// `V_a^b g` for a piecewise profile: endpoint differences on monotone
/// pieces, `∫|g′|` on smooth pieces, plus jumps at breakpoints and overrides.
pub fn total_variation(profile: &BvProfile, a: f64, b: f64) -> Result<f64> {
    if !(a <= b) || a < profile.start() || b > profile.end() {
        return Err(Error::InconsistentProfile(format!(
            "interval [{a}, {b}] is outside the profile range [{}, {}]",
            profile.start(),
            profile.end()
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for p in &profile.pieces {
        let (l, r) = (p.start.max(a), p.end.min(b));
        if l >= r {
            continue;
        }
        total += match &p.shape {
            PieceShape::Constant => 0.0,
            PieceShape::Monotone => ((p.value)(r) - (p.value)(l)).abs(),
            PieceShape::Smooth(d) => {
                let breaks: Vec<f64> = (0..=8).map(|j| l + (r - l) * j as f64 / 8.0).collect();
                quadrature::integrate(|t| d(t).abs(), &breaks, 1e-13, 1e-15, 2000).value
            }
        };
    }
    // jumps between pieces and at overridden points
    let mut marks: Vec<f64> = profile.pieces[1..].iter().map(|p| p.start).collect();
    marks.extend(profile.overrides.iter().map(|&(t, _)| t));
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    for t in marks {
        if t < a || t > b {
            continue;
        }
        let here = profile.value(t);
        let left = profile
            .pieces
            .iter()
            .find(|p| p.start < t && t <= p.end)
            .map(|p| (p.value)(t));
        let right = profile
            .pieces
            .iter()
            .find(|p| p.start <= t && t < p.end)
            .map(|p| (p.value)(t));
        if t > a {
            if let Some(l) = left {
                total += (here - l).abs();
            }
        }
        if t < b {
            if let Some(r) = right {
                total += (r - here).abs();
            }
        }
    }
    Ok(total)
}

/// `f_x(t)`: `f(t) − f(x−)` for `t < x`, `0` at `t = x`, `f(t) − f(x+)` for `t > x`.
pub fn aux_fx(f: &TestFunction, x: f64, t: f64) -> Result<f64> {
    if !(x >= 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!("aux_fx needs x, t >= 0 (x = {x}, t = {t})")));
    }
    Ok(if t < x {
        f.eval(t) - f.limit(x, Side::Left)
    } else if t == x {
        0.0
    } else {
        f.eval(t) - f.limit(x, Side::Right)
    })
}
