//! Empirical samples, risk costs and the worst-case value-at-risk engine.
//!
//! Samples are kept sorted non-increasing. Level indices in this module are
//! 1-based: level `n` is the `n`-th largest sample, so `value(1)` is the
//! maximum. The worst-case VaR of a Wasserstein ball around the empirical
//! distribution behaves like water poured over the top `alpha * N` samples:
//! the water volume above level `v` is [`SampleSet::excess`], and the VaR is the
//! lowest level whose volume reaches the radius `epsilon`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{DrccError, Result};

/// Absolute tolerance of the alpha bisection in [`SampleSet::alpha_for_level`].
pub const ALPHA_TOL: f64 = 1e-10;

/// Relative guard used when snapping `alpha * N` to an integer.
const INDEX_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    values: Vec<f64>,
    epsilon: f64,
}

/// Which VaR model is meant: the exact one, or the one restricted to sample values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarVariant {
    Continuous,
    Finite,
}

/// A worst-case VaR value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarLevel {
    pub value: f64,
    /// The critical index, or `None` when the radius overflows every sample.
    pub critical_index: Option<usize>,
    pub overflow: bool,
}

impl SampleSet {
    /// Sorts `values` non-increasing. Needs at least one finite value and `epsilon > 0`.
    pub fn new(mut values: Vec<f64>, epsilon: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(DrccError::InvalidSamples("no samples".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(DrccError::InvalidSamples(format!("non-finite sample {bad}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(DrccError::InvalidParameter(format!("radius must be positive and finite, got {epsilon}")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, epsilon })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sorted values, largest first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `n`-th largest sample (1-based).
    pub fn value(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.values.clone(), epsilon)
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(())
        } else {
            Err(DrccError::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
        }
    }

    /// Splits `alpha * N` into whole levels and the fractional weight of the next one.
    pub fn split(&self, alpha: f64) -> (usize, f64) {
        let n = self.len();
        let an = alpha * n as f64;
        let nearest = an.round();
        let (whole, frac) = if (an - nearest).abs() <= INDEX_GUARD * an.max(1.0) {
            (nearest, 0.0)
        } else {
            (an.floor(), an - an.floor())
        };
        let whole = whole.max(0.0) as usize;
        if whole >= n {
            (n, 0.0)
        } else {
            (whole, frac)
        }
    }

    /// Sum of `f(n)` over the flooded range, counting the partial level fractionally.
    fn partial_sum(&self, alpha: f64, from: usize, f: impl Fn(f64) -> f64) -> f64 {
        let (whole, frac) = self.split(alpha);
        let mut s = 0.0;
        for n in (from + 1)..=whole {
            s += f(self.values[n - 1]);
        }
        if frac > 0.0 && whole >= from {
            s += frac * f(self.values[whole]);
        }
        s
    }

    /// Water volume above level `v` over the top `alpha * N` samples.
    pub fn excess(&self, v: f64, alpha: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        if !v.is_finite() {
            return Err(DrccError::Domain(format!("level must be finite, got {v}")));
        }
        Ok(self.partial_sum(alpha, 0, |xi| (v - xi).max(0.0)) / self.len() as f64)
    }

    /// True when the water volume at level `value(j)` already reaches `epsilon`.
    ///
    /// The set of such `j` is always a prefix of `1..`, which both the
    /// critical index and the alpha bisection rely on.
    pub fn floods(&self, j: usize, alpha: f64) -> bool {
        let (whole, frac) = self.split(alpha);
        if j == 0 || j > whole || (j == whole && frac == 0.0) {
            return false;
        }
        let top = self.values[j - 1];
        let water = self.partial_sum(alpha, j, |xi| top - xi);
        let need = self.len() as f64 * self.epsilon;
        water >= need - 1e-12 * need.max(1.0)
    }

    /// Largest `j` with `floods(j, alpha)`, or `None` when no level qualifies.
    pub fn critical_index(&self, alpha: f64) -> Result<Option<usize>> {
        Self::check_alpha(alpha)?;
        let mut found = None;
        let mut j = 1;
        while j <= self.len() && self.floods(j, alpha) {
            found = Some(j);
            j += 1;
        }
        Ok(found)
    }

    fn overflow_level(&self, alpha: f64) -> f64 {
        let n = self.len() as f64;
        (n * self.epsilon + self.partial_sum(alpha, 0, |xi| xi)) / (n * alpha)
    }

    /// Exact worst-case VaR at risk level `alpha`.
    pub fn var_continuous(&self, alpha: f64) -> Result<VarLevel> {
        match self.critical_index(alpha)? {
            Some(j) => {
                let n = self.len() as f64;
                let width = n * alpha - j as f64;
                let value = (n * self.epsilon + self.partial_sum(alpha, j, |xi| xi)) / width;
                Ok(VarLevel { value, critical_index: Some(j), overflow: false })
            }
            None => Ok(VarLevel { value: self.overflow_level(alpha), critical_index: None, overflow: true }),
        }
    }

    /// Worst-case VaR restricted to sample values.
    ///
    /// On overflow there is no sample value to snap to, so the continuous
    /// overflow level is returned with the flag set.
    pub fn var_finite(&self, alpha: f64) -> Result<VarLevel> {
        match self.critical_index(alpha)? {
            Some(j) => Ok(VarLevel { value: self.value(j), critical_index: Some(j), overflow: false }),
            None => Ok(VarLevel { value: self.overflow_level(alpha), critical_index: None, overflow: true }),
        }
    }

    pub fn var(&self, alpha: f64, variant: VarVariant) -> Result<VarLevel> {
        match variant {
            VarVariant::Continuous => self.var_continuous(alpha),
            VarVariant::Finite => self.var_finite(alpha),
        }
    }

    /// Smallest alpha at which level `n` becomes critical, found by bisection.
    ///
    /// `None` when no alpha below one makes level `n` critical.
    pub fn alpha_for_level(&self, n: usize) -> Result<Option<f64>> {
        if n == 0 || n > self.len() {
            return Err(DrccError::Domain(format!("level {n} outside 1..={}", self.len())));
        }
        if !self.floods(n, 1.0) {
            return Ok(None);
        }
        let mut lo = n as f64 / self.len() as f64;
        let mut hi = 1.0;
        while hi - lo > ALPHA_TOL {
            let mid = 0.5 * (lo + hi);
            if self.floods(n, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(if hi < 1.0 { Some(hi) } else { None })
    }
}

/// Upper and lower limits on the risk level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBounds {
    pub alpha_bar: f64,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
}

fn default_alpha_min() -> f64 {
    1e-6
}

impl RiskBounds {
    pub fn new(alpha_bar: f64) -> Result<Self> {
        Self::with_min(alpha_bar, default_alpha_min())
    }

    pub fn with_min(alpha_bar: f64, alpha_min: f64) -> Result<Self> {
        let b = Self { alpha_bar, alpha_min };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_min > 0.0 && self.alpha_min < self.alpha_bar && self.alpha_bar < 1.0 {
            Ok(())
        } else {
            Err(DrccError::InvalidParameter(format!(
                "need 0 < alpha_min < alpha_bar < 1, got [{}, {}]",
                self.alpha_min, self.alpha_bar
            )))
        }
    }
}

/// Cost charged for choosing risk level alpha. Must be non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RiskCost {
    #[serde(rename = "linear")]
    Linear { p: f64 },
    /// Piecewise linear through `points` (alpha, cost); flat before the first
    /// point and extended along the last segment after the last one.
    #[serde(rename = "custom-monotone")]
    Piecewise { points: Vec<(f64, f64)> },
}

impl RiskCost {
    pub fn linear(p: f64) -> Result<Self> {
        let g = RiskCost::Linear { p };
        g.validate()?;
        Ok(g)
    }

    pub fn piecewise(points: Vec<(f64, f64)>) -> Result<Self> {
        let g = RiskCost::Piecewise { points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RiskCost::Linear { p } => {
                if !(p.is_finite() && *p >= 0.0) {
                    return Err(DrccError::InvalidParameter(format!("risk price {p} must be >= 0")));
                }
            }
            RiskCost::Piecewise { points } => {
                if points.is_empty() {
                    return Err(DrccError::InvalidParameter("risk cost needs points".into()));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return Err(DrccError::InvalidParameter(
                            "risk cost points must have increasing alpha and non-decreasing cost".into(),
                        ));
                    }
                }
                if points.iter().any(|(a, c)| !a.is_finite() || !c.is_finite() || *c < 0.0) {
                    return Err(DrccError::InvalidParameter("risk cost must be finite and >= 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        match self {
            RiskCost::Linear { p } => p * alpha,
            RiskCost::Piecewise { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if alpha <= first.0 {
                    return first.1;
                }
                if alpha >= last.0 {
                    if points.len() < 2 {
                        return last.1;
                    }
                    let prev = points[points.len() - 2];
                    return last.1 + (last.1 - prev.1) / (last.0 - prev.0) * (alpha - last.0);
                }
                let i = points.partition_point(|(a, _)| *a <= alpha);
                let (a0, c0) = points[i - 1];
                let (a1, c1) = points[i];
                c0 + (c1 - c0) * (alpha - a0) / (a1 - a0)
            }
        }
    }

    /// Affine pieces `slope * alpha + intercept` whose maximum is the cost,
    /// available only when the cost is convex.
    pub fn convex_pieces(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            RiskCost::Linear { p } => Some(vec![(*p, 0.0)]),
            RiskCost::Piecewise { points } => {
                let mut pieces = vec![(0.0, points[0].1)];
                for w in points.windows(2) {
                    let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    pieces.push((s, w[0].1 - s * w[0].0));
                }
                let convex = pieces.windows(2).all(|w| w[1].0 >= w[0].0 - 1e-12);
                convex.then_some(pieces)
            }
        }
    }

    /// Adds `delta * alpha` to the cost.
    pub fn with_extra_linear(&self, delta: f64) -> RiskCost {
        match self {
            RiskCost::Linear { p } => RiskCost::Linear { p: p + delta },
            RiskCost::Piecewise { points } => {
                RiskCost::Piecewise { points: points.iter().map(|(a, c)| (*a, c + delta * a)).collect() }
            }
        }
    }
}

/// The VaR staircase restricted to the admissible risk window.
///
/// Entry `i` pairs the level `levels[i]` (sample `first_index + i`) with the
/// smallest admissible alpha at which the finite VaR drops to it.
#[derive(Debug, Clone, PartialEq)]
pub struct VarCurve {
    pub first_index: usize,
    pub levels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub build_time: Duration,
}

impl VarCurve {
    /// Number of curve points.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn build(samples: &SampleSet, bounds: &RiskBounds) -> Result<VarCurve> {
        bounds.validate()?;
        let start = Instant::now();
        let mut first_index = 1;
        let mut levels = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        for n in 1..=samples.len() {
            let Some(a) = samples.alpha_for_level(n)? else { break };
            if a > bounds.alpha_bar {
                break;
            }
            if a < bounds.alpha_min {
                // Dominated by a deeper level reachable at alpha_min.
                first_index = n;
                levels.clear();
                alphas.clear();
                levels.push(samples.value(n));
                alphas.push(bounds.alpha_min);
                continue;
            }
            levels.push(samples.value(n));
            alphas.push(a);
        }
        if levels.is_empty() {
            return Err(DrccError::EmptyCurve(format!(
                "no sample level is reachable with alpha <= {}",
                bounds.alpha_bar
            )));
        }
        Ok(VarCurve { first_index, levels, alphas, build_time: start.elapsed() })
    }
}
