//! Builders that turn a DRCC instance into a [`ModelIR`].
//!
//! Four exact reformulations are available: the finite MILP over the VaR
//! staircase, its stochastic-programming counterpart, the continuous MISOCP
//! over sample pairs, and the MILP for binary technology rows.

mod binary;
mod continuous;
pub mod cuts;
mod finite;
mod stochastic;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{DrccError, Result};
use crate::model::{LinRow, ModelIR, ObjSense, VarKind};
use crate::samples::{RiskBounds, RiskCost, SampleSet, VarCurve};

pub use binary::build_milp_binary;
pub use continuous::{build_continuous, pair_window, ContinuousOptions};
pub use cuts::{
    hyperbolic_oa_cut, ordering_cuts, separate_polymatroid, soc_oa_cut, star_cut, HyperbolicCut, SubmodularCoeffs,
};
pub use finite::{build_finite, FiniteOptions};
pub use stochastic::build_stochastic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionVar {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub binary: bool,
    #[serde(default)]
    pub cost: f64,
}

/// `P(T x >= xi) >= 1 - alpha` for all distributions in the ball around `samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChanceConstraint {
    pub name: String,
    /// Technology row `T` over decision-variable indices.
    pub tech: Vec<(usize, f64)>,
    pub samples: SampleSet,
    pub risk: RiskCost,
    pub bounds: RiskBounds,
}

/// `min c x + sum g(alpha)` over the deterministic rows and the chance constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct DrccInstance {
    pub name: String,
    pub vars: Vec<DecisionVar>,
    pub rows: Vec<(String, LinRow)>,
    pub constraints: Vec<ChanceConstraint>,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Finite,
    Continuous,
    Stochastic,
    MilpBinary,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Finite => "finite",
            ModelKind::Continuous => "continuous",
            ModelKind::Stochastic => "stochastic",
            ModelKind::MilpBinary => "milp-binary",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        Some(match s {
            "finite" => ModelKind::Finite,
            "continuous" => ModelKind::Continuous,
            "stochastic" => ModelKind::Stochastic,
            "milp-binary" | "binary" => ModelKind::MilpBinary,
            _ => return None,
        })
    }
}

/// Extra data for the conic part of one continuous chance constraint.
#[derive(Debug, Clone)]
pub struct ConicLayout {
    pub u: usize,
    pub w: usize,
    pub tau: usize,
    pub coeffs: SubmodularCoeffs,
    /// Index of the `tau >= ||(sqrt(sigma), sqrt(d) o)||` cone in the model.
    pub norm_cone: usize,
    /// Index of the `u w >= tau^2` cone in the model.
    pub hyperbolic_cone: usize,
}

/// Where the pieces of one chance constraint ended up in the model.
#[derive(Debug, Clone)]
pub struct ConstraintLayout {
    pub name: String,
    pub alpha: usize,
    /// Staircase binaries `y` (finite, stochastic) or pair binaries `o` (continuous, binary).
    pub binaries: Vec<usize>,
    /// Sample pairs `(j, k)` matching `binaries` for the pair models.
    pub pairs: Vec<(usize, usize)>,
    /// True when `binaries` must be non-decreasing.
    pub monotone: bool,
    pub conic: Option<ConicLayout>,
    pub curve: Option<VarCurve>,
}

#[derive(Debug, Clone)]
pub struct Formulation {
    pub kind: ModelKind,
    pub model: ModelIR,
    /// Model indices of the decision variables, in instance order.
    pub x: Vec<usize>,
    pub layouts: Vec<ConstraintLayout>,
    /// Time spent building VaR curves.
    pub preprocess: Duration,
}

impl Formulation {
    pub fn alphas(&self, values: &[f64]) -> Vec<f64> {
        self.layouts.iter().map(|l| values[l.alpha]).collect()
    }

    pub fn decisions(&self, values: &[f64]) -> Vec<f64> {
        self.x.iter().map(|&j| values[j]).collect()
    }
}

impl DrccInstance {
    pub fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(DrccError::InvalidParameter(format!("instance `{}` has no chance constraint", self.name)));
        }
        for v in &self.vars {
            if !(v.lower <= v.upper) || !v.cost.is_finite() {
                return Err(DrccError::InvalidBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
            }
        }
        for c in &self.constraints {
            c.bounds.validate()?;
            c.risk.validate()?;
            if c.tech.is_empty() {
                return Err(DrccError::EmptyRow(c.name.clone()));
            }
            for &(j, a) in &c.tech {
                if j >= self.vars.len() {
                    return Err(DrccError::UnknownVariable(j));
                }
                if !a.is_finite() {
                    return Err(DrccError::NonFinite(c.name.clone()));
                }
            }
        }
        Ok(())
    }

    /// Decision variables, deterministic rows and `c x`.
    pub fn base_model(&self, name: &str) -> Result<(ModelIR, Vec<usize>)> {
        self.validate()?;
        let mut m = ModelIR::new(name);
        let mut x = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let kind = if v.binary { VarKind::Binary } else { VarKind::Continuous };
            x.push(m.add_var(&v.name, kind, v.lower, v.upper)?);
        }
        for (name, row) in &self.rows {
            m.add_row(name, row.clone())?;
        }
        let coeffs = self.vars.iter().enumerate().filter(|(_, v)| v.cost != 0.0).map(|(j, v)| (x[j], v.cost)).collect();
        m.set_objective(ObjSense::Minimize, coeffs, self.constant)?;
        Ok((m, x))
    }

    /// Largest value `T x` can take over the variable box.
    pub fn tech_upper(&self, c: &ChanceConstraint) -> f64 {
        c.tech.iter().map(|&(j, a)| if a > 0.0 { a * self.vars[j].upper } else { a * self.vars[j].lower }).sum()
    }

    pub fn objective(&self, x: &[f64], alphas: &[f64]) -> f64 {
        let cx: f64 = self.vars.iter().zip(x).map(|(v, xi)| v.cost * xi).sum();
        cx + self.constant + self.constraints.iter().zip(alphas).map(|(c, &a)| c.risk.eval(a)).sum::<f64>()
    }

    pub fn tech_value(&self, c: &ChanceConstraint, x: &[f64]) -> f64 {
        c.tech.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

pub(crate) fn tech_row(x: &[usize], c: &ChanceConstraint) -> LinRow {
    LinRow::from_terms(c.tech.iter().map(|&(j, a)| (x[j], a)), crate::model::Sense::Ge, 0.0)
}

/// Adds `g(alpha)` to the objective: directly when linear, else through an epigraph variable.
pub(crate) fn add_risk_cost(m: &mut ModelIR, alpha: usize, c: &ChanceConstraint, tag: &str) -> Result<()> {
    match &c.risk {
        RiskCost::Linear { p } => m.add_objective_term(alpha, *p),
        RiskCost::Piecewise { .. } => {
            let pieces = c.risk.convex_pieces().ok_or_else(|| {
                DrccError::Unsupported(format!("risk cost of `{}` must be convex for a continuous alpha", c.name))
            })?;
            let hi = c.risk.eval(c.bounds.alpha_bar).max(c.risk.eval(0.0)) + 1.0;
            let r = m.add_continuous(format!("gcost_{tag}"), 0.0, hi)?;
            for (i, (s, b)) in pieces.into_iter().enumerate() {
                let row = LinRow::from_terms([(r, 1.0), (alpha, -s)], crate::model::Sense::Ge, b);
                m.add_row_with_role(format!("gcost_{tag}_{i}"), row, Some("risk_cost"))?;
            }
            m.add_objective_term(r, 1.0)
        }
    }
}
