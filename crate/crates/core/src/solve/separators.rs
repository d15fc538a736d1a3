//! Separators and the solve entry point for DRCC formulations.

use serde::{Deserialize, Serialize};

use super::bnc::{branch_and_cut, HeuristicGroup, Limits, MipOutcome, SeparationMode, Separator};
use crate::error::Result;
use crate::model::{ConeTag, Cut, CutTag, LinRow, Sense};
use crate::reformulate::{hyperbolic_oa_cut, separate_polymatroid, soc_oa_cut, Formulation, SubmodularCoeffs};

/// Greedy polymatroid cuts for `tau >= sqrt(sigma + sum d o)`.
pub struct PolymatroidSeparator {
    pub o: Vec<usize>,
    pub tau: usize,
    pub coeffs: SubmodularCoeffs,
    pub mode: SeparationMode,
}

impl Separator for PolymatroidSeparator {
    fn separate(&self, x: &[f64], integral: bool) -> Vec<Cut> {
        if !self.mode.active(integral) {
            return Vec::new();
        }
        let o_hat: Vec<f64> = self.o.iter().map(|&j| x[j].max(0.0)).collect();
        match separate_polymatroid(&self.coeffs, &o_hat, x[self.tau]) {
            Some(pi) => {
                let mut row = LinRow::from_terms([(self.tau, -1.0)], Sense::Le, 0.0);
                for (&j, p) in self.o.iter().zip(pi) {
                    row.add(j, p);
                }
                vec![Cut { row, tag: CutTag::Polymatroid }]
            }
            None => Vec::new(),
        }
    }
}

/// Tangent cuts for `tau <= sqrt(u w)`.
pub struct HyperbolicSeparator {
    pub u: usize,
    pub w: usize,
    pub tau: usize,
    pub mode: SeparationMode,
}

impl Separator for HyperbolicSeparator {
    fn separate(&self, x: &[f64], integral: bool) -> Vec<Cut> {
        if !self.mode.active(integral) {
            return Vec::new();
        }
        let (u, w, t) = (x[self.u].max(0.0), x[self.w].max(0.0), x[self.tau]);
        if t <= (u * w).sqrt() + 1e-9 * (1.0 + t.abs()) {
            return Vec::new();
        }
        let mut cut = hyperbolic_oa_cut(u, w);
        // any positive slope gives a valid cut; keep it well scaled
        cut.a = cut.a.clamp(1e-4, 1e4);
        vec![Cut { row: cut.row(self.u, self.w, self.tau), tag: CutTag::HyperbolicOa }]
    }
}

/// Gradient cuts for a model cone.
pub struct ConeSeparator {
    pub cone: ConeTag,
    pub mode: SeparationMode,
}

impl Separator for ConeSeparator {
    fn separate(&self, x: &[f64], integral: bool) -> Vec<Cut> {
        if !self.mode.active(integral) || self.cone.residual(x) <= 1e-9 {
            return Vec::new();
        }
        soc_oa_cut(&self.cone, x).into_iter().collect()
    }
}

/// Which cut families run during branch-and-cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationOptions {
    pub polymatroid: SeparationMode,
    pub oa: SeparationMode,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        SeparationOptions { polymatroid: SeparationMode::Lazy, oa: SeparationMode::Lazy }
    }
}

/// Branch-and-cut on a built formulation with its problem-specific separators.
pub fn solve_formulation(f: &Formulation, sep: &SeparationOptions, limits: &Limits) -> Result<MipOutcome> {
    let mut owned: Vec<Box<dyn Separator>> = Vec::new();
    let mut groups = Vec::new();
    for l in &f.layouts {
        groups.push(if l.monotone {
            HeuristicGroup::Monotone(l.binaries.clone())
        } else {
            HeuristicGroup::ExactlyOne(l.binaries.clone())
        });
        if let Some(c) = &l.conic {
            if sep.polymatroid != SeparationMode::Off {
                owned.push(Box::new(PolymatroidSeparator {
                    o: l.binaries.clone(),
                    tau: c.tau,
                    coeffs: c.coeffs.clone(),
                    mode: sep.polymatroid,
                }));
            } else {
                owned.push(Box::new(ConeSeparator { cone: f.model.cones[c.norm_cone].clone(), mode: sep.oa }));
            }
            owned.push(Box::new(HyperbolicSeparator { u: c.u, w: c.w, tau: c.tau, mode: sep.oa }));
        }
    }
    let refs: Vec<&dyn Separator> = owned.iter().map(|b| b.as_ref()).collect();
    branch_and_cut(&f.model, &refs, &groups, limits)
}
