use std::time::Duration;

use super::cuts::{ordering_cuts, star_cut};
use super::{tech_row, ConstraintLayout, DrccInstance, Formulation, ModelKind};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, Sense};
use crate::samples::VarCurve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteOptions {
    pub ordering: bool,
    pub star: bool,
    /// Drop the big-M rows when the star row is present.
    pub star_replaces_big_m: bool,
    pub big_m_multiplier: f64,
}

impl Default for FiniteOptions {
    fn default() -> Self {
        FiniteOptions { ordering: true, star: true, star_replaces_big_m: false, big_m_multiplier: 1.0 }
    }
}

/// MILP over the VaR staircase.
///
/// With staircase levels `L_1 > .. > L_{N'}` and alphas `a_1 < .. < a_{N'}`,
/// binary `y_n = 1` switches on `T x >= L_n`. For a non-decreasing `y` whose
/// first one sits at `j`, the rows give `T x >= L_j` and `alpha = a_j`, and
/// the objective collects `g(a_j)` as a telescoping sum.
pub fn build_finite(inst: &DrccInstance, opts: &FiniteOptions) -> Result<Formulation> {
    if opts.star_replaces_big_m && !(opts.star && opts.ordering) {
        return Err(DrccError::InvalidParameter(
            "dropping the big-M rows needs both the star row and the ordering rows".into(),
        ));
    }
    if !(opts.big_m_multiplier >= 1.0) {
        return Err(DrccError::InvalidParameter(format!(
            "big-M multiplier must be >= 1, got {}",
            opts.big_m_multiplier
        )));
    }
    let (mut m, x) = inst.base_model(&format!("{}_finite", inst.name))?;
    let mut layouts = Vec::new();
    let mut preprocess = Duration::ZERO;
    for (ci, c) in inst.constraints.iter().enumerate() {
        let curve = VarCurve::build(&c.samples, &c.bounds)?;
        preprocess += curve.build_time;
        let np = curve.len();
        let (lv, al) = (&curve.levels, &curve.alphas);
        let tag = format!("c{ci}");
        let mut y = Vec::with_capacity(np.saturating_sub(1));
        for n in 0..np.saturating_sub(1) {
            y.push(m.add_binary(format!("y_{tag}_{}", n + 1))?);
        }
        let alpha = m.add_continuous(format!("alpha_{tag}"), c.bounds.alpha_min, c.bounds.alpha_bar)?;

        // alpha = a_{N'} + sum (a_n - a_{n+1}) y_n ; exact up to the bisection tolerance
        let mut arow = LinRow::from_terms([(alpha, 1.0)], Sense::Eq, al[np - 1]);
        for n in 0..np - 1 {
            arow.add(y[n], -(al[n] - al[n + 1]));
        }
        m.add_row_with_role(format!("alpha_{tag}"), arow, Some("alpha"))?;

        let t = tech_row(&x, c);
        let skip_big_m = opts.star_replaces_big_m;
        if !skip_big_m {
            for n in 0..np - 1 {
                let big_m = opts.big_m_multiplier * (lv[n] - lv[np - 1]);
                let mut row = t.clone();
                row.add(y[n], -big_m);
                row.rhs = lv[n] - big_m;
                m.add_row_with_role(format!("bigm_{tag}_{}", n + 1), row, Some("big_m"))?;
            }
        }
        // big-M rows with multiplier 1 or the star row already imply T x >= L_{N'}
        if np == 1 || (!opts.star && opts.big_m_multiplier > 1.0) {
            let mut floor = t.clone();
            floor.rhs = lv[np - 1];
            m.add_row_with_role(format!("floor_{tag}"), floor, Some("floor"))?;
        }
        if opts.ordering && np > 1 {
            for (n, cut) in ordering_cuts(&y).into_iter().enumerate() {
                m.add_row_with_role(format!("ord_{tag}_{}", n + 1), cut.row, Some("ordering"))?;
            }
        }
        if opts.star && np > 1 {
            let tech: Vec<(usize, f64)> = t.coeffs.iter().map(|(&j, &a)| (j, a)).collect();
            let cut = star_cut(&tech, lv, &y);
            m.add_row_with_role(format!("star_{tag}"), cut.row, Some("star"))?;
        }

        // g(a_j) = g(a_{N'}) + sum_{n} (g(a_n) - g(a_{n+1})) y_n  (telescoping)
        let g: Vec<f64> = al.iter().map(|&a| c.risk.eval(a)).collect();
        m.add_objective_constant(g[np - 1]);
        for n in 0..np - 1 {
            let delta = g[n] - g[n + 1];
            if delta != 0.0 {
                m.add_objective_term(y[n], delta)?;
            }
        }
        layouts.push(ConstraintLayout {
            name: c.name.clone(),
            alpha,
            binaries: y,
            pairs: Vec::new(),
            monotone: true,
            conic: None,
            curve: Some(curve),
        });
    }
    Ok(Formulation { kind: ModelKind::Finite, model: m, x, layouts, preprocess })
}
