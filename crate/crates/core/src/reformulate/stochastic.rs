use std::time::Duration;

use super::cuts::{ordering_cuts, star_cut};
use super::{tech_row, ConstraintLayout, DrccInstance, Formulation, ModelKind};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, Sense};

/// Risk-adjustable sample-average model: `alpha` counts dropped samples.
///
/// Uses the top `N' = ceil(alpha_bar N)` samples. With `y` non-decreasing and
/// its first one at `j`, `T x >= xi_j` and `alpha = (j - 1) / N`, the share of
/// samples left uncovered. The objective is `g((j - 1) / N)`, the cost of that
/// same alpha.
pub fn build_stochastic(inst: &DrccInstance) -> Result<Formulation> {
    let (mut m, x) = inst.base_model(&format!("{}_stochastic", inst.name))?;
    let mut layouts = Vec::new();
    for (ci, c) in inst.constraints.iter().enumerate() {
        let n = c.samples.len();
        let an = c.bounds.alpha_bar * n as f64;
        if an < 1.0 - 1e-12 {
            return Err(DrccError::InvalidParameter(format!(
                "alpha_bar * N = {an} < 1 leaves no sample to drop in `{}`",
                c.name
            )));
        }
        let np = ((an - 1e-9).ceil() as usize).clamp(1, n);
        let xi = c.samples.values();
        let tag = format!("c{ci}");
        let mut y = Vec::with_capacity(np - 1);
        for k in 0..np - 1 {
            y.push(m.add_binary(format!("y_{tag}_{}", k + 1))?);
        }
        let alpha = m.add_continuous(format!("alpha_{tag}"), 0.0, c.bounds.alpha_bar)?;

        let t = tech_row(&x, c);
        let tech: Vec<(usize, f64)> = t.coeffs.iter().map(|(&j, &a)| (j, a)).collect();
        let levels = &xi[..np];
        if np > 1 {
            let cut = star_cut(&tech, levels, &y);
            m.add_row_with_role(format!("star_{tag}"), cut.row, Some("star"))?;
            // the last ordering cut is the trivial y <= 1
            for (k, cut) in ordering_cuts(&y).into_iter().take(np - 2).enumerate() {
                m.add_row_with_role(format!("ord_{tag}_{}", k + 1), cut.row, Some("ordering"))?;
            }
        } else {
            let mut floor = t.clone();
            floor.rhs = levels[0];
            m.add_row_with_role(format!("floor_{tag}"), floor, Some("floor"))?;
        }
        // alpha + (1/N) sum y = (N' - 1) / N
        let nf = n as f64;
        let mut arow = LinRow::from_terms([(alpha, 1.0)], Sense::Eq, (np - 1) as f64 / nf);
        for &yk in &y {
            arow.add(yk, 1.0 / nf);
        }
        m.add_row_with_role(format!("alpha_{tag}"), arow, Some("alpha"))?;

        let g = |k: usize| c.risk.eval(k as f64 / nf);
        m.add_objective_constant(g(np - 1));
        for (k, &yk) in y.iter().enumerate() {
            // switching y_{k+1} on lowers alpha from (k+1)/N to k/N
            let delta = g(k) - g(k + 1);
            if delta != 0.0 {
                m.add_objective_term(yk, delta)?;
            }
        }
        layouts.push(ConstraintLayout {
            name: c.name.clone(),
            alpha,
            binaries: y,
            pairs: Vec::new(),
            monotone: true,
            conic: None,
            curve: None,
        });
    }
    Ok(Formulation { kind: ModelKind::Stochastic, model: m, x, layouts, preprocess: Duration::ZERO })
}
