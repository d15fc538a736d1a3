use std::time::Duration;

use super::cuts::SubmodularCoeffs;
use super::{
    add_risk_cost, tech_row, ChanceConstraint, ConicLayout, ConstraintLayout, DrccInstance, Formulation, ModelKind,
};
use crate::error::{DrccError, Result};
use crate::model::{ConeKind, ConeTag, LinRow, ModelIR, Sense};
use crate::samples::{RiskBounds, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContinuousOptions {
    /// Keep only the pairs whose `k` is compatible with `alpha_min <= alpha <= alpha_bar`.
    pub restrict_pairs: bool,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        ContinuousOptions { restrict_pairs: true }
    }
}

/// Sample pairs `(j, k)`, `0 <= j <= k <= N - 1`, ordered by `k` then `j`.
///
/// A pair can only be selected when `k <= alpha N <= k + 1`, so with
/// `restrict` the pairs whose window misses `[alpha_min, alpha_bar]` are left out.
pub fn pair_window(samples: &SampleSet, bounds: &RiskBounds, restrict: bool) -> Vec<(usize, usize)> {
    let n = samples.len();
    let nf = n as f64;
    let (lo, hi) = if restrict { (bounds.alpha_min * nf, bounds.alpha_bar * nf) } else { (0.0, nf) };
    let mut pairs = Vec::new();
    for k in 0..n {
        if k as f64 > hi + 1e-9 || ((k + 1) as f64) < lo - 1e-9 {
            continue;
        }
        for j in 0..=k {
            pairs.push((j, k));
        }
    }
    pairs
}

/// The part shared by the pair models: alpha, the pair binaries and the rows
/// tying them to `alpha N` and `T x`.
pub(super) struct PairBlock {
    pub alpha: usize,
    pub o: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub tech: LinRow,
    pub xi0: f64,
}

pub(super) fn add_pair_block(
    m: &mut ModelIR,
    inst: &DrccInstance,
    x: &[usize],
    c: &ChanceConstraint,
    tag: &str,
    restrict: bool,
) -> Result<PairBlock> {
    let upper = inst.tech_upper(c);
    if !upper.is_finite() {
        return Err(DrccError::Unsupported(format!("`{}`: T x must be bounded above over the variable box", c.name)));
    }
    let xi = c.samples.values();
    let n = xi.len();
    let nf = n as f64;
    let xi0 = upper.max(xi[0]);
    // level j in 0..=N, with level 0 standing for the upper bound of T x
    let level = |j: usize| if j == 0 { xi0 } else { xi[j - 1] };
    let pairs = pair_window(&c.samples, &c.bounds, restrict);
    if pairs.is_empty() {
        return Err(DrccError::EmptyCurve(format!("no sample pair fits the risk window of `{}`", c.name)));
    }
    let alpha = m.add_continuous(format!("alpha_{tag}"), c.bounds.alpha_min, c.bounds.alpha_bar)?;
    let mut o = Vec::with_capacity(pairs.len());
    for &(j, k) in &pairs {
        o.push(m.add_binary(format!("o_{tag}_{j}_{k}"))?);
    }
    let t = tech_row(x, c);

    let mut upper_row = t.clone();
    upper_row.sense = Sense::Le;
    let mut lower_row = t.clone();
    let mut k_hi = LinRow::from_terms([(alpha, nf)], Sense::Le, 0.0);
    let mut k_lo = LinRow::from_terms([(alpha, nf)], Sense::Ge, 0.0);
    for (&(j, k), &oj) in pairs.iter().zip(&o) {
        upper_row.add(oj, -level(j));
        lower_row.add(oj, -level(j + 1));
        k_hi.add(oj, -((k + 1) as f64));
        k_lo.add(oj, -(k as f64));
    }
    m.add_row_with_role(format!("tx_hi_{tag}"), upper_row, Some("window"))?;
    m.add_row_with_role(format!("tx_lo_{tag}"), lower_row, Some("window"))?;
    m.add_row_with_role(format!("k_hi_{tag}"), k_hi, Some("window"))?;
    m.add_row_with_role(format!("k_lo_{tag}"), k_lo, Some("window"))?;
    m.add_sos1(format!("pick_{tag}"), o.clone())?;
    let mut a3 = t.clone();
    a3.rhs = xi[n - 1];
    m.add_row_with_role(format!("a3_{tag}"), a3, Some("a3"))?;
    Ok(PairBlock { alpha, o, pairs, tech: t, xi0 })
}

/// MISOCP with pair binaries `o_jk` marking the critical indices.
///
/// For the selected pair the rows give `u <= alpha N - j` and
/// `w <= T x - xi_{k+1}`, and the cones give
/// `u w >= tau^2 >= N epsilon + d_jk`, which is the water-level condition.
pub fn build_continuous(inst: &DrccInstance, opts: &ContinuousOptions) -> Result<Formulation> {
    let (mut m, x) = inst.base_model(&format!("{}_continuous", inst.name))?;
    let mut layouts = Vec::new();
    for (ci, c) in inst.constraints.iter().enumerate() {
        let tag = format!("c{ci}");
        let b = add_pair_block(&mut m, inst, &x, c, &tag, opts.restrict_pairs)?;
        let xi = c.samples.values();
        let nf = xi.len() as f64;
        let spread = b.xi0 - xi[xi.len() - 1];
        let coeffs = SubmodularCoeffs::for_pairs(&c.samples, b.pairs.clone());
        let u = m.add_continuous(format!("u_{tag}"), 0.0, c.bounds.alpha_bar * nf)?;
        let w = m.add_continuous(format!("w_{tag}"), 0.0, spread)?;
        let tau_lo = coeffs.sigma.sqrt();
        let tau_hi = (c.bounds.alpha_bar * nf * spread).sqrt().max(tau_lo);
        let tau = m.add_continuous(format!("tau_{tag}"), tau_lo, tau_hi)?;

        let mut urow = LinRow::from_terms([(u, 1.0), (b.alpha, -nf)], Sense::Le, 0.0);
        let mut wrow = b.tech.clone();
        wrow.coeffs.values_mut().for_each(|a| *a = -*a);
        wrow.add(w, 1.0);
        wrow.sense = Sense::Le;
        wrow.rhs = 0.0;
        for (&(j, k), &oj) in b.pairs.iter().zip(&b.o) {
            urow.add(oj, j as f64);
            wrow.add(oj, xi[k]);
        }
        m.add_row_with_role(format!("u_{tag}"), urow, Some("width"))?;
        m.add_row_with_role(format!("w_{tag}"), wrow, Some("height"))?;

        let (members, scales): (Vec<usize>, Vec<f64>) =
            b.o.iter().zip(&coeffs.d).filter(|(_, &d)| d > 0.0).map(|(&oj, &d)| (oj, d.sqrt())).unzip();
        let norm_cone = m.add_cone(ConeTag {
            name: format!("norm_{tag}"),
            kind: ConeKind::Soc,
            members: std::iter::once(tau).chain(members).collect(),
            scales,
            constant: coeffs.sigma,
        })?;
        let hyperbolic_cone = m.add_cone(ConeTag {
            name: format!("hyp_{tag}"),
            kind: ConeKind::RotatedSoc,
            members: vec![u, w, tau],
            scales: vec![2f64.sqrt()],
            constant: 0.0,
        })?;
        add_risk_cost(&mut m, b.alpha, c, &tag)?;
        layouts.push(ConstraintLayout {
            name: c.name.clone(),
            alpha: b.alpha,
            binaries: b.o,
            pairs: b.pairs,
            monotone: false,
            conic: Some(ConicLayout { u, w, tau, coeffs, norm_cone, hyperbolic_cone }),
            curve: None,
        });
    }
    Ok(Formulation { kind: ModelKind::Continuous, model: m, x, layouts, preprocess: Duration::ZERO })
}
