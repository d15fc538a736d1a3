use std::time::Duration;

use super::continuous::add_pair_block;
use super::cuts::SubmodularCoeffs;
use super::{add_risk_cost, ConstraintLayout, DrccInstance, Formulation, ModelKind};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, ModelIR, Sense};

/// `z <= a`, `z <= b`, `z >= a + b - 1` for `z = a b` with `a, b` in `[0, 1]`.
fn mccormick(m: &mut ModelIR, name: &str, z: usize, a: usize, b: usize) -> Result<()> {
    m.add_row_with_role(
        format!("{name}_a"),
        LinRow::from_terms([(z, 1.0), (a, -1.0)], Sense::Le, 0.0),
        Some("mccormick"),
    )?;
    m.add_row_with_role(
        format!("{name}_b"),
        LinRow::from_terms([(z, 1.0), (b, -1.0)], Sense::Le, 0.0),
        Some("mccormick"),
    )?;
    m.add_row_with_role(
        format!("{name}_ab"),
        LinRow::from_terms([(z, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0),
        Some("mccormick"),
    )?;
    Ok(())
}

/// MILP for chance constraints whose technology row touches only binaries.
///
/// The pair condition `sum o_jk [(alpha N - j)(T x - xi_{k+1}) - d_jk] >= N epsilon`
/// is linearized with `e_jk = alpha o_jk`, `t_ljk = o_jk x_l` and
/// `s_ljk = e_jk x_l` for every `x_l` in the support of `T`.
pub fn build_milp_binary(inst: &DrccInstance) -> Result<Formulation> {
    let (mut m, x) = inst.base_model(&format!("{}_milp_binary", inst.name))?;
    let mut layouts = Vec::new();
    for (ci, c) in inst.constraints.iter().enumerate() {
        for &(j, _) in &c.tech {
            if !inst.vars[j].binary {
                return Err(DrccError::Unsupported(format!(
                    "`{}` has continuous `{}` in its technology row",
                    c.name, inst.vars[j].name
                )));
            }
        }
        let tag = format!("c{ci}");
        let b = add_pair_block(&mut m, inst, &x, c, &tag, true)?;
        let xi = c.samples.values();
        let nf = xi.len() as f64;
        let coeffs = SubmodularCoeffs::for_pairs(&c.samples, b.pairs.clone());

        let mut main = LinRow::new(Sense::Ge, nf * c.samples.epsilon());
        for (p, (&(j, k), &o)) in b.pairs.iter().zip(&b.o).enumerate() {
            let e = m.add_continuous(format!("e_{tag}_{j}_{k}"), 0.0, 1.0)?;
            mccormick(&mut m, &format!("mce_{tag}_{j}_{k}"), e, b.alpha, o)?;
            let next = xi[k];
            main.add(e, -nf * next);
            main.add(o, j as f64 * next - coeffs.d[p]);
            for &(l, tl) in &c.tech {
                let xl = x[l];
                let name = &inst.vars[l].name;
                let t = m.add_continuous(format!("t_{tag}_{j}_{k}_{name}"), 0.0, 1.0)?;
                mccormick(&mut m, &format!("mct_{tag}_{j}_{k}_{name}"), t, o, xl)?;
                let s = m.add_continuous(format!("s_{tag}_{j}_{k}_{name}"), 0.0, 1.0)?;
                mccormick(&mut m, &format!("mcs_{tag}_{j}_{k}_{name}"), s, e, xl)?;
                main.add(s, nf * tl);
                main.add(t, -(j as f64) * tl);
            }
        }
        m.add_row_with_role(format!("water_{tag}"), main, Some("water"))?;
        add_risk_cost(&mut m, b.alpha, c, &tag)?;
        layouts.push(ConstraintLayout {
            name: c.name.clone(),
            alpha: b.alpha,
            binaries: b.o,
            pairs: b.pairs,
            monotone: false,
            conic: None,
            curve: None,
        });
    }
    Ok(Formulation { kind: ModelKind::MilpBinary, model: m, x, layouts, preprocess: Duration::ZERO })
}
