//! Reference solvers used to validate the reformulations.
//!
//! None of these go through a reformulation: they enumerate the structure
//! of the worst-case VaR directly and solve one LP per candidate.

use super::simplex::{LpSolver, LpStatus};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, ModelIR, Sense};
use crate::reformulate::{pair_window, DrccInstance, SubmodularCoeffs};
use crate::samples::{VarCurve, VarVariant};

/// Default largest sample count accepted by [`oracle_jk_enum`].
pub const JK_ENUM_MAX_SAMPLES: usize = 60;
/// Largest number of grid points accepted by [`oracle_grid`].
pub const GRID_MAX_POINTS: usize = 1_000_000;
const ENUM_MAX_COMBINATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// Base LP plus one `T_c x` row per chance constraint, whose ranges are set per query.
struct TechLp {
    lp: LpSolver,
    first_tech_row: usize,
    n: usize,
}

impl TechLp {
    fn new(inst: &DrccInstance) -> Result<Self> {
        let (mut m, _) = inst.base_model("oracle")?;
        for v in &mut m.vars {
            // the oracles solve LPs; integrality is relaxed on purpose
            v.kind = crate::model::VarKind::Continuous;
        }
        let first_tech_row = m.rows.len();
        add_tech_rows(&mut m, inst)?;
        Ok(TechLp { lp: LpSolver::new(&m), first_tech_row, n: inst.vars.len() })
    }

    /// `min c x` with `lo_c <= T_c x <= hi_c`; `None` when infeasible.
    fn value(&mut self, ranges: &[(f64, f64)]) -> Result<Option<(f64, Vec<f64>)>> {
        for (c, &(lo, hi)) in ranges.iter().enumerate() {
            self.lp.set_row_bounds(self.first_tech_row + c, lo, hi);
        }
        let r = self.lp.solve();
        match r.status {
            LpStatus::Optimal => Ok(Some((r.objective, r.x[..self.n].to_vec()))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(DrccError::Unsupported("oracle LP is unbounded".into())),
            LpStatus::IterationLimit => Err(DrccError::CapExceeded("oracle LP iteration limit".into())),
        }
    }
}

fn add_tech_rows(m: &mut ModelIR, inst: &DrccInstance) -> Result<()> {
    for (c, cc) in inst.constraints.iter().enumerate() {
        let row = LinRow::from_terms(cc.tech.iter().copied(), Sense::Ge, f64::MIN_POSITIVE);
        m.add_row(format!("tech_{c}"), row)?;
    }
    Ok(())
}

fn check_pure_continuous(inst: &DrccInstance) -> Result<()> {
    if inst.vars.iter().any(|v| v.binary) {
        return Err(DrccError::Unsupported("the LP oracles need continuous decision variables".into()));
    }
    Ok(())
}

/// Finite model by enumeration: for every choice of staircase level per
/// constraint, solve `min c x + sum g(a_n)` with `T_c x >= L_n`.
pub fn oracle_finite_enum(inst: &DrccInstance) -> Result<OracleSolution> {
    check_pure_continuous(inst)?;
    let curves: Vec<VarCurve> =
        inst.constraints.iter().map(|c| VarCurve::build(&c.samples, &c.bounds)).collect::<Result<_>>()?;
    let total = curves.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match total {
        Some(t) if t <= ENUM_MAX_COMBINATIONS => {}
        _ => return Err(DrccError::CapExceeded("too many staircase combinations to enumerate".into())),
    }
    let mut lp = TechLp::new(inst)?;
    let mut idx = vec![0usize; curves.len()];
    let mut best: Option<OracleSolution> = None;
    loop {
        let ranges: Vec<(f64, f64)> = curves.iter().zip(&idx).map(|(c, &i)| (c.levels[i], f64::INFINITY)).collect();
        if let Some((v, x)) = lp.value(&ranges)? {
            let alphas: Vec<f64> = curves.iter().zip(&idx).map(|(c, &i)| c.alphas[i]).collect();
            let g: f64 = inst.constraints.iter().zip(&alphas).map(|(c, &a)| c.risk.eval(a)).sum();
            let obj = v + g;
            if best.as_ref().is_none_or(|b| obj < b.objective) {
                best = Some(OracleSolution { objective: obj, x, alphas });
            }
        }
        // odometer over the level indices
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < curves[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    best.ok_or_else(|| DrccError::Infeasible("no staircase level admits a feasible x".into()))
}

/// Continuous model of a single chance constraint by pair enumeration.
///
/// For each pair `(j, k)` the feasible alphas form an interval on which
/// `F(a) = V(max(xi_{j+1}, L(a))) + g(a)` is convex, with
/// `L(a) = xi_{k+1} + (N eps + d_jk) / (a N - j)` and `V` the LP value with
/// `T x` in `[t, xi_j]`. A golden-section search finds the minimum of each piece.
pub fn oracle_jk_enum(inst: &DrccInstance, max_samples: usize) -> Result<OracleSolution> {
    check_pure_continuous(inst)?;
    if inst.constraints.len() != 1 {
        return Err(DrccError::CapExceeded(format!(
            "pair enumeration is capped at one chance constraint, got {}",
            inst.constraints.len()
        )));
    }
    let c = &inst.constraints[0];
    let n = c.samples.len();
    if n > max_samples {
        return Err(DrccError::CapExceeded(format!("{n} samples exceed the pair-enumeration cap {max_samples}")));
    }
    if c.risk.convex_pieces().is_none() {
        return Err(DrccError::Unsupported("pair enumeration needs a convex risk cost".into()));
    }
    let xi = c.samples.values();
    let nf = n as f64;
    let upper = inst.tech_upper(c);
    if !upper.is_finite() {
        return Err(DrccError::Unsupported("T x must be bounded above".into()));
    }
    let xi0 = upper.max(xi[0]);
    let level = |j: usize| if j == 0 { xi0 } else { xi[j - 1] };
    let pairs = pair_window(&c.samples, &c.bounds, true);
    let coeffs = SubmodularCoeffs::for_pairs(&c.samples, pairs.clone());
    let mut lp = TechLp::new(inst)?;
    let mut best: Option<OracleSolution> = None;

    for (p, &(j, k)) in pairs.iter().enumerate() {
        let (top, next, floor) = (level(j), xi[k], level(j + 1));
        let big_c = coeffs.sigma + coeffs.d[p];
        if top <= next {
            continue;
        }
        let mut lo = (k as f64 / nf).max(c.bounds.alpha_min);
        let hi = ((k + 1) as f64 / nf).min(c.bounds.alpha_bar);
        // L(a) <= top needs a N - j >= C / (top - next)
        lo = lo.max((j as f64 + big_c / (top - next)) / nf);
        if lo > hi {
            continue;
        }
        let mut eval = |a: f64| -> Result<Option<(f64, Vec<f64>)>> {
            let width = a * nf - j as f64;
            if width <= 0.0 {
                return Ok(None);
            }
            let t = floor.max(next + big_c / width);
            if t > top * (1.0 + 1e-12) + 1e-12 {
                return Ok(None);
            }
            Ok(lp.value(&[(t.min(top), top)])?.map(|(v, x)| (v + c.risk.eval(a), x)))
        };
        let score = |r: &Option<(f64, Vec<f64>)>| r.as_ref().map_or(f64::INFINITY, |v| v.0);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        let mut cands = vec![(lo, eval(lo)?), (hi, eval(hi)?)];
        for _ in 0..200 {
            if b - a <= 1e-13 {
                break;
            }
            // infeasibility only happens at the small-alpha end, so move right
            if score(&f1) > score(&f2) || (score(&f1).is_infinite() && score(&f2).is_infinite()) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = eval(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = eval(x1)?;
            }
        }
        cands.push((x1, f1));
        cands.push((x2, f2));
        for (a, r) in cands {
            if let Some((v, x)) = r {
                if best.as_ref().is_none_or(|b| v < b.objective) {
                    best = Some(OracleSolution { objective: v, x, alphas: vec![a] });
                }
            }
        }
    }
    best.ok_or_else(|| DrccError::Infeasible("no sample pair admits a feasible x".into()))
}

/// Bracket of the optimal value from an alpha grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBracket {
    pub lower: f64,
    pub upper: f64,
    pub best_alphas: Vec<f64>,
}

/// Brackets the optimum on a product grid of `resolution + 1` alphas per
/// constraint over `[alpha_min, alpha_bar]`.
///
/// The upper value is the best grid point. The lower value uses, on each
/// cell, the VaR at the cell's right end (smallest) and the risk cost at its
/// left end (smallest), which bounds every alpha in the cell.
pub fn oracle_grid(inst: &DrccInstance, resolution: usize, variant: VarVariant) -> Result<GridBracket> {
    check_pure_continuous(inst)?;
    if resolution == 0 {
        return Err(DrccError::InvalidParameter("grid resolution must be >= 1".into()));
    }
    let dims = inst.constraints.len();
    let points = (resolution + 1).checked_pow(dims as u32);
    match points {
        Some(p) if p <= GRID_MAX_POINTS => {}
        _ => return Err(DrccError::CapExceeded(format!("grid with {resolution}+1 points in {dims} dimensions"))),
    }
    let grids: Vec<Vec<f64>> = inst
        .constraints
        .iter()
        .map(|c| {
            let (lo, hi) = (c.bounds.alpha_min, c.bounds.alpha_bar);
            (0..=resolution).map(|i| lo + (hi - lo) * i as f64 / resolution as f64).collect()
        })
        .collect();
    // VaR per grid point; None where the variant has no value
    let vars: Vec<Vec<Option<f64>>> = inst
        .constraints
        .iter()
        .zip(&grids)
        .map(|(c, g)| {
            g.iter()
                .map(|&a| {
                    let v = c.samples.var(a, variant)?;
                    Ok(if variant == VarVariant::Finite && v.overflow { None } else { Some(v.value) })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut lp = TechLp::new(inst)?;
    let mut upper = f64::INFINITY;
    let mut lower = f64::INFINITY;
    let mut best_alphas = Vec::new();
    let mut idx = vec![0usize; dims];
    loop {
        // grid point
        let t: Option<Vec<(f64, f64)>> =
            idx.iter().enumerate().map(|(c, &i)| vars[c][i].map(|v| (v, f64::INFINITY))).collect();
        if let Some(ranges) = t {
            if let Some((v, _)) = lp.value(&ranges)? {
                let g: f64 = inst.constraints.iter().enumerate().map(|(c, cc)| cc.risk.eval(grids[c][idx[c]])).sum();
                if v + g < upper {
                    upper = v + g;
                    best_alphas = idx.iter().enumerate().map(|(c, &i)| grids[c][i]).collect();
                }
            }
        }
        // cell to the right of the point
        if idx.iter().all(|&i| i < resolution) {
            let t: Option<Vec<(f64, f64)>> =
                idx.iter().enumerate().map(|(c, &i)| vars[c][i + 1].map(|v| (v, f64::INFINITY))).collect();
            if let Some(ranges) = t {
                if let Some((v, _)) = lp.value(&ranges)? {
                    let g: f64 =
                        inst.constraints.iter().enumerate().map(|(c, cc)| cc.risk.eval(grids[c][idx[c]])).sum();
                    lower = lower.min(v + g);
                }
            }
        }
        let mut k = 0;
        while k < dims {
            idx[k] += 1;
            if idx[k] <= resolution {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dims {
            break;
        }
    }
    if !upper.is_finite() {
        return Err(DrccError::Infeasible("no grid point is feasible".into()));
    }
    Ok(GridBracket { lower: lower.min(upper), upper, best_alphas })
}
