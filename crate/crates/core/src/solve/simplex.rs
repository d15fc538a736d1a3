//! Bounded dual simplex with an explicit dense basis inverse.
//!
//! Rows are turned into equalities `a x - s = 0` with one slack per row, so
//! every variable (structural or slack) is boxed. Infinite structural bounds
//! are replaced by an artificial box of [`ARTIFICIAL_BOUND`], and slack bounds
//! are tightened to the activity range implied by the structural box. With
//! everything boxed the slack basis is always dual feasible, and warm starts
//! after bound changes or appended rows stay dual feasible.

use crate::model::{LinRow, ModelIR, ObjSense, Sense};

/// Stand-in for an infinite bound. Optimal points resting on it mean unbounded.
pub const ARTIFICIAL_BOUND: f64 = 1e9;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum At {
    Basic,
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural values; meaningful only when optimal.
    pub x: Vec<f64>,
    /// Objective in the model's own sense, including the constant.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolver {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    sign: f64,
    constant: f64,
    lo: Vec<f64>,
    up: Vec<f64>,
    root_lo: Vec<f64>,
    root_up: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    at: Vec<At>,
    basis: Vec<usize>,
    binv: Vec<Vec<f64>>,
    since_refactor: usize,
    since_recompute: usize,
    feas_tol: f64,
    dual_tol: f64,
    pub iteration_limit: usize,
    total_iterations: usize,
}

fn finite_or(v: f64, art: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        art
    }
}

impl LpSolver {
    /// LP relaxation of `model`: integrality dropped, cones ignored.
    pub fn new(model: &ModelIR) -> Self {
        let n = model.vars.len();
        let sign = if model.objective.sense == ObjSense::Maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; n];
        for (&j, &c) in &model.objective.coeffs {
            cost[j] = sign * c;
        }
        let lo: Vec<f64> = model.vars.iter().map(|v| finite_or(v.lower, -ARTIFICIAL_BOUND)).collect();
        let up: Vec<f64> = model.vars.iter().map(|v| finite_or(v.upper, ARTIFICIAL_BOUND)).collect();
        let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let mut s = LpSolver {
            n,
            m: 0,
            cols: vec![Vec::new(); n],
            rows: Vec::new(),
            cost,
            sign,
            constant: model.objective.constant,
            root_lo: lo.clone(),
            root_up: up.clone(),
            lo,
            up,
            x: vec![0.0; n],
            d: vec![0.0; n],
            at: vec![At::Lower; n],
            basis: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            since_recompute: 0,
            feas_tol: 1e-9,
            dual_tol: 1e-9 * scale,
            iteration_limit: 1_000_000,
            total_iterations: 0,
        };
        for j in 0..n {
            s.d[j] = s.cost[j];
            s.place(j);
        }
        for r in &model.rows {
            s.push_row(&r.row);
        }
        s.recompute_primal();
        s
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn total_iterations(&self) -> usize {
        self.total_iterations
    }

    /// Puts nonbasic `j` on the bound its reduced cost asks for.
    fn place(&mut self, j: usize) {
        if self.at[j] == At::Basic {
            return;
        }
        let at = if self.d[j] > 0.0 {
            At::Lower
        } else if self.d[j] < 0.0 || self.at[j] == At::Upper {
            At::Upper
        } else {
            At::Lower
        };
        self.at[j] = at;
        self.x[j] = if at == At::Lower { self.lo[j] } else { self.up[j] };
    }

    fn implied_range(&self, coeffs: &[(usize, f64)]) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(j, a) in coeffs {
            let (l, u) = (self.root_lo[j], self.root_up[j]);
            if a > 0.0 {
                lo += a * l;
                hi += a * u;
            } else {
                lo += a * u;
                hi += a * l;
            }
        }
        (lo, hi)
    }

    fn push_row(&mut self, row: &LinRow) {
        let i = self.m;
        let coeffs: Vec<(usize, f64)> = row.coeffs.iter().map(|(&j, &a)| (j, a)).collect();
        let (ilo, ihi) = self.implied_range(&coeffs);
        let pad = 1e-9 * (1.0 + ilo.abs().max(ihi.abs()));
        let (ilo, ihi) = (ilo - pad, ihi + pad);
        let (l, u) = match row.sense {
            Sense::Le => (ilo.min(row.rhs), row.rhs),
            Sense::Ge => (row.rhs, ihi.max(row.rhs)),
            Sense::Eq => (row.rhs, row.rhs),
        };
        // extend B^{-1}: the new slack is basic in the new row
        let mut new_row = vec![0.0; i + 1];
        for &(j, a) in &coeffs {
            self.cols[j].push((i, a));
            if self.at[j] == At::Basic {
                let k = self.basis_pos(j);
                for (t, v) in self.binv[k].iter().enumerate() {
                    new_row[t] += a * v;
                }
            }
        }
        new_row[i] = -1.0;
        for r in &mut self.binv {
            r.push(0.0);
        }
        self.binv.push(new_row);
        self.rows.push(coeffs);
        self.lo.push(l);
        self.up.push(u);
        self.root_lo.push(l);
        self.root_up.push(u);
        self.cost.push(0.0);
        self.d.push(0.0);
        self.at.push(At::Basic);
        let act = self.rows[i].iter().map(|&(j, a)| a * self.x[j]).sum();
        self.x.push(act);
        self.basis.push(self.n + i);
        self.m += 1;
    }

    fn basis_pos(&self, j: usize) -> usize {
        // basis is small enough that a scan beats keeping a map in sync
        self.basis.iter().position(|&b| b == j).expect("basic variable not in basis")
    }

    /// Appends a row; the current basis stays dual feasible.
    pub fn add_row(&mut self, row: &LinRow) {
        self.push_row(row);
    }

    /// Changes the bounds of structural `j` (infinite values get the artificial box).
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lo[j] = finite_or(lower, -ARTIFICIAL_BOUND);
        self.up[j] = finite_or(upper, ARTIFICIAL_BOUND);
        if self.at[j] != At::Basic {
            self.x[j] = if self.at[j] == At::Lower { self.lo[j] } else { self.up[j] };
        }
    }

    /// Replaces the range of row `i` by `lower <= a x <= upper`; infinite ends
    /// fall back to the activity range implied by the root variable box.
    pub fn set_row_bounds(&mut self, i: usize, lower: f64, upper: f64) {
        let (ilo, ihi) = self.implied_range(&self.rows[i]);
        let pad = 1e-9 * (1.0 + ilo.abs().max(ihi.abs()));
        let s = self.n + i;
        self.lo[s] = if lower.is_finite() { lower } else { (ilo - pad).min(upper) };
        self.up[s] = if upper.is_finite() { upper } else { (ihi + pad).max(lower) };
        if self.at[s] != At::Basic {
            self.x[s] = if self.at[s] == At::Lower { self.lo[s] } else { self.up[s] };
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.up[j])
    }

    /// Column `j` of the full matrix `[A | -I]`, applied to a dense vector.
    fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * v[i]).sum()
        } else {
            -v[j - self.n]
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        if j < self.n {
            for &(i, a) in &self.cols[j] {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += self.binv[k][i] * a;
                }
            }
        } else {
            let i = j - self.n;
            for (k, o) in out.iter_mut().enumerate() {
                *o = -self.binv[k][i];
            }
        }
        out
    }

    fn recompute_primal(&mut self) {
        // x_B = -B^{-1} N x_N
        let mut r = vec![0.0; self.m];
        for j in 0..self.n {
            if self.at[j] != At::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let j = self.n + i;
            if self.at[j] != At::Basic {
                r[i] += self.x[j];
            }
        }
        for k in 0..self.m {
            let v: f64 = self.binv[k].iter().zip(&r).map(|(a, b)| a * b).sum();
            self.x[self.basis[k]] = v;
        }
        self.since_recompute = 0;
    }

    fn recompute_dual(&mut self) {
        let mut pi = vec![0.0; self.m];
        for k in 0..self.m {
            let c = self.cost[self.basis[k]];
            if c != 0.0 {
                for (p, b) in pi.iter_mut().zip(&self.binv[k]) {
                    *p += c * b;
                }
            }
        }
        for j in 0..self.n + self.m {
            self.d[j] = if self.at[j] == At::Basic { 0.0 } else { self.cost[j] - self.col_dot(j, &pi) };
        }
    }

    /// Rebuilds B^{-1} from scratch. Returns false when the basis is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![vec![0.0; 2 * m]; m];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                for &(i, v) in &self.cols[j] {
                    a[i][k] = v;
                }
            } else {
                a[j - self.n][k] = -1.0;
            }
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            if a[p][c].abs() < 1e-11 {
                return false;
            }
            a.swap(c, p);
            let inv = 1.0 / a[c][c];
            for v in a[c].iter_mut() {
                *v *= inv;
            }
            let pivot_row = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c {
                    let f = row[c];
                    if f != 0.0 {
                        for (v, pv) in row.iter_mut().zip(&pivot_row) {
                            *v -= f * pv;
                        }
                    }
                }
            }
        }
        // rows of the reduced matrix are B^{-1} indexed by basis position
        self.binv = a.into_iter().map(|r| r[m..].to_vec()).collect();
        self.since_refactor = 0;
        true
    }

    fn cold_start(&mut self) {
        for j in 0..self.n {
            self.at[j] = At::Lower;
        }
        for i in 0..self.m {
            self.at[self.n + i] = At::Basic;
            self.basis[i] = self.n + i;
        }
        self.binv = (0..self.m)
            .map(|k| {
                let mut r = vec![0.0; self.m];
                r[k] = -1.0;
                r
            })
            .collect();
        self.since_refactor = 0;
        self.recompute_dual();
        for j in 0..self.n {
            self.place(j);
        }
        self.recompute_primal();
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        let tl = self.feas_tol * (1.0 + self.lo[j].abs());
        let tu = self.feas_tol * (1.0 + self.up[j].abs());
        if x < self.lo[j] - tl {
            self.lo[j] - x
        } else if x > self.up[j] + tu {
            x - self.up[j]
        } else {
            0.0
        }
    }

    /// Moves dual-infeasible nonbasics to their other bound. Returns true if any moved.
    fn fix_dual(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            let wrong = match self.at[j] {
                At::Lower => self.d[j] < -self.dual_tol,
                At::Upper => self.d[j] > self.dual_tol,
                At::Basic => false,
            };
            if wrong && self.lo[j] < self.up[j] {
                self.at[j] = if self.at[j] == At::Lower { At::Upper } else { At::Lower };
                self.x[j] = if self.at[j] == At::Lower { self.lo[j] } else { self.up[j] };
                moved = true;
            }
        }
        moved
    }

    fn result(&self, status: LpStatus, iterations: usize) -> LpResult {
        let x = self.x[..self.n].to_vec();
        let obj: f64 = (0..self.n).map(|j| self.cost[j] * x[j]).sum::<f64>() * self.sign + self.constant;
        LpResult { status, x, objective: obj, iterations }
    }

    pub fn solve(&mut self) -> LpResult {
        for j in 0..self.n + self.m {
            if self.at[j] != At::Basic {
                self.x[j] = if self.at[j] == At::Lower { self.lo[j] } else { self.up[j] };
            }
        }
        self.recompute_primal();
        let refactor_every = 100 + self.m;
        let mut iters = 0;
        let mut streak = 0;
        let mut alpha_r = vec![0.0; self.n + self.m];
        loop {
            if iters >= self.iteration_limit {
                return self.result(LpStatus::IterationLimit, iters);
            }
            if self.since_refactor >= refactor_every {
                if !self.refactor() {
                    self.cold_start();
                }
                self.recompute_primal();
                self.recompute_dual();
            } else if self.since_recompute >= 40 {
                self.recompute_primal();
            }

            // leaving row
            let bland = streak > DEGENERATE_STREAK;
            let mut r = usize::MAX;
            let mut best = 0.0;
            for k in 0..self.m {
                let inf = self.infeasibility(self.basis[k]);
                if inf > 0.0 {
                    let better = if bland { r == usize::MAX || self.basis[k] < self.basis[r] } else { inf > best };
                    if better {
                        best = inf;
                        r = k;
                    }
                }
            }
            if r == usize::MAX {
                self.recompute_primal();
                self.recompute_dual();
                let flipped = self.fix_dual();
                if flipped {
                    self.recompute_primal();
                    continue;
                }
                if (0..self.m).any(|k| self.infeasibility(self.basis[k]) > 0.0) {
                    continue;
                }
                let status = if (0..self.n).any(|j| self.x[j].abs() >= 0.5 * ARTIFICIAL_BOUND) {
                    LpStatus::Unbounded
                } else {
                    LpStatus::Optimal
                };
                return self.result(status, iters);
            }
            let p = self.basis[r];
            let (target, dir) = if self.x[p] < self.lo[p] { (self.lo[p], 1.0) } else { (self.up[p], -1.0) };

            // pivot row
            let rho = &self.binv[r];
            for j in 0..self.n + self.m {
                alpha_r[j] = if self.at[j] == At::Basic { 0.0 } else { self.col_dot(j, rho) };
            }

            // Harris ratio test
            let mut theta_max = f64::INFINITY;
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.n + self.m {
                let a = alpha_r[j];
                if self.at[j] == At::Basic || a.abs() <= PIVOT_TOL || self.lo[j] >= self.up[j] {
                    continue;
                }
                let s = if self.at[j] == At::Lower { 1.0 } else { -1.0 };
                if s * a * dir >= 0.0 {
                    continue;
                }
                let dj = (s * self.d[j]).max(0.0);
                let ratio = dj / a.abs();
                theta_max = theta_max.min((dj + self.dual_tol) / a.abs());
                cands.push((j, ratio, a.abs()));
            }
            if cands.is_empty() {
                // dual unbounded; confirm on fresh numbers before giving up
                if self.since_refactor > 0 {
                    if !self.refactor() {
                        self.cold_start();
                    }
                    self.recompute_primal();
                    self.recompute_dual();
                    self.fix_dual();
                    self.recompute_primal();
                    iters += 1;
                    continue;
                }
                return self.result(LpStatus::Infeasible, iters);
            }
            let q = if bland {
                let min_ratio = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
                cands.iter().filter(|c| c.1 <= min_ratio + 1e-15).map(|c| c.0).min().unwrap()
            } else {
                let mut best = cands[0];
                let mut first = true;
                for &c in &cands {
                    if c.1 <= theta_max && (first || c.2 > best.2) {
                        best = c;
                        first = false;
                    }
                }
                best.0
            };

            let col = self.ftran(q);
            let arq = col[r];
            if arq.abs() <= PIVOT_TOL * 1e-3 {
                // ftran and btran disagree; refresh the inverse
                if !self.refactor() {
                    self.cold_start();
                }
                self.recompute_primal();
                self.recompute_dual();
                iters += 1;
                continue;
            }
            let delta = (self.x[p] - target) / arq;
            for k in 0..self.m {
                let b = self.basis[k];
                self.x[b] -= col[k] * delta;
            }
            self.x[q] += delta;
            self.x[p] = target;

            let theta_d = self.d[q] / arq;
            if theta_d.abs() * delta.abs() <= 1e-12 {
                streak += 1;
            } else {
                streak = 0;
            }
            for j in 0..self.n + self.m {
                if self.at[j] != At::Basic && alpha_r[j] != 0.0 {
                    self.d[j] -= theta_d * alpha_r[j];
                }
            }
            self.d[q] = 0.0;
            self.d[p] = -theta_d;
            self.at[p] = if dir > 0.0 { At::Lower } else { At::Upper };
            self.at[q] = At::Basic;
            self.basis[r] = q;

            let inv = 1.0 / arq;
            for v in self.binv[r].iter_mut() {
                *v *= inv;
            }
            let pivot_row = self.binv[r].clone();
            for (k, row) in self.binv.iter_mut().enumerate() {
                let f = col[k];
                if k != r && f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
            self.since_refactor += 1;
            self.since_recompute += 1;
            iters += 1;
            self.total_iterations += 1;
        }
    }
}

/// One-shot LP relaxation solve.
pub fn solve_lp(model: &ModelIR) -> LpResult {
    LpSolver::new(model).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinRow, ModelIR, ObjSense, Sense};
    use std::collections::BTreeMap;

    fn model(c: &[f64], rows: &[(&[f64], Sense, f64)], ub: f64) -> ModelIR {
        let mut m = ModelIR::new("t");
        for j in 0..c.len() {
            m.add_continuous(format!("x{j}"), 0.0, ub).unwrap();
        }
        for (i, (a, s, b)) in rows.iter().enumerate() {
            let row = LinRow::from_terms(a.iter().enumerate().map(|(j, &v)| (j, v)), *s, *b);
            m.add_row(format!("r{i}"), row).unwrap();
        }
        let obj: BTreeMap<usize, f64> = c.iter().enumerate().map(|(j, &v)| (j, v)).collect();
        m.set_objective(ObjSense::Minimize, obj, 0.0).unwrap();
        m
    }

    #[test]
    fn small_lp() {
        // max 3x + 2y st x + y <= 4, x + 3y <= 6, x <= 3  ->  x=3, y=1, obj 11
        let mut m = model(&[3.0, 2.0], &[(&[1.0, 1.0], Sense::Le, 4.0), (&[1.0, 3.0], Sense::Le, 6.0)], 3.0);
        m.objective.sense = ObjSense::Maximize;
        let r = solve_lp(&m);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 11.0).abs() < 1e-9, "{}", r.objective);
        assert!((r.x[0] - 3.0).abs() < 1e-9 && (r.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_lp() {
        let m = model(&[1.0, 1.0], &[(&[1.0, 1.0], Sense::Ge, 5.0), (&[1.0, 1.0], Sense::Le, 4.0)], 10.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_lp() {
        let mut m = model(&[-1.0], &[(&[1.0], Sense::Ge, 1.0)], f64::INFINITY);
        m.objective.sense = ObjSense::Minimize;
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn warm_start_after_cut_and_bound() {
        let m = model(&[-1.0, -1.0], &[(&[1.0, 2.0], Sense::Le, 4.0)], 3.0);
        let mut s = LpSolver::new(&m);
        let r = s.solve();
        assert!((r.objective + 3.5).abs() < 1e-9);
        s.add_row(&LinRow::from_terms([(0, 1.0), (1, 1.0)], Sense::Le, 3.0));
        let r = s.solve();
        assert!((r.objective + 3.0).abs() < 1e-9);
        s.set_row_bounds(1, f64::NEG_INFINITY, 2.0);
        assert!((s.solve().objective + 2.0).abs() < 1e-9);
        s.set_row_bounds(1, f64::NEG_INFINITY, 3.0);
        s.set_bounds(0, 0.0, 1.0);
        let r = s.solve();
        assert!((r.objective + 2.5).abs() < 1e-9, "{}", r.objective);
    }
}
