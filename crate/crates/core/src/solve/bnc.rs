//! LP-based branch-and-cut over binaries, with outer approximation of cones.
//!
//! Search is depth-first until the first incumbent, then best-bound. Cones
//! are never handed to the LP; an integral point is accepted only once every
//! cone residual is below the cone tolerance, adding gradient cuts otherwise.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::simplex::{LpSolver, LpStatus};
use crate::error::{DrccError, Result};
use crate::model::{Cut, CutTag, ModelIR, ObjSense, VarKind};
use crate::reformulate::soc_oa_cut;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMode {
    Off,
    /// Only at LP points with integral binaries.
    Integer,
    /// At every node LP.
    Lazy,
}

impl SeparationMode {
    pub fn active(self, integral: bool) -> bool {
        match self {
            SeparationMode::Off => false,
            SeparationMode::Integer => integral,
            SeparationMode::Lazy => true,
        }
    }
}

/// Produces cuts violated by an LP point.
pub trait Separator {
    fn separate(&self, x: &[f64], integral: bool) -> Vec<Cut>;
}

/// Rounding hints for the primal heuristic.
#[derive(Debug, Clone, PartialEq)]
pub enum HeuristicGroup {
    /// Binaries that must be non-decreasing along the list.
    Monotone(Vec<usize>),
    /// Binaries of which exactly one is set.
    ExactlyOne(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Relative gap `(obj - bound) / max(1, |obj|)` at which to stop.
    pub gap: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Separation rounds at fractional LP points per node.
    pub cut_rounds: usize,
    pub int_tol: f64,
    pub cone_tol: f64,
    /// Branch on SOS1 groups by splitting them in half instead of on one variable.
    pub sos1_branching: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            gap: 1e-4,
            time_limit: None,
            node_limit: None,
            cut_rounds: 20,
            int_tol: 1e-6,
            cone_tol: 1e-6,
            sos1_branching: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimit => "time-limit",
            SolveStatus::NodeLimit => "node-limit",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub cuts: BTreeMap<CutTag, usize>,
    pub solve_time: Duration,
}

#[derive(Debug, Clone)]
pub struct MipOutcome {
    pub report: SolveReport,
    pub x: Option<Vec<f64>>,
    /// Every cut added during the search, in order.
    pub pool: Vec<Cut>,
}

pub fn relative_gap(obj: f64, bound: f64) -> f64 {
    ((obj - bound) / obj.abs().max(1.0)).max(0.0)
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    bound: f64,
    depth: usize,
    fix: Vec<(usize, f64, f64)>,
}

enum NodeResult {
    Pruned,
    Integer(f64, Vec<f64>),
    Branch(f64, Vec<f64>),
}

const OA_ROUNDS_AT_INTEGER: usize = 400;

struct Engine<'a> {
    model: &'a ModelIR,
    seps: &'a [&'a dyn Separator],
    limits: Limits,
    lp: LpSolver,
    sign: f64,
    binaries: Vec<usize>,
    root: Vec<(f64, f64)>,
    applied: Vec<usize>,
    pool: Vec<Cut>,
    cuts: BTreeMap<CutTag, usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    start: Instant,
}

impl<'a> Engine<'a> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((v, _)) => v - self.limits.gap * v.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn timed_out(&self) -> bool {
        self.limits.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn apply(&mut self, fix: &[(usize, f64, f64)]) {
        for &j in &self.applied {
            let (l, u) = self.root[j];
            self.lp.set_bounds(j, l, u);
        }
        self.applied.clear();
        for &(j, l, u) in fix {
            self.lp.set_bounds(j, l, u);
            self.applied.push(j);
        }
    }

    fn add_cut(&mut self, cut: Cut) {
        self.lp.add_row(&cut.row);
        *self.cuts.entry(cut.tag).or_insert(0) += 1;
        self.pool.push(cut);
    }

    fn integral(&self, x: &[f64]) -> bool {
        self.binaries.iter().all(|&j| (x[j] - x[j].round()).abs() <= self.limits.int_tol)
    }

    fn process(&mut self, fix: &[(usize, f64, f64)]) -> Result<NodeResult> {
        self.apply(fix);
        let mut rounds = 0;
        let mut oa_rounds = 0;
        loop {
            let res = self.lp.solve();
            match res.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(NodeResult::Pruned),
                LpStatus::Unbounded => {
                    return Err(DrccError::Unsupported(format!("LP relaxation of `{}` is unbounded", self.model.name)))
                }
                LpStatus::IterationLimit => return Err(DrccError::CapExceeded("LP iteration limit reached".into())),
            }
            let obj = self.sign * res.objective;
            if obj >= self.cutoff() {
                return Ok(NodeResult::Pruned);
            }
            let x = res.x;
            let integral = self.integral(&x);
            let mut fresh: Vec<Cut> = Vec::new();
            if integral || rounds < self.limits.cut_rounds {
                for s in self.seps {
                    fresh.extend(s.separate(&x, integral));
                }
            }
            fresh.retain(|c| c.row.violation(&x) > 1e-9 * (1.0 + c.row.rhs.abs()));
            let worst_cone = self.model.cones.iter().map(|c| c.residual(&x)).fold(0.0, f64::max);
            if integral && fresh.is_empty() && worst_cone > self.limits.cone_tol {
                for c in &self.model.cones {
                    if c.residual(&x) > self.limits.cone_tol {
                        if let Some(cut) = soc_oa_cut(c, &x) {
                            fresh.push(cut);
                        }
                    }
                }
            }
            let stalled = integral && oa_rounds >= OA_ROUNDS_AT_INTEGER;
            if fresh.is_empty() || stalled {
                return Ok(if integral { NodeResult::Integer(obj, x) } else { NodeResult::Branch(obj, x) });
            }
            for c in fresh {
                self.add_cut(c);
            }
            if integral {
                oa_rounds += 1;
            } else {
                rounds += 1;
            }
        }
    }

    fn offer(&mut self, obj: f64, x: Vec<f64>) {
        let better = self.incumbent.as_ref().is_none_or(|(v, _)| obj < *v - 1e-12 * v.abs().max(1.0));
        if better {
            self.incumbent = Some((obj, x));
        }
    }

    fn round_groups(&self, x: &[f64], groups: &[HeuristicGroup], threshold: f64) -> Vec<(usize, f64, f64)> {
        let mut fix = Vec::new();
        for g in groups {
            match g {
                HeuristicGroup::Monotone(y) => {
                    let first = y.iter().position(|&j| x[j] >= threshold).unwrap_or(y.len());
                    for (n, &j) in y.iter().enumerate() {
                        let v = if n >= first { 1.0 } else { 0.0 };
                        fix.push((j, v, v));
                    }
                }
                HeuristicGroup::ExactlyOne(o) => {
                    if o.is_empty() {
                        continue;
                    }
                    let best = o.iter().copied().fold(o[0], |b, j| if x[j] > x[b] { j } else { b });
                    for &j in o {
                        let v = if j == best { 1.0 } else { 0.0 };
                        fix.push((j, v, v));
                    }
                }
            }
        }
        fix
    }

    fn heuristic(&mut self, base: &[(usize, f64, f64)], x: &[f64], groups: &[HeuristicGroup]) -> Result<()> {
        if groups.is_empty() {
            return Ok(());
        }
        for threshold in [0.5, 1e-6] {
            let mut fix = base.to_vec();
            let rounded = self.round_groups(x, groups, threshold);
            // keep node fixings that conflict with the rounding out of the dive
            if rounded.iter().any(|&(j, v, _)| base.iter().any(|&(b, l, u)| b == j && (v < l || v > u))) {
                continue;
            }
            fix.extend(rounded);
            if let NodeResult::Integer(obj, xi) = self.process(&fix)? {
                self.offer(obj, xi);
            }
        }
        Ok(())
    }

    fn branch(&self, x: &[f64]) -> (Vec<(usize, f64, f64)>, Vec<(usize, f64, f64)>, bool) {
        let tol = self.limits.int_tol;
        let mut best = usize::MAX;
        let mut score = -1.0;
        for &j in &self.binaries {
            let f = x[j] - x[j].floor();
            let s = f.min(1.0 - f);
            if s > tol && s > score + 1e-12 {
                score = s;
                best = j;
            }
        }
        if self.limits.sos1_branching {
            if let Some(group) = self.model.sos1.iter().find(|g| g.contains(&best)) {
                let support: Vec<usize> = (0..group.len()).filter(|&p| x[group[p]] > tol).collect();
                if support.len() >= 2 {
                    let total: f64 = support.iter().map(|&p| x[group[p]]).sum();
                    let mut acc = 0.0;
                    let mut split = support[0];
                    for &p in &support[..support.len() - 1] {
                        acc += x[group[p]];
                        split = p;
                        if acc >= 0.5 * total {
                            break;
                        }
                    }
                    let left: Vec<_> = group[split + 1..].iter().map(|&j| (j, 0.0, 0.0)).collect();
                    let right: Vec<_> = group[..=split].iter().map(|&j| (j, 0.0, 0.0)).collect();
                    let left_first = acc >= 0.5 * total;
                    return (left, right, left_first);
                }
            }
        }
        let up_first = x[best] >= 0.5;
        (vec![(best, 0.0, 0.0)], vec![(best, 1.0, 1.0)], !up_first)
    }
}

/// Minimizes (or maximizes) `model` over its binaries. Cones are handled by
/// outer approximation; `seps` add problem-specific cuts.
pub fn branch_and_cut(
    model: &ModelIR,
    seps: &[&dyn Separator],
    groups: &[HeuristicGroup],
    limits: &Limits,
) -> Result<MipOutcome> {
    let start = Instant::now();
    let sign = if model.objective.sense == ObjSense::Maximize { -1.0 } else { 1.0 };
    let mut eng = Engine {
        model,
        seps,
        limits: *limits,
        lp: LpSolver::new(model),
        sign,
        binaries: model.vars.iter().enumerate().filter(|(_, v)| v.kind == VarKind::Binary).map(|(j, _)| j).collect(),
        root: model.vars.iter().map(|v| (v.lower, v.upper)).collect(),
        applied: Vec::new(),
        pool: Vec::new(),
        cuts: BTreeMap::new(),
        incumbent: None,
        start,
    };
    let mut open: Vec<Node> = vec![Node { id: 0, bound: f64::NEG_INFINITY, depth: 0, fix: Vec::new() }];
    let mut next_id = 1;
    let mut nodes = 0;
    let mut pruned_bound = f64::INFINITY;
    let mut status = SolveStatus::Optimal;
    while !open.is_empty() {
        if eng.timed_out() {
            status = SolveStatus::TimeLimit;
            break;
        }
        if limits.node_limit.is_some_and(|n| nodes >= n) {
            status = SolveStatus::NodeLimit;
            break;
        }
        let pos = if eng.incumbent.is_none() {
            open.len() - 1
        } else {
            let mut p = 0;
            for (i, nd) in open.iter().enumerate() {
                if nd.bound < open[p].bound || (nd.bound == open[p].bound && nd.id < open[p].id) {
                    p = i;
                }
            }
            p
        };
        let node = open.swap_remove(pos);
        if node.bound >= eng.cutoff() {
            pruned_bound = pruned_bound.min(node.bound);
            continue;
        }
        nodes += 1;
        let result = eng.process(&node.fix)?;
        match result {
            NodeResult::Pruned => {
                // infeasible nodes carry no bound; cut off ones are at least the cutoff
                if eng.incumbent.is_some() {
                    pruned_bound = pruned_bound.min(eng.cutoff().max(node.bound));
                }
            }
            NodeResult::Integer(obj, x) => eng.offer(obj, x),
            NodeResult::Branch(obj, x) => {
                if node.depth == 0 || (eng.incumbent.is_none() && nodes % 25 == 0) {
                    eng.heuristic(&node.fix, &x, groups)?;
                    if obj >= eng.cutoff() {
                        pruned_bound = pruned_bound.min(obj);
                        continue;
                    }
                }
                let (a, b, a_first) = eng.branch(&x);
                let mut kids = Vec::with_capacity(2);
                for extra in [a, b] {
                    let mut fix = node.fix.clone();
                    fix.extend(extra);
                    kids.push(Node { id: next_id, bound: obj, depth: node.depth + 1, fix });
                    next_id += 1;
                }
                // the child explored first goes on top of the stack
                if a_first {
                    kids.swap(0, 1);
                }
                open.extend(kids);
            }
        }
    }
    let open_bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let (objective, x) = match eng.incumbent.take() {
        Some((v, x)) => (Some(v), Some(x)),
        None => (None, None),
    };
    let bound_min = open_bound.min(pruned_bound);
    let (bound, gap) = match objective {
        Some(v) => {
            let b = bound_min.min(v);
            (b, relative_gap(v, b))
        }
        None => (bound_min, f64::INFINITY),
    };
    if objective.is_none() && status == SolveStatus::Optimal {
        status = SolveStatus::Infeasible;
    }
    let report = SolveReport {
        status,
        objective: objective.map(|v| sign * v),
        bound: sign * bound,
        gap,
        nodes,
        lp_iterations: eng.lp.total_iterations(),
        cuts: eng.cuts,
        solve_time: start.elapsed(),
    };
    Ok(MipOutcome { report, x, pool: eng.pool })
}
