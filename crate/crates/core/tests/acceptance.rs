//! Acceptance criteria 1-9. Runs without the test harness and prints one
//! PASS/FAIL line per criterion; the process fails if any criterion fails.

use std::time::{Duration, Instant};

use drcc_core::harness::{
    self, alphas_csv, report_csv, run, run_drcc, solution_json, timings_csv, CutOptions, RunOptions, ALPHAS_HEADER,
    REPORT_HEADER, TIMINGS_HEADER,
};
use drcc_core::instances::{
    BuildingConfig, BuildingLoadInstance, Instance, TransportationConfig, TransportationInstance,
};
use drcc_core::model::{linearize, parse_lp, parse_mps, write_lp, write_mps, LinRow, ModelIR, Sense};
use drcc_core::reformulate::{
    build_continuous, build_finite, separate_polymatroid, ChanceConstraint, ContinuousOptions, DecisionVar,
    DrccInstance, FiniteOptions, Formulation, ModelKind, SubmodularCoeffs,
};
use drcc_core::samples::{RiskBounds, RiskCost, SampleSet, VarCurve};
use drcc_core::solve::{
    oracle_finite_enum, oracle_jk_enum, solve_formulation, Limits, OracleSolution, SeparationOptions, SolveStatus,
};
use drcc_core::DrccError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// pinned tolerances
const C1_VAR_TOL: f64 = 1e-9;
const C1_MONO_TOL: f64 = 1e-12;
const C1_TIME: Duration = Duration::from_secs(5);
const C2_TOL: f64 = 1e-9;
const C2_ROUNDED_TOL: f64 = 1e-4;
const C3_TOL: f64 = 1e-6;
const C3_TIME: Duration = Duration::from_secs(60);
const C3_GAP: f64 = 1e-9;
const C5_REL_TOL: f64 = 1e-5;
const C5_GAP: f64 = 1e-7;
const C5_TIME: Duration = Duration::from_secs(600);
const C6_TOL: f64 = 1e-9;
const C4_SUPPLIERS: usize = 10;
const C4_ROOT_SHARE: f64 = 0.9;
const C4_NO_CUT_NODES: usize = 5000;
const C4_TIME: Duration = Duration::from_secs(600);
const C7_TOL: f64 = 1e-5;
const C7_GAP: f64 = 1e-9;
const C8_GAP: f64 = 1e-7;
const C8_DOMINANCE_TOL: f64 = 1e-6;
const C9_ROUND_TRIP_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Sorted samples drawn from a few shapes, ties included.
fn random_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let shape = rng.random_range(0..3);
    let mut v: Vec<f64> = (0..n)
        .map(|_| match shape {
            0 => rng.random_range(0.0..10.0),
            1 => (rng.random_range(0..6) as f64) * 1.5,
            _ => (rng.random_range(-1.0f64..2.0)).exp() * 3.0,
        })
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Excess water `(1/N) sum_{n <= alpha N} (v - xi_n)^+` with the fractional last term.
fn water(xi: &[f64], v: f64, alpha: f64) -> f64 {
    let n = xi.len() as f64;
    let width = alpha * n;
    let mut total = 0.0;
    for (i, &x) in xi.iter().enumerate() {
        let weight = (width - i as f64).clamp(0.0, 1.0);
        if weight == 0.0 {
            break;
        }
        total += weight * (v - x).max(0.0);
    }
    total / n
}

/// Smallest `v` with `water(v) >= epsilon`, by bisection.
fn bisect_var(xi: &[f64], epsilon: f64, alpha: f64) -> f64 {
    let mut lo = xi[xi.len() - 1];
    let mut hi = xi[0] + epsilon / alpha + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if water(xi, mid, alpha) >= epsilon {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut dominance_fail, mut mono_fail) = (0.0f64, 0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let xi = random_samples(&mut rng, n);
        let eps = rng.random_range(0.01..2.0);
        let s = SampleSet::new(xi.clone(), eps).unwrap();
        let a1 = rng.random_range(0.01..0.98);
        let a2 = rng.random_range(a1..0.99);
        for a in [a1, a2] {
            let tc = s.var_continuous(a).unwrap().value;
            let td = s.var_finite(a).unwrap().value;
            let oracle = bisect_var(&xi, eps, a);
            worst = worst.max((tc - oracle).abs() / oracle.abs().max(1.0));
            if td < tc - C1_MONO_TOL * tc.abs().max(1.0) {
                dominance_fail += 1;
            }
        }
        for variant_finite in [false, true] {
            let t = |a: f64| {
                if variant_finite {
                    s.var_finite(a).unwrap().value
                } else {
                    s.var_continuous(a).unwrap().value
                }
            };
            let (t1, t2) = (t(a1), t(a2));
            if t2 > t1 + C1_MONO_TOL * t1.abs().max(1.0) {
                mono_fail += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= C1_VAR_TOL && dominance_fail == 0 && mono_fail == 0 && elapsed < C1_TIME,
        format!(
            "1000 instances, max |t^c - bisection| = {worst:.2e} (tol {C1_VAR_TOL:.0e}), t^d < t^c: {dominance_fail}, \
             monotonicity violations: {mono_fail}, {:.2}s (limit {}s)",
            elapsed.as_secs_f64(),
            C1_TIME.as_secs()
        ),
    )
}

fn criterion_2() -> Outcome {
    let xi = vec![10.0, 8.0, 6.0, 4.0, 2.0];
    let s4 = SampleSet::new(xi.clone(), 0.4).unwrap();
    let s5 = SampleSet::new(xi, 0.5).unwrap();
    let mut checks: Vec<(&str, f64, f64, f64)> = vec![
        ("t^c(eps=0.4, a=0.6)", s4.var_continuous(0.6).unwrap().value, 8.0, C2_TOL),
        ("t^c(eps=0.5, a=0.6)", s5.var_continuous(0.6).unwrap().value, 8.25, C2_TOL),
        ("t^c(eps=0.4, a=0.5)", s4.var_continuous(0.5).unwrap().value, 8.6667, C2_ROUNDED_TOL),
        ("t^c(eps=0.4, a=0.5) exact", s4.var_continuous(0.5).unwrap().value, 26.0 / 3.0, C2_TOL),
        ("t^d(eps=0.4, a=0.6)", s4.var_finite(0.6).unwrap().value, 8.0, C2_TOL),
        ("t^d(eps=0.5, a=0.6)", s5.var_finite(0.6).unwrap().value, 10.0, C2_TOL),
        ("excess(8, 0.6)", s4.excess(8.0, 0.6).unwrap(), 0.4, C2_TOL),
    ];
    for (n, want) in [(1, 0.4), (2, 0.6), (3, 0.8)] {
        let got = s4.alpha_for_level(n).unwrap().unwrap_or(f64::NAN);
        checks.push((["alpha_1", "alpha_2", "alpha_3"][n - 1], got, want, C2_TOL));
    }
    let curve = VarCurve::build(&s4, &RiskBounds::new(0.7).unwrap()).unwrap();
    let mut bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want, tol)| !((got - want).abs() <= *tol))
        .map(|(name, got, want, _)| format!("{name}={got} want {want}"))
        .collect();
    if curve.len() != 2 {
        bad.push(format!("N' at alpha_bar 0.7 = {}", curve.len()));
    }
    let jstar = [
        (s4.critical_index(0.6).unwrap(), Some(2)),
        (s5.critical_index(0.6).unwrap(), Some(1)),
        (SampleSet::new(vec![10.0, 8.0, 6.0, 4.0, 2.0], 3.0).unwrap().critical_index(0.4).unwrap(), None),
    ];
    for (got, want) in jstar {
        if got != want {
            bad.push(format!("j*={got:?} want {want:?}"));
        }
    }
    let n = checks.len() + 4;
    outcome(bad.is_empty(), if bad.is_empty() { format!("{n} fixture values reproduced") } else { bad.join("; ") })
}

/// One chance constraint over one to three variables with random data.
fn random_toy(rng: &mut ChaCha8Rng, max_n: usize, convex_cost: bool) -> DrccInstance {
    let k = rng.random_range(1..=3);
    let vars: Vec<DecisionVar> = (0..k)
        .map(|i| DecisionVar {
            name: format!("x{i}"),
            lower: 0.0,
            upper: rng.random_range(15.0..40.0),
            binary: false,
            cost: rng.random_range(0.2..2.0),
        })
        .collect();
    let tech: Vec<(usize, f64)> = (0..k).map(|i| (i, rng.random_range(0.5..1.5))).collect();
    let n = rng.random_range(2..=max_n);
    let samples = SampleSet::new(random_samples(rng, n), rng.random_range(0.02..1.0)).unwrap();
    let bounds = RiskBounds::new(rng.random_range(0.15..0.9)).unwrap();
    let risk = if rng.random_bool(0.75) {
        RiskCost::linear(rng.random_range(0.0..40.0)).unwrap()
    } else {
        let (s1, s2) = (rng.random_range(0.0f64..20.0), rng.random_range(0.0f64..20.0));
        let (lo, hi) = if convex_cost { (s1.min(s2), s1.max(s2)) } else { (s1, s2) };
        RiskCost::piecewise(vec![(0.0, 0.0), (0.3, 0.3 * lo), (1.0, 0.3 * lo + 0.7 * hi)]).unwrap()
    };
    let mut rows = Vec::new();
    if k > 1 && rng.random_bool(0.5) {
        rows.push(("mix".to_string(), LinRow::from_terms([(0, 1.0), (1, -2.0)], Sense::Le, 5.0)));
    }
    DrccInstance {
        name: "toy".into(),
        vars,
        rows,
        constraints: vec![ChanceConstraint { name: "cc".into(), tech, samples, risk, bounds }],
        constant: 0.0,
    }
}

/// How a branch-and-cut run compared with its oracle.
enum Verdict {
    /// Both optimal; relative objective difference.
    Optimal(f64),
    Infeasible,
    /// Both refused the instance.
    Rejected,
    Mismatch(String),
}

#[derive(Default)]
struct Tally {
    optimal: usize,
    infeasible: usize,
    rejected: usize,
    worst: f64,
    mismatches: Vec<String>,
}

impl Tally {
    fn add(&mut self, label: String, v: Verdict, tol: f64) {
        match v {
            Verdict::Optimal(rel) => {
                self.optimal += 1;
                self.worst = self.worst.max(rel);
                if !(rel <= tol) {
                    self.mismatches.push(format!("{label}: relative difference {rel:.3e}"));
                }
            }
            Verdict::Infeasible => self.infeasible += 1,
            Verdict::Rejected => self.rejected += 1,
            Verdict::Mismatch(m) => self.mismatches.push(format!("{label}: {m}")),
        }
    }

    fn summary(&self, tol: f64) -> String {
        format!(
            "{} optimal, {} infeasible, {} rejected by both; max rel diff {:.2e} (tol {tol:.0e}); {} mismatches{}",
            self.optimal,
            self.infeasible,
            self.rejected,
            self.worst,
            self.mismatches.len(),
            if self.mismatches.is_empty() { String::new() } else { format!(": {}", self.mismatches.join("; ")) }
        )
    }
}

fn compare(
    oracle: drcc_core::Result<OracleSolution>,
    f: drcc_core::Result<Formulation>,
    sep: &SeparationOptions,
    limits: &Limits,
) -> Verdict {
    match (oracle, f) {
        (Ok(o), Ok(f)) => {
            let out = solve_formulation(&f, sep, limits).unwrap();
            match (out.report.status, out.report.objective) {
                (SolveStatus::Optimal, Some(z)) => {
                    Verdict::Optimal((z - o.objective).abs() / o.objective.abs().max(1.0))
                }
                (st, z) => Verdict::Mismatch(format!("b&c {} {z:?}, oracle {}", st.as_str(), o.objective)),
            }
        }
        (Err(DrccError::Infeasible(_)), Ok(f)) => {
            let out = solve_formulation(&f, sep, limits).unwrap();
            if out.report.status == SolveStatus::Infeasible {
                Verdict::Infeasible
            } else {
                Verdict::Mismatch(format!("oracle infeasible, b&c {}", out.report.status.as_str()))
            }
        }
        (Err(_), Err(_)) => Verdict::Rejected,
        (o, f) => Verdict::Mismatch(format!("oracle {:?} vs build {:?}", o.err(), f.err())),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let limits = Limits { gap: C3_GAP, ..Limits::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut tally = Tally::default();
    let variants = [
        FiniteOptions { ordering: false, star: false, ..FiniteOptions::default() },
        FiniteOptions::default(),
        FiniteOptions { star_replaces_big_m: true, ..FiniteOptions::default() },
        FiniteOptions { ordering: true, star: false, ..FiniteOptions::default() },
    ];
    let sep = SeparationOptions::default();
    let mut t = 0;
    while tally.optimal < 200 && t < 800 {
        let inst = random_toy(&mut rng, 20, false);
        let v = compare(oracle_finite_enum(&inst), build_finite(&inst, &variants[t % 4]), &sep, &limits);
        tally.add(format!("toy {t}"), v, C3_TOL);
        t += 1;
    }
    let toys = t;
    for t in 0..20u64 {
        let cfg = TransportationConfig::new(
            1000 + t,
            rng.random_range(2..=3),
            rng.random_range(1..=3),
            rng.random_range(5..=10),
        );
        let inst = TransportationInstance::generate(&cfg).unwrap().to_drcc().unwrap();
        let v = compare(oracle_finite_enum(&inst), build_finite(&inst, &variants[t as usize % 4]), &sep, &limits);
        tally.add(format!("transport {t}"), v, C3_TOL);
    }
    let elapsed = start.elapsed();
    outcome(
        tally.mismatches.is_empty() && tally.optimal >= 220 && elapsed < C3_TIME,
        format!(
            "{toys} toys + 20 transportation: {}; {:.1}s (limit {}s)",
            tally.summary(C3_TOL),
            elapsed.as_secs_f64(),
            C3_TIME.as_secs()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let limits = Limits { gap: C5_GAP, ..Limits::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut tally = Tally::default();
    let mut t = 0;
    // keep drawing until 100 toys have an optimum to compare
    while tally.optimal < 100 && t < 400 {
        let inst = random_toy(&mut rng, 20, true);
        let sep = if t % 2 == 0 { SeparationOptions::default() } else { no_polymatroid() };
        let v =
            compare(oracle_jk_enum(&inst, 60), build_continuous(&inst, &ContinuousOptions::default()), &sep, &limits);
        tally.add(format!("toy {t}"), v, C5_REL_TOL);
        t += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        tally.mismatches.is_empty() && tally.optimal >= 100 && elapsed < C5_TIME,
        format!(
            "{t} continuous toys: {}; {:.1}s (limit {}s)",
            tally.summary(C5_REL_TOL),
            elapsed.as_secs_f64(),
            C5_TIME.as_secs()
        ),
    )
}

fn no_polymatroid() -> SeparationOptions {
    SeparationOptions { polymatroid: drcc_core::solve::SeparationMode::Off, ..SeparationOptions::default() }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut greedy_checked, mut outside, mut cuts, mut not_violated, mut submod_fail) = (0, 0, 0, 0, 0);
    for _ in 0..300 {
        let n = rng.random_range(1..=12);
        let coeffs = SubmodularCoeffs {
            sigma: rng.random_range(0.01..5.0),
            pairs: (0..n).map(|i| (0, i)).collect(),
            d: (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..20.0) }).collect(),
        };
        let o_hat: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() }).collect();
        let tau_hat = rng.random_range(0.0..1.2) * coeffs.h(0..n);
        // run the greedy with tau = -inf so that pi is always returned
        let pi = separate_polymatroid(&coeffs, &o_hat, f64::NEG_INFINITY).unwrap();
        greedy_checked += 1;
        for mask in 0u32..(1 << n) {
            let members = (0..n).filter(|i| mask >> i & 1 == 1);
            let lhs: f64 = members.clone().map(|i| pi[i]).sum();
            if lhs > coeffs.h(members) + C6_TOL {
                outside += 1;
            }
        }
        if let Some(pi) = separate_polymatroid(&coeffs, &o_hat, tau_hat) {
            cuts += 1;
            let lhs: f64 = pi.iter().zip(&o_hat).map(|(p, o)| p * o).sum();
            if !(lhs > tau_hat) {
                not_violated += 1;
            }
        }
        if n <= 10 {
            for mask in 0u32..(1 << n) {
                let base: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let h = |extra: &[usize]| coeffs.h(base.iter().copied().chain(extra.iter().copied()));
                for i in (0..n).filter(|i| mask >> i & 1 == 0) {
                    for j in (i + 1..n).filter(|j| mask >> j & 1 == 0) {
                        if h(&[i]) + h(&[j]) < h(&[i, j]) + h(&[]) - C6_TOL {
                            submod_fail += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(
        outside == 0 && not_violated == 0 && submod_fail == 0 && cuts > 0,
        format!(
            "{greedy_checked} greedy points, {outside} subset violations; {cuts} cuts emitted, {not_violated} not violated \
             at their point; submodularity failures {submod_fail}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let with = RunOptions { cuts: CutOptions::parse("ordering,star").unwrap(), ..RunOptions::new(ModelKind::Finite) };
    let mut without = RunOptions { cuts: CutOptions::none(), ..RunOptions::new(ModelKind::Finite) };
    without.limits.node_limit = Some(C4_NO_CUT_NODES);
    let (mut root, mut total, mut not_optimal) = (0, 0, 0);
    let (mut nodes_with, mut nodes_without) = (Vec::new(), Vec::new());
    for d in [10, 20] {
        for n in [50, 100] {
            for seed in 1..=5 {
                let inst = TransportationInstance::generate(&TransportationConfig::new(seed, C4_SUPPLIERS, d, n))
                    .unwrap()
                    .to_drcc()
                    .unwrap();
                let (a, _) = run_drcc(&inst, &with, None).unwrap();
                let (b, _) = run_drcc(&inst, &without, None).unwrap();
                total += 1;
                if a.report.status != SolveStatus::Optimal {
                    not_optimal += 1;
                }
                if a.report.status == SolveStatus::Optimal && a.report.nodes == 1 {
                    root += 1;
                }
                nodes_with.push(a.report.nodes);
                nodes_without.push(b.report.nodes);
            }
        }
    }
    let median = |v: &mut Vec<usize>| {
        v.sort();
        let k = v.len();
        if k % 2 == 1 {
            v[k / 2] as f64
        } else {
            (v[k / 2 - 1] + v[k / 2]) as f64 / 2.0
        }
    };
    let (mw, mo) = (median(&mut nodes_with), median(&mut nodes_without));
    let share = root as f64 / total as f64;
    let elapsed = start.elapsed();
    outcome(
        share >= C4_ROOT_SHARE && mo > mw && not_optimal == 0 && elapsed < C4_TIME,
        format!(
            "{total} instances (I={C4_SUPPLIERS}), root-solved with ordering+star {root}/{total} ({:.0}%, need {:.0}%), \
             median nodes {mw} with cuts vs {mo} without (node cap {C4_NO_CUT_NODES}), {:.1}s (limit {}s)",
            share * 100.0,
            C4_ROOT_SHARE * 100.0,
            elapsed.as_secs_f64(),
            C4_TIME.as_secs()
        ),
    )
}

fn criterion_7() -> Outcome {
    let limits = Limits { gap: C7_GAP, ..Limits::default() };
    let misocp = RunOptions { limits, ..RunOptions::new(ModelKind::Continuous) };
    let milp = RunOptions { limits, ..RunOptions::new(ModelKind::MilpBinary) };
    let (mut worst, mut problems, mut failures) = (0.0f64, 0, 0);
    let (mut t_misocp, mut t_milp) = (Duration::ZERO, Duration::ZERO);
    let seeds = 10;
    for seed in 1..=seeds {
        let b = BuildingLoadInstance::generate(&BuildingConfig::new(seed, 6, 6, 15)).unwrap();
        let nb = b.buildings.len();
        let mut temps = b.x_init.clone();
        for t in 0..b.periods() {
            // both models start each period from the same state
            let inst = b.period_instance(t, &temps).unwrap();
            let (a, _) = run_drcc(&inst, &misocp, Some(t)).unwrap();
            let (m, _) = run_drcc(&inst, &milp, Some(t)).unwrap();
            t_misocp += a.report.solve_time;
            t_milp += m.report.solve_time;
            problems += 1;
            match (a.report.status, a.report.objective, m.report.status, m.report.objective) {
                (SolveStatus::Optimal, Some(za), SolveStatus::Optimal, Some(zm)) => {
                    worst = worst.max((za - zm).abs() / za.abs().max(1.0));
                }
                (SolveStatus::Infeasible, _, SolveStatus::Infeasible, _) => break,
                _ => {
                    failures += 1;
                    break;
                }
            }
            let on: Vec<bool> = a.x[..nb].iter().map(|(_, v)| *v > 0.5).collect();
            temps = b.step(&temps, &on);
        }
    }
    let (mean_a, mean_m) = (t_misocp.as_secs_f64() / seeds as f64, t_milp.as_secs_f64() / seeds as f64);
    outcome(
        worst <= C7_TOL && failures == 0 && mean_a <= mean_m,
        format!(
            "{seeds} seeds, {problems} period problems (n=6, N=15), max relative objective diff {worst:.2e} (tol {C7_TOL:.0e}), \
             status mismatches {failures}, mean solve time MISOCP {mean_a:.3}s vs MILP-binary {mean_m:.3}s"
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut insts = Vec::new();
    for n in [50, 200] {
        for seed in 1..=5 {
            insts.push(Instance::Transportation(
                TransportationInstance::generate(&TransportationConfig::new(seed, 3, 1, n)).unwrap(),
            ));
        }
    }
    let mut opts = RunOptions::new(ModelKind::Finite);
    opts.limits.gap = C8_GAP;
    let cmp = harness::compare(&insts, &[ModelKind::Finite, ModelKind::Continuous], &opts).unwrap();
    let mut violations = 0;
    for r in &cmp.rows {
        match (r.objective(ModelKind::Finite), r.objective(ModelKind::Continuous)) {
            (Some(zd), Some(zc)) if zd >= zc - C8_DOMINANCE_TOL * zd.abs().max(1.0) => {}
            _ => violations += 1,
        }
    }
    let means: Vec<String> = cmp
        .mean_diffs()
        .iter()
        .map(|(n, _, m)| format!("N={n}: {}", m[0].map_or("-".into(), |v| format!("{:.3}%", v * 100.0))))
        .collect();
    let trend = cmp.trend();
    outcome(
        violations == 0 && trend == "ok",
        format!(
            "{} instances (I=3, D=1, seeds 1-5), z^d < z^c on {violations}, mean diff {}, trend {trend}, {:.1}s",
            cmp.rows.len(),
            means.join(", "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn check_csv(text: &str, header: &[&str], numeric: &[&str]) -> Result<usize, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let h: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if h != header {
        return Err(format!("header {h:?}"));
    }
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != header.len() {
            return Err(format!("row {rows} has {} fields", rec.len()));
        }
        for col in numeric {
            let i = header.iter().position(|c| c == col).unwrap();
            let v = &rec[i];
            if !v.is_empty() && v.parse::<f64>().is_err() && v != "inf" && v != "-inf" {
                return Err(format!("column {col} holds {v:?}"));
            }
        }
        rows += 1;
    }
    Ok(rows)
}

fn round_trip(m: &ModelIR) -> Result<(), String> {
    let lp = parse_lp(&write_lp(m)).map_err(|e| e.to_string())?;
    if !m.approx_eq(&lp, C9_ROUND_TRIP_TOL) {
        return Err(format!("{}: LP round trip differs", m.name));
    }
    if m.cones.is_empty() {
        let mps = parse_mps(&write_mps(m).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if !m.approx_eq(&mps, C9_ROUND_TRIP_TOL) {
            return Err(format!("{}: MPS round trip differs", m.name));
        }
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let mut errors = Vec::new();
    let transport =
        Instance::Transportation(TransportationInstance::generate(&TransportationConfig::new(3, 3, 4, 15)).unwrap());
    let building = Instance::BuildingLoad(BuildingLoadInstance::generate(&BuildingConfig::new(3, 3, 3, 8)).unwrap());
    let mut results = Vec::new();
    let mut models = 0;
    for (inst, kinds) in [
        (&transport, vec![ModelKind::Finite, ModelKind::Continuous, ModelKind::Stochastic]),
        (&building, vec![ModelKind::Continuous, ModelKind::MilpBinary]),
    ] {
        for kind in kinds {
            let opts = RunOptions { deterministic: true, ..RunOptions::new(kind) };
            let texts = |r: &harness::RunResult| {
                let all = std::slice::from_ref(r);
                [
                    report_csv(all, true).unwrap(),
                    alphas_csv(all).unwrap(),
                    timings_csv(all, true).unwrap(),
                    solution_json(r).unwrap(),
                ]
            };
            let a = run(inst, &opts).unwrap();
            let b = run(inst, &opts).unwrap();
            if texts(&a) != texts(&b) {
                errors.push(format!("{} {}: reruns differ", inst.name(), kind.as_str()));
            }
            results.push(a);

            let d = match inst {
                Instance::Transportation(t) => t.to_drcc().unwrap(),
                Instance::BuildingLoad(b) => b.period_instance(0, &b.x_init).unwrap(),
            };
            let f = harness::build(&d, kind, &CutOptions::all()).unwrap();
            models += 1;
            if let Err(e) = round_trip(&f.model) {
                errors.push(e);
            }
            if !f.model.cones.is_empty() {
                let out = solve_formulation(&f, &SeparationOptions::default(), &Limits::default()).unwrap();
                let lin = linearize(&f.model, &out.pool).unwrap();
                models += 1;
                if let Err(e) = round_trip(&lin) {
                    errors.push(e);
                }
            }
        }
    }
    let num_report = [
        "constraints",
        "samples",
        "t_bs",
        "t_solve",
        "t_total",
        "objective",
        "bound",
        "gap",
        "nodes",
        "lp_iterations",
        "cuts_ordering",
        "cuts_star",
        "cuts_polymatroid",
        "cuts_oa",
        "alpha_mean",
    ];
    let checks = [
        (report_csv(&results, true).unwrap(), &REPORT_HEADER[..], &num_report[..]),
        (alphas_csv(&results).unwrap(), &ALPHAS_HEADER[..], &["alpha"][..]),
        (timings_csv(&results, false).unwrap(), &TIMINGS_HEADER[..], &["t_bs", "t_build", "t_solve", "t_total"][..]),
    ];
    let mut rows = 0;
    for (text, header, numeric) in &checks {
        match check_csv(text, header, numeric) {
            Ok(n) => rows += n,
            Err(e) => errors.push(e),
        }
    }
    let cmp = harness::compare(
        std::slice::from_ref(&transport),
        &[ModelKind::Finite, ModelKind::Continuous],
        &RunOptions { deterministic: true, ..RunOptions::new(ModelKind::Finite) },
    )
    .unwrap();
    for (text, header) in [
        (cmp.csv().unwrap(), vec!["instance", "samples", "z_finite", "z_continuous", "diff_continuous", "dominance"]),
        (cmp.summary_csv().unwrap(), vec!["samples", "instances", "mean_diff_continuous", "trend"]),
    ] {
        match check_csv(&text, &header, &header[1..header.len() - 1]) {
            Ok(n) => rows += n,
            Err(e) => errors.push(e),
        }
    }
    outcome(
        errors.is_empty(),
        format!(
            "{} runs byte-identical, {models} models round-tripped through LP/MPS, {rows} CSV rows schema-valid{}",
            results.len(),
            if errors.is_empty() { String::new() } else { format!(", errors: {}", errors.join("; ")) }
        ),
    )
}

fn main() {
    let criteria: Vec<(usize, fn() -> Outcome)> = vec![
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let o = run();
        println!("criterion {id}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
