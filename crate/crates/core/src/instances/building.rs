use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{RiskConfig, Samples};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, Sense};
use crate::reformulate::{ChanceConstraint, DecisionVar, DrccInstance};
use crate::samples::RiskCost;

/// Thermal model of one building: `x_t = a x_{t-1} + b u_t + g v`, drawing `power` when on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thermal {
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub v: f64,
    pub power: f64,
}

/// HVAC fleet absorbing uncertain PV output, one chance constraint per period.
///
/// Periods are solved one after the other; the temperatures reached in period
/// `t` are the starting temperatures of period `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingLoadInstance {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub buildings: Vec<Thermal>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_ref: f64,
    /// Temperatures before the first period.
    pub x_init: Vec<f64>,
    pub c_sys: f64,
    pub c_switch: f64,
    pub risk: RiskConfig,
    /// PV samples per period.
    pub pv: Vec<Samples>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingConfig {
    pub buildings: usize,
    pub periods: usize,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub alpha_bar: f64,
    pub penalty: f64,
    pub c_sys: f64,
    pub c_switch: f64,
    /// Peak mean PV output as a fraction of the fleet power.
    pub pv_share: f64,
    /// Relative standard deviation of the PV samples.
    pub pv_noise: f64,
}

impl Default for BuildingConfig {
    fn default() -> Self {
        BuildingConfig {
            buildings: 6,
            periods: 53,
            samples: 10,
            seed: 1,
            epsilon: 0.02,
            alpha_bar: 0.3,
            penalty: 40.0,
            c_sys: 1.0,
            c_switch: 1.0,
            pv_share: 0.4,
            pv_noise: 0.25,
        }
    }
}

impl BuildingConfig {
    pub fn new(seed: u64, buildings: usize, periods: usize, samples: usize) -> Self {
        BuildingConfig { buildings, periods, samples, seed, ..Default::default() }
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

impl BuildingLoadInstance {
    pub fn generate(cfg: &BuildingConfig) -> Result<BuildingLoadInstance> {
        if cfg.buildings == 0 || cfg.periods == 0 || cfg.samples == 0 {
            return Err(DrccError::InvalidParameter("buildings, periods and samples must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut buildings = Vec::with_capacity(cfg.buildings);
        for _ in 0..cfg.buildings {
            let a: f64 = round4(rng.random_range(0.85..0.97));
            let leak = 1.0 - a;
            buildings.push(Thermal {
                a,
                b: round4(-9.0 * leak * rng.random_range(0.9..1.1)),
                g: round4(leak),
                v: round4(27.0 + rng.random_range(-1.0..1.0)),
                power: round4(rng.random_range(2.0..8.0)),
            });
        }
        let x_init = (0..cfg.buildings).map(|_| round4(rng.random_range(21.0..23.0))).collect();
        let fleet: f64 = buildings.iter().map(|b| b.power).sum();
        let noise =
            Normal::new(0.0, cfg.pv_noise).map_err(|e| DrccError::InvalidParameter(format!("pv noise: {e}")))?;
        let mut pv = Vec::with_capacity(cfg.periods);
        for t in 0..cfg.periods {
            let shape = (std::f64::consts::PI * (t as f64 + 0.5) / cfg.periods as f64).sin();
            let mean = cfg.pv_share * fleet * shape;
            let xs = (0..cfg.samples).map(|_| round4((mean * (1.0 + noise.sample(&mut rng))).max(0.0))).collect();
            pv.push(Samples::Inline(xs));
        }
        let inst = BuildingLoadInstance {
            name: format!("building_s{}_n{}_t{}_n{}", cfg.seed, cfg.buildings, cfg.periods, cfg.samples),
            seed: Some(cfg.seed),
            buildings,
            x_min: 19.0,
            x_max: 25.0,
            x_ref: 22.0,
            x_init,
            c_sys: cfg.c_sys,
            c_switch: cfg.c_switch,
            risk: RiskConfig {
                epsilon: cfg.epsilon,
                alpha_bar: cfg.alpha_bar,
                alpha_min: 1e-6,
                risk_cost: RiskCost::linear(cfg.penalty)?,
            },
            pv,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn periods(&self) -> usize {
        self.pv.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.risk.validate()?;
        if self.buildings.is_empty() || self.pv.is_empty() {
            return Err(DrccError::Schema("need at least one building and one period".into()));
        }
        if self.x_init.len() != self.buildings.len() {
            return Err(DrccError::Schema(format!("`x_init` must have {} entries", self.buildings.len())));
        }
        if !(self.x_min < self.x_ref && self.x_ref < self.x_max) {
            return Err(DrccError::InvalidParameter("need x_min < x_ref < x_max".into()));
        }
        for (l, b) in self.buildings.iter().enumerate() {
            if !(b.a > 0.0 && b.a < 1.0) {
                return Err(DrccError::InvalidParameter(format!("building {l}: a = {} is outside (0, 1)", b.a)));
            }
            if !(b.power.is_finite() && b.power >= 0.0 && b.b.is_finite() && b.g.is_finite() && b.v.is_finite()) {
                return Err(DrccError::InvalidParameter(format!("building {l}: bad thermal data")));
            }
        }
        if !(self.c_sys >= 0.0 && self.c_switch >= 0.0) {
            return Err(DrccError::InvalidParameter("costs must be >= 0".into()));
        }
        for s in &self.pv {
            s.sample_set(self.risk.epsilon)?;
        }
        Ok(())
    }

    /// The single-period problem for period `t` starting from temperatures `x_prev`.
    ///
    /// Variables per building: `u_l` (on/off), `temp_l` and `dev_l >= |temp_l - x_ref|`.
    pub fn period_instance(&self, t: usize, x_prev: &[f64]) -> Result<DrccInstance> {
        if t >= self.periods() || x_prev.len() != self.buildings.len() {
            return Err(DrccError::InvalidParameter(format!("period {t} or starting temperatures out of range")));
        }
        let nb = self.buildings.len();
        let (u, temp, dev) = (|l: usize| l, |l: usize| nb + l, |l: usize| 2 * nb + l);
        let dev_hi = (self.x_max - self.x_ref).max(self.x_ref - self.x_min);
        let mut vars = Vec::with_capacity(3 * nb);
        for l in 0..nb {
            vars.push(DecisionVar {
                name: format!("u_{l}"),
                lower: 0.0,
                upper: 1.0,
                binary: true,
                cost: self.c_switch,
            });
        }
        for l in 0..nb {
            vars.push(DecisionVar {
                name: format!("temp_{l}"),
                lower: self.x_min,
                upper: self.x_max,
                binary: false,
                cost: 0.0,
            });
        }
        for l in 0..nb {
            vars.push(DecisionVar {
                name: format!("dev_{l}"),
                lower: 0.0,
                upper: dev_hi,
                binary: false,
                cost: self.c_sys,
            });
        }
        let mut rows = Vec::with_capacity(3 * nb);
        for (l, b) in self.buildings.iter().enumerate() {
            let drift = b.a * x_prev[l] + b.g * b.v;
            rows.push((format!("dyn_{l}"), LinRow::from_terms([(temp(l), 1.0), (u(l), -b.b)], Sense::Eq, drift)));
            rows.push((
                format!("devp_{l}"),
                LinRow::from_terms([(dev(l), 1.0), (temp(l), -1.0)], Sense::Ge, -self.x_ref),
            ));
            rows.push((
                format!("devm_{l}"),
                LinRow::from_terms([(dev(l), 1.0), (temp(l), 1.0)], Sense::Ge, self.x_ref),
            ));
        }
        let constraint = ChanceConstraint {
            name: format!("pv_{t}"),
            tech: self.buildings.iter().enumerate().map(|(l, b)| (u(l), b.power)).collect(),
            samples: self.pv[t].sample_set(self.risk.epsilon)?,
            risk: self.risk.risk_cost.clone(),
            bounds: self.risk.bounds()?,
        };
        Ok(DrccInstance {
            name: format!("{}_t{t}", self.name),
            vars,
            rows,
            constraints: vec![constraint],
            constant: 0.0,
        })
    }

    /// Temperatures reached from `x_prev` with switching decisions `on`.
    pub fn step(&self, x_prev: &[f64], on: &[bool]) -> Vec<f64> {
        self.buildings
            .iter()
            .zip(x_prev.iter().zip(on))
            .map(|(b, (&x, &u))| b.a * x + b.g * b.v + if u { b.b } else { 0.0 })
            .collect()
    }
}
