use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{RiskConfig, Samples};
use crate::error::{DrccError, Result};
use crate::model::{LinRow, Sense};
use crate::reformulate::{ChanceConstraint, DecisionVar, DrccInstance};
use crate::samples::RiskCost;

/// `min sum c_ij x_ij + sum_j g_j(alpha_j)` subject to supplier capacities and
/// one chance constraint `sum_i x_ij >= xi_j` per customer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportationInstance {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Supplier capacities `M_i`.
    pub capacity: Vec<f64>,
    /// Unit shipping costs, `cost[i][j]` for supplier `i` to customer `j`.
    pub cost: Vec<Vec<f64>>,
    pub risk: RiskConfig,
    /// Added to the linear risk price of each customer; empty means none.
    #[serde(default)]
    pub penalty_perturbation: Vec<f64>,
    /// Demand samples per customer.
    pub demand: Vec<Samples>,
}

/// Generator settings. The defaults give interior optimal risk levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportationConfig {
    pub suppliers: usize,
    pub customers: usize,
    pub samples: usize,
    pub seed: u64,
    pub alpha_bar: f64,
    pub epsilon: f64,
    pub penalty: f64,
    /// Upper end of the uniform perturbation added to `penalty` per customer.
    pub perturbation: f64,
    /// Demand is `scale_j * LogNormal(mu, sigma)` with `scale_j ~ U[0.5, 1.5]`.
    pub demand_mu: f64,
    pub demand_sigma: f64,
    pub cost_range: (f64, f64),
    /// Total capacity as a multiple of the summed largest demands (or VaR at `alpha_bar` when larger).
    pub capacity_factor: f64,
}

impl Default for TransportationConfig {
    fn default() -> Self {
        TransportationConfig {
            suppliers: 40,
            customers: 100,
            samples: 50,
            seed: 1,
            alpha_bar: 0.3,
            epsilon: 0.05,
            penalty: 1e6,
            perturbation: 100.0,
            demand_mu: 3.0,
            demand_sigma: 0.4,
            cost_range: (5000.0, 20000.0),
            capacity_factor: 1.0,
        }
    }
}

impl TransportationConfig {
    pub fn new(seed: u64, suppliers: usize, customers: usize, samples: usize) -> Self {
        TransportationConfig { suppliers, customers, samples, seed, ..Default::default() }
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

impl TransportationInstance {
    pub fn generate(cfg: &TransportationConfig) -> Result<TransportationInstance> {
        let (ni, nd, n) = (cfg.suppliers, cfg.customers, cfg.samples);
        if ni == 0 || nd == 0 || n == 0 {
            return Err(DrccError::InvalidParameter("suppliers, customers and samples must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let lognormal = LogNormal::new(cfg.demand_mu, cfg.demand_sigma)
            .map_err(|e| DrccError::InvalidParameter(format!("demand distribution: {e}")))?;
        let mut demand = Vec::with_capacity(nd);
        for _ in 0..nd {
            let scale = rng.random_range(0.5..1.5);
            let mut xs: Vec<f64> = (0..n).map(|_| round4(scale * lognormal.sample(&mut rng))).collect();
            xs.sort_by(|a, b| b.total_cmp(a));
            demand.push(Samples::Inline(xs));
        }
        let (clo, chi) = cfg.cost_range;
        let cost: Vec<Vec<f64>> =
            (0..ni).map(|_| (0..nd).map(|_| round4(rng.random_range(clo..=chi))).collect()).collect();
        let weights: Vec<f64> = (0..ni).map(|_| rng.random_range(0.5..1.5)).collect();
        let wsum: f64 = weights.iter().sum();
        let mut top = 0.0;
        for s in &demand {
            let set = s.sample_set(cfg.epsilon)?;
            top += set.value(1).max(set.var_finite(cfg.alpha_bar)?.value);
        }
        let capacity: Vec<f64> = weights.iter().map(|w| round4(cfg.capacity_factor * top * w / wsum) + 1e-4).collect();
        let penalty_perturbation: Vec<f64> =
            (0..nd).map(|_| round4(rng.random_range(0.0..=cfg.perturbation))).collect();
        let inst = TransportationInstance {
            name: format!("transport_s{}_i{}_d{}_n{}", cfg.seed, ni, nd, n),
            seed: Some(cfg.seed),
            capacity,
            cost,
            risk: RiskConfig {
                epsilon: cfg.epsilon,
                alpha_bar: cfg.alpha_bar,
                alpha_min: 1e-6,
                risk_cost: RiskCost::linear(cfg.penalty)?,
            },
            penalty_perturbation,
            demand,
        };
        inst.validate()?;
        inst.check_capacity()?;
        Ok(inst)
    }

    /// One supplier with capacity 12 and unit cost 1, one customer with
    /// samples `[10, 8, 6, 4, 2]`, `epsilon = 0.4`, `alpha_bar = 0.9`, `p = 1`.
    pub fn canonical_toy() -> TransportationInstance {
        TransportationInstance {
            name: "toy".into(),
            seed: None,
            capacity: vec![12.0],
            cost: vec![vec![1.0]],
            risk: RiskConfig { epsilon: 0.4, alpha_bar: 0.9, alpha_min: 1e-6, risk_cost: RiskCost::Linear { p: 1.0 } },
            penalty_perturbation: Vec::new(),
            demand: vec![Samples::Inline(vec![10.0, 8.0, 6.0, 4.0, 2.0])],
        }
    }

    pub fn suppliers(&self) -> usize {
        self.capacity.len()
    }

    pub fn customers(&self) -> usize {
        self.demand.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.risk.validate()?;
        let (ni, nd) = (self.suppliers(), self.customers());
        if ni == 0 || nd == 0 {
            return Err(DrccError::Schema("need at least one supplier and one customer".into()));
        }
        if self.cost.len() != ni || self.cost.iter().any(|r| r.len() != nd) {
            return Err(DrccError::Schema(format!("`cost` must be {ni} x {nd}")));
        }
        if !self.penalty_perturbation.is_empty() && self.penalty_perturbation.len() != nd {
            return Err(DrccError::Schema(format!("`penalty_perturbation` must have {nd} entries")));
        }
        if self.capacity.iter().chain(self.cost.iter().flatten()).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(DrccError::InvalidParameter("capacities and costs must be finite and >= 0".into()));
        }
        for s in &self.demand {
            s.sample_set(self.risk.epsilon)?;
        }
        Ok(())
    }

    /// Total capacity must cover the worst-case VaR of every customer at `alpha_bar`.
    pub fn check_capacity(&self) -> Result<()> {
        let mut need = 0.0;
        for s in &self.demand {
            need += s.sample_set(self.risk.epsilon)?.var_finite(self.risk.alpha_bar)?.value;
        }
        let have: f64 = self.capacity.iter().sum();
        if have + 1e-9 < need {
            return Err(DrccError::Infeasible(format!(
                "total capacity {have} is below the demand {need} at alpha_bar"
            )));
        }
        Ok(())
    }

    pub fn risk_cost(&self, j: usize) -> RiskCost {
        let delta = self.penalty_perturbation.get(j).copied().unwrap_or(0.0);
        self.risk.risk_cost.with_extra_linear(delta)
    }

    pub fn to_drcc(&self) -> Result<DrccInstance> {
        self.validate()?;
        let (ni, nd) = (self.suppliers(), self.customers());
        let idx = |i: usize, j: usize| i * nd + j;
        let mut vars = Vec::with_capacity(ni * nd);
        for i in 0..ni {
            for j in 0..nd {
                vars.push(DecisionVar {
                    name: format!("x_{i}_{j}"),
                    lower: 0.0,
                    upper: self.capacity[i],
                    binary: false,
                    cost: self.cost[i][j],
                });
            }
        }
        let rows = (0..ni)
            .map(|i| {
                (format!("cap_{i}"), LinRow::from_terms((0..nd).map(|j| (idx(i, j), 1.0)), Sense::Le, self.capacity[i]))
            })
            .collect();
        let bounds = self.risk.bounds()?;
        let mut constraints = Vec::with_capacity(nd);
        for j in 0..nd {
            constraints.push(ChanceConstraint {
                name: format!("demand_{j}"),
                tech: (0..ni).map(|i| (idx(i, j), 1.0)).collect(),
                samples: self.demand[j].sample_set(self.risk.epsilon)?,
                risk: self.risk_cost(j),
                bounds,
            });
        }
        Ok(DrccInstance { name: self.name.clone(), vars, rows, constraints, constant: 0.0 })
    }
}
