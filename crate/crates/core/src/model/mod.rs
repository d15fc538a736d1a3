//! Solver-neutral mixed-integer conic model.
//!
//! Variables, linear rows and cone tags are indexed by insertion order. Names
//! must be unique within their kind and usable as LP/MPS identifiers.

mod lp;
mod mps;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{DrccError, Result};

pub use lp::{parse_lp, write_lp};
pub use mps::{linearize, parse_mps, write_mps, MPS_INFINITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// `sum coeffs[j] * x_j  (sense)  rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinRow {
    pub coeffs: BTreeMap<usize, f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinRow {
    pub fn new(sense: Sense, rhs: f64) -> Self {
        Self { coeffs: BTreeMap::new(), sense, rhs }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, f64)>, sense: Sense, rhs: f64) -> Self {
        let mut row = Self::new(sense, rhs);
        for (j, a) in terms {
            row.add(j, a);
        }
        row
    }

    /// Accumulates `a` onto the coefficient of `j`, dropping exact zeros.
    pub fn add(&mut self, j: usize, a: f64) -> &mut Self {
        let e = self.coeffs.entry(j).or_insert(0.0);
        *e += a;
        if *e == 0.0 {
            self.coeffs.remove(&j);
        }
        self
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|(&j, &a)| a * x[j]).sum()
    }

    /// How far `x` is from satisfying the row, zero when it does.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub row: LinRow,
    /// Free-form role tag such as `big_m` or `ordering`, carried into exports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjSense,
    pub coeffs: BTreeMap<usize, f64>,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// `h >= || (sqrt(c), s_1 t_1, ..) ||` with head `h = members[0]`.
    Soc,
    /// `2 h_1 h_2 >= c + sum (s_i t_i)^2` with `h_1, h_2 = members[0..2]`, both non-negative.
    RotatedSoc,
}

/// A second-order cone over model variables. `scales` pairs with the tail members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeTag {
    pub name: String,
    pub kind: ConeKind,
    pub members: Vec<usize>,
    pub scales: Vec<f64>,
    pub constant: f64,
}

impl ConeTag {
    pub fn heads(&self) -> &[usize] {
        match self.kind {
            ConeKind::Soc => &self.members[..1],
            ConeKind::RotatedSoc => &self.members[..2],
        }
    }

    pub fn tail(&self) -> &[usize] {
        &self.members[self.heads().len()..]
    }

    /// Amount by which `x` violates the cone, zero when inside.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let tail_sq: f64 =
            self.constant + self.tail().iter().zip(&self.scales).map(|(&j, s)| (s * x[j]).powi(2)).sum::<f64>();
        match self.kind {
            ConeKind::Soc => (tail_sq.sqrt() - x[self.members[0]]).max(0.0),
            ConeKind::RotatedSoc => {
                let (a, b) = (x[self.members[0]], x[self.members[1]]);
                // compare in the same units as the tail norm
                let head = (2.0 * a.max(0.0) * b.max(0.0)).sqrt();
                (tail_sq.sqrt() - head).max(0.0).max(-a).max(-b)
            }
        }
    }
}

/// Provenance of a cutting plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutTag {
    Ordering,
    Star,
    Polymatroid,
    HyperbolicOa,
    SocOa,
}

impl CutTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CutTag::Ordering => "ordering",
            CutTag::Star => "star",
            CutTag::Polymatroid => "polymatroid",
            CutTag::HyperbolicOa => "hyperbolic-oa",
            CutTag::SocOa => "soc-oa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub row: LinRow,
    pub tag: CutTag,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelIR {
    pub name: String,
    pub vars: Vec<Variable>,
    pub objective: Objective,
    pub rows: Vec<Row>,
    pub cones: Vec<ConeTag>,
    /// Groups of binaries of which exactly one is set; each has a matching row.
    pub sos1: Vec<Vec<usize>>,
    #[serde(skip)]
    var_index: HashMap<String, usize>,
    #[serde(skip)]
    row_index: HashMap<String, usize>,
}

impl Default for Objective {
    fn default() -> Self {
        Objective { sense: ObjSense::Minimize, coeffs: BTreeMap::new(), constant: 0.0 }
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name.len() <= 255 && chars.all(|c| c.is_ascii_alphanumeric() || "_.[]#".contains(c))
}

impl ModelIR {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn row_index(&self, name: &str) -> Option<usize> {
        self.row_index.get(name).copied()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> Result<usize> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(DrccError::InvalidName(name));
        }
        if self.var_index.contains_key(&name) {
            return Err(DrccError::DuplicateName(name));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(DrccError::InvalidBounds { name, lower, upper });
        }
        let j = self.vars.len();
        self.var_index.insert(name.clone(), j);
        self.vars.push(Variable { name, kind, lower, upper });
        Ok(j)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<usize> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<usize> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    fn check_coeffs<'a>(&self, what: &str, coeffs: impl IntoIterator<Item = (&'a usize, &'a f64)>) -> Result<()> {
        for (&j, a) in coeffs {
            if j >= self.vars.len() {
                return Err(DrccError::UnknownVariable(j));
            }
            if !a.is_finite() {
                return Err(DrccError::NonFinite(what.to_string()));
            }
        }
        Ok(())
    }

    pub fn add_row(&mut self, name: impl Into<String>, row: LinRow) -> Result<usize> {
        self.add_row_with_role(name, row, None)
    }

    pub fn add_row_with_role(&mut self, name: impl Into<String>, row: LinRow, role: Option<&str>) -> Result<usize> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(DrccError::InvalidName(name));
        }
        if self.row_index.contains_key(&name) {
            return Err(DrccError::DuplicateName(name));
        }
        if row.coeffs.is_empty() {
            return Err(DrccError::EmptyRow(name));
        }
        self.check_coeffs(&name, &row.coeffs)?;
        if !row.rhs.is_finite() {
            return Err(DrccError::NonFinite(name));
        }
        let i = self.rows.len();
        self.row_index.insert(name.clone(), i);
        self.rows.push(Row { name, row, role: role.map(str::to_string) });
        Ok(i)
    }

    pub fn set_objective(&mut self, sense: ObjSense, coeffs: BTreeMap<usize, f64>, constant: f64) -> Result<()> {
        self.check_coeffs("objective", &coeffs)?;
        if !constant.is_finite() {
            return Err(DrccError::NonFinite("objective".into()));
        }
        self.objective = Objective { sense, coeffs, constant };
        Ok(())
    }

    pub fn add_objective_term(&mut self, j: usize, c: f64) -> Result<()> {
        self.check_coeffs("objective", [(&j, &c)])?;
        *self.objective.coeffs.entry(j).or_insert(0.0) += c;
        Ok(())
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective.constant += c;
    }

    pub fn add_cone(&mut self, cone: ConeTag) -> Result<usize> {
        let heads = match cone.kind {
            ConeKind::Soc => 1,
            ConeKind::RotatedSoc => 2,
        };
        if cone.members.len() < heads || cone.members.len() - heads != cone.scales.len() {
            return Err(DrccError::InvalidParameter(format!(
                "cone `{}` has {} members and {} scales",
                cone.name,
                cone.members.len(),
                cone.scales.len()
            )));
        }
        if !valid_name(&cone.name) {
            return Err(DrccError::InvalidName(cone.name));
        }
        if !(cone.constant.is_finite() && cone.constant >= 0.0) || cone.scales.iter().any(|s| !s.is_finite()) {
            return Err(DrccError::NonFinite(cone.name));
        }
        for &j in &cone.members {
            if j >= self.vars.len() {
                return Err(DrccError::UnknownVariable(j));
            }
        }
        self.cones.push(cone);
        Ok(self.cones.len() - 1)
    }

    /// Registers an exactly-one group and adds its row.
    pub fn add_sos1(&mut self, name: impl Into<String>, members: Vec<usize>) -> Result<usize> {
        for &j in &members {
            if j >= self.vars.len() {
                return Err(DrccError::UnknownVariable(j));
            }
            if self.vars[j].kind != VarKind::Binary {
                return Err(DrccError::InvalidParameter(format!("SOS1 member `{}` is not binary", self.vars[j].name)));
            }
        }
        let row = LinRow::from_terms(members.iter().map(|&j| (j, 1.0)), Sense::Eq, 1.0);
        let i = self.add_row_with_role(name, row, Some("sos1"))?;
        self.sos1.push(members);
        Ok(i)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.constant + self.objective.coeffs.iter().map(|(&j, &c)| c * x[j]).sum::<f64>()
    }

    /// Largest violation over bounds, integrality, rows and cones.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xj) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xj).max(xj - v.upper);
            if v.kind == VarKind::Binary {
                worst = worst.max((xj - xj.round()).abs());
            }
        }
        for r in &self.rows {
            worst = worst.max(r.row.violation(x));
        }
        for c in &self.cones {
            worst = worst.max(c.residual(x));
        }
        worst
    }

    /// Rebuilds the name lookup tables, needed after deserializing.
    pub fn reindex(&mut self) -> Result<()> {
        self.var_index.clear();
        self.row_index.clear();
        for (j, v) in self.vars.iter().enumerate() {
            if self.var_index.insert(v.name.clone(), j).is_some() {
                return Err(DrccError::DuplicateName(v.name.clone()));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if self.row_index.insert(r.name.clone(), i).is_some() {
                return Err(DrccError::DuplicateName(r.name.clone()));
            }
        }
        Ok(())
    }

    /// Same variables, rows, cones and objective, compared with a tolerance.
    pub fn approx_eq(&self, other: &ModelIR, tol: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
        let same_map = |a: &BTreeMap<usize, f64>, b: &BTreeMap<usize, f64>| {
            a.len() == b.len() && a.iter().zip(b).all(|((i, x), (j, y))| i == j && close(*x, *y))
        };
        self.vars.len() == other.vars.len()
            && self.vars.iter().zip(&other.vars).all(|(a, b)| {
                a.name == b.name && a.kind == b.kind && close(a.lower, b.lower) && close(a.upper, b.upper)
            })
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.name == b.name
                    && a.row.sense == b.row.sense
                    && close(a.row.rhs, b.row.rhs)
                    && same_map(&a.row.coeffs, &b.row.coeffs)
            })
            && self.objective.sense == other.objective.sense
            && close(self.objective.constant, other.objective.constant)
            && same_map(&self.objective.coeffs, &other.objective.coeffs)
            && self.cones.len() == other.cones.len()
            && self.cones.iter().zip(&other.cones).all(|(a, b)| {
                a.kind == b.kind
                    && a.members == b.members
                    && close(a.constant, b.constant)
                    && a.scales.iter().zip(&b.scales).all(|(x, y)| close(*x, *y))
            })
    }
}

/// Formats a float so that parsing it back gives the same value.
pub(crate) fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}
