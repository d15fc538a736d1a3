//! CPLEX-style LP text format.
//!
//! Cones are written twice: as a quadratic `[ ]` row that other tools can
//! read, and as a `\* drcc: cone .. *\` annotation that [`parse_lp`] uses to
//! recover the exact tag. Row roles and SOS1 groups travel the same way.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{fmt_num, ConeKind, ConeTag, LinRow, ModelIR, ObjSense, Sense, VarKind};
use crate::error::{DrccError, Result};

const WRAP: usize = 200;

fn push_terms(out: &mut String, line: &mut String, terms: impl IntoIterator<Item = (f64, String)>) {
    for (a, name) in terms {
        let sign = if a < 0.0 || (a == 0.0 && a.is_sign_negative()) { "-" } else { "+" };
        let term = format!(" {sign} {} {name}", fmt_num(a.abs()));
        if line.len() + term.len() > WRAP {
            out.push_str(line);
            out.push('\n');
            line.clear();
            line.push_str("  ");
        }
        line.push_str(&term);
    }
}

fn cone_annotation(m: &ModelIR, c: &ConeTag) -> String {
    let kind = match c.kind {
        ConeKind::Soc => "soc",
        ConeKind::RotatedSoc => "rsoc",
    };
    let mut s = format!("\\* drcc: cone {} {kind} {}", c.name, fmt_num(c.constant));
    for &h in c.heads() {
        let _ = write!(s, " {}", m.vars[h].name);
    }
    for (&t, sc) in c.tail().iter().zip(&c.scales) {
        let _ = write!(s, " {}:{}", m.vars[t].name, fmt_num(*sc));
    }
    s.push_str(" *\\");
    s
}

/// Renders the model as LP text. Every variable appears in the objective, in
/// index order, so that reading the file back reproduces the indices.
pub fn write_lp(m: &ModelIR) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\* drcc: name {} *\\", m.name);
    out.push_str(match m.objective.sense {
        ObjSense::Minimize => "Minimize\n",
        ObjSense::Maximize => "Maximize\n",
    });
    let mut line = String::from(" obj:");
    let terms =
        m.vars.iter().enumerate().map(|(j, v)| (m.objective.coeffs.get(&j).copied().unwrap_or(0.0), v.name.clone()));
    push_terms(&mut out, &mut line, terms);
    if m.objective.constant != 0.0 {
        let c = m.objective.constant;
        let _ = write!(line, " {} {}", if c < 0.0 { "-" } else { "+" }, fmt_num(c.abs()));
    }
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for r in &m.rows {
        if let Some(role) = &r.role {
            let _ = writeln!(out, "\\* drcc: role {} {role} *\\", r.name);
        }
        let mut line = format!(" {}:", r.name);
        push_terms(&mut out, &mut line, r.row.coeffs.iter().map(|(&j, &a)| (a, m.vars[j].name.clone())));
        let _ = write!(line, " {} {}", r.row.sense.symbol(), fmt_num(r.row.rhs));
        out.push_str(&line);
        out.push('\n');
    }
    for (g, members) in m.sos1.iter().enumerate() {
        let row = m
            .rows
            .iter()
            .find(|r| r.role.as_deref() == Some("sos1") && same_members(&r.row, members))
            .map(|r| r.name.clone())
            .unwrap_or_else(|| format!("sos1_{g}"));
        let _ = writeln!(out, "\\* drcc: sos1 {row} *\\");
    }
    for c in &m.cones {
        out.push_str(&cone_annotation(m, c));
        out.push('\n');
        let mut q: Vec<String> = Vec::new();
        match c.kind {
            ConeKind::Soc => q.push(format!("- {}^2", m.vars[c.members[0]].name)),
            ConeKind::RotatedSoc => {
                q.push(format!("- 2 {} * {}", m.vars[c.members[0]].name, m.vars[c.members[1]].name))
            }
        }
        for (&t, s) in c.tail().iter().zip(&c.scales) {
            q.push(format!("+ {} {}^2", fmt_num(s * s), m.vars[t].name));
        }
        let _ = writeln!(out, " {}: [ {} ] <= {}", c.name, q.join(" "), fmt_num(-c.constant));
    }

    out.push_str("Bounds\n");
    for v in &m.vars {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        if v.lower == f64::NEG_INFINITY && v.upper == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), v.name, fmt_num(v.upper));
        }
    }
    let bins: Vec<&str> = m.vars.iter().filter(|v| v.kind == VarKind::Binary).map(|v| v.name.as_str()).collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

fn same_members(row: &LinRow, members: &[usize]) -> bool {
    row.coeffs.len() == members.len() && members.iter().all(|j| row.coeffs.get(j) == Some(&1.0))
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    Head,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    Done,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimise" | "min" | "maximize" | "maximise" | "max" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." | "st." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "generals" | "general" | "gen" => Section::Generals,
        "end" => Section::Done,
        _ => return None,
    })
}

fn num(tok: &str, line: usize) -> Result<f64> {
    let t = tok.to_ascii_lowercase();
    let t = t.trim_start_matches('+');
    match t {
        "inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => t.parse::<f64>().map_err(|_| DrccError::Parse { line, msg: format!("expected a number, got `{tok}`") }),
    }
}

fn is_num(tok: &str) -> bool {
    num(tok, 0).is_ok()
}

struct Parser {
    model: ModelIR,
    sense: ObjSense,
    obj: BTreeMap<usize, f64>,
    constant: f64,
    bounds: BTreeMap<usize, (Option<f64>, Option<f64>)>,
    binaries: Vec<usize>,
    roles: BTreeMap<String, String>,
    sos_rows: Vec<String>,
    cones: Vec<(usize, Vec<String>)>,
}

impl Parser {
    fn var(&mut self, name: &str, line: usize) -> Result<usize> {
        if let Some(j) = self.model.var_index(name) {
            return Ok(j);
        }
        self.model.add_continuous(name, 0.0, f64::INFINITY).map_err(|e| DrccError::Parse { line, msg: e.to_string() })
    }

    /// Parses `[+|-] [coef] name ...` and returns the terms plus the constant part.
    fn linear(&mut self, toks: &[&str], line: usize) -> Result<(BTreeMap<usize, f64>, f64)> {
        let mut terms = BTreeMap::new();
        let mut constant = 0.0;
        let mut sign = 1.0;
        let mut coef: Option<f64> = None;
        for &t in toks {
            match t {
                "+" => sign = 1.0,
                "-" => sign = -sign,
                _ if is_num(t) => {
                    if let Some(c) = coef {
                        constant += sign * c;
                        sign = 1.0;
                    }
                    coef = Some(num(t, line)?);
                }
                _ => {
                    let j = self.var(t, line)?;
                    let a = sign * coef.take().unwrap_or(1.0);
                    *terms.entry(j).or_insert(0.0) += a;
                    sign = 1.0;
                }
            }
        }
        if let Some(c) = coef {
            constant += sign * c;
        }
        Ok((terms, constant))
    }

    fn annotation(&mut self, body: &str, line: usize) -> Result<()> {
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            ["name", name] => self.model.name = name.to_string(),
            ["role", row, role] => {
                self.roles.insert(row.to_string(), role.to_string());
            }
            ["sos1", row] => self.sos_rows.push(row.to_string()),
            ["cone", ..] if toks.len() >= 5 => {
                self.cones.push((line, toks[1..].iter().map(|s| s.to_string()).collect()));
            }
            _ => return Err(DrccError::Parse { line, msg: format!("bad annotation `{body}`") }),
        }
        Ok(())
    }

    fn constraint(&mut self, text: &str, line: usize) -> Result<()> {
        let (name, body) = match text.split_once(':') {
            Some((n, b)) if !n.contains(['<', '>', '=']) => (n.trim().to_string(), b),
            _ => (format!("r_{}", self.model.rows.len() + 1), text),
        };
        if body.contains('[') {
            // quadratic rows are rebuilt from their annotations
            return Ok(());
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let pos = toks
            .iter()
            .position(|t| matches!(*t, "<=" | "=<" | "<" | ">=" | "=>" | ">" | "="))
            .ok_or_else(|| DrccError::Parse { line, msg: format!("no sense in `{text}`") })?;
        let sense = match toks[pos] {
            "<=" | "=<" | "<" => Sense::Le,
            ">=" | "=>" | ">" => Sense::Ge,
            _ => Sense::Eq,
        };
        let (coeffs, lhs_const) = self.linear(&toks[..pos], line)?;
        let (rhs_terms, rhs) = self.linear(&toks[pos + 1..], line)?;
        if !rhs_terms.is_empty() {
            return Err(DrccError::Parse { line, msg: "variables on the right-hand side".into() });
        }
        let row = LinRow::from_terms(coeffs, sense, rhs - lhs_const);
        self.model.add_row(name, row).map_err(|e| DrccError::Parse { line, msg: e.to_string() })?;
        Ok(())
    }

    fn bound(&mut self, text: &str, line: usize) -> Result<()> {
        let toks: Vec<String> =
            text.replace("<=", " <= ").replace(">=", " >= ").split_whitespace().map(str::to_string).collect();
        let t: Vec<&str> = toks.iter().map(String::as_str).collect();
        let err = || DrccError::Parse { line, msg: format!("bad bound `{text}`") };
        match t.as_slice() {
            [v, free] if free.eq_ignore_ascii_case("free") => {
                let j = self.var(v, line)?;
                self.bounds.insert(j, (Some(f64::NEG_INFINITY), Some(f64::INFINITY)));
            }
            [l, "<=", v, "<=", u] => {
                let j = self.var(v, line)?;
                self.bounds.insert(j, (Some(num(l, line)?), Some(num(u, line)?)));
            }
            [v, op, b] if !is_num(v) => {
                let j = self.var(v, line)?;
                let b = num(b, line)?;
                let e = self.bounds.entry(j).or_insert((None, None));
                match *op {
                    "<=" => e.1 = Some(b),
                    ">=" => e.0 = Some(b),
                    "=" => *e = (Some(b), Some(b)),
                    _ => return Err(err()),
                }
            }
            [b, op, v] => {
                let j = self.var(v, line)?;
                let b = num(b, line)?;
                let e = self.bounds.entry(j).or_insert((None, None));
                match *op {
                    "<=" => e.0 = Some(b),
                    ">=" => e.1 = Some(b),
                    "=" => *e = (Some(b), Some(b)),
                    _ => return Err(err()),
                }
            }
            _ => return Err(err()),
        }
        Ok(())
    }
}

/// Reads LP text produced by [`write_lp`] (and plain LP files of the same shape).
pub fn parse_lp(text: &str) -> Result<ModelIR> {
    let mut p = Parser {
        model: ModelIR::new("lp"),
        sense: ObjSense::Minimize,
        obj: BTreeMap::new(),
        constant: 0.0,
        bounds: BTreeMap::new(),
        binaries: Vec::new(),
        roles: BTreeMap::new(),
        sos_rows: Vec::new(),
        cones: Vec::new(),
    };
    let mut section = Section::Head;
    // Items span lines until the next one starts; collect them first.
    let mut items: Vec<(Section, usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix("\\*") {
            let body = rest.trim_end_matches("*\\").trim();
            if let Some(a) = body.strip_prefix("drcc:") {
                p.annotation(a, ln)?;
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        if let Some(s) = section_of(trimmed) {
            if s == Section::Objective && trimmed.to_ascii_lowercase().starts_with("max") {
                p.sense = ObjSense::Maximize;
            }
            section = s;
            continue;
        }
        let continuation = raw.starts_with("  ") && !items.is_empty() && items.last().unwrap().0 == section;
        let starts_item = match section {
            Section::Constraints | Section::Objective => !continuation,
            _ => true,
        };
        if starts_item {
            items.push((section, ln, trimmed.to_string()));
        } else {
            let last = items.last_mut().unwrap();
            last.2.push(' ');
            last.2.push_str(trimmed);
        }
    }
    for (section, ln, text) in items {
        match section {
            Section::Objective => {
                let body = text.split_once(':').map(|(_, b)| b).unwrap_or(&text).to_string();
                let toks: Vec<&str> = body.split_whitespace().collect();
                let (terms, c) = p.linear(&toks, ln)?;
                for (j, a) in terms {
                    if a != 0.0 {
                        *p.obj.entry(j).or_insert(0.0) += a;
                    }
                }
                p.constant += c;
            }
            Section::Constraints => p.constraint(&text, ln)?,
            Section::Bounds => p.bound(&text, ln)?,
            Section::Binaries => {
                for v in text.split_whitespace() {
                    let j = p.var(v, ln)?;
                    p.binaries.push(j);
                }
            }
            Section::Generals => {
                return Err(DrccError::Parse { line: ln, msg: "general integers are not supported".into() })
            }
            Section::Head | Section::Done => {
                return Err(DrccError::Parse { line: ln, msg: format!("unexpected `{text}`") })
            }
        }
    }
    finish(p)
}

fn finish(mut p: Parser) -> Result<ModelIR> {
    for &j in &p.binaries {
        let v = &mut p.model.vars[j];
        v.kind = VarKind::Binary;
        v.lower = 0.0;
        v.upper = 1.0;
    }
    for (&j, &(l, u)) in &p.bounds {
        let v = &mut p.model.vars[j];
        if let Some(l) = l {
            v.lower = l;
        }
        if let Some(u) = u {
            v.upper = u;
        }
        if v.lower > v.upper {
            return Err(DrccError::InvalidBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
        }
    }
    let obj = std::mem::take(&mut p.obj);
    p.model.set_objective(p.sense, obj, p.constant)?;
    for r in &mut p.model.rows {
        if let Some(role) = p.roles.get(&r.name) {
            r.role = Some(role.clone());
        }
    }
    for name in &p.sos_rows {
        let i = p
            .model
            .row_index(name)
            .ok_or_else(|| DrccError::Parse { line: 0, msg: format!("sos1 row `{name}` missing") })?;
        let members: Vec<usize> = p.model.rows[i].row.coeffs.keys().copied().collect();
        p.model.sos1.push(members);
    }
    for (ln, toks) in std::mem::take(&mut p.cones) {
        let err = |msg: &str| DrccError::Parse { line: ln, msg: msg.to_string() };
        let kind = match toks[1].as_str() {
            "soc" => ConeKind::Soc,
            "rsoc" => ConeKind::RotatedSoc,
            _ => return Err(err("unknown cone kind")),
        };
        let constant = num(&toks[2], ln)?;
        let heads = if kind == ConeKind::Soc { 1 } else { 2 };
        if toks.len() < 3 + heads {
            return Err(err("cone without heads"));
        }
        let lookup = |n: &str| p.model.var_index(n).ok_or_else(|| err(&format!("unknown variable `{n}`")));
        let mut members = Vec::new();
        for h in &toks[3..3 + heads] {
            members.push(lookup(h)?);
        }
        let mut scales = Vec::new();
        for t in &toks[3 + heads..] {
            let (n, s) = t.split_once(':').ok_or_else(|| err("tail entries need `name:scale`"))?;
            members.push(lookup(n)?);
            scales.push(num(s, ln)?);
        }
        p.model.add_cone(ConeTag { name: toks[0].clone(), kind, members, scales, constant })?;
    }
    Ok(p.model)
}
