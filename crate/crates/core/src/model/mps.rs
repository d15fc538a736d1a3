//! MPS export and import.
//!
//! Output uses the fixed-column layout (fields padded to the classic column
//! starts) but the reader splits on whitespace, so names longer than eight
//! characters survive. Magnitudes of `1e30` and above mean infinity. Row
//! roles and SOS1 groups are carried in `* drcc:` comment lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{fmt_num, Cut, LinRow, ModelIR, ObjSense, Sense, VarKind};
use crate::error::{DrccError, Result};

pub const MPS_INFINITY: f64 = 1e30;
const OBJ_ROW: &str = "obj";

fn field_line(out: &mut String, code: &str, f1: &str, f2: &str, f3: &str, f4: Option<(&str, &str)>) {
    let mut l = format!(" {code:<2} {f1:<8}  {f2:<8}  {f3:>12}");
    if let Some((a, b)) = f4 {
        let _ = write!(l, "   {a:<8}  {b:>12}");
    }
    out.push_str(l.trim_end());
    out.push('\n');
}

/// Renders a cone-free model as MPS. Cones have no MPS representation, so
/// models with cones are rejected; see [`linearize`].
pub fn write_mps(m: &ModelIR) -> Result<String> {
    if !m.cones.is_empty() {
        return Err(DrccError::Unsupported(format!(
            "model `{}` has {} cone(s); MPS needs a linearized model",
            m.name,
            m.cones.len()
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", m.name);
    if m.objective.sense == ObjSense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    for r in &m.rows {
        if let Some(role) = &r.role {
            let _ = writeln!(out, "* drcc: role {} {role}", r.name);
        }
    }
    for members in &m.sos1 {
        if let Some(r) = m.rows.iter().find(|r| {
            r.role.as_deref() == Some("sos1")
                && r.row.coeffs.len() == members.len()
                && members.iter().all(|j| r.row.coeffs.contains_key(j))
        }) {
            let _ = writeln!(out, "* drcc: sos1 {}", r.name);
        }
    }
    out.push_str("ROWS\n");
    field_line(&mut out, "N", OBJ_ROW, "", "", None);
    for r in &m.rows {
        let code = match r.row.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        field_line(&mut out, code, &r.name, "", "", None);
    }

    // column-major view of the rows
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.vars.len()];
    for (i, r) in m.rows.iter().enumerate() {
        for (&j, &a) in &r.row.coeffs {
            cols[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in m.vars.iter().enumerate() {
        let int = v.kind == VarKind::Binary;
        if int != in_int {
            let tag = if int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:<7}  'MARKER'                 {tag}");
            marker += 1;
            in_int = int;
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        entries.push((OBJ_ROW.into(), m.objective.coeffs.get(&j).copied().unwrap_or(0.0)));
        entries.extend(cols[j].iter().map(|&(i, a)| (m.rows[i].name.clone(), a)));
        for pair in entries.chunks(2) {
            let second = pair.get(1).map(|(r, a)| (r.as_str(), fmt_num(*a)));
            let second_ref = second.as_ref().map(|(r, a)| (*r, a.as_str()));
            field_line(&mut out, "", &v.name, &pair[0].0, &fmt_num(pair[0].1), second_ref);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:<7}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    if m.objective.constant != 0.0 {
        field_line(&mut out, "", "RHS", OBJ_ROW, &fmt_num(-m.objective.constant), None);
    }
    for r in &m.rows {
        if r.row.rhs != 0.0 {
            field_line(&mut out, "", "RHS", &r.name, &fmt_num(r.row.rhs), None);
        }
    }

    out.push_str("BOUNDS\n");
    for v in &m.vars {
        let (l, u) = (v.lower, v.upper);
        if v.kind == VarKind::Binary && l == 0.0 && u == 1.0 {
            field_line(&mut out, "BV", "BND", &v.name, "", None);
            continue;
        }
        if l == u {
            field_line(&mut out, "FX", "BND", &v.name, &fmt_num(l), None);
            continue;
        }
        match (l == f64::NEG_INFINITY, u == f64::INFINITY) {
            (true, true) => field_line(&mut out, "FR", "BND", &v.name, "", None),
            (true, false) => {
                field_line(&mut out, "MI", "BND", &v.name, "", None);
                field_line(&mut out, "UP", "BND", &v.name, &fmt_num(u), None);
            }
            (false, true) => {
                field_line(&mut out, "LO", "BND", &v.name, &fmt_num(l), None);
                field_line(&mut out, "PL", "BND", &v.name, "", None);
            }
            (false, false) => {
                field_line(&mut out, "LO", "BND", &v.name, &fmt_num(l), None);
                field_line(&mut out, "UP", "BND", &v.name, &fmt_num(u), None);
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

/// Drops the cones and appends `cuts` as ordinary rows named `oa_<i>`.
pub fn linearize(m: &ModelIR, cuts: &[Cut]) -> Result<ModelIR> {
    let mut lin = m.clone();
    lin.cones.clear();
    for (i, c) in cuts.iter().enumerate() {
        lin.add_row_with_role(format!("oa_{i}"), c.row.clone(), Some(c.tag.as_str()))?;
    }
    Ok(lin)
}

fn mps_num(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| DrccError::Parse { line, msg: format!("expected a number, got `{tok}`") })?;
    Ok(if v >= MPS_INFINITY {
        f64::INFINITY
    } else if v <= -MPS_INFINITY {
        f64::NEG_INFINITY
    } else {
        v
    })
}

/// Reads MPS text (fixed or free layout, names without spaces).
pub fn parse_mps(text: &str) -> Result<ModelIR> {
    let mut m = ModelIR::new("mps");
    let mut sense = ObjSense::Minimize;
    let mut obj_name: Option<String> = None;
    let mut row_sense: Vec<(String, Sense)> = Vec::new();
    let mut row_pos: BTreeMap<String, usize> = BTreeMap::new();
    let mut row_coeffs: Vec<BTreeMap<usize, f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut obj = BTreeMap::new();
    let mut constant = 0.0;
    let mut roles: BTreeMap<String, String> = BTreeMap::new();
    let mut sos_rows: Vec<String> = Vec::new();
    let mut section = String::new();
    let mut in_int = false;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        if let Some(c) = raw.strip_prefix('*') {
            let toks: Vec<&str> = c.split_whitespace().collect();
            match toks.as_slice() {
                ["drcc:", "role", row, role] => {
                    roles.insert(row.to_string(), role.to_string());
                }
                ["drcc:", "sos1", row] => sos_rows.push(row.to_string()),
                _ => {}
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let err = |msg: String| DrccError::Parse { line: ln, msg };
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = toks[0].to_ascii_uppercase();
            match section.as_str() {
                "NAME" => m.name = toks.get(1).unwrap_or(&"mps").to_string(),
                "OBJSENSE" if toks.len() > 1 => {
                    if toks[1].eq_ignore_ascii_case("MAX") {
                        sense = ObjSense::Maximize;
                    }
                }
                "ROWS" | "COLUMNS" | "RHS" | "BOUNDS" | "RANGES" | "OBJSENSE" => {}
                "ENDATA" => break,
                _ => return Err(err(format!("unknown section `{}`", toks[0]))),
            }
            continue;
        }
        match section.as_str() {
            "OBJSENSE" => {
                if toks[0].eq_ignore_ascii_case("MAX") || toks[0].eq_ignore_ascii_case("MAXIMIZE") {
                    sense = ObjSense::Maximize;
                }
            }
            "ROWS" => {
                if toks.len() != 2 {
                    return Err(err(format!("bad row line `{raw}`")));
                }
                let s = match toks[0] {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(format!("unknown row type `{other}`"))),
                };
                row_pos.insert(toks[1].to_string(), row_sense.len());
                row_sense.push((toks[1].to_string(), s));
                row_coeffs.push(BTreeMap::new());
                rhs.push(0.0);
            }
            "COLUMNS" => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    in_int = toks[2] == "'INTORG'";
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(err(format!("bad column line `{raw}`")));
                }
                let j = match m.var_index(toks[0]) {
                    Some(j) => j,
                    None => {
                        let kind = if in_int { VarKind::Binary } else { VarKind::Continuous };
                        let ub = if in_int { 1.0 } else { f64::INFINITY };
                        m.add_var(toks[0], kind, 0.0, ub).map_err(|e| err(e.to_string()))?
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let a = mps_num(pair[1], ln)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        if a != 0.0 {
                            obj.insert(j, a);
                        }
                    } else {
                        let r = *row_pos.get(pair[0]).ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                        if a != 0.0 {
                            row_coeffs[r].insert(j, a);
                        }
                    }
                }
            }
            "RHS" => {
                let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in pairs.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err(format!("bad rhs line `{raw}`")));
                    }
                    let v = mps_num(pair[1], ln)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        constant = -v;
                    } else {
                        let r = *row_pos.get(pair[0]).ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                        rhs[r] = v;
                    }
                }
            }
            "BOUNDS" => {
                let name = *toks.get(2).ok_or_else(|| err(format!("bad bound line `{raw}`")))?;
                let j = m.var_index(name).ok_or_else(|| err(format!("unknown column `{name}`")))?;
                let val = toks.get(3).map(|t| mps_num(t, ln)).transpose()?;
                let need = || val.ok_or_else(|| err(format!("bound `{}` needs a value", toks[0])));
                let v = &mut m.vars[j];
                match toks[0] {
                    "UP" => v.upper = need()?,
                    "LO" => v.lower = need()?,
                    "FX" => {
                        let b = need()?;
                        v.lower = b;
                        v.upper = b;
                    }
                    "FR" => {
                        v.lower = f64::NEG_INFINITY;
                        v.upper = f64::INFINITY;
                    }
                    "MI" => v.lower = f64::NEG_INFINITY,
                    "PL" => v.upper = f64::INFINITY,
                    "BV" => {
                        v.kind = VarKind::Binary;
                        v.lower = 0.0;
                        v.upper = 1.0;
                    }
                    other => return Err(err(format!("unsupported bound type `{other}`"))),
                }
            }
            "RANGES" => return Err(err("RANGES are not supported".into())),
            _ => return Err(err(format!("data outside a section: `{raw}`"))),
        }
    }
    for ((name, s), (coeffs, b)) in row_sense.into_iter().zip(row_coeffs.into_iter().zip(rhs)) {
        let role = roles.get(&name).cloned();
        m.add_row_with_role(name, LinRow { coeffs, sense: s, rhs: b }, role.as_deref())?;
    }
    m.set_objective(sense, obj, constant)?;
    for name in sos_rows {
        let i = m
            .row_index(&name)
            .ok_or_else(|| DrccError::Parse { line: 0, msg: format!("sos1 row `{name}` missing") })?;
        let members = m.rows[i].row.coeffs.keys().copied().collect();
        m.sos1.push(members);
    }
    Ok(m)
}
