//! Instance file format and LP-format export.
//!
//! The instance format is line oriented; `#` starts a comment. Numbers are
//! exact rationals written as integers, `p/q` fractions, or decimals.
//!
//! ```text
//! n 4
//! c 1 2            # linear objective: c_1 = 2
//! d 1 3 -1/2       # quadratic objective: d_{13} = -1/2
//! eq 1 1 : 1 1 2 1 # equation 1 with rhs 1: 1*x1 + 1*x2
//! p 1 3            # demanded product pair
//! side 0 : x 1 1 y 1 3 -2   # 1*x1 - 2*y13 >= 0
//! ```

use crate::linearizer::{LinModel, Sense, VarKind};
use crate::model::{
    validate_instance, Instance, LinearEquation, Pair, SideConstraint, VarId,
};
use crate::rat::{decimal_exact, format_rat, parse_rat, Rat};
use num::{One, Signed, Zero};
use num::bigint::BigInt;
use num::Integer;
use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

/// A parse or validation finding tied to a source line (0 when the finding
/// is not attributable to a single line).
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub line: usize,
    pub code: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {} ({})", self.line, self.message, self.code)
    }
}

fn diag(line: usize, code: &str, message: String) -> Diagnostic {
    Diagnostic { line, code: code.to_string(), message }
}

/// Parses and validates an instance document. All validation findings are
/// returned as diagnostics; an instance is only produced when clean.
pub fn parse_instance(text: &str) -> Result<Instance, Vec<Diagnostic>> {
    let mut errs = Vec::new();
    let mut inst = Instance::default();
    let mut saw_n = false;
    let mut eq_lines: BTreeMap<u32, usize> = BTreeMap::new();
    let mut pair_lines: BTreeMap<Pair, usize> = BTreeMap::new();
    let mut side_lines: Vec<usize> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let mut num = |tok: &str, what: &str| -> Option<Rat> {
            match parse_rat(tok) {
                Ok(r) => Some(r),
                Err(e) => {
                    errs.push(diag(lineno, "syntax-error", format!("{what}: {e}")));
                    None
                }
            }
        };
        let int = |tok: &str| -> Option<u32> { tok.parse().ok() };

        match tokens[0] {
            "n" => {
                if tokens.len() != 2 || int(tokens[1]).is_none() {
                    errs.push(diag(lineno, "syntax-error", "expected `n <count>`".into()));
                    continue;
                }
                inst.n = int(tokens[1]).unwrap();
                saw_n = true;
            }
            "c" => {
                if tokens.len() != 3 {
                    errs.push(diag(lineno, "syntax-error", "expected `c <var> <value>`".into()));
                    continue;
                }
                match (int(tokens[1]), num(tokens[2], "objective value")) {
                    (Some(v), Some(val)) => {
                        inst.lin_obj.insert(VarId(v), val);
                    }
                    _ => errs.push(diag(lineno, "syntax-error", "bad `c` entry".into())),
                }
            }
            "d" => {
                if tokens.len() != 4 {
                    errs.push(diag(lineno, "syntax-error", "expected `d <i> <j> <value>`".into()));
                    continue;
                }
                match (int(tokens[1]), int(tokens[2]), num(tokens[3], "objective value")) {
                    (Some(i), Some(j), Some(val)) => {
                        let p = Pair::new(VarId(i), VarId(j));
                        pair_lines.entry(p).or_insert(lineno);
                        inst.quad_obj.insert(p, val);
                    }
                    _ => errs.push(diag(lineno, "syntax-error", "bad `d` entry".into())),
                }
            }
            "eq" => {
                // eq <id> <rhs> : <var> <coef> ...
                let colon = tokens.iter().position(|t| *t == ":");
                let (head, body) = match colon {
                    Some(pos) if pos == 3 => (&tokens[1..3], &tokens[4..]),
                    _ => {
                        errs.push(diag(
                            lineno,
                            "syntax-error",
                            "expected `eq <id> <rhs> : <var> <coef> ...`".into(),
                        ));
                        continue;
                    }
                };
                let id = match int(head[0]) {
                    Some(id) => id,
                    None => {
                        errs.push(diag(lineno, "syntax-error", "bad equation id".into()));
                        continue;
                    }
                };
                let rhs = match num(head[1], "equation rhs") {
                    Some(r) => r,
                    None => continue,
                };
                if body.is_empty() || body.len() % 2 != 0 {
                    errs.push(diag(lineno, "syntax-error", "equation needs var/coef pairs".into()));
                    continue;
                }
                let mut coeffs = Vec::new();
                let mut bad = false;
                for chunk in body.chunks(2) {
                    match (int(chunk[0]), num(chunk[1], "equation coefficient")) {
                        (Some(v), Some(a)) => coeffs.push((v, a)),
                        _ => bad = true,
                    }
                }
                if !bad {
                    eq_lines.insert(id, lineno);
                    inst.equations.push(LinearEquation::new(id, coeffs, rhs));
                }
            }
            "p" => {
                if tokens.len() != 3 {
                    errs.push(diag(lineno, "syntax-error", "expected `p <i> <j>`".into()));
                    continue;
                }
                match (int(tokens[1]), int(tokens[2])) {
                    (Some(i), Some(j)) => {
                        let p = Pair::new(VarId(i), VarId(j));
                        pair_lines.entry(p).or_insert(lineno);
                        inst.pairs.insert(p);
                    }
                    _ => errs.push(diag(lineno, "syntax-error", "bad pair".into())),
                }
            }
            "side" => {
                // side <rhs> : [x <i> <c>]... [y <i> <j> <c>]...
                if tokens.len() < 3 || tokens[2] != ":" {
                    errs.push(diag(lineno, "syntax-error", "expected `side <rhs> : ...`".into()));
                    continue;
                }
                let rhs = match num(tokens[1], "side rhs") {
                    Some(r) => r,
                    None => continue,
                };
                let mut side = SideConstraint {
                    x_coeffs: BTreeMap::new(),
                    y_coeffs: BTreeMap::new(),
                    rhs,
                };
                let mut rest = &tokens[3..];
                let mut bad = false;
                while !rest.is_empty() {
                    match rest[0] {
                        "x" if rest.len() >= 3 => {
                            match (int(rest[1]), num(rest[2], "side coefficient")) {
                                (Some(v), Some(c)) => {
                                    side.x_coeffs.insert(VarId(v), c);
                                }
                                _ => bad = true,
                            }
                            rest = &rest[3..];
                        }
                        "y" if rest.len() >= 4 => {
                            match (int(rest[1]), int(rest[2]), num(rest[3], "side coefficient")) {
                                (Some(i), Some(j), Some(c)) => {
                                    side.y_coeffs.insert(Pair::new(VarId(i), VarId(j)), c);
                                }
                                _ => bad = true,
                            }
                            rest = &rest[4..];
                        }
                        _ => {
                            bad = true;
                            break;
                        }
                    }
                }
                if bad {
                    errs.push(diag(lineno, "syntax-error", "bad side constraint term".into()));
                } else {
                    side_lines.push(lineno);
                    inst.sides.push(side);
                }
            }
            other => {
                errs.push(diag(lineno, "syntax-error", format!("unknown directive {other:?}")));
            }
        }
    }

    if !saw_n {
        errs.push(diag(0, "syntax-error", "missing `n` header".into()));
    }
    if !errs.is_empty() {
        return Err(errs);
    }

    let report = validate_instance(&inst);
    if !report.ok() {
        let locate = |element: &str, message: &str| -> usize {
            if let Some(id) = element
                .strip_prefix('k')
                .and_then(|s| s.split(':').next())
                .and_then(|s| s.parse::<u32>().ok())
            {
                if let Some(l) = eq_lines.get(&id) {
                    return *l;
                }
            }
            for (p, l) in &pair_lines {
                if message.contains(&p.to_string()) || element == p.to_string() {
                    return *l;
                }
            }
            0
        };
        return Err(report
            .issues
            .iter()
            .map(|i| diag(locate(&i.element, &i.message), i.code, format!("{} [{}]", i.message, i.element)))
            .collect());
    }
    Ok(inst)
}

/// Canonical text form; parse(serialize(inst)) == inst for validated
/// instances.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n {}", inst.n);
    for (v, c) in &inst.lin_obj {
        let _ = writeln!(out, "c {} {}", v.0, format_rat(c));
    }
    for (p, d) in &inst.quad_obj {
        let _ = writeln!(out, "d {} {} {}", p.i().0, p.j().0, format_rat(d));
    }
    for eq in &inst.equations {
        let terms: Vec<String> = eq
            .coeffs
            .iter()
            .map(|(v, a)| format!("{} {}", v.0, format_rat(a)))
            .collect();
        let _ = writeln!(out, "eq {} {} : {}", eq.id.0, format_rat(&eq.rhs), terms.join(" "));
    }
    for p in &inst.pairs {
        let _ = writeln!(out, "p {} {}", p.i().0, p.j().0);
    }
    for side in &inst.sides {
        let mut terms = Vec::new();
        for (v, c) in &side.x_coeffs {
            terms.push(format!("x {} {}", v.0, format_rat(c)));
        }
        for (p, c) in &side.y_coeffs {
            terms.push(format!("y {} {} {}", p.i().0, p.j().0, format_rat(c)));
        }
        let _ = writeln!(out, "side {} : {}", format_rat(&side.rhs), terms.join(" "));
    }
    out
}

fn lp_var_name(kind: &VarKind) -> String {
    kind.to_string()
}

fn lcm_of_denoms<'a>(vals: impl Iterator<Item = &'a Rat>) -> BigInt {
    let mut l = BigInt::one();
    for v in vals {
        l = l.lcm(v.denom());
    }
    l
}

fn push_terms(out: &mut String, terms: &[(String, Rat)]) {
    for (idx, (name, coef)) in terms.iter().enumerate() {
        let mag = coef.abs();
        let mag_str = decimal_exact(&mag).expect("scaled term should be decimal-exact");
        if idx == 0 {
            if coef.is_negative() {
                let _ = write!(out, "- ");
            }
        } else if coef.is_negative() {
            let _ = write!(out, " - ");
        } else {
            let _ = write!(out, " + ");
        }
        if mag.is_one() {
            let _ = write!(out, "{name}");
        } else {
            let _ = write!(out, "{mag_str} {name}");
        }
    }
}

/// Deterministic LP-format export. Constraints are ordered by provenance
/// key and variables by model order. Rows whose coefficients have no finite
/// decimal expansion are scaled to integers, with the scale factor recorded
/// in a leading comment.
pub fn export_lp(model: &LinModel) -> String {
    let mut out = String::new();
    out.push_str("\\ compactlin LP export\n");

    // objective, scaled as a whole if needed
    let obj_scale = lcm_of_denoms(model.objective.values())
        .lcm(&BigInt::one());
    let obj_decimal = model
        .objective
        .values()
        .all(|v| decimal_exact(v).is_some());
    let obj_factor = if obj_decimal { BigInt::one() } else { obj_scale };
    if !obj_factor.is_one() {
        let _ = writeln!(out, "\\ obj scaled by {obj_factor}");
    }
    out.push_str("Minimize\n obj: ");
    let obj_terms: Vec<(String, Rat)> = model
        .objective
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(col, c)| {
            (
                lp_var_name(&model.vars[*col].kind),
                c * Rat::from_integer(obj_factor.clone()),
            )
        })
        .collect();
    if obj_terms.is_empty() {
        out.push('0');
    } else {
        push_terms(&mut out, &obj_terms);
    }
    out.push('\n');

    out.push_str("Subject To\n");
    let mut rows: Vec<&crate::linearizer::LinConstraint> = model.constraints.iter().collect();
    rows.sort_by_key(|c| c.provenance);
    let mut scale_notes = Vec::new();
    let mut body = String::new();
    for c in rows {
        let name = c.provenance.name();
        let all_decimal = c
            .coeffs
            .values()
            .chain(std::iter::once(&c.rhs))
            .all(|v| decimal_exact(v).is_some());
        let factor = if all_decimal {
            BigInt::one()
        } else {
            lcm_of_denoms(c.coeffs.values().chain(std::iter::once(&c.rhs)))
        };
        if !factor.is_one() {
            scale_notes.push(format!("\\ {name} scaled by {factor}"));
        }
        let f = Rat::from_integer(factor);
        let terms: Vec<(String, Rat)> = c
            .coeffs
            .iter()
            .filter(|(_, a)| !a.is_zero())
            .map(|(col, a)| (lp_var_name(&model.vars[*col].kind), a * &f))
            .collect();
        if terms.is_empty() {
            continue;
        }
        let _ = write!(body, " {name}: ");
        push_terms(&mut body, &terms);
        let sense = match c.sense {
            Sense::Eq => "=",
            Sense::Ge => ">=",
            Sense::Le => "<=",
        };
        let rhs = &c.rhs * &f;
        let _ = writeln!(body, " {} {}", sense, decimal_exact(&rhs).unwrap());
    }
    for note in &scale_notes {
        let _ = writeln!(out, "{note}");
    }
    out.push_str(&body);

    out.push_str("Bounds\n");
    for v in &model.vars {
        if v.integral {
            continue;
        }
        let lo = decimal_exact(&v.lower).unwrap_or_else(|| format_rat(&v.lower));
        let hi = decimal_exact(&v.upper).unwrap_or_else(|| format_rat(&v.upper));
        let _ = writeln!(out, " {} <= {} <= {}", lo, lp_var_name(&v.kind), hi);
    }
    let binaries: Vec<String> = model
        .vars
        .iter()
        .filter(|v| v.integral)
        .map(|v| lp_var_name(&v.kind))
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n ");
        out.push_str(&binaries.join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::closure_disjoint;
    use crate::linearizer::compact_linearize;
    use crate::rat::ratio;
    use crate::zoo::{example_a, example_b};

    #[test]
    fn round_trip_example_a() {
        let inst = example_a();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn round_trip_with_sides_and_rationals() {
        let mut inst = example_b();
        inst.lin_obj.insert(VarId(2), ratio(-1, 3));
        inst.quad_obj.insert(Pair::new(VarId(1), VarId(2)), ratio(7, 2));
        inst.sides.push(SideConstraint {
            x_coeffs: [(VarId(1), ratio(1, 2))].into(),
            y_coeffs: [(Pair::new(VarId(1), VarId(2)), ratio(-2, 1))].into(),
            rhs: ratio(-3, 4),
        });
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn rational_literal_is_exact() {
        let inst = parse_instance("n 1\neq 1 1/3 : 1 1/3\n").unwrap();
        assert_eq!(inst.equations[0].rhs, ratio(1, 3));
    }

    #[test]
    fn zero_coefficient_is_a_validation_error() {
        let err = parse_instance("n 2\neq 1 1 : 1 0 2 1\n").unwrap_err();
        assert!(err.iter().any(|d| d.code == "nonpositive-coefficient" && d.line == 2));
    }

    #[test]
    fn unknown_directive_is_a_syntax_error() {
        let err = parse_instance("n 2\nbogus 1\n").unwrap_err();
        assert!(err.iter().any(|d| d.code == "syntax-error" && d.line == 2));
    }

    #[test]
    fn export_is_deterministic_and_names_compact_rows() {
        let inst = example_a();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let a = export_lp(&model);
        let b = export_lp(&model);
        assert_eq!(a, b);
        assert!(a.contains("cmp_k1_j3:"));
        assert!(a.contains("cmp_k2_j1:"));
        assert!(a.contains("eq_k1:"));
        assert!(a.contains("Binary"));
    }

    #[test]
    fn export_scales_non_decimal_rows() {
        let inst = crate::model::instance(
            2,
            vec![LinearEquation::new(1, vec![(1, ratio(1, 3)), (2, ratio(2, 3))], rat_one())],
            vec![],
            vec![],
            vec![],
        );
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let text = export_lp(&model);
        assert!(text.contains("eq_k1 scaled by 3"));
        assert!(text.contains("eq_k1: x1 + 2 x2 = 3"));
    }

    fn rat_one() -> Rat {
        crate::rat::rat(1)
    }

    #[test]
    fn export_empty_model() {
        let model = LinModel::new();
        let text = export_lp(&model);
        assert!(text.contains("Minimize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("End"));
    }
}
