//! Binary quadratic program instances: variables, linear equations with
//! positive coefficients, demanded product pairs, and linear side constraints.

use crate::rat::{format_rat, rat, Rat};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// 1-based index of a binary variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Identifier of a linear equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EqId(pub u32);

impl fmt::Display for EqId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

/// Ordered product pair (i, j) with i <= j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    i: VarId,
    j: VarId,
}

impl Pair {
    /// Builds the pair with the ordering convention applied.
    pub fn new(a: VarId, b: VarId) -> Pair {
        if a <= b {
            Pair { i: a, j: b }
        } else {
            Pair { i: b, j: a }
        }
    }

    pub fn i(&self) -> VarId {
        self.i
    }

    pub fn j(&self) -> VarId {
        self.j
    }

    pub fn is_square(&self) -> bool {
        self.i == self.j
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.i == v || self.j == v
    }

    /// The other endpoint, for pairs containing `v`.
    pub fn other(&self, v: VarId) -> VarId {
        if self.i == v {
            self.j
        } else {
            self.i
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i.0, self.j.0)
    }
}

/// A linear equation sum_{i in A_k} a_i^k x_i = b^k with a_i^k > 0, b^k > 0.
/// The support A_k is exactly the key set of `coeffs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEquation {
    pub id: EqId,
    pub coeffs: BTreeMap<VarId, Rat>,
    pub rhs: Rat,
}

impl LinearEquation {
    pub fn new(id: u32, coeffs: Vec<(u32, Rat)>, rhs: Rat) -> LinearEquation {
        LinearEquation {
            id: EqId(id),
            coeffs: coeffs.into_iter().map(|(i, a)| (VarId(i), a)).collect(),
            rhs,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = VarId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.coeffs.contains_key(&v)
    }

    /// Left-hand-side value minus rhs at a binary point.
    pub fn residual(&self, x: &[bool]) -> Rat {
        let mut lhs = Rat::zero();
        for (v, a) in &self.coeffs {
            if x[(v.0 - 1) as usize] {
                lhs += a;
            }
        }
        lhs - &self.rhs
    }
}

/// A linear side constraint `cx + dy >= e` over original and product variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideConstraint {
    pub x_coeffs: BTreeMap<VarId, Rat>,
    pub y_coeffs: BTreeMap<Pair, Rat>,
    pub rhs: Rat,
}

impl SideConstraint {
    /// Value of lhs - rhs at a binary point with y_ij := x_i * x_j.
    pub fn residual(&self, x: &[bool]) -> Rat {
        let mut lhs = Rat::zero();
        for (v, c) in &self.x_coeffs {
            if x[(v.0 - 1) as usize] {
                lhs += c;
            }
        }
        for (p, c) in &self.y_coeffs {
            if x[(p.i().0 - 1) as usize] && x[(p.j().0 - 1) as usize] {
                lhs += c;
            }
        }
        lhs - &self.rhs
    }
}

/// A binary quadratic program to be linearized.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    pub n: u32,
    pub lin_obj: BTreeMap<VarId, Rat>,
    pub quad_obj: BTreeMap<Pair, Rat>,
    pub equations: Vec<LinearEquation>,
    pub pairs: BTreeSet<Pair>,
    pub sides: Vec<SideConstraint>,
}

/// A single validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: &'static str,
    pub message: String,
    pub element: String,
}

/// Outcome of `validate_instance`; `ok` iff no issues were found.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "{}: {} [{}]", issue.code, issue.message, issue.element)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance has {n} variables, exceeding the brute-force cap of {cap}")]
    SizeExceeded { n: u32, cap: u32 },
}

impl Instance {
    pub fn equation(&self, id: EqId) -> Option<&LinearEquation> {
        self.equations.iter().find(|e| e.id == id)
    }

    /// Equations whose support contains `v`.
    pub fn equations_containing(&self, v: VarId) -> impl Iterator<Item = &LinearEquation> {
        self.equations.iter().filter(move |e| e.contains(v))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (1..=self.n).map(VarId)
    }

    /// Exact objective value c·x + d·y at a binary point with y_ij = x_i x_j.
    pub fn objective_at(&self, x: &[bool]) -> Rat {
        let mut val = Rat::zero();
        for (v, c) in &self.lin_obj {
            if x[(v.0 - 1) as usize] {
                val += c;
            }
        }
        for (p, d) in &self.quad_obj {
            if x[(p.i().0 - 1) as usize] && x[(p.j().0 - 1) as usize] {
                val += d;
            }
        }
        val
    }
}

/// Checks the structural prerequisites of the compact linearization.
///
/// Findings are reported, not thrown; the instance is acceptable iff the
/// report is `ok`.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut issues = Vec::new();
    let in_range = |v: VarId| v.0 >= 1 && v.0 <= inst.n;

    let mut seen_ids = BTreeSet::new();
    for eq in &inst.equations {
        if !seen_ids.insert(eq.id) {
            issues.push(Issue {
                code: "duplicate-equation-id",
                message: format!("equation id {} occurs more than once", eq.id),
                element: eq.id.to_string(),
            });
        }
        if eq.coeffs.is_empty() {
            issues.push(Issue {
                code: "empty-support",
                message: format!("equation {} has empty support", eq.id),
                element: eq.id.to_string(),
            });
        }
        for (v, a) in &eq.coeffs {
            if !in_range(*v) {
                issues.push(Issue {
                    code: "index-out-of-range",
                    message: format!("equation {} references {}", eq.id, v),
                    element: v.to_string(),
                });
            }
            if !a.is_positive() {
                issues.push(Issue {
                    code: "nonpositive-coefficient",
                    message: format!("coefficient of {} in equation {} is {}", v, eq.id, format_rat(a)),
                    element: format!("{}:{}", eq.id, v),
                });
            }
        }
        if !eq.rhs.is_positive() {
            issues.push(Issue {
                code: "nonpositive-rhs",
                message: format!("right-hand side of equation {} is {}", eq.id, format_rat(&eq.rhs)),
                element: eq.id.to_string(),
            });
        }
    }

    for p in &inst.pairs {
        for v in [p.i(), p.j()] {
            if !in_range(v) {
                issues.push(Issue {
                    code: "index-out-of-range",
                    message: format!("pair {p} references {v}"),
                    element: v.to_string(),
                });
            } else if !inst.equations_containing(v).next().is_some() {
                issues.push(Issue {
                    code: "uncovered-variable",
                    message: format!("{v} occurs in product pair {p} but in no equation"),
                    element: v.to_string(),
                });
            }
        }
    }

    for (p, _) in &inst.quad_obj {
        if !inst.pairs.contains(p) {
            issues.push(Issue {
                code: "objective-pair-missing",
                message: format!("quadratic objective references {p} which is not in P"),
                element: p.to_string(),
            });
        }
    }

    for (idx, side) in inst.sides.iter().enumerate() {
        for (p, _) in &side.y_coeffs {
            if !inst.pairs.contains(p) {
                issues.push(Issue {
                    code: "side-pair-missing",
                    message: format!("side constraint {idx} references {p} which is not in P"),
                    element: p.to_string(),
                });
            }
        }
        for (v, _) in &side.x_coeffs {
            if !in_range(*v) {
                issues.push(Issue {
                    code: "index-out-of-range",
                    message: format!("side constraint {idx} references {v}"),
                    element: v.to_string(),
                });
            }
        }
    }

    ValidationReport { issues }
}

pub const DEFAULT_BRUTE_FORCE_CAP: u32 = 25;

/// Enumerates, in lexicographic order of (x1, ..., xn), every binary point
/// satisfying all equations exactly and all side constraints (with
/// y_ij := x_i x_j).
pub fn brute_force_feasible(inst: &Instance, cap: u32) -> Result<Vec<Vec<bool>>, ModelError> {
    if inst.n > cap {
        return Err(ModelError::SizeExceeded { n: inst.n, cap });
    }
    let n = inst.n as usize;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << n) {
        // bit (n-1-pos) drives x_{pos+1} so that iteration order is
        // lexicographic in the vector (x1, ..., xn)
        let x: Vec<bool> = (0..n).map(|pos| mask >> (n - 1 - pos) & 1 == 1).collect();
        let feasible = inst.equations.iter().all(|eq| eq.residual(&x).is_zero())
            && inst.sides.iter().all(|s| !s.residual(&x).is_negative());
        if feasible {
            out.push(x);
        }
    }
    Ok(out)
}

/// Convenience for tests and examples: instance from parts with pairs given
/// as index tuples.
pub fn instance(
    n: u32,
    equations: Vec<LinearEquation>,
    pairs: Vec<(u32, u32)>,
    lin_obj: Vec<(u32, Rat)>,
    quad_obj: Vec<(u32, u32, Rat)>,
) -> Instance {
    Instance {
        n,
        lin_obj: lin_obj.into_iter().map(|(i, c)| (VarId(i), c)).collect(),
        quad_obj: quad_obj
            .into_iter()
            .map(|(i, j, d)| (Pair::new(VarId(i), VarId(j)), d))
            .collect(),
        equations,
        pairs: pairs
            .into_iter()
            .map(|(i, j)| Pair::new(VarId(i), VarId(j)))
            .collect(),
        sides: Vec::new(),
    }
}

/// Unit-coefficient equation, rhs given as integer.
pub fn unit_equation(id: u32, support: &[u32], rhs: i64) -> LinearEquation {
    LinearEquation::new(
        id,
        support.iter().map(|&i| (i, Rat::one())).collect(),
        rat(rhs),
    )
}
