//! Mixed linear models and the two linearization emitters: the compact
//! equation-based one and the standard three-inequality (McCormick) one.

use crate::coverage::{check_conditions, CoveragePlan};
use crate::model::{EqId, Instance, Pair, VarId};
use crate::rat::Rat;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Role of a variable in a linear model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKind {
    /// Original binary variable x_i.
    X(VarId),
    /// Product variable y_ij.
    Y(Pair),
    /// Selection-model variable z_ik (i in B_k indicator).
    Z(VarId, EqId),
    /// Selection-model variable f_ij ((i,j) in Q indicator).
    F(Pair),
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::X(v) => write!(f, "x{}", v.0),
            VarKind::Y(p) => write!(f, "y{}_{}", p.i().0, p.j().0),
            VarKind::Z(v, k) => write!(f, "z{}_{}", v.0, k.0),
            VarKind::F(p) => write!(f, "f{}_{}", p.i().0, p.j().0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinVar {
    pub kind: VarKind,
    pub lower: Rat,
    pub upper: Rat,
    pub integral: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sense {
    Eq,
    Ge,
    Le,
}

/// Which rule generated a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    /// One of the instance's own linear equations.
    OriginalEq(EqId),
    /// Equation k multiplied by x_j, squares eliminated.
    CompactEq { eq: EqId, mult: VarId },
    /// y_ij <= x_i
    MccUbI(Pair),
    /// y_ij <= x_j
    MccUbJ(Pair),
    /// y_ij >= x_i + x_j - 1
    MccLb(Pair),
    /// Instance side constraint by index.
    Side(usize),
    /// Selection model: f_ij fixed to 1 for (i,j) in P.
    SelPairInP(Pair),
    /// Selection model: membership j in B_k induces f for pairs over A_k.
    SelInduced { pair: Pair, eq: EqId },
    /// Selection model: coverage condition on the first coordinate.
    SelCond1(Pair),
    /// Selection model: coverage condition on the second coordinate.
    SelCond2(Pair),
}

impl Provenance {
    /// Deterministic constraint name used in LP exports.
    pub fn name(&self) -> String {
        match self {
            Provenance::OriginalEq(k) => format!("eq_k{}", k.0),
            Provenance::CompactEq { eq, mult } => format!("cmp_k{}_j{}", eq.0, mult.0),
            Provenance::MccUbI(p) => format!("mcc_ubi_{}_{}", p.i().0, p.j().0),
            Provenance::MccUbJ(p) => format!("mcc_ubj_{}_{}", p.i().0, p.j().0),
            Provenance::MccLb(p) => format!("mcc_lb_{}_{}", p.i().0, p.j().0),
            Provenance::Side(i) => format!("side_{i}"),
            Provenance::SelPairInP(p) => format!("sel_p_{}_{}", p.i().0, p.j().0),
            Provenance::SelInduced { pair, eq } => {
                format!("sel_ind_{}_{}_k{}", pair.i().0, pair.j().0, eq.0)
            }
            Provenance::SelCond1(p) => format!("sel_c1_{}_{}", p.i().0, p.j().0),
            Provenance::SelCond2(p) => format!("sel_c2_{}_{}", p.i().0, p.j().0),
        }
    }
}

/// A linear constraint over model variables, identified by column index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinConstraint {
    pub coeffs: BTreeMap<usize, Rat>,
    pub sense: Sense,
    pub rhs: Rat,
    pub provenance: Provenance,
}

impl LinConstraint {
    /// lhs value at a full point, minus rhs.
    pub fn residual(&self, point: &[Rat]) -> Rat {
        let mut lhs = Rat::zero();
        for (col, a) in &self.coeffs {
            lhs += a * &point[*col];
        }
        lhs - &self.rhs
    }

    pub fn satisfied_by(&self, point: &[Rat]) -> bool {
        let r = self.residual(point);
        match self.sense {
            Sense::Eq => r.is_zero(),
            Sense::Ge => r >= Rat::zero(),
            Sense::Le => r <= Rat::zero(),
        }
    }
}

/// A concrete mixed linear model, always a minimization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinModel {
    pub vars: Vec<LinVar>,
    pub constraints: Vec<LinConstraint>,
    pub objective: BTreeMap<usize, Rat>,
    index: BTreeMap<VarKind, usize>,
}

impl LinModel {
    pub fn new() -> LinModel {
        LinModel::default()
    }

    pub fn add_var(&mut self, kind: VarKind, lower: Rat, upper: Rat, integral: bool) -> usize {
        debug_assert!(!self.index.contains_key(&kind), "duplicate variable {kind}");
        let col = self.vars.len();
        self.vars.push(LinVar { kind, lower, upper, integral });
        self.index.insert(kind, col);
        col
    }

    pub fn binary_var(&mut self, kind: VarKind) -> usize {
        self.add_var(kind, Rat::zero(), Rat::one(), true)
    }

    pub fn unit_var(&mut self, kind: VarKind) -> usize {
        self.add_var(kind, Rat::zero(), Rat::one(), false)
    }

    pub fn col(&self, kind: VarKind) -> Option<usize> {
        self.index.get(&kind).copied()
    }

    pub fn add_constraint(&mut self, c: LinConstraint) {
        debug_assert!(c.coeffs.keys().all(|&col| col < self.vars.len()));
        self.constraints.push(c);
    }

    /// Continuous relaxation: integrality cleared, bounds kept.
    pub fn relaxed(&self) -> LinModel {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.integral = false;
        }
        m
    }

    /// Pins a variable to a value by collapsing its bounds.
    pub fn fix_var(&mut self, col: usize, value: Rat) {
        self.vars[col].lower = value.clone();
        self.vars[col].upper = value;
    }

    /// Exact feasibility check of a full point against bounds and rows.
    pub fn point_feasible(&self, point: &[Rat]) -> bool {
        if point.len() != self.vars.len() {
            return false;
        }
        self.vars
            .iter()
            .zip(point)
            .all(|(v, val)| *val >= v.lower && *val <= v.upper)
            && self.constraints.iter().all(|c| c.satisfied_by(point))
    }

    pub fn objective_value(&self, point: &[Rat]) -> Rat {
        let mut val = Rat::zero();
        for (col, c) in &self.objective {
            val += c * &point[*col];
        }
        val
    }

    /// Rows generated by the compact rule, in emission order.
    pub fn compact_rows(&self) -> impl Iterator<Item = &LinConstraint> {
        self.constraints
            .iter()
            .filter(|c| matches!(c.provenance, Provenance::CompactEq { .. }))
    }
}

/// See `relaxed`; free function form mirroring the rest of the operation set.
pub fn relax(model: &LinModel) -> LinModel {
    model.relaxed()
}

#[derive(Debug, Error)]
pub enum LinearizeError {
    #[error("coverage plan does not satisfy the consistency conditions: {0}")]
    PlanInvalid(String),
    #[error("standard linearization cannot model the square pair {0}")]
    SquarePairRejected(Pair),
}

fn push_original_rows(inst: &Instance, model: &mut LinModel) {
    for eq in &inst.equations {
        let coeffs = eq
            .coeffs
            .iter()
            .map(|(v, a)| (model.col(VarKind::X(*v)).unwrap(), a.clone()))
            .collect();
        model.add_constraint(LinConstraint {
            coeffs,
            sense: Sense::Eq,
            rhs: eq.rhs.clone(),
            provenance: Provenance::OriginalEq(eq.id),
        });
    }
}

fn push_side_rows(inst: &Instance, model: &mut LinModel) {
    for (idx, side) in inst.sides.iter().enumerate() {
        let mut coeffs: BTreeMap<usize, Rat> = BTreeMap::new();
        for (v, c) in &side.x_coeffs {
            coeffs.insert(model.col(VarKind::X(*v)).unwrap(), c.clone());
        }
        for (p, c) in &side.y_coeffs {
            coeffs.insert(model.col(VarKind::Y(*p)).unwrap(), c.clone());
        }
        model.add_constraint(LinConstraint {
            coeffs,
            sense: Sense::Ge,
            rhs: side.rhs.clone(),
            provenance: Provenance::Side(idx),
        });
    }
}

fn push_objective(inst: &Instance, model: &mut LinModel) {
    for (v, c) in &inst.lin_obj {
        let col = model.col(VarKind::X(*v)).unwrap();
        *model.objective.entry(col).or_insert_with(Rat::zero) += c;
    }
    for (p, d) in &inst.quad_obj {
        // square products in P collapse onto the x variable
        let col = if p.is_square() {
            model.col(VarKind::X(p.i())).unwrap()
        } else {
            model.col(VarKind::Y(*p)).unwrap()
        };
        *model.objective.entry(col).or_insert_with(Rat::zero) += d;
    }
    model.objective.retain(|_, c| !c.is_zero());
}

/// Emits the compact linearization induced by a valid coverage plan:
/// the original equations, one equality per (k, j in B_k) with square
/// products y_jj substituted by x_j, side constraints, and the objective.
/// No McCormick inequalities are produced.
pub fn compact_linearize(inst: &Instance, plan: &CoveragePlan) -> Result<LinModel, LinearizeError> {
    let (ok, cert) = check_conditions(inst, plan);
    if !ok {
        return Err(LinearizeError::PlanInvalid(cert.describe_violations()));
    }

    let mut model = LinModel::new();
    for v in inst.var_ids() {
        model.binary_var(VarKind::X(v));
    }
    for p in &plan.q {
        if !p.is_square() {
            model.unit_var(VarKind::Y(*p));
        }
    }

    push_original_rows(inst, &mut model);

    for eq in &inst.equations {
        let multipliers = match plan.b.get(&eq.id) {
            Some(set) => set,
            None => continue,
        };
        for &j in multipliers {
            // sum_{i in A_k} a_i y_(i,j) = b x_j, with y_jj := x_j folded in
            let mut coeffs: BTreeMap<usize, Rat> = BTreeMap::new();
            let mut xj_coeff = -eq.rhs.clone();
            for (i, a) in &eq.coeffs {
                if *i == j {
                    xj_coeff += a;
                } else {
                    let col = model.col(VarKind::Y(Pair::new(*i, j))).unwrap();
                    *coeffs.entry(col).or_insert_with(Rat::zero) += a;
                }
            }
            if !xj_coeff.is_zero() {
                coeffs.insert(model.col(VarKind::X(j)).unwrap(), xj_coeff);
            }
            if coeffs.is_empty() {
                // degenerate 0 = 0 row, e.g. A_k = {j} with a_j = b
                continue;
            }
            model.add_constraint(LinConstraint {
                coeffs,
                sense: Sense::Eq,
                rhs: Rat::zero(),
                provenance: Provenance::CompactEq { eq: eq.id, mult: j },
            });
        }
    }

    push_side_rows(inst, &mut model);
    push_objective(inst, &mut model);
    Ok(model)
}

/// Emits the standard linearization: for each pair, the three inequalities
/// y_ij <= x_i, y_ij <= x_j, y_ij >= x_i + x_j - 1, plus the original
/// equations, side constraints and objective.
pub fn standard_linearize(
    inst: &Instance,
    pairs: &std::collections::BTreeSet<Pair>,
) -> Result<LinModel, LinearizeError> {
    if let Some(sq) = pairs.iter().find(|p| p.is_square()) {
        return Err(LinearizeError::SquarePairRejected(*sq));
    }
    debug_assert!(inst.pairs.iter().all(|p| p.is_square() || pairs.contains(p)));

    let mut model = LinModel::new();
    for v in inst.var_ids() {
        model.binary_var(VarKind::X(v));
    }
    for p in pairs {
        model.unit_var(VarKind::Y(*p));
    }

    push_original_rows(inst, &mut model);

    for p in pairs {
        let y = model.col(VarKind::Y(*p)).unwrap();
        let xi = model.col(VarKind::X(p.i())).unwrap();
        let xj = model.col(VarKind::X(p.j())).unwrap();
        model.add_constraint(LinConstraint {
            coeffs: [(y, Rat::one()), (xi, -Rat::one())].into(),
            sense: Sense::Le,
            rhs: Rat::zero(),
            provenance: Provenance::MccUbI(*p),
        });
        model.add_constraint(LinConstraint {
            coeffs: [(y, Rat::one()), (xj, -Rat::one())].into(),
            sense: Sense::Le,
            rhs: Rat::zero(),
            provenance: Provenance::MccUbJ(*p),
        });
        model.add_constraint(LinConstraint {
            coeffs: [(y, Rat::one()), (xi, -Rat::one()), (xj, -Rat::one())].into(),
            sense: Sense::Ge,
            rhs: -Rat::one(),
            provenance: Provenance::MccLb(*p),
        });
    }

    push_side_rows(inst, &mut model);
    push_objective(inst, &mut model);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::closure_disjoint;
    use crate::model::{brute_force_feasible, instance, unit_equation, LinearEquation};
    use crate::rat::rat;
    use std::collections::BTreeSet;

    fn example_a() -> Instance {
        instance(
            4,
            vec![unit_equation(1, &[1, 2], 1), unit_equation(2, &[3, 4], 1)],
            vec![(1, 3)],
            vec![],
            vec![],
        )
    }

    fn example_b() -> Instance {
        instance(
            3,
            vec![LinearEquation::new(1, vec![(1, rat(2)), (2, rat(1)), (3, rat(1))], rat(2))],
            vec![(1, 2)],
            vec![],
            vec![],
        )
    }

    fn row_map(c: &LinConstraint, m: &LinModel) -> BTreeMap<String, Rat> {
        c.coeffs
            .iter()
            .map(|(col, a)| (m.vars[*col].kind.to_string(), a.clone()))
            .collect()
    }

    #[test]
    fn example_b_compact_rows() {
        let inst = example_b();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let rows: Vec<BTreeMap<String, Rat>> =
            model.compact_rows().map(|c| row_map(c, &model)).collect();
        // j=1: y12 + y13 = 0; j=2: 2y12 + y23 = x2; j=3: 2y13 + y23 = x3
        let expect: Vec<BTreeMap<String, Rat>> = vec![
            [("y1_2".into(), rat(1)), ("y1_3".into(), rat(1))].into(),
            [("y1_2".into(), rat(2)), ("y2_3".into(), rat(1)), ("x2".into(), rat(-1))].into(),
            [("y1_3".into(), rat(2)), ("y2_3".into(), rat(1)), ("x3".into(), rat(-1))].into(),
        ];
        assert_eq!(rows, expect);
        for c in model.compact_rows() {
            assert_eq!(c.sense, Sense::Eq);
            assert!(c.rhs.is_zero());
        }
    }

    #[test]
    fn example_a_compact_rows() {
        let inst = example_a();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let rows: BTreeSet<String> = model
            .compact_rows()
            .map(|c| {
                let m = row_map(c, &model);
                m.iter().map(|(k, v)| format!("{}{}", crate::rat::format_rat(v), k)).collect::<Vec<_>>().join("+")
            })
            .collect();
        // y13 + y23 = x3, y14 + y24 = x4, y13 + y14 = x1, y23 + y24 = x2
        let expect: BTreeSet<String> = [
            "-1x3+1y1_3+1y2_3",
            "-1x4+1y1_4+1y2_4",
            "-1x1+1y1_3+1y1_4",
            "-1x2+1y2_3+1y2_4",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        assert_eq!(rows, expect);
    }

    #[test]
    fn compact_row_count_is_sum_of_b_sizes() {
        let inst = example_a();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let total: usize = plan.b.values().map(|s| s.len()).sum();
        assert_eq!(model.compact_rows().count(), total);
    }

    #[test]
    fn compact_model_has_no_square_vars() {
        let inst = example_b();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        assert!(model
            .vars
            .iter()
            .all(|v| !matches!(v.kind, VarKind::Y(p) if p.is_square())));
    }

    #[test]
    fn integer_points_satisfy_compact_rows() {
        let inst = example_b();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        for x in brute_force_feasible(&inst, 25).unwrap() {
            let point: Vec<Rat> = model
                .vars
                .iter()
                .map(|v| match v.kind {
                    VarKind::X(i) => rat(x[(i.0 - 1) as usize] as i64),
                    VarKind::Y(p) => rat((x[(p.i().0 - 1) as usize] && x[(p.j().0 - 1) as usize]) as i64),
                    _ => unreachable!(),
                })
                .collect();
            assert!(model.point_feasible(&point));
        }
    }

    #[test]
    fn standard_emits_three_rows_per_pair() {
        let inst = example_a();
        let model = standard_linearize(&inst, &inst.pairs).unwrap();
        let mcc = model
            .constraints
            .iter()
            .filter(|c| matches!(c.provenance, Provenance::MccUbI(_) | Provenance::MccUbJ(_) | Provenance::MccLb(_)))
            .count();
        assert_eq!(mcc, 3 * inst.pairs.len());
        assert_eq!(model.vars.iter().filter(|v| matches!(v.kind, VarKind::Y(_))).count(), 1);
    }

    #[test]
    fn standard_rejects_squares() {
        let inst = example_b();
        let mut pairs = inst.pairs.clone();
        pairs.insert(Pair::new(crate::model::VarId(1), crate::model::VarId(1)));
        assert!(matches!(
            standard_linearize(&inst, &pairs),
            Err(LinearizeError::SquarePairRejected(_))
        ));
    }

    #[test]
    fn standard_with_no_pairs_keeps_only_original_rows() {
        let inst = instance(2, vec![unit_equation(1, &[1, 2], 1)], vec![], vec![], vec![]);
        let model = standard_linearize(&inst, &BTreeSet::new()).unwrap();
        assert_eq!(model.constraints.len(), 1);
        assert!(matches!(model.constraints[0].provenance, Provenance::OriginalEq(_)));
    }

    #[test]
    fn relax_clears_integrality_and_is_idempotent() {
        let inst = example_a();
        let model = standard_linearize(&inst, &inst.pairs).unwrap();
        let relaxed = relax(&model);
        assert!(relaxed.vars.iter().all(|v| !v.integral));
        assert_eq!(relaxed.constraints.len(), model.constraints.len());
        assert_eq!(relax(&relaxed), relaxed);
    }
}
