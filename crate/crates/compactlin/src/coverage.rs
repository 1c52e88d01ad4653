//! Choice of the multiplier sets B_k and the induced product set Q.
//!
//! Two routes: a fixpoint closure for instances whose equation supports are
//! pairwise disjoint (where the minimum is unique), and a selection MILP for
//! the general case.

use crate::linearizer::{LinConstraint, LinModel, Provenance, Sense, VarKind};
use crate::model::{EqId, Instance, Pair, VarId};
use crate::optcore::{self, LpStatus, SolveError};
use crate::rat::{rat, Rat};
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub type MultiplierSets = BTreeMap<EqId, BTreeSet<VarId>>;

/// Multiplier sets B_k together with the product set Q they induce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveragePlan {
    pub b: MultiplierSets,
    pub q: BTreeSet<Pair>,
}

impl CoveragePlan {
    /// Plan from B sets alone; Q is computed as the induced set.
    pub fn from_multipliers(inst: &Instance, b: MultiplierSets) -> CoveragePlan {
        let q = induced_q(inst, &b);
        CoveragePlan { b, q }
    }

    /// Q without square pairs, i.e. the product variables the compact
    /// linearizer will actually create.
    pub fn q_without_squares(&self) -> impl Iterator<Item = &Pair> {
        self.q.iter().filter(|p| !p.is_square())
    }
}

/// Summary counts for a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageStats {
    /// Number of compact equations, sum over k of |B_k|.
    pub num_equations: usize,
    /// Product variables after square elimination.
    pub num_vars: usize,
    /// Rows the standard linearization would need for P.
    pub standard_ineq_count: usize,
}

pub fn stats(inst: &Instance, plan: &CoveragePlan) -> CoverageStats {
    CoverageStats {
        num_equations: plan.b.values().map(|s| s.len()).sum(),
        num_vars: plan.q_without_squares().count(),
        standard_ineq_count: 3 * inst.pairs.len(),
    }
}

/// The set Q induced by multiplier sets B:
/// { (i,j) ordered | exists k: (i in A_k and j in B_k) or (j in A_k and i in B_k) }.
pub fn induced_q(inst: &Instance, b: &MultiplierSets) -> BTreeSet<Pair> {
    let mut q = BTreeSet::new();
    for eq in &inst.equations {
        if let Some(mult) = b.get(&eq.id) {
            for i in eq.support() {
                for &j in mult {
                    q.insert(Pair::new(i, j));
                }
            }
        }
    }
    q
}

/// Per-pair witnesses (k, l): i in A_k, j in B_k and j in A_l, i in B_l.
#[derive(Debug, Clone, Default)]
pub struct ConditionCertificate {
    pub witnesses: BTreeMap<Pair, (EqId, EqId)>,
    pub violations: Vec<String>,
}

impl ConditionCertificate {
    pub fn describe_violations(&self) -> String {
        self.violations.join("; ")
    }
}

/// Checks that Q contains P, that Q is exactly the set induced by B, and
/// that both coverage conditions hold for every pair in Q.
pub fn check_conditions(inst: &Instance, plan: &CoveragePlan) -> (bool, ConditionCertificate) {
    let mut cert = ConditionCertificate::default();

    for p in &inst.pairs {
        if !plan.q.contains(p) {
            cert.violations.push(format!("pair {p} in P is not in Q"));
        }
    }
    let induced = induced_q(inst, &plan.b);
    if induced != plan.q {
        for p in plan.q.difference(&induced) {
            cert.violations.push(format!("pair {p} in Q is not induced by B"));
        }
        for p in induced.difference(&plan.q) {
            cert.violations.push(format!("induced pair {p} missing from Q"));
        }
    }

    for p in &plan.q {
        let (i, j) = (p.i(), p.j());
        let cond1 = inst
            .equations
            .iter()
            .find(|eq| eq.contains(i) && plan.b.get(&eq.id).is_some_and(|s| s.contains(&j)))
            .map(|eq| eq.id);
        let cond2 = inst
            .equations
            .iter()
            .find(|eq| eq.contains(j) && plan.b.get(&eq.id).is_some_and(|s| s.contains(&i)))
            .map(|eq| eq.id);
        match (cond1, cond2) {
            (Some(k), Some(l)) => {
                cert.witnesses.insert(*p, (k, l));
            }
            (None, _) => cert
                .violations
                .push(format!("pair {p} violates condition 1 (no k with {i} in A_k, {j} in B_k)")),
            (_, None) => cert
                .violations
                .push(format!("pair {p} violates condition 2 (no l with {j} in A_l, {i} in B_l)")),
        }
    }

    (cert.violations.is_empty(), cert)
}

#[derive(Debug, Error)]
pub enum CoverageError {
    #[error("equation supports are not pairwise disjoint: {0} and {1} share {2}")]
    SupportsNotDisjoint(EqId, EqId, VarId),
    #[error("variable {0} of a demanded product occurs in no equation")]
    UncoveredVariable(VarId),
    #[error("selection model reported infeasible; instance should have been validated")]
    InfeasibleSelection,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn owning_equation(inst: &Instance, v: VarId) -> Result<EqId, CoverageError> {
    inst.equations_containing(v)
        .next()
        .map(|eq| eq.id)
        .ok_or(CoverageError::UncoveredVariable(v))
}

/// The unique minimal plan for pairwise-disjoint supports, computed as a
/// fixpoint: every demanded or induced pair (i,j) forces j into B_{k(i)}
/// and i into B_{k(j)}, where k(.) is the unique equation owning a variable.
pub fn closure_disjoint(inst: &Instance) -> Result<CoveragePlan, CoverageError> {
    for (a, eq_a) in inst.equations.iter().enumerate() {
        for eq_b in inst.equations.iter().skip(a + 1) {
            if let Some(shared) = eq_a.support().find(|v| eq_b.contains(*v)) {
                return Err(CoverageError::SupportsNotDisjoint(eq_a.id, eq_b.id, shared));
            }
        }
    }

    let mut b: MultiplierSets = inst.equations.iter().map(|eq| (eq.id, BTreeSet::new())).collect();
    let mut pending: Vec<Pair> = inst.pairs.iter().copied().collect();
    while let Some(p) = pending.pop() {
        let (i, j) = (p.i(), p.j());
        let mut grew = false;
        for (member, target) in [(j, owning_equation(inst, i)?), (i, owning_equation(inst, j)?)] {
            let set = b.get_mut(&target).unwrap();
            if set.insert(member) {
                grew = true;
                // newly induced pairs re-enter the queue
                let support: Vec<VarId> = inst.equation(target).unwrap().support().collect();
                for h in support {
                    pending.push(Pair::new(h, member));
                }
            }
        }
        let _ = grew;
    }

    Ok(CoveragePlan::from_multipliers(inst, b))
}

/// Default objective weights: w_var = 1 and w_eqn = max_k |A_k| + 1, so
/// one extra compact equation always outweighs any number of product
/// variables it could save.
pub fn default_weights(inst: &Instance) -> (Rat, Rat) {
    let max_support = inst.equations.iter().map(|eq| eq.coeffs.len()).max().unwrap_or(0);
    (rat(max_support as i64 + 1), Rat::one())
}

/// The selection MILP over membership variables z_ik (i in B_k) and pair
/// indicators f_ij ((i,j) in Q).
#[derive(Debug, Clone)]
pub struct SelectionModel {
    pub model: LinModel,
    pub z_cols: BTreeMap<(VarId, EqId), usize>,
    pub f_cols: BTreeMap<Pair, usize>,
    pub w_eqn: Rat,
    pub w_var: Rat,
}

/// Builds the minimum-size selection model: minimize
/// w_eqn * sum z_ik + w_var * sum f_ij subject to the induction and
/// coverage-condition rows.
pub fn build_selection_milp(inst: &Instance, w_eqn: &Rat, w_var: &Rat) -> SelectionModel {
    let mut model = LinModel::new();
    let mut z_cols = BTreeMap::new();
    let mut f_cols = BTreeMap::new();

    for i in inst.var_ids() {
        for eq in &inst.equations {
            let col = model.binary_var(VarKind::Z(i, eq.id));
            model.objective.insert(col, w_eqn.clone());
            z_cols.insert((i, eq.id), col);
        }
    }
    for i in inst.var_ids() {
        for j in i.0..=inst.n {
            let p = Pair::new(i, VarId(j));
            let col = model.unit_var(VarKind::F(p));
            model.objective.insert(col, w_var.clone());
            f_cols.insert(p, col);
        }
    }

    // pairs demanded by P are fixed in Q
    for p in &inst.pairs {
        model.add_constraint(LinConstraint {
            coeffs: [(f_cols[p], Rat::one())].into(),
            sense: Sense::Eq,
            rhs: Rat::one(),
            provenance: Provenance::SelPairInP(*p),
        });
    }

    // j in B_k forces every pair over A_k into Q: f_pair(i,j) >= z_jk
    for eq in &inst.equations {
        for i in eq.support() {
            for j in inst.var_ids() {
                let p = Pair::new(i, j);
                model.add_constraint(LinConstraint {
                    coeffs: [(f_cols[&p], Rat::one()), (z_cols[&(j, eq.id)], -Rat::one())].into(),
                    sense: Sense::Ge,
                    rhs: Rat::zero(),
                    provenance: Provenance::SelInduced { pair: p, eq: eq.id },
                });
            }
        }
    }

    // coverage conditions: if (i,j) in Q then some k with i in A_k has
    // j in B_k, and some l with j in A_l has i in B_l
    for i in inst.var_ids() {
        for jr in i.0..=inst.n {
            let j = VarId(jr);
            let p = Pair::new(i, j);
            let mut c1: BTreeMap<usize, Rat> = [(f_cols[&p], -Rat::one())].into();
            for eq in inst.equations_containing(i) {
                c1.insert(z_cols[&(j, eq.id)], Rat::one());
            }
            model.add_constraint(LinConstraint {
                coeffs: c1,
                sense: Sense::Ge,
                rhs: Rat::zero(),
                provenance: Provenance::SelCond1(p),
            });
            let mut c2: BTreeMap<usize, Rat> = [(f_cols[&p], -Rat::one())].into();
            for eq in inst.equations_containing(j) {
                c2.insert(z_cols[&(i, eq.id)], Rat::one());
            }
            model.add_constraint(LinConstraint {
                coeffs: c2,
                sense: Sense::Ge,
                rhs: Rat::zero(),
                provenance: Provenance::SelCond2(p),
            });
        }
    }

    SelectionModel { model, z_cols, f_cols, w_eqn: w_eqn.clone(), w_var: w_var.clone() }
}

/// Outcome of `solve_selection`, keeping the objective and whether the pure
/// LP relaxation was already integral in z.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub plan: CoveragePlan,
    pub stats: CoverageStats,
    pub objective: Rat,
    pub lp_was_integral: bool,
}

/// Solves the selection model: LP first, accepting an integral optimum
/// directly (guaranteed for disjoint supports), branch-and-bound otherwise.
pub fn solve_selection(inst: &Instance, w_eqn: &Rat, w_var: &Rat) -> Result<SelectionOutcome, CoverageError> {
    let sel = build_selection_milp(inst, w_eqn, w_var);

    let lp = optcore::solve_lp(&sel.model.relaxed());
    let (values, objective, lp_was_integral) = match lp.status {
        LpStatus::Optimal => {
            let integral = sel
                .z_cols
                .values()
                .all(|&col| lp.values[col].is_zero() || lp.values[col].is_one());
            if integral {
                (lp.values, lp.objective, true)
            } else {
                let mip = optcore::solve_milp(&sel.model)?;
                match mip.status {
                    LpStatus::Optimal => (mip.values, mip.objective, false),
                    _ => return Err(CoverageError::InfeasibleSelection),
                }
            }
        }
        _ => return Err(CoverageError::InfeasibleSelection),
    };

    let mut b: MultiplierSets = inst.equations.iter().map(|eq| (eq.id, BTreeSet::new())).collect();
    for ((i, k), col) in &sel.z_cols {
        if values[*col].is_one() {
            b.get_mut(k).unwrap().insert(*i);
        }
    }
    let plan = CoveragePlan::from_multipliers(inst, b);
    debug_assert!(check_conditions(inst, &plan).0);
    let stats = stats(inst, &plan);
    Ok(SelectionOutcome { plan, stats, objective, lp_was_integral })
}

/// Total selection cost of a plan under given weights.
pub fn plan_cost(plan: &CoveragePlan, w_eqn: &Rat, w_var: &Rat) -> Rat {
    let eqs: usize = plan.b.values().map(|s| s.len()).sum();
    let vars = plan.q.len();
    w_eqn * rat(eqs as i64) + w_var * rat(vars as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{instance, unit_equation, LinearEquation};
    use crate::rat::rat;

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

    fn pairs(list: &[(u32, u32)]) -> BTreeSet<Pair> {
        list.iter().map(|&(i, j)| Pair::new(VarId(i), VarId(j))).collect()
    }

    fn multipliers(list: &[(u32, &[u32])]) -> MultiplierSets {
        list.iter()
            .map(|&(k, vs)| (EqId(k), vs.iter().map(|&v| VarId(v)).collect()))
            .collect()
    }

    #[test]
    fn induced_q_empty_for_empty_b() {
        let inst = example_a();
        let b = multipliers(&[(1, &[]), (2, &[])]);
        assert!(induced_q(&inst, &b).is_empty());
    }

    #[test]
    fn induced_q_single_equation_with_square() {
        let inst = instance(3, vec![unit_equation(1, &[1, 2, 3], 1)], vec![], vec![], vec![]);
        let b = multipliers(&[(1, &[1])]);
        assert_eq!(induced_q(&inst, &b), pairs(&[(1, 1), (1, 2), (1, 3)]));
    }

    #[test]
    fn induced_q_two_equations() {
        let inst = example_a();
        let b = multipliers(&[(1, &[3]), (2, &[1])]);
        assert_eq!(induced_q(&inst, &b), pairs(&[(1, 3), (2, 3), (1, 4)]));
    }

    #[test]
    fn closure_on_example_a() {
        let inst = example_a();
        let plan = closure_disjoint(&inst).unwrap();
        assert_eq!(plan.b, multipliers(&[(1, &[3, 4]), (2, &[1, 2])]));
        assert_eq!(plan.q, pairs(&[(1, 3), (1, 4), (2, 3), (2, 4)]));
        assert!(check_conditions(&inst, &plan).0);
    }

    #[test]
    fn closure_on_example_b_reaches_full_support() {
        let inst = example_b();
        let plan = closure_disjoint(&inst).unwrap();
        assert_eq!(plan.b, multipliers(&[(1, &[1, 2, 3])]));
        assert_eq!(
            plan.q,
            pairs(&[(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)])
        );
        assert!(check_conditions(&inst, &plan).0);
    }

    #[test]
    fn closure_with_empty_p() {
        let inst = instance(2, vec![unit_equation(1, &[1, 2], 1)], vec![], vec![], vec![]);
        let plan = closure_disjoint(&inst).unwrap();
        assert!(plan.q.is_empty());
        assert!(plan.b.values().all(|s| s.is_empty()));
        assert!(check_conditions(&inst, &plan).0);
    }

    #[test]
    fn closure_rejects_overlapping_supports() {
        let inst = instance(
            3,
            vec![unit_equation(1, &[1, 2], 1), unit_equation(2, &[2, 3], 1)],
            vec![],
            vec![],
            vec![],
        );
        assert!(matches!(
            closure_disjoint(&inst),
            Err(CoverageError::SupportsNotDisjoint(..))
        ));
    }

    #[test]
    fn conditions_reject_under_covered_plan() {
        let inst = example_a();
        let b = multipliers(&[(1, &[3]), (2, &[1])]);
        let plan = CoveragePlan::from_multipliers(&inst, b);
        // (2,3) is induced but 2 is not in B_2, violating condition 2
        let (ok, cert) = check_conditions(&inst, &plan);
        assert!(!ok);
        assert!(cert.describe_violations().contains("(2,3)"));
    }

    #[test]
    fn conditions_trivially_hold_for_empty_plan() {
        let inst = instance(2, vec![unit_equation(1, &[1, 2], 1)], vec![], vec![], vec![]);
        let plan = CoveragePlan::from_multipliers(&inst, multipliers(&[(1, &[])]));
        assert!(check_conditions(&inst, &plan).0);
    }

    #[test]
    fn certificate_has_witnesses_for_example_a() {
        let inst = example_a();
        let plan = closure_disjoint(&inst).unwrap();
        let (ok, cert) = check_conditions(&inst, &plan);
        assert!(ok);
        assert_eq!(cert.witnesses.len(), plan.q.len());
        assert_eq!(cert.witnesses[&Pair::new(VarId(1), VarId(3))], (EqId(1), EqId(2)));
    }

    #[test]
    fn selection_model_counts_for_example_a() {
        let inst = example_a();
        let (w_eqn, w_var) = default_weights(&inst);
        let sel = build_selection_milp(&inst, &w_eqn, &w_var);
        assert_eq!(sel.z_cols.len(), 8);
        assert_eq!(sel.f_cols.len(), 10);
    }

    #[test]
    fn default_weights_follow_max_support() {
        let inst = example_b();
        let (w_eqn, w_var) = default_weights(&inst);
        assert_eq!(w_eqn, rat(4));
        assert_eq!(w_var, rat(1));
    }

    #[test]
    fn monotone_induced_q() {
        let inst = example_a();
        let small = multipliers(&[(1, &[3]), (2, &[])]);
        let large = multipliers(&[(1, &[3, 4]), (2, &[1])]);
        let qs = induced_q(&inst, &small);
        let ql = induced_q(&inst, &large);
        assert!(qs.is_subset(&ql));
    }
}
