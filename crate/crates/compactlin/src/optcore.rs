//! Exact-rational LP and MILP solving at desk scale.
//!
//! The simplex works on bounded variables with a full tableau and exact
//! rational pivots. The default pricing is steepest-coefficient with Bland's
//! rule as the anti-cycling fallback after a degenerate stall, so termination
//! is guaranteed while typical solves stay short. Branch-and-bound is
//! best-first on the LP bound with deterministic branching order.

use crate::linearizer::{LinModel, Sense};
use crate::rat::Rat;
use num::{One, Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve; `values` are the model's variables in column order.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: Rat,
    pub values: Vec<Rat>,
}

/// Result of a branch-and-bound solve.
#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: LpStatus,
    pub objective: Rat,
    pub values: Vec<Rat>,
    pub node_count: u64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("branch-and-bound node budget of {0} exceeded")]
    NodeBudgetExceeded(u64),
}

/// A linear expression `terms . x + constant` over model columns.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<usize, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn value_at(&self, point: &[Rat]) -> Rat {
        let mut v = self.constant.clone();
        for (col, a) in &self.terms {
            v += a * &point[*col];
        }
        v
    }
}

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Environment override for the branch-and-bound node budget.
pub const NODE_BUDGET_ENV: &str = "COMPACTLIN_NODE_BUDGET";

fn node_budget() -> u64 {
    std::env::var(NODE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

const STALL_LIMIT: u32 = 40;

enum Step {
    Optimal,
    Unbounded,
    Moved { degenerate: bool },
}

/// Bounded-variable simplex over an exact rational tableau. The constraint
/// set is fixed at construction; objectives can be swapped and re-optimized
/// from the current basis, which is what the verifier leans on when it
/// maximizes many violation expressions over one polytope.
pub struct Simplex {
    nstruct: usize,
    ncols: usize,
    m: usize,
    tableau: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    basis_row: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    beta: Vec<Rat>,
    lower: Vec<Rat>,
    upper: Vec<Option<Rat>>,
    cost: Vec<Rat>,
    zrow: Vec<Rat>,
    feasible: bool,
}

impl Simplex {
    pub fn new(model: &LinModel) -> Simplex {
        Simplex::with_bound_overrides(model, &[])
    }

    /// Builds the tableau and runs phase 1. Bound overrides replace the
    /// model's (lower, upper) for the given columns.
    pub fn with_bound_overrides(model: &LinModel, overrides: &[(usize, Rat, Rat)]) -> Simplex {
        let nstruct = model.vars.len();
        let m = model.constraints.len();
        let num_slacks = model
            .constraints
            .iter()
            .filter(|c| c.sense != Sense::Eq)
            .count();
        let ncols = nstruct + num_slacks + m;

        let mut lower: Vec<Rat> = model.vars.iter().map(|v| v.lower.clone()).collect();
        let mut upper: Vec<Option<Rat>> = model.vars.iter().map(|v| Some(v.upper.clone())).collect();
        for (col, lo, hi) in overrides {
            lower[*col] = lo.clone();
            upper[*col] = Some(hi.clone());
        }
        let bounds_ok = lower
            .iter()
            .zip(&upper)
            .all(|(lo, hi)| hi.as_ref().map_or(true, |h| lo <= h));
        // slacks and artificials are nonnegative and unbounded above
        for _ in nstruct..ncols {
            lower.push(Rat::zero());
            upper.push(None);
        }

        let mut tableau = vec![vec![Rat::zero(); ncols]; m];
        let mut slack_at = nstruct;
        for (r, c) in model.constraints.iter().enumerate() {
            for (col, a) in &c.coeffs {
                tableau[r][*col] = a.clone();
            }
            match c.sense {
                Sense::Eq => {}
                Sense::Ge => {
                    tableau[r][slack_at] = -Rat::one();
                    slack_at += 1;
                }
                Sense::Le => {
                    tableau[r][slack_at] = Rat::one();
                    slack_at += 1;
                }
            }
        }

        // residuals with every structural/slack column at its lower bound
        let mut basis = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        let art0 = nstruct + num_slacks;
        for (r, c) in model.constraints.iter().enumerate() {
            let mut res = c.rhs.clone();
            for j in 0..art0 {
                if !tableau[r][j].is_zero() && !lower[j].is_zero() {
                    res -= &tableau[r][j] * &lower[j];
                }
            }
            let sign_neg = res.is_negative();
            tableau[r][art0 + r] = if sign_neg { -Rat::one() } else { Rat::one() };
            if sign_neg {
                for j in 0..ncols {
                    let v = std::mem::take(&mut tableau[r][j]);
                    tableau[r][j] = -v;
                }
            }
            basis.push(art0 + r);
            beta.push(res.abs());
        }

        let mut basis_row = vec![None; ncols];
        for (r, &j) in basis.iter().enumerate() {
            basis_row[j] = Some(r);
        }

        let mut s = Simplex {
            nstruct,
            ncols,
            m,
            tableau,
            basis,
            basis_row,
            at_upper: vec![false; ncols],
            beta,
            lower,
            upper,
            cost: vec![Rat::zero(); ncols],
            zrow: vec![Rat::zero(); ncols],
            feasible: false,
        };
        if !bounds_ok {
            return s;
        }

        // phase 1: drive the artificials to zero
        for j in art0..ncols {
            s.cost[j] = Rat::one();
        }
        s.price();
        match s.optimize() {
            Step::Unbounded => unreachable!("phase-1 objective is bounded below by zero"),
            _ => {}
        }
        let infeas_mass: Rat = (art0..ncols).map(|j| s.value_of(j)).sum();
        if infeas_mass.is_zero() {
            s.feasible = true;
            for j in art0..ncols {
                s.upper[j] = Some(Rat::zero());
            }
        }
        s
    }

    pub fn is_feasible(&self) -> bool {
        self.feasible
    }

    fn value_of(&self, j: usize) -> Rat {
        match self.basis_row[j] {
            Some(r) => self.beta[r].clone(),
            None => {
                if self.at_upper[j] {
                    self.upper[j].clone().expect("nonbasic at infinite upper")
                } else {
                    self.lower[j].clone()
                }
            }
        }
    }

    /// Current values of the model's own variables.
    pub fn structural_values(&self) -> Vec<Rat> {
        (0..self.nstruct).map(|j| self.value_of(j)).collect()
    }

    fn price(&mut self) {
        for j in 0..self.ncols {
            self.zrow[j] = self.cost[j].clone();
        }
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                if !self.tableau[r][j].is_zero() {
                    let delta = &cb * &self.tableau[r][j];
                    self.zrow[j] -= delta;
                }
            }
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!(&self.upper[j], Some(u) if *u == self.lower[j])
    }

    /// dir = +1 increases the entering variable from its lower bound,
    /// dir = -1 decreases it from its upper bound.
    fn choose_entering(&self, bland: bool) -> Option<(usize, i8)> {
        let mut best: Option<(usize, i8, Rat)> = None;
        for j in 0..self.ncols {
            if self.basis_row[j].is_some() || self.is_fixed(j) {
                continue;
            }
            let cand = if !self.at_upper[j] && self.zrow[j].is_negative() {
                Some((j, 1i8, -self.zrow[j].clone()))
            } else if self.at_upper[j] && self.zrow[j].is_positive() {
                Some((j, -1i8, self.zrow[j].clone()))
            } else {
                None
            };
            if let Some(c) = cand {
                if bland {
                    return Some((c.0, c.1));
                }
                if best.as_ref().map_or(true, |b| c.2 > b.2) {
                    best = Some(c);
                }
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn step(&mut self, bland: bool) -> Step {
        let (j, dir) = match self.choose_entering(bland) {
            Some(e) => e,
            None => return Step::Optimal,
        };
        let dir_rat = if dir > 0 { Rat::one() } else { -Rat::one() };

        // ratio test over the basics, plus the entering column's own span
        let mut t_best: Option<Rat> = self.upper[j]
            .as_ref()
            .map(|u| u - &self.lower[j]);
        let mut leave: Option<(usize, bool)> = None; // (row, leaves at upper)
        for r in 0..self.m {
            if self.tableau[r][j].is_zero() {
                continue;
            }
            let da = &dir_rat * &self.tableau[r][j];
            let b = self.basis[r];
            let (t, to_upper) = if da.is_positive() {
                ((&self.beta[r] - &self.lower[b]) / &da, false)
            } else {
                match &self.upper[b] {
                    Some(u) => ((u - &self.beta[r]) / -&da, true),
                    None => continue,
                }
            };
            let replace = match &t_best {
                None => true,
                Some(tb) => {
                    t < *tb
                        || (t == *tb
                            && leave
                                .as_ref()
                                .is_some_and(|(lr, _)| b < self.basis[*lr]))
                }
            };
            if replace {
                t_best = Some(t);
                leave = Some((r, to_upper));
            }
        }

        let t = match t_best {
            Some(t) => t,
            None => return Step::Unbounded,
        };
        debug_assert!(!t.is_negative());

        match leave {
            None => {
                // bound flip, basis unchanged
                for r in 0..self.m {
                    if !self.tableau[r][j].is_zero() {
                        let delta = &dir_rat * &t * &self.tableau[r][j];
                        self.beta[r] -= delta;
                    }
                }
                self.at_upper[j] = !self.at_upper[j];
                Step::Moved { degenerate: t.is_zero() }
            }
            Some((r, to_upper)) => {
                let entering_val = if dir > 0 {
                    &self.lower[j] + &t
                } else {
                    self.upper[j].as_ref().unwrap() - &t
                };
                for i in 0..self.m {
                    if i != r && !self.tableau[i][j].is_zero() {
                        let delta = &dir_rat * &t * &self.tableau[i][j];
                        self.beta[i] -= delta;
                    }
                }
                let leaving = self.basis[r];
                self.at_upper[leaving] = to_upper;
                self.basis_row[leaving] = None;

                let piv = self.tableau[r][j].clone();
                if !piv.is_one() {
                    for v in &mut self.tableau[r] {
                        if !v.is_zero() {
                            *v /= &piv;
                        }
                    }
                }
                for i in 0..self.m {
                    if i == r || self.tableau[i][j].is_zero() {
                        continue;
                    }
                    let factor = self.tableau[i][j].clone();
                    for c in 0..self.ncols {
                        if !self.tableau[r][c].is_zero() {
                            let delta = &factor * &self.tableau[r][c];
                            self.tableau[i][c] -= delta;
                        }
                    }
                }
                if !self.zrow[j].is_zero() {
                    let factor = self.zrow[j].clone();
                    for c in 0..self.ncols {
                        if !self.tableau[r][c].is_zero() {
                            let delta = &factor * &self.tableau[r][c];
                            self.zrow[c] -= delta;
                        }
                    }
                }
                self.basis[r] = j;
                self.basis_row[j] = Some(r);
                self.beta[r] = entering_val;
                self.at_upper[j] = false;
                Step::Moved { degenerate: t.is_zero() }
            }
        }
    }

    fn optimize(&mut self) -> Step {
        let mut stall = 0u32;
        let mut bland = false;
        loop {
            match self.step(bland) {
                Step::Optimal => return Step::Optimal,
                Step::Unbounded => return Step::Unbounded,
                Step::Moved { degenerate } => {
                    if degenerate {
                        stall += 1;
                        if stall > STALL_LIMIT {
                            bland = true;
                        }
                    } else {
                        stall = 0;
                        bland = false;
                    }
                }
            }
        }
    }

    /// Minimizes the given structural cost vector from the current basis.
    /// Returns `None` on an unbounded ray, the exact optimum otherwise.
    pub fn minimize(&mut self, costs: &BTreeMap<usize, Rat>) -> Option<Rat> {
        assert!(self.feasible, "minimize called on infeasible system");
        for c in &mut self.cost {
            *c = Rat::zero();
        }
        for (col, a) in costs {
            self.cost[*col] = a.clone();
        }
        self.price();
        match self.optimize() {
            Step::Unbounded => None,
            _ => {
                let mut obj = Rat::zero();
                for (col, a) in costs {
                    obj += a * &self.value_of(*col);
                }
                Some(obj)
            }
        }
    }

    /// Maximizes `expr` over the polytope. `None` on an unbounded ray.
    pub fn maximize_expr(&mut self, expr: &LinExpr) -> Option<Rat> {
        let negated: BTreeMap<usize, Rat> = expr.terms.iter().map(|(c, a)| (*c, -a.clone())).collect();
        self.minimize(&negated).map(|v| &expr.constant - v)
    }
}

/// Solves the continuous problem (integrality flags are ignored) with exact
/// arithmetic, and checks its own optimum by substitution before returning.
pub fn solve_lp(model: &LinModel) -> LpSolution {
    let mut s = Simplex::new(model);
    if !s.is_feasible() {
        return LpSolution { status: LpStatus::Infeasible, objective: Rat::zero(), values: Vec::new() };
    }
    match s.minimize(&model.objective) {
        None => LpSolution { status: LpStatus::Unbounded, objective: Rat::zero(), values: Vec::new() },
        Some(obj) => {
            let values = s.structural_values();
            assert!(model.point_feasible(&values), "simplex returned an infeasible point");
            assert_eq!(model.objective_value(&values), obj, "objective self-check failed");
            LpSolution { status: LpStatus::Optimal, objective: obj, values }
        }
    }
}

/// Maximum of a linear expression over the model's polytope; `None` marks an
/// infeasible polytope. The model must be a relaxation.
pub fn maximize_violation(model: &LinModel, expr: &LinExpr) -> Option<Rat> {
    debug_assert!(model.vars.iter().all(|v| !v.integral));
    let mut s = Simplex::new(model);
    if !s.is_feasible() {
        return None;
    }
    let v = s.maximize_expr(expr).expect("unbounded expression over a boxed polytope");
    Some(v)
}

struct Node {
    bound: Rat,
    values: Vec<Rat>,
    overrides: Vec<(usize, Rat, Rat)>,
}

/// Exact branch-and-bound with the default (env-overridable) node budget.
pub fn solve_milp(model: &LinModel) -> Result<MipSolution, SolveError> {
    solve_milp_with_budget(model, node_budget())
}

/// Best-first branch-and-bound: nodes ordered by LP bound, branching on the
/// lowest-index fractional integral column, 0-branch first on ties.
pub fn solve_milp_with_budget(model: &LinModel, budget: u64) -> Result<MipSolution, SolveError> {
    let mut node_count = 0u64;
    let mut heap: BinaryHeap<Reverse<(Rat, u64)>> = BinaryHeap::new();
    let mut nodes: Vec<Node> = Vec::new();

    let eval = |overrides: Vec<(usize, Rat, Rat)>, node_count: &mut u64| -> Result<Option<Node>, SolveError> {
        if *node_count >= budget {
            return Err(SolveError::NodeBudgetExceeded(budget));
        }
        *node_count += 1;
        let mut s = Simplex::with_bound_overrides(model, &overrides);
        if !s.is_feasible() {
            return Ok(None);
        }
        let bound = s
            .minimize(&model.objective)
            .expect("unbounded LP relaxation in branch-and-bound");
        Ok(Some(Node { bound, values: s.structural_values(), overrides }))
    };

    if let Some(root) = eval(Vec::new(), &mut node_count)? {
        heap.push(Reverse((root.bound.clone(), 0)));
        nodes.push(root);
    }

    let mut seq = 1u64;
    while let Some(Reverse((_, idx))) = heap.pop() {
        let node = std::mem::replace(
            &mut nodes[idx as usize],
            Node { bound: Rat::zero(), values: Vec::new(), overrides: Vec::new() },
        );
        let frac = model
            .vars
            .iter()
            .enumerate()
            .find(|(col, v)| v.integral && !node.values[*col].is_integer());
        match frac {
            None => {
                // best-first with exact bounds: first integral pop is optimal
                return Ok(MipSolution {
                    status: LpStatus::Optimal,
                    objective: node.bound,
                    values: node.values,
                    node_count,
                });
            }
            Some((col, _)) => {
                let val = &node.values[col];
                let down = val.floor();
                let up = val.ceil();
                let lo = model.vars[col].lower.clone();
                let hi = model.vars[col].upper.clone();
                for (l, u) in [(lo.clone(), down), (up, hi.clone())] {
                    let mut overrides = node.overrides.clone();
                    overrides.push((col, l, u));
                    if let Some(child) = eval(overrides, &mut node_count)? {
                        heap.push(Reverse((child.bound.clone(), seq)));
                        seq += 1;
                        nodes.push(child);
                    }
                }
            }
        }
    }

    Ok(MipSolution { status: LpStatus::Infeasible, objective: Rat::zero(), values: Vec::new(), node_count })
}
