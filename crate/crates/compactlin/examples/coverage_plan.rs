//! Chooses multiplier sets for two small instances: the fixpoint closure on
//! disjoint supports, and the selection MILP when supports overlap.
//!
//!     cargo run --example coverage_plan

use compactlin::coverage::{closure_disjoint, default_weights, solve_selection, stats};
use compactlin::model::{instance, unit_equation, Instance};
use compactlin::rat::format_rat;

fn show(name: &str, inst: &Instance, plan: &compactlin::CoveragePlan) {
    println!("== {name}");
    for (k, bset) in &plan.b {
        let m: Vec<String> = bset.iter().map(|v| v.to_string()).collect();
        println!("  B_{} = {{{}}}", k.0, m.join(", "));
    }
    let q: Vec<String> = plan.q.iter().map(|p| p.to_string()).collect();
    println!("  Q = {{{}}}", q.join(", "));
    let st = stats(inst, plan);
    println!(
        "  {} compact equations, {} product variables (standard would need {} inequalities)",
        st.num_equations, st.num_vars, st.standard_ineq_count
    );
}

fn main() {
    // two disjoint assignment equations; one demanded product x1*x3
    let disjoint = compactlin::zoo::example_a();
    let plan = closure_disjoint(&disjoint).expect("supports are disjoint");
    show("disjoint supports, fixpoint closure", &disjoint, &plan);

    // overlapping supports: x2 sits in both equations, so the closure is not
    // applicable and set selection is solved as a small MILP
    let overlapping = instance(
        3,
        vec![unit_equation(1, &[1, 2], 1), unit_equation(2, &[2, 3], 1)],
        vec![(1, 3)],
        vec![],
        vec![],
    );
    let (we, wv) = default_weights(&overlapping);
    let sel = solve_selection(&overlapping, &we, &wv).unwrap();
    show("overlapping supports, selection MILP", &overlapping, &sel.plan);
    println!(
        "  selection objective {} (lp already integral: {})",
        format_rat(&sel.objective),
        sel.lp_was_integral
    );
}
