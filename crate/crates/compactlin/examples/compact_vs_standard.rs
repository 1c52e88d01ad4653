//! Builds both linearizations of the single-equation instance
//! 2x1 + x2 + x3 = 2 with demanded product x1*x2, prints the rows, and
//! compares LP relaxation bounds and MILP optima.
//!
//!     cargo run --example compact_vs_standard

use compactlin::coverage::closure_disjoint;
use compactlin::io::export_lp;
use compactlin::optcore::{solve_lp, solve_milp};
use compactlin::rat::format_rat;
use compactlin::verifier::compare_bounds;
use compactlin::{compact_linearize, standard_linearize, zoo};

fn main() {
    let mut inst = zoo::example_b();
    // minimize -x1*x2 so the product actually matters
    inst.quad_obj
        .insert(*inst.pairs.iter().next().unwrap(), compactlin::rat(-1));

    let plan = closure_disjoint(&inst).unwrap();
    let compact = compact_linearize(&inst, &plan).unwrap();
    let standard = standard_linearize(&inst, &inst.pairs).unwrap();

    println!("compact model:\n{}", export_lp(&compact));
    println!("standard model:\n{}", export_lp(&standard));

    let cmp = compare_bounds(&inst, &plan).unwrap();
    println!(
        "lp bounds: compact {}  standard {}  delta {}",
        format_rat(&cmp.lp_bound_compact),
        format_rat(&cmp.lp_bound_standard),
        format_rat(&cmp.delta)
    );
    println!(
        "lp optimum over the compact polytope: {}",
        format_rat(&solve_lp(&compact.relaxed()).objective)
    );

    let mc = solve_milp(&compact).unwrap();
    let ms = solve_milp(&standard).unwrap();
    println!(
        "milp optima agree: {} = {} ({} vs {} nodes)",
        format_rat(&mc.objective),
        format_rat(&ms.objective),
        mc.node_count,
        ms.node_count
    );
}
