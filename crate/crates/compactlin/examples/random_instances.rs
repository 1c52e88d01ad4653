//! Generates seeded random instances, writes one to the instance format,
//! and cross-checks the compact MILP optimum against brute-force
//! enumeration of the quadratic objective.
//!
//!     cargo run --example random_instances

use compactlin::coverage::closure_disjoint;
use compactlin::io::serialize_instance;
use compactlin::model::brute_force_feasible;
use compactlin::optcore::solve_milp;
use compactlin::rat::{format_rat, Rat};
use compactlin::zoo::{gen_random, RandomSpec};
use compactlin::compact_linearize;

fn main() {
    let spec = RandomSpec::new(8, 3, 4, 42);
    let inst = gen_random(&spec).unwrap();
    println!("--- instance (seed 42) ---\n{}", serialize_instance(&inst));

    for seed in 0..5 {
        let inst = gen_random(&RandomSpec::new(8, 3, 4, seed)).unwrap();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let milp = solve_milp(&model).unwrap();

        let brute: Rat = brute_force_feasible(&inst, 12)
            .unwrap()
            .iter()
            .map(|x| inst.objective_at(x))
            .min()
            .expect("generator guarantees a feasible point");

        println!(
            "seed {seed}: milp optimum {} (nodes {}), brute force {}, agree: {}",
            format_rat(&milp.objective),
            milp.node_count,
            format_rat(&brute),
            milp.objective == brute
        );
    }
}
