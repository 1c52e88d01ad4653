//! Runs the three verification suites on representative instances:
//! integer-point consistency on the mixed-coefficient equation, fractional
//! dominance under assignment constraints (QAP), and under degree-two
//! constraints (QTSP).
//!
//!     cargo run --example verify_theorems

use compactlin::coverage::closure_disjoint;
use compactlin::model::DEFAULT_BRUTE_FORCE_CAP;
use compactlin::rat::format_rat;
use compactlin::verifier::{compare_bounds, verify_dominance, verify_theorem1, Regime};
use compactlin::zoo::{self, QapSpec, QtspSpec};

fn main() {
    // consistency: every feasible integer point forces y_ij = x_i x_j
    let inst = zoo::example_b();
    let plan = closure_disjoint(&inst).unwrap();
    let rep = verify_theorem1(&inst, &plan, DEFAULT_BRUTE_FORCE_CAP).unwrap();
    println!(
        "consistency on 2x1+x2+x3=2: {} integer points, pass = {}",
        rep.num_integer_points, rep.pass
    );

    // assignment regime: the relaxation already satisfies McCormick
    let qap = zoo::gen_qap(&QapSpec::new(3, 1)).unwrap();
    let plan = zoo::qap_canonical_plan(&qap, 3);
    let dom = verify_dominance(&qap, &plan, Regime::Assignment).unwrap();
    let cmp = compare_bounds(&qap, &plan).unwrap();
    println!(
        "assignment dominance on QAP n=3: pass = {}, bound delta = {}",
        dom.pass,
        format_rat(&cmp.delta)
    );

    // degree-two regime: same guarantee for B_k = A_k, b = 2
    let qtsp = zoo::gen_qtsp(&QtspSpec::new(5, 1)).unwrap();
    let plan = zoo::qtsp_plan(&qtsp);
    let dom = verify_dominance(&qtsp, &plan, Regime::DegreeTwo).unwrap();
    let cmp = compare_bounds(&qtsp, &plan).unwrap();
    println!(
        "degree-two dominance on QTSP |V|=5: pass = {}, bound delta = {}",
        dom.pass,
        format_rat(&cmp.delta)
    );

    // general coefficients carry no fractional guarantee; any violated
    // McCormick inequality is reported with an exactly checked witness
    let dom = verify_dominance(&inst, &plan_of(&inst), Regime::General).unwrap();
    println!(
        "general probe on 2x1+x2+x3=2: {} fractional witness(es)",
        dom.witnesses.len()
    );
    for w in &dom.witnesses {
        println!(
            "  {} {} violated by {}",
            w.pair,
            w.kind,
            format_rat(&w.violation)
        );
    }
}

fn plan_of(inst: &compactlin::Instance) -> compactlin::CoveragePlan {
    closure_disjoint(inst).unwrap()
}
