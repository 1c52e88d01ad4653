//! Shows that applying the compact construction with B_k = A_k to QTSP
//! degree equations reproduces the Fischer-Helmberg linearization row for
//! row, and that the QAP selection reproduces Frieze-Yadegar.
//!
//!     cargo run --example qtsp_reproduction

use compactlin::coverage::stats;
use compactlin::verifier::{structural_match, RefFamily};
use compactlin::zoo::{self, QtspSpec};

fn main() {
    for v in [4, 5] {
        let ok = structural_match(RefFamily::Qtsp, v).unwrap();
        let mut spec = QtspSpec::new(v, 0);
        spec.include_subtours = false;
        let inst = zoo::gen_qtsp(&spec).unwrap();
        let st = stats(&inst, &zoo::qtsp_plan(&inst));
        println!(
            "QTSP |V|={v}: rows match Fischer-Helmberg: {ok}; {} compact equations, \
             {} product variables, vs {} standard inequalities",
            st.num_equations, st.num_vars, st.standard_ineq_count
        );
    }
    for n in [2, 3] {
        let ok = structural_match(RefFamily::Qap, n).unwrap();
        println!("QAP n={n}: rows match Frieze-Yadegar: {ok}");
    }
}
