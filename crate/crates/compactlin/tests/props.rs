//! Property tests over randomly generated instances.

use compactlin::coverage::{check_conditions, closure_disjoint, default_weights, induced_q, solve_selection};
use compactlin::io::{parse_instance, serialize_instance};
use compactlin::linearizer::compact_linearize;
use compactlin::zoo::{gen_random, RandomSpec};
use proptest::prelude::*;

fn disjoint_spec() -> impl Strategy<Value = RandomSpec> {
    (2u32..=4, 0u64..5000, 1u32..=6).prop_map(|(eqs, seed, pairs)| {
        let n = 2 * eqs + (seed % 5) as u32;
        let mut spec = RandomSpec::new(n, eqs, pairs.min(n * (n - 1) / 2), seed);
        spec.num_pairs = spec.num_pairs.min(n * (n - 1) / 2);
        spec
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_file_round_trips(spec in disjoint_spec()) {
        let inst = gen_random(&spec).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(inst, back);
    }

    #[test]
    fn closure_plan_is_valid_and_matches_selection(spec in disjoint_spec()) {
        let inst = gen_random(&spec).unwrap();
        let plan = closure_disjoint(&inst).unwrap();
        let (ok, cert) = check_conditions(&inst, &plan);
        prop_assert!(ok, "{}", cert.describe_violations());

        let (we, wv) = default_weights(&inst);
        let sel = solve_selection(&inst, &we, &wv).unwrap();
        prop_assert_eq!(&plan.b, &sel.plan.b);
        prop_assert!(sel.lp_was_integral);
    }

    #[test]
    fn induced_q_is_monotone_in_b(spec in disjoint_spec()) {
        let inst = gen_random(&spec).unwrap();
        let plan = closure_disjoint(&inst).unwrap();
        let q_small = induced_q(&inst, &plan.b);

        // growing any B set can only grow Q
        let mut bigger = plan.b.clone();
        if let Some((_, set)) = bigger.iter_mut().next() {
            for v in 1..=inst.n {
                set.insert(compactlin::VarId(v));
            }
        }
        let q_big = induced_q(&inst, &bigger);
        prop_assert!(q_small.is_subset(&q_big));
    }

    #[test]
    fn relax_is_idempotent(spec in disjoint_spec()) {
        let inst = gen_random(&spec).unwrap();
        let plan = closure_disjoint(&inst).unwrap();
        let model = compact_linearize(&inst, &plan).unwrap();
        let once = model.relaxed();
        let twice = once.relaxed();
        prop_assert!(once.vars.iter().all(|v| !v.integral));
        prop_assert_eq!(once.vars.len(), twice.vars.len());
        prop_assert!(once.vars.iter().zip(&twice.vars).all(|(a, b)| a == b));
    }
}
