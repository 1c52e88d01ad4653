//! Instance generators: symmetric quadratic TSP, Koopmans-Beckmann QAP,
//! seeded random instances, and the two small worked examples used across
//! the test suite.

use crate::coverage::CoveragePlan;
use crate::model::{
    instance, unit_equation, Instance, LinearEquation, Pair, SideConstraint, VarId,
};
use crate::rat::{rat, ratio, Rat};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("size {0} outside the supported range {1}..={2}")]
    SizeExceeded(u32, u32, u32),
    #[error("inconsistent generator parameters: {0}")]
    InconsistentSpec(String),
}

/// Two disjoint assignment equations x1+x2 = 1, x3+x4 = 1 with P = {(1,3)}.
pub fn example_a() -> Instance {
    instance(
        4,
        vec![unit_equation(1, &[1, 2], 1), unit_equation(2, &[3, 4], 1)],
        vec![(1, 3)],
        vec![],
        vec![],
    )
}

/// Single equation 2x1 + x2 + x3 = 2 with P = {(1,2)}.
pub fn example_b() -> Instance {
    instance(
        3,
        vec![LinearEquation::new(
            1,
            vec![(1, rat(2)), (2, rat(1)), (3, rat(1))],
            rat(2),
        )],
        vec![(1, 2)],
        vec![],
        vec![],
    )
}

// ---------------------------------------------------------------- QTSP ----

/// Symmetric quadratic TSP on the complete graph K_|V|.
#[derive(Debug, Clone)]
pub struct QtspSpec {
    pub vertices: u32,
    pub include_subtours: bool,
    pub cost_seed: u64,
    /// Inclusive integer range the edge-pair costs are drawn from.
    pub cost_range: (i64, i64),
}

impl QtspSpec {
    pub fn new(vertices: u32, cost_seed: u64) -> QtspSpec {
        QtspSpec { vertices, include_subtours: true, cost_seed, cost_range: (1, 10) }
    }
}

/// Column of the edge {i, j} of K_nv under lexicographic edge ordering,
/// 1-based vertices.
pub fn qtsp_edge_var(nv: u32, i: u32, j: u32) -> VarId {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i >= 1 && j <= nv && i < j);
    VarId((i - 1) * nv - i * (i - 1) / 2 + (j - i))
}

/// Degree-two equations per vertex, subtour constraints as side rows,
/// demanded products = pairs of edges meeting at a vertex.
pub fn gen_qtsp(spec: &QtspSpec) -> Result<Instance, ZooError> {
    let v = spec.vertices;
    if !(4..=8).contains(&v) {
        return Err(ZooError::SizeExceeded(v, 4, 8));
    }
    let n = v * (v - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.cost_seed);

    let mut equations = Vec::new();
    for k in 1..=v {
        let support: Vec<u32> = (1..=v)
            .filter(|&j| j != k)
            .map(|j| qtsp_edge_var(v, k, j).0)
            .collect();
        equations.push(unit_equation(k, &support, 2));
    }

    let mut pairs = BTreeSet::new();
    let mut quad_obj = BTreeMap::new();
    for j in 1..=v {
        let neighbors: Vec<u32> = (1..=v).filter(|&x| x != j).collect();
        for a in 0..neighbors.len() {
            for b in (a + 1)..neighbors.len() {
                let p = Pair::new(
                    qtsp_edge_var(v, neighbors[a], j),
                    qtsp_edge_var(v, j, neighbors[b]),
                );
                pairs.insert(p);
                let cost = rng.gen_range(spec.cost_range.0..=spec.cost_range.1);
                quad_obj.insert(p, rat(cost));
            }
        }
    }

    let mut sides = Vec::new();
    if spec.include_subtours {
        // x(E(W)) <= |W|-1 in >= form for every 2 <= |W| <= |V|-2
        for mask in 1u32..(1 << v) {
            let w: Vec<u32> = (1..=v).filter(|&i| mask >> (i - 1) & 1 == 1).collect();
            if w.len() < 2 || w.len() > (v - 2) as usize {
                continue;
            }
            let mut x_coeffs = BTreeMap::new();
            for a in 0..w.len() {
                for b in (a + 1)..w.len() {
                    x_coeffs.insert(qtsp_edge_var(v, w[a], w[b]), rat(-1));
                }
            }
            sides.push(SideConstraint {
                x_coeffs,
                y_coeffs: BTreeMap::new(),
                rhs: rat(1 - w.len() as i64),
            });
        }
    }

    Ok(Instance {
        n,
        lin_obj: BTreeMap::new(),
        quad_obj,
        equations,
        pairs,
        sides,
    })
}

/// The coverage plan of the degree-two regime: B_k = A_k for every vertex
/// equation.
pub fn qtsp_plan(inst: &Instance) -> CoveragePlan {
    let b = inst
        .equations
        .iter()
        .map(|eq| (eq.id, eq.support().collect()))
        .collect();
    CoveragePlan::from_multipliers(inst, b)
}

// ----------------------------------------------------------------- QAP ----

/// Koopmans-Beckmann quadratic assignment of n facilities to n locations.
#[derive(Debug, Clone)]
pub struct QapSpec {
    pub n: u32,
    pub seed: u64,
    /// Inclusive range for flow and distance weights.
    pub weight_range: (i64, i64),
}

impl QapSpec {
    pub fn new(n: u32, seed: u64) -> QapSpec {
        QapSpec { n, seed, weight_range: (1, 9) }
    }
}

/// Column of x_ip (facility i at location p), 1-based.
pub fn qap_var(n: u32, i: u32, p: u32) -> VarId {
    debug_assert!(i >= 1 && i <= n && p >= 1 && p <= n);
    VarId((i - 1) * n + p)
}

/// n^2 binaries, one assignment equation per facility row and per location
/// column, P = all cross products (ip, jq) with i < j, p != q.
pub fn gen_qap(spec: &QapSpec) -> Result<Instance, ZooError> {
    let n = spec.n;
    if !(2..=4).contains(&n) {
        return Err(ZooError::SizeExceeded(n, 2, 4));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let range = spec.weight_range.0..=spec.weight_range.1;

    let mut flow = vec![vec![0i64; (n + 1) as usize]; (n + 1) as usize];
    let mut dist = vec![vec![0i64; (n + 1) as usize]; (n + 1) as usize];
    for i in 1..=n as usize {
        for j in (i + 1)..=n as usize {
            let f = rng.gen_range(range.clone());
            flow[i][j] = f;
            flow[j][i] = f;
            let d = rng.gen_range(range.clone());
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    let mut equations = Vec::new();
    for i in 1..=n {
        let support: Vec<u32> = (1..=n).map(|p| qap_var(n, i, p).0).collect();
        equations.push(unit_equation(i, &support, 1));
    }
    for p in 1..=n {
        let support: Vec<u32> = (1..=n).map(|i| qap_var(n, i, p).0).collect();
        equations.push(unit_equation(n + p, &support, 1));
    }

    let mut pairs = BTreeSet::new();
    let mut quad_obj = BTreeMap::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            for p in 1..=n {
                for q in 1..=n {
                    if p == q {
                        continue;
                    }
                    let pair = Pair::new(qap_var(n, i, p), qap_var(n, j, q));
                    pairs.insert(pair);
                    let c = flow[i as usize][j as usize] * dist[p as usize][q as usize];
                    quad_obj.insert(pair, rat(c));
                }
            }
        }
    }

    Ok(Instance {
        n: n * n,
        lin_obj: BTreeMap::new(),
        quad_obj,
        equations,
        pairs,
        sides: Vec::new(),
    })
}

/// The Frieze-Yadegar coverage: each row equation i is multiplied by every
/// variable of a different facility, each column equation p by every
/// variable of a different location.
pub fn qap_canonical_plan(inst: &Instance, n: u32) -> CoveragePlan {
    let mut b: BTreeMap<_, BTreeSet<VarId>> = BTreeMap::new();
    for i in 1..=n {
        let set = (1..=n)
            .filter(|&j| j != i)
            .flat_map(|j| (1..=n).map(move |q| qap_var(n, j, q)))
            .collect();
        b.insert(crate::model::EqId(i), set);
    }
    for p in 1..=n {
        let set = (1..=n)
            .filter(|&q| q != p)
            .flat_map(|q| (1..=n).map(move |j| qap_var(n, j, q)))
            .collect();
        b.insert(crate::model::EqId(n + p), set);
    }
    CoveragePlan::from_multipliers(inst, b)
}

// -------------------------------------------------------------- random ----

/// Coefficient style of a random instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffStyle {
    /// a_i^k = 1, b^k = 1 for every equation.
    Assignment,
    /// Random positive integer and half-integer coefficients; b^k taken from
    /// a randomly chosen feasible point so the instance is never empty.
    General,
}

#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub n: u32,
    pub num_eqs: u32,
    /// Inclusive support-size range per equation.
    pub support_range: (u32, u32),
    /// Largest integer coefficient (General style only).
    pub coeff_max: i64,
    pub num_pairs: u32,
    pub disjoint: bool,
    pub style: CoeffStyle,
    pub seed: u64,
}

impl RandomSpec {
    pub fn new(n: u32, num_eqs: u32, num_pairs: u32, seed: u64) -> RandomSpec {
        RandomSpec {
            n,
            num_eqs,
            support_range: (2, 4),
            coeff_max: 5,
            num_pairs,
            disjoint: true,
            style: CoeffStyle::General,
            seed,
        }
    }
}

/// Seeded, reproducible random instance. Every variable in 1..n appears in
/// some equation, and b^k values are derived from a feasible point picked in
/// advance, so at least one feasible binary point always exists.
pub fn gen_random(spec: &RandomSpec) -> Result<Instance, ZooError> {
    if spec.n == 0 || spec.num_eqs == 0 {
        return Err(ZooError::InconsistentSpec("need n >= 1 and at least one equation".into()));
    }
    if spec.support_range.0 < 1 || spec.support_range.0 > spec.support_range.1 {
        return Err(ZooError::InconsistentSpec("bad support range".into()));
    }
    if spec.disjoint && spec.n < spec.num_eqs * spec.support_range.0 {
        return Err(ZooError::InconsistentSpec(
            "too few variables for disjoint supports of the requested size".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n as usize;

    // supports: a partition of 1..n when disjoint, otherwise random sets
    // with every variable assigned somewhere
    let mut supports: Vec<Vec<u32>> = vec![Vec::new(); spec.num_eqs as usize];
    let mut vars: Vec<u32> = (1..=spec.n).collect();
    vars.shuffle(&mut rng);
    if spec.disjoint {
        for (pos, v) in vars.iter().enumerate() {
            supports[pos % spec.num_eqs as usize].push(*v);
        }
    } else {
        for v in &vars {
            let home = rng.gen_range(0..spec.num_eqs as usize);
            supports[home].push(*v);
            // occasional second membership creates overlap
            if rng.gen_bool(0.4) {
                let extra = rng.gen_range(0..spec.num_eqs as usize);
                if extra != home && !supports[extra].contains(v) {
                    supports[extra].push(*v);
                }
            }
        }
        // overlap is allowed, so an equation that came up empty can simply
        // borrow a variable
        for k in 0..supports.len() {
            if supports[k].is_empty() {
                let v = vars[rng.gen_range(0..vars.len())];
                supports[k].push(v);
            }
        }
    }
    for s in &mut supports {
        if s.is_empty() {
            return Err(ZooError::InconsistentSpec(
                "an equation received an empty support; use fewer equations".into(),
            ));
        }
        s.sort_unstable();
    }

    // a feasible point: in assignment style exactly one support member per
    // equation is on; in general style at least one, the rest random
    let mut point = vec![false; n];
    match spec.style {
        CoeffStyle::Assignment => {
            if !spec.disjoint {
                return Err(ZooError::InconsistentSpec(
                    "assignment style requires disjoint supports".into(),
                ));
            }
            for s in &supports {
                let pick = s[rng.gen_range(0..s.len())];
                point[(pick - 1) as usize] = true;
            }
        }
        CoeffStyle::General => {
            for v in 1..=spec.n {
                point[(v - 1) as usize] = rng.gen_bool(0.5);
            }
            for s in &supports {
                if !s.iter().any(|&v| point[(v - 1) as usize]) {
                    let pick = s[rng.gen_range(0..s.len())];
                    point[(pick - 1) as usize] = true;
                }
            }
        }
    }

    let mut equations = Vec::new();
    for (idx, s) in supports.iter().enumerate() {
        let coeffs: Vec<(u32, Rat)> = s
            .iter()
            .map(|&v| {
                let a = match spec.style {
                    CoeffStyle::Assignment => rat(1),
                    CoeffStyle::General => {
                        let num = rng.gen_range(1..=spec.coeff_max);
                        if rng.gen_bool(0.25) {
                            ratio(2 * num - 1, 2) // occasional half-integer
                        } else {
                            rat(num)
                        }
                    }
                };
                (v, a)
            })
            .collect();
        let rhs: Rat = match spec.style {
            CoeffStyle::Assignment => rat(1),
            CoeffStyle::General => coeffs
                .iter()
                .filter(|(v, _)| point[(*v - 1) as usize])
                .map(|(_, a)| a.clone())
                .sum(),
        };
        equations.push(LinearEquation::new(idx as u32 + 1, coeffs, rhs));
    }

    // demanded products: distinct non-square pairs over 1..n
    let max_pairs = (n * (n - 1) / 2) as u32;
    if spec.num_pairs > max_pairs {
        return Err(ZooError::InconsistentSpec(format!(
            "requested {} pairs but only {} exist",
            spec.num_pairs, max_pairs
        )));
    }
    let mut pairs = BTreeSet::new();
    while (pairs.len() as u32) < spec.num_pairs {
        let i = rng.gen_range(1..=spec.n);
        let j = rng.gen_range(1..=spec.n);
        if i != j {
            pairs.insert(Pair::new(VarId(i), VarId(j)));
        }
    }

    let mut lin_obj = BTreeMap::new();
    for v in 1..=spec.n {
        let c = rng.gen_range(-5i64..=5);
        if c != 0 {
            lin_obj.insert(VarId(v), rat(c));
        }
    }
    let mut quad_obj = BTreeMap::new();
    for p in &pairs {
        let mut d = 0;
        while d == 0 {
            d = rng.gen_range(-5i64..=5);
        }
        quad_obj.insert(*p, rat(d));
    }

    Ok(Instance {
        n: spec.n,
        lin_obj,
        quad_obj,
        equations,
        pairs,
        sides: Vec::new(),
    })
}
