//! Seeded random corpus of polarized graphs and the identity suite run over
//! it.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build, BlockKind, PolarizedWeightedGraph};
use crate::invariants;
use crate::jump;
use crate::laplace;
use crate::linalg;
use crate::rational::{int, Rational};
use crate::tropical;

pub const MAX_VERTICES: usize = 8;
pub const MAX_EDGES: usize = 12;
pub const MAX_BETTI: usize = 5;
pub const MAX_GENUS: u32 = 6;

/// Random rational with numerator and denominator in `1..=12`.
pub fn random_length<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(1..=12)), BigInt::from(rng.gen_range(1..=12)))
}

/// Same graph, fresh random lengths.
pub fn relength<R: Rng>(g: &PolarizedWeightedGraph, rng: &mut R) -> PolarizedWeightedGraph {
    let lengths = g.edges().iter().map(|e| (e.id.clone(), random_length(rng))).collect();
    g.with_lengths(&lengths).expect("positive lengths keep the graph valid")
}

/// One random connected polarized graph with `2 ≤ ḡ ≤ 6`, `K ≥ 0`, at most
/// 8 vertices, 12 edges and first Betti number 5.
pub fn random_graph<R: Rng>(rng: &mut R) -> PolarizedWeightedGraph {
    loop {
        let nv = rng.gen_range(1..=MAX_VERTICES);
        let extra_max = MAX_BETTI.min(MAX_EDGES + 1 - nv);
        let extra = rng.gen_range(0..=extra_max);
        let mut ends = Vec::new();
        for i in 1..nv {
            ends.push((rng.gen_range(0..i), i));
        }
        for _ in 0..extra {
            ends.push((rng.gen_range(0..nv), rng.gen_range(0..nv)));
        }
        let genera: Vec<u32> = (0..nv).map(|_| if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 }).collect();
        let ids: Vec<String> = (0..nv).map(|i| format!("v{i}")).collect();
        let names: Vec<String> = (0..ends.len()).map(|i| format!("e{i:02}")).collect();
        let verts: Vec<(&str, u32)> = ids.iter().map(String::as_str).zip(genera.iter().copied()).collect();
        let edges: Vec<_> = ends
            .iter()
            .zip(&names)
            .map(|(&(u, v), n)| (n.as_str(), ids[u].as_str(), ids[v].as_str(), random_length(rng)))
            .collect();
        let g = build(&verts, &edges).expect("generated graph is valid");
        if (2..=MAX_GENUS).contains(&g.genus()) && g.check_polarized().is_ok() {
            return g;
        }
    }
}

pub fn generate(seed: u64, count: usize) -> Vec<PolarizedWeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_graph(&mut rng)).collect()
}

/// Random unimodular matrix: a product of elementary row operations.
pub fn random_unimodular<R: Rng>(b: usize, rng: &mut R) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..b).map(|i| (0..b).map(|j| (i == j) as i64).collect()).collect();
    if b < 2 {
        return u;
    }
    for _ in 0..2 * b {
        let i = rng.gen_range(0..b);
        let mut j = rng.gen_range(0..b - 1);
        if j >= i {
            j += 1;
        }
        let k = rng.gen_range(-1..=1i64);
        for row in u.iter_mut() {
            row[i] += k * row[j];
        }
    }
    if rng.gen_bool(0.5) {
        for row in u.iter_mut() {
            row[0] = -row[0];
        }
    }
    u
}

/// Results of the named checks on one graph.
pub type CheckResults = Vec<(&'static str, bool)>;

fn laplace_checks(g: &PolarizedWeightedGraph, out: &mut CheckResults) {
    let n = g.vertices().len();
    let r = laplace::resistance_matrix(g);
    let foster: Rational = laplace::foster_all(g).iter().sum();
    out.push(("foster_sum_is_betti", foster == int(g.first_betti() as i64)));
    let mut metric = true;
    for x in 0..n {
        for y in 0..n {
            metric &= r[x][y] == r[y][x] && (r[x][y].is_zero() == (x == y)) && !r[x][y].is_negative();
            for z in 0..n {
                metric &= r[x][z] <= &r[x][y] + &r[y][z];
            }
        }
    }
    out.push(("resistance_is_metric", metric));
    if g.is_two_connected() && n >= 3 {
        let mut positive = true;
        for z in 0..n {
            let m = laplace::grounded_inverse(g, z);
            for x in (0..n).filter(|&x| x != z) {
                for y in (0..n).filter(|&y| y != z) {
                    positive &= m[x][y].is_positive();
                }
            }
        }
        out.push(("j_positive_on_two_connected", positive));
    }
    let mut rayleigh = true;
    for e in 0..g.edges().len() {
        if let Some(minus) = g.delete_edge(e) {
            let rm = laplace::resistance_matrix(&minus);
            for x in 0..n {
                for y in 0..n {
                    rayleigh &= rm[x][y] >= r[x][y];
                }
            }
        }
    }
    out.push(("rayleigh_monotone", rayleigh));
    match laplace::admissible_green(g) {
        Ok(gf) => {
            out.push(("green_quarter_point", gf.verify_quarter_points(g)));
            out.push(("green_balance", gf.verify_balance(g)));
        }
        Err(_) => out.push(("admissible_measure", false)),
    }
}

fn structure_checks(g: &PolarizedWeightedGraph, out: &mut CheckResults) {
    out.push(("canonical_degree", g.canonical_divisor().degree() == 2 * g.genus() as i64 - 2));
    let bd = g.blocks();
    let betti: usize = bd.blocks.iter().map(|b| b.graph.first_betti()).sum();
    out.push((
        "blocks",
        bd.is_tree() && betti == g.first_betti() && bd.blocks.iter().all(|b| b.graph.genus() == g.genus()),
    ));
    if g.is_stable() {
        out.push(("stable_blocks_stable", bd.blocks.iter().all(|b| b.graph.is_stable())));
    }
    let p = g.edge_profile();
    let split: Rational = &p.delta0 + p.delta_h.values().sum::<Rational>();
    out.push(("profile_total", split == p.delta));
    match g.minimal_model() {
        Ok(mm) => {
            let again = mm.minimal_model().map(|m| m == mm).unwrap_or(false);
            out.push((
                "minimal_model",
                again && mm.genus() == g.genus() && mm.edge_profile() == p && mm.is_stable(),
            ));
        }
        Err(_) => out.push(("minimal_model", false)),
    }
    let bridges = g.bridges();
    let ok = (0..g.edges().len()).all(|e| match g.contract_all_but(e) {
        Ok(c) => c.graph.genus() == g.genus() && c.graph.edges()[0].is_loop() != bridges[e],
        Err(_) => false,
    });
    out.push(("contraction", ok));
    let kinds_ok = bd.blocks.iter().all(|b| (b.kind == BlockKind::Bridge) == (b.edges.len() == 1 && bridges[b.edges[0]]));
    out.push(("block_kinds", kinds_ok));
}

fn invariant_checks<R: Rng>(g: &PolarizedWeightedGraph, rng: &mut R, out: &mut CheckResults) {
    match invariants::report(g) {
        Ok(rep) => {
            out.push(("lambda_pipelines", rep.lambda_a == rep.lambda_b));
            out.push(("slope_nonnegative", !rep.slope.is_negative()));
            out.push(("moment_plus_half_tau", &rep.moment + &rep.tau / int(2) == &rep.delta / int(8)));
            out.push((
                "phi_epsilon_moment",
                int(2) * &rep.phi == &rep.delta + &rep.epsilon - int(12) * &rep.moment,
            ));
            out.push(("classifier", rep.class.vanishes() == rep.slope.is_zero()));
        }
        Err(_) => {
            out.push(("lambda_pipelines", false));
        }
    }
    let mut residual_ok = true;
    let mut classifier_ok = true;
    let mut nonneg = true;
    for _ in 0..5 {
        let h = relength(g, rng);
        match jump::contraction_identity(&h) {
            Ok(rep) => {
                residual_ok &= rep.residual.is_zero();
                classifier_ok &= rep.class.vanishes() == rep.jump.is_zero();
                nonneg &= !rep.jump.is_negative();
            }
            Err(_) => residual_ok = false,
        }
    }
    out.push(("jump_residual", residual_ok));
    out.push(("classifier_random_lengths", classifier_ok));
    out.push(("jump_nonnegative", nonneg));
}

fn lattice_checks<R: Rng>(g: &PolarizedWeightedGraph, rng: &mut R, out: &mut CheckResults) {
    let Ok(lat) = tropical::cycle_gram(g) else {
        return;
    };
    let tree_sum = spanning_tree_polynomial(g);
    out.push(("matrix_tree", linalg::det(lat.matrix()) == tree_sum));
    let Ok(cell) = tropical::voronoi_cell(&lat) else {
        out.push(("voronoi_volume", false));
        return;
    };
    out.push(("voronoi_volume", cell.polytope.volume() == int(1)));
    let i = cell.polytope.moments().quadratic(lat.matrix());
    let c = Rational::new(BigInt::from(rng.gen_range(1..=7)), BigInt::from(rng.gen_range(1..=7)));
    let scaled = lat.scaled(&c).and_then(|l| tropical::moment(&l));
    out.push(("moment_scaling", scaled.map(|s| s == &i * &c).unwrap_or(false)));
    let u = random_unimodular(lat.dim(), rng);
    let moved = lat.transformed(&u).and_then(|l| tropical::moment(&l));
    out.push(("moment_unimodular", moved.map(|m| m == i).unwrap_or(false)));
}

/// `Σ_T Π_{e ∉ T} ℓ(e)` over spanning trees, by brute force.
pub fn spanning_tree_polynomial(g: &PolarizedWeightedGraph) -> Rational {
    let n = g.vertices().len();
    let m = g.edges().len();
    let mut total = Rational::zero();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut uf = crate::graph::UnionFind::new(n);
        let acyclic = (0..m)
            .filter(|&e| mask >> e & 1 == 1)
            .all(|e| uf.union(g.edges()[e].u, g.edges()[e].v));
        if acyclic {
            let mut prod = int(1);
            for e in (0..m).filter(|&e| mask >> e & 1 == 0) {
                prod *= &g.edges()[e].length;
            }
            total += prod;
        }
    }
    total
}

/// Runs every identity on one graph. `salt` seeds the random length vectors
/// and unimodular matrices.
pub fn check_graph(g: &PolarizedWeightedGraph, salt: u64) -> CheckResults {
    let mut rng = ChaCha8Rng::seed_from_u64(salt);
    let mut out = Vec::new();
    structure_checks(g, &mut out);
    laplace_checks(g, &mut out);
    invariant_checks(g, &mut rng, &mut out);
    lattice_checks(g, &mut rng, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusSummary {
    pub seed: u64,
    pub count: usize,
    pub checks: BTreeMap<String, Tally>,
    pub all_passed: bool,
    /// Indices of graphs with at least one failing check.
    pub failures: Vec<usize>,
}

/// Generates `count` graphs from `seed` and runs [`check_graph`] on each in
/// parallel. The summary does not depend on thread scheduling.
pub fn run(seed: u64, count: usize) -> Result<CorpusSummary> {
    if count == 0 {
        return Err(Error::Input("corpus count must be at least 1".into()));
    }
    let graphs = generate(seed, count);
    let results: Vec<CheckResults> = graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| check_graph(g, seed.wrapping_mul(1_000_003).wrapping_add(i as u64)))
        .collect();
    let mut checks: BTreeMap<String, Tally> = BTreeMap::new();
    let mut failures = Vec::new();
    for (i, res) in results.iter().enumerate() {
        if res.iter().any(|(_, ok)| !ok) {
            failures.push(i);
        }
        for (name, ok) in res {
            let t = checks.entry(name.to_string()).or_insert(Tally { pass: 0, fail: 0 });
            if *ok {
                t.pass += 1;
            } else {
                t.fail += 1;
            }
        }
    }
    Ok(CorpusSummary { seed, count, checks, all_passed: failures.is_empty(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graphs_respect_bounds() {
        for g in generate(3, 60) {
            assert!(g.vertices().len() <= MAX_VERTICES);
            assert!(g.edges().len() <= MAX_EDGES);
            assert!(g.first_betti() <= MAX_BETTI);
            assert!((2..=MAX_GENUS).contains(&g.genus()));
            assert!(g.check_polarized().is_ok());
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(9, 10), generate(9, 10));
        assert_eq!(run(5, 4).unwrap(), run(5, 4).unwrap());
    }

    #[test]
    fn unimodular_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for b in 1..=5 {
            let u = random_unimodular(b, &mut rng);
            let q: linalg::QMatrix = u.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            assert_eq!(linalg::det(&q).abs(), int(1));
        }
    }

    #[test]
    fn small_run_passes() {
        let s = run(11, 12).unwrap();
        assert!(s.all_passed, "{:?}", s.checks);
        assert!(run(1, 0).is_err());
    }
}
