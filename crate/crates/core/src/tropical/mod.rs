//! Tropical moments of lattices: Gram matrices of graph Jacobians, relevant
//! vectors, exact Voronoi cells and their second moments.

pub mod polytope;

use std::collections::{BTreeMap, VecDeque};

use num_traits::{One, ToPrimitive, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::PolarizedWeightedGraph;
use crate::linalg::{self, QMatrix};
use crate::rational::{self, int, Rational};

pub use polytope::{Moments, Polytope};

pub const MAX_DIM: usize = 6;

/// Positive definite rational Gram matrix of `Z^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramLattice {
    z: QMatrix,
}

impl GramLattice {
    pub fn new(z: QMatrix) -> Result<Self> {
        let n = z.len();
        if n == 0 || z.iter().any(|r| r.len() != n) {
            return Err(Error::Input("gram matrix must be square and non-empty".into()));
        }
        if !linalg::is_symmetric(&z) || !linalg::is_positive_definite(&z) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(GramLattice { z })
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.z
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.z.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect()
    }

    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Self::new(self.z.iter().map(|r| r.iter().map(|x| x * c).collect()).collect())
    }

    /// `UᵀZU`.
    pub fn transformed(&self, u: &[Vec<i64>]) -> Result<Self> {
        let uq: QMatrix = u.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::new(linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&uq), &self.z), &uq))
    }

    pub fn norm(&self, n: &[i64]) -> Rational {
        let v: Vec<Rational> = n.iter().map(|&x| int(x)).collect();
        linalg::bilinear(&self.z, &v, &v)
    }

    /// `{"dim": b, "entries": [["p/q", ...], ...]}` or a bare array of rows.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let rows = match v {
            serde_json::Value::Object(o) => o
                .get("entries")
                .ok_or_else(|| Error::Input("matrix json needs `entries`".into()))?,
            other => other,
        };
        let rows = rows
            .as_array()
            .ok_or_else(|| Error::Input("matrix entries must be an array".into()))?;
        let z = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Input("matrix rows must be arrays".into()))?
                    .iter()
                    .map(rational::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<QMatrix>>()?;
        if let Some(d) = v.get("dim").and_then(|d| d.as_u64()) {
            if d as usize != z.len() {
                return Err(Error::Input("`dim` does not match the entries".into()));
            }
        }
        Self::new(z)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<Vec<String>> = self.z.iter().map(|r| r.iter().map(rational::format).collect()).collect();
        json!({ "dim": self.dim(), "entries": entries })
    }
}

/// Cycle-pairing Gram matrix of `H_1(G)`, in the basis of fundamental cycles
/// of a breadth-first spanning tree. The search starts at the smallest vertex
/// id and scans half-edges in order of edge id; the non-tree edges, sorted by
/// id, index the basis.
pub fn cycle_gram(g: &PolarizedWeightedGraph) -> Result<GramLattice> {
    let cycles = fundamental_cycles(g);
    if cycles.is_empty() {
        return Err(Error::TreeGraph);
    }
    let b = cycles.len();
    let mut z = linalg::zeros(b, b);
    for i in 0..b {
        for j in i..b {
            let v: Rational = g
                .edges()
                .iter()
                .enumerate()
                .map(|(e, ed)| &ed.length * int(cycles[i][e] * cycles[j][e]))
                .sum();
            z[j][i] = v.clone();
            z[i][j] = v;
        }
    }
    GramLattice::new(z)
}

/// Signed edge-incidence vectors of the fundamental cycles.
pub fn fundamental_cycles(g: &PolarizedWeightedGraph) -> Vec<Vec<i64>> {
    let n = g.vertices().len();
    let root = (0..n).min_by(|&a, &b| g.vertices()[a].id.cmp(&g.vertices()[b].id)).unwrap_or(0);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut in_tree = vec![false; g.edges().len()];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let mut hs: Vec<_> = g.half_edges(u).to_vec();
        hs.sort_by(|a, b| g.edges()[a.edge].id.cmp(&g.edges()[b.edge].id));
        for h in hs {
            if depth[h.other] == usize::MAX {
                depth[h.other] = depth[u] + 1;
                parent[h.other] = Some((u, h.edge));
                in_tree[h.edge] = true;
                queue.push_back(h.other);
            }
        }
    }
    let mut chords: Vec<usize> = (0..g.edges().len()).filter(|&e| !in_tree[e]).collect();
    chords.sort_by(|&a, &b| g.edges()[a].id.cmp(&g.edges()[b].id));
    chords
        .into_iter()
        .map(|e| {
            let ed = &g.edges()[e];
            let mut c = vec![0i64; g.edges().len()];
            c[e] = 1;
            // Close the cycle by walking the tree from e.v back to e.u.
            let (mut x, mut y) = (ed.v, ed.u);
            let step = |c: &mut Vec<i64>, from: usize, sign: i64| {
                let (p, te) = parent[from].expect("non-root vertex has a parent");
                let t = &g.edges()[te];
                let forward = t.u == from && t.v == p;
                c[te] += if forward { sign } else { -sign };
                p
            };
            while x != y {
                if depth[x] >= depth[y] {
                    x = step(&mut c, x, 1);
                } else {
                    // Walking up from y reverses direction: y is the end of the path.
                    y = step(&mut c, y, -1);
                }
            }
            c
        })
        .collect()
}

/// Cholesky-style decomposition `nᵀZn = Σ_i q_ii (n_i + Σ_{j>i} q_ij n_j)²`.
pub(crate) fn quadratic_form(z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut q = z.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    q
}

/// Every integer vector with `nᵀZn ≤ bound` (a superset, with slack).
fn short_vectors(z: &[Vec<f64>], bound: f64) -> Vec<Vec<i64>> {
    let n = z.len();
    let q = quadratic_form(z);
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(i: usize, rest: f64, q: &[Vec<f64>], x: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let n = q.len();
        let centre: f64 = -(i + 1..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
        let radius = (rest.max(0.0) / q[i][i]).sqrt();
        let lo = (centre - radius - 1e-9).ceil() as i64;
        let hi = (centre + radius + 1e-9).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            let t = q[i][i] * (xi as f64 - centre).powi(2);
            if i == 0 {
                out.push(x.clone());
            } else {
                rec(i - 1, rest - t, q, x, out);
            }
        }
        x[i] = 0;
    }
    rec(n - 1, bound * (1.0 + 1e-9) + 1e-9, &q, &mut x, &mut out);
    out
}

fn parity(n: &[i64]) -> usize {
    n.iter().enumerate().fold(0, |acc, (i, &x)| acc | ((x.rem_euclid(2) as usize) << i))
}

/// Facet normals of the Voronoi cell: for each nonzero class of
/// `Z^b / 2Z^b`, the vector `n` is relevant exactly when `±n` are the only
/// shortest vectors of its class. All vectors up to the largest class bound
/// are found by a Fincke–Pohst search and then compared exactly.
pub fn relevant_vectors(lat: &GramLattice) -> Result<Vec<Vec<i64>>> {
    let b = lat.dim();
    if b > MAX_DIM {
        return Err(Error::DimensionTooLarge(b, MAX_DIM));
    }
    let mut bound = Rational::zero();
    for class in 1..(1usize << b) {
        let ones: Vec<usize> = (0..b).filter(|&i| class >> i & 1 == 1).collect();
        let best = (0..1usize << (ones.len() - 1))
            .map(|signs| {
                let mut n = vec![0i64; b];
                for (k, &i) in ones.iter().enumerate() {
                    n[i] = if k > 0 && signs >> (k - 1) & 1 == 1 { -1 } else { 1 };
                }
                lat.norm(&n)
            })
            .min()
            .expect("class is nonempty");
        if best > bound {
            bound = best;
        }
    }
    let zf = lat.to_f64();
    let mut classes: BTreeMap<usize, (Rational, Vec<Vec<i64>>)> = BTreeMap::new();
    for n in short_vectors(&zf, rational::to_f64(&bound)) {
        if parity(&n) == 0 {
            continue;
        }
        let norm = lat.norm(&n);
        if norm > bound {
            continue;
        }
        let entry = classes.entry(parity(&n)).or_insert_with(|| (norm.clone(), Vec::new()));
        if norm < entry.0 {
            *entry = (norm, vec![n]);
        } else if norm == entry.0 {
            entry.1.push(n);
        }
    }
    if classes.len() != (1 << b) - 1 {
        return Err(Error::NonConvergent("short vector search missed a class".into()));
    }
    let mut out: Vec<Vec<i64>> = classes
        .into_values()
        .filter(|(_, mins)| mins.len() == 2)
        .flat_map(|(_, mins)| mins)
        .collect();
    out.sort_by_key(|n| (lat.norm(n), n.clone()));
    Ok(out)
}

/// Exact Voronoi cell `{β : nᵀZβ ≤ ½ nᵀZn for every relevant n}`.
#[derive(Debug, Clone)]
pub struct VoronoiPolytope {
    pub relevant: Vec<Vec<i64>>,
    pub polytope: Polytope,
}

impl VoronoiPolytope {
    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.polytope.vertices
    }

    pub fn contains(&self, beta: &[Rational]) -> bool {
        self.polytope.contains(beta)
    }
}

/// A box `[-B, B]^b` that contains the cell, from the covering radius bound
/// `R ≤ ½ Σ √Z_ii` and `|β_i| ≤ R √(Z⁻¹)_ii`.
fn bounding_box(lat: &GramLattice) -> Rational {
    let zf = lat.to_f64();
    let radius: f64 = 0.5 * zf.iter().enumerate().map(|(i, r)| r[i].sqrt()).sum::<f64>();
    let inv = linalg::inverse(lat.matrix()).expect("positive definite");
    let widest = (0..lat.dim())
        .map(|i| rational::to_f64(&inv[i][i]).sqrt())
        .fold(0.0, f64::max);
    let b = (radius * widest * 1.01).ceil() + 1.0;
    int(b.to_i64().unwrap_or(i64::MAX / 4))
}

pub fn voronoi_cell(lat: &GramLattice) -> Result<VoronoiPolytope> {
    let relevant = relevant_vectors(lat)?;
    let z = lat.matrix();
    let mut normals = Vec::with_capacity(relevant.len());
    let mut rhs = Vec::with_capacity(relevant.len());
    for n in &relevant {
        let nq: Vec<Rational> = n.iter().map(|&x| int(x)).collect();
        normals.push(linalg::mat_vec(z, &nq));
        rhs.push(linalg::bilinear(z, &nq, &nq) / int(2));
    }
    let polytope = Polytope::from_halfspaces(normals, rhs, &bounding_box(lat))?;
    let vol = polytope.volume();
    if !vol.is_one() {
        return Err(Error::VolumeMismatch(rational::format(&vol)));
    }
    Ok(VoronoiPolytope { relevant, polytope })
}

/// `I(Z) = ∫_{Vor(Z)} βᵀZβ dβ`.
pub fn moment(lat: &GramLattice) -> Result<Rational> {
    let cell = voronoi_cell(lat)?;
    Ok(cell.polytope.moments().quadratic(lat.matrix()))
}

/// Integration domains for [`moment_over`].
#[derive(Debug, Clone)]
pub enum Domain<'a> {
    Polytope(&'a Polytope),
    /// `[-½, ½]^d`.
    CenteredBox(usize),
    /// `[0, 1]^d`.
    UnitBox(usize),
    Product(Vec<Domain<'a>>),
}

impl Domain<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Polytope(p) => p.dim,
            Domain::CenteredBox(d) | Domain::UnitBox(d) => *d,
            Domain::Product(parts) => parts.iter().map(Domain::dim).sum(),
        }
    }

    pub fn moments(&self) -> Moments {
        match self {
            Domain::Polytope(p) => p.moments(),
            Domain::CenteredBox(d) => {
                let mut second = linalg::zeros(*d, *d);
                for (i, row) in second.iter_mut().enumerate() {
                    row[i] = rational::ratio(1, 12);
                }
                Moments { volume: Rational::one(), first: vec![Rational::zero(); *d], second }
            }
            Domain::UnitBox(d) => {
                let second = (0..*d)
                    .map(|i| (0..*d).map(|j| rational::ratio(1, if i == j { 3 } else { 4 })).collect())
                    .collect();
                Moments { volume: Rational::one(), first: vec![rational::ratio(1, 2); *d], second }
            }
            Domain::Product(parts) => {
                let mut acc = Moments { volume: Rational::one(), first: Vec::new(), second: Vec::new() };
                for part in parts {
                    acc = product_moments(&acc, &part.moments());
                }
                acc
            }
        }
    }
}

fn product_moments(a: &Moments, b: &Moments) -> Moments {
    let (da, db) = (a.first.len(), b.first.len());
    let volume = &a.volume * &b.volume;
    let mut first: Vec<Rational> = a.first.iter().map(|x| x * &b.volume).collect();
    first.extend(b.first.iter().map(|x| x * &a.volume));
    let mut second = linalg::zeros(da + db, da + db);
    for i in 0..da {
        for j in 0..da {
            second[i][j] = &a.second[i][j] * &b.volume;
        }
        for j in 0..db {
            let v = &a.first[i] * &b.first[j];
            second[i][da + j] = v.clone();
            second[da + j][i] = v;
        }
    }
    for i in 0..db {
        for j in 0..db {
            second[da + i][da + j] = &b.second[i][j] * &a.volume;
        }
    }
    Moments { volume, first, second }
}

/// `I_V(Z) = ∫_V βᵀZβ dβ`, exact.
pub fn moment_over(domain: &Domain, z: &QMatrix) -> Rational {
    domain.moments().quadratic(z)
}

/// `I_V(Z)` for a floating-point matrix.
pub fn moment_over_f64(domain: &Domain, z: &[Vec<f64>]) -> f64 {
    domain.moments().quadratic_f64(z)
}

/// Tropical moment of the Jacobian of `G`; zero for trees.
pub fn jac_moment(g: &PolarizedWeightedGraph) -> Result<Rational> {
    match cycle_gram(g) {
        Ok(lat) => moment(&lat),
        Err(Error::TreeGraph) => Ok(Rational::zero()),
        Err(e) => Err(e),
    }
}

/// Moves `beta` into the Voronoi cell of `y` by subtracting lattice vectors.
pub fn reduce_to_cell(beta: &mut [f64], relevant: &[Vec<i64>], y: &[Vec<f64>]) {
    let b = beta.len();
    let yn: Vec<(Vec<f64>, f64)> = relevant
        .iter()
        .map(|n| {
            let v: Vec<f64> = (0..b).map(|i| (0..b).map(|j| y[i][j] * n[j] as f64).sum()).collect();
            let half = 0.5 * v.iter().zip(n).map(|(a, &x)| a * x as f64).sum::<f64>();
            (v, half)
        })
        .collect();
    for _ in 0..1000 {
        let mut moved = false;
        for (n, (v, half)) in relevant.iter().zip(&yn) {
            let s: f64 = v.iter().zip(beta.iter()).map(|(a, x)| a * x).sum();
            if s > *half + 1e-12 {
                for (x, &k) in beta.iter_mut().zip(n) {
                    *x -= k as f64;
                }
                moved = true;
            }
        }
        if !moved {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::rational::ratio;

    fn lat(rows: &[&[i64]]) -> GramLattice {
        GramLattice::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn one_dimensional() {
        let l = GramLattice::new(vec![vec![int(5)]]).unwrap();
        assert_eq!(relevant_vectors(&l).unwrap(), vec![vec![-1], vec![1]]);
        let cell = voronoi_cell(&l).unwrap();
        let mut v: Vec<_> = cell.vertices().to_vec();
        v.sort();
        assert_eq!(v, vec![vec![ratio(-1, 2)], vec![ratio(1, 2)]]);
        assert_eq!(moment(&l).unwrap(), ratio(5, 12));
    }

    #[test]
    fn diagonal_is_a_square() {
        let l = lat(&[&[2, 0], &[0, 3]]);
        let mut r = relevant_vectors(&l).unwrap();
        r.sort();
        assert_eq!(r, vec![vec![-1, 0], vec![0, -1], vec![0, 1], vec![1, 0]]);
        assert_eq!(voronoi_cell(&l).unwrap().vertices().len(), 4);
        assert_eq!(moment(&l).unwrap(), ratio(5, 12));
    }

    #[test]
    fn hexagon() {
        let l = lat(&[&[2, 1], &[1, 2]]);
        let mut r = relevant_vectors(&l).unwrap();
        r.sort();
        assert_eq!(r, vec![vec![-1, 0], vec![-1, 1], vec![0, -1], vec![0, 1], vec![1, -1], vec![1, 0]]);
        assert_eq!(voronoi_cell(&l).unwrap().vertices().len(), 6);
        assert_eq!(moment(&l).unwrap(), ratio(5, 18));
    }

    #[test]
    fn hexagon_grid_oracle() {
        let l = lat(&[&[2, 1], &[1, 2]]);
        let cell = voronoi_cell(&l).unwrap();
        let exact = rational::to_f64(&moment(&l).unwrap());
        // Membership against all lattice vectors in a box, on a 10⁻³ grid.
        let h = 1e-3;
        let zf = l.to_f64();
        let q = |x: f64, y: f64| zf[0][0] * x * x + 2.0 * zf[0][1] * x * y + zf[1][1] * y * y;
        let (mut vol, mut mom) = (0.0, 0.0);
        let steps = (2.0 / h) as i64;
        for i in 0..steps {
            for j in 0..steps {
                let (x, y) = (-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                let base = q(x, y);
                let inside = (-2..=2).all(|a: i64| {
                    (-2..=2).all(|b: i64| (a, b) == (0, 0) || base <= q(x - a as f64, y - b as f64))
                });
                if inside {
                    vol += h * h;
                    mom += base * h * h;
                }
            }
        }
        assert!((vol - 1.0).abs() < 1e-3);
        assert!((mom - exact).abs() < 1e-3);
        assert_eq!(cell.relevant.len(), 6);
    }

    #[test]
    fn cycle_grams() {
        assert_eq!(cycle_gram(&loops(&[int(4)], 0)).unwrap().matrix(), &vec![vec![int(4)]]);
        let (m1, m2, m3) = (int(2), int(3), int(5));
        let t = cycle_gram(&theta([m1.clone(), m2.clone(), m3.clone()])).unwrap();
        // Tree {e1}; cycles e2 - e1 and e3 - e1.
        assert_eq!(t.matrix()[0][0], &m1 + &m2);
        assert_eq!(t.matrix()[1][1], &m1 + &m3);
        assert_eq!(t.matrix()[0][1], m1);
        assert_eq!(linalg::det(cycle_gram(&k4_unit()).unwrap().matrix()), int(16));
        assert_eq!(cycle_gram(&segment(1, 1, int(1))).unwrap_err(), Error::TreeGraph);
    }

    #[test]
    fn jacobian_moments() {
        let c = loops(&[int(6)], 0);
        assert_eq!(jac_moment(&c).unwrap(), ratio(1, 2));
        assert_eq!(jac_moment(&segment(1, 1, int(3))).unwrap(), int(0));
        let t = theta([int(1), int(1), int(1)]);
        assert_eq!(jac_moment(&t).unwrap(), ratio(5, 18));
    }

    #[test]
    fn boxes() {
        let z = vec![vec![int(3), int(7)], vec![int(7), int(-2)]];
        assert_eq!(moment_over(&Domain::CenteredBox(2), &z), ratio(1, 12));
        let u = moment_over(&Domain::UnitBox(2), &z);
        assert_eq!(u, int(3) / int(3) + int(-2) / int(3) + int(14) / int(4));
    }

    #[test]
    fn dimension_limit() {
        let eye: Vec<Vec<i64>> = (0..7).map(|i| (0..7).map(|j| (i == j) as i64).collect()).collect();
        let rows: Vec<&[i64]> = eye.iter().map(Vec::as_slice).collect();
        assert!(matches!(relevant_vectors(&lat(&rows)), Err(Error::DimensionTooLarge(7, 6))));
    }

    #[test]
    fn a3_and_d4_style_lattices() {
        // Root lattice A3: the rhombic dodecahedron has 12 facets.
        let a3 = lat(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        assert_eq!(relevant_vectors(&a3).unwrap().len(), 12);
        assert!(voronoi_cell(&a3).is_ok());
        // Generic 4-dimensional lattice: 2(2⁴ - 1) = 30 relevant vectors.
        let g4 = lat(&[&[10, 3, 2, 1], &[3, 11, 4, 2], &[2, 4, 12, 5], &[1, 2, 5, 13]]);
        assert_eq!(relevant_vectors(&g4).unwrap().len(), 30);
        assert!(voronoi_cell(&g4).is_ok());
    }
}
