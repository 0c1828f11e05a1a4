//! Exact Laplacian computations on metric graphs: j-functions, effective
//! resistance, Foster coefficients, Green's functions of measures, and the
//! canonical and admissible measures.
//!
//! Conductances are `1/length`. A function `f` on the graph has
//! `Δf = -f''` in the interior of edges plus, at each vertex, minus the sum of
//! outgoing slopes. With that sign, `j_z(·, y)` grows toward `y` and
//! `r(x, y) = j_y(x, x)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::PolarizedWeightedGraph;
use crate::linalg::{self, QMatrix};
use crate::rational::{self, int, Rational, RationalJson};

/// `a + b x + c x²` in the arc-length coordinate from `e.u` to `e.v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeQuadratic {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl EdgeQuadratic {
    pub fn constant(a: Rational) -> Self {
        EdgeQuadratic { a, b: Rational::zero(), c: Rational::zero() }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.a + &self.b * x + &self.c * x * x
    }

    /// `∫_0^len`.
    pub fn integral(&self, len: &Rational) -> Rational {
        let l2 = len * len;
        &self.a * len + &self.b * &l2 / int(2) + &self.c * &l2 * len / int(3)
    }

    /// Quadratic through `(0, y0)`, `(len/2, yh)` and `(len, y1)`.
    fn through(len: &Rational, y0: &Rational, yh: &Rational, y1: &Rational) -> Self {
        let d1 = y1 - y0;
        let dh = yh - y0;
        let c = int(2) * (&d1 - int(2) * &dh) / (len * len);
        let b = (&d1 - &c * len * len) / len;
        EdgeQuadratic { a: y0.clone(), b, c }
    }
}

/// Point masses at vertices plus a uniform density on each edge, indexed like
/// the vertices and edges of the graph it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMeasure {
    pub masses: Vec<Rational>,
    pub densities: Vec<Rational>,
}

impl GraphMeasure {
    pub fn zero(g: &PolarizedWeightedGraph) -> Self {
        GraphMeasure {
            masses: vec![Rational::zero(); g.vertices().len()],
            densities: vec![Rational::zero(); g.edges().len()],
        }
    }

    pub fn dirac(g: &PolarizedWeightedGraph, p: usize) -> Self {
        let mut m = Self::zero(g);
        m.masses[p] = Rational::one();
        m
    }

    /// Builds a measure from id-keyed maps; missing ids get zero.
    pub fn from_ids(
        g: &PolarizedWeightedGraph,
        masses: &BTreeMap<String, Rational>,
        densities: &BTreeMap<String, Rational>,
    ) -> Result<Self> {
        let mut m = Self::zero(g);
        for (id, x) in masses {
            m.masses[g.vertex_index(id)?] = x.clone();
        }
        for (id, x) in densities {
            m.densities[g.edge_index(id)?] = x.clone();
        }
        Ok(m)
    }

    pub fn total_mass(&self, g: &PolarizedWeightedGraph) -> Rational {
        let point: Rational = self.masses.iter().sum();
        let spread: Rational = self
            .densities
            .iter()
            .zip(g.edges())
            .map(|(rho, e)| rho * &e.length)
            .sum();
        point + spread
    }

    pub fn to_json(&self, g: &PolarizedWeightedGraph) -> serde_json::Value {
        let masses: BTreeMap<_, _> = g
            .vertices()
            .iter()
            .zip(&self.masses)
            .map(|(v, m)| (v.id.clone(), RationalJson::from(m)))
            .collect();
        let densities: BTreeMap<_, _> = g
            .edges()
            .iter()
            .zip(&self.densities)
            .map(|(e, d)| (e.id.clone(), RationalJson::from(d)))
            .collect();
        json!({ "masses": masses, "densities": densities })
    }
}

/// Weighted Laplacian of an abstract network; loops carry no current and are
/// dropped.
fn laplacian(n: usize, edges: &[(usize, usize, Rational)]) -> QMatrix {
    let mut l = linalg::zeros(n, n);
    for (u, v, len) in edges {
        if u == v {
            continue;
        }
        let c = len.recip();
        l[*u][*u] += &c;
        l[*v][*v] += &c;
        l[*u][*v] -= &c;
        l[*v][*u] -= &c;
    }
    l
}

/// Inverse of the Laplacian with row and column `z` removed, padded back with
/// zeros at `z`. Entry `(x, y)` is `j_z(x, y)`.
fn grounded_inverse_of(n: usize, edges: &[(usize, usize, Rational)], z: usize) -> QMatrix {
    let l = laplacian(n, edges);
    let keep: Vec<usize> = (0..n).filter(|&i| i != z).collect();
    let reduced: QMatrix = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| l[i][j].clone()).collect())
        .collect();
    let inv = linalg::inverse(&reduced).expect("grounded laplacian of a connected graph is invertible");
    let mut out = linalg::zeros(n, n);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[i][j] = inv[a][b].clone();
        }
    }
    out
}

fn network(g: &PolarizedWeightedGraph) -> Vec<(usize, usize, Rational)> {
    g.edges().iter().map(|e| (e.u, e.v, e.length.clone())).collect()
}

/// Matrix of `j_z(x, y)` over all vertex pairs.
pub fn grounded_inverse(g: &PolarizedWeightedGraph, z: usize) -> QMatrix {
    grounded_inverse_of(g.vertices().len(), &network(g), z)
}

/// Values of `j_z(·, y)`: one per vertex, and its restriction to each edge,
/// which is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct JFunction {
    pub values: Vec<Rational>,
    pub edges: Vec<EdgeQuadratic>,
}

pub fn j_function(g: &PolarizedWeightedGraph, z: usize, y: usize) -> JFunction {
    let m = grounded_inverse(g, z);
    let values: Vec<Rational> = (0..g.vertices().len()).map(|x| m[x][y].clone()).collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| EdgeQuadratic {
            a: values[e.u].clone(),
            b: (&values[e.v] - &values[e.u]) / &e.length,
            c: Rational::zero(),
        })
        .collect();
    JFunction { values, edges }
}

fn resistance_from(m: &QMatrix) -> QMatrix {
    let n = m.len();
    let mut r = linalg::zeros(n, n);
    for x in 0..n {
        for y in 0..n {
            r[x][y] = &m[x][x] + &m[y][y] - int(2) * &m[x][y];
        }
    }
    r
}

/// All pairwise effective resistances between vertices.
pub fn resistance_matrix(g: &PolarizedWeightedGraph) -> QMatrix {
    resistance_from(&grounded_inverse(g, 0))
}

pub fn effective_resistance(g: &PolarizedWeightedGraph, x: usize, y: usize) -> Rational {
    if x == y {
        return Rational::zero();
    }
    let m = grounded_inverse(g, y);
    m[x][x].clone()
}

fn foster_from(g: &PolarizedWeightedGraph, r: &QMatrix) -> Vec<Rational> {
    g.edges()
        .iter()
        .map(|e| Rational::one() - &r[e.u][e.v] / &e.length)
        .collect()
}

/// `F(e) = 1 - r(e⁺, e⁻)/ℓ(e)`.
pub fn foster(g: &PolarizedWeightedGraph, e: usize) -> Rational {
    let ed = &g.edges()[e];
    Rational::one() - effective_resistance(g, ed.u, ed.v) / &ed.length
}

pub fn foster_all(g: &PolarizedWeightedGraph) -> Vec<Rational> {
    foster_from(g, &resistance_matrix(g))
}

/// The graph with every edge split at a quarter and at the midpoint. Edge `e`
/// contributes the points `[u, a, b, v]` at `0, ℓ/4, ℓ/2, ℓ`.
struct Subdivision {
    n: usize,
    edges: Vec<(usize, usize, Rational)>,
    density: Vec<Rational>,
    points: Vec<[usize; 4]>,
}

impl Subdivision {
    fn new(g: &PolarizedWeightedGraph, mu: &GraphMeasure) -> Self {
        let base = g.vertices().len();
        let mut edges = Vec::new();
        let mut density = Vec::new();
        let mut points = Vec::new();
        for (i, e) in g.edges().iter().enumerate() {
            let (a, b) = (base + 2 * i, base + 2 * i + 1);
            let quarter = &e.length / int(4);
            let half = &e.length / int(2);
            for (x, y, l) in [(e.u, a, quarter.clone()), (a, b, quarter), (b, e.v, half)] {
                edges.push((x, y, l));
                density.push(mu.densities[i].clone());
            }
            points.push([e.u, a, b, e.v]);
        }
        Subdivision { n: base + 2 * g.edges().len(), edges, density, points }
    }

    /// Point masses with each sub-edge's density lumped half onto each end.
    fn lumped(&self, mu: &GraphMeasure) -> Vec<Rational> {
        let mut w = vec![Rational::zero(); self.n];
        for (p, m) in mu.masses.iter().enumerate() {
            w[p] += m;
        }
        for ((u, v, l), rho) in self.edges.iter().zip(&self.density) {
            let half = rho * l / int(2);
            w[*u] += &half;
            w[*v] += &half;
        }
        w
    }
}

/// Green's function of a mass-one measure `μ`: `Δ_x g(x, y) = δ_y - μ` and
/// `∫ g(x, y) dμ(x) = 0`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub measure: GraphMeasure,
    /// `g(p, q)` over vertex pairs.
    pub values: QMatrix,
    /// `x ↦ g(x, x)` on each edge.
    pub diagonal: Vec<EdgeQuadratic>,
    sub: QMatrix,
    points: Vec<[usize; 4]>,
    sub_edges: Vec<(usize, usize, Rational)>,
    sub_density: Vec<Rational>,
    point_masses: Vec<Rational>,
}

impl GreenFunction {
    /// `g(x, y)` at the four sample points `0, ℓ/4, ℓ/2, ℓ` of every edge:
    /// `samples(e)[k]` is the subdivision index of the `k`-th point.
    fn sample_index(&self, e: usize, k: usize) -> usize {
        self.points[e][k]
    }

    /// `g(x, x)` at the sample points of edge `e`.
    pub fn diagonal_samples(&self, e: usize) -> [Rational; 4] {
        std::array::from_fn(|k| {
            let i = self.sample_index(e, k);
            self.sub[i][i].clone()
        })
    }

    /// `Σ_p D(p) g(p, x)` at the sample points of edge `e`.
    pub fn pairing_samples(&self, divisor: &[i64], e: usize) -> [Rational; 4] {
        std::array::from_fn(|k| {
            let x = self.sample_index(e, k);
            divisor
                .iter()
                .enumerate()
                .map(|(p, &d)| int(d) * &self.sub[p][x])
                .sum()
        })
    }

    /// True when the fitted diagonal reproduces the quarter-point sample on
    /// every edge.
    pub fn verify_quarter_points(&self, g: &PolarizedWeightedGraph) -> bool {
        g.edges().iter().enumerate().all(|(i, e)| {
            let s = self.diagonal_samples(i);
            self.diagonal[i].eval(&(&e.length / int(4))) == s[1]
        })
    }

    /// Discrete balance at every subdivision vertex: the outgoing slopes of
    /// `g(·, y)` (including the density's quadratic correction) must sum to
    /// `μ - δ_y` there, for every vertex `y` of the original graph.
    pub fn verify_balance(&self, g: &PolarizedWeightedGraph) -> bool {
        let n = self.sub.len();
        let base = g.vertices().len();
        (0..base).all(|y| {
            let mut flux = vec![Rational::zero(); n];
            for ((u, v, l), rho) in self.sub_edges.iter().zip(&self.sub_density) {
                if u == v {
                    continue;
                }
                // Outgoing slope at u of f(x) = linear + ρ x (x - l) / 2.
                let diff = (&self.sub[*v][y] - &self.sub[*u][y]) / l;
                let corr = rho * l / int(2);
                flux[*u] += &diff - &corr;
                flux[*v] += -diff - corr;
            }
            (0..n).all(|x| {
                let delta = if x == y { Rational::one() } else { Rational::zero() };
                -flux[x].clone() == delta - &self.point_masses[x]
            })
        })
    }

    /// `∫ g(x, x) dν` for a measure `ν` on the same graph.
    pub fn integrate_diagonal(&self, g: &PolarizedWeightedGraph, nu: &GraphMeasure) -> Rational {
        let point: Rational = nu
            .masses
            .iter()
            .enumerate()
            .map(|(p, m)| m * &self.values[p][p])
            .sum();
        let spread: Rational = g
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| &nu.densities[i] * self.diagonal[i].integral(&e.length))
            .sum();
        point + spread
    }
}

pub fn green_function(g: &PolarizedWeightedGraph, mu: &GraphMeasure) -> Result<GreenFunction> {
    let mass = mu.total_mass(g);
    if !mass.is_one() {
        return Err(Error::MassNotOne(rational::format(&mass)));
    }
    let s = Subdivision::new(g, mu);
    let w = s.lumped(mu);
    let p = grounded_inverse_of(s.n, &s.edges, 0);
    let pw = linalg::mat_vec(&p, &w);
    let wpw: Rational = w.iter().zip(&pw).map(|(a, b)| a * b).sum();
    let curvature: Rational = s
        .edges
        .iter()
        .zip(&s.density)
        .map(|((_, _, l), rho)| rho * rho * l * l * l / int(12))
        .sum();
    let shift = wpw + curvature;
    let mut sub = linalg::zeros(s.n, s.n);
    for x in 0..s.n {
        for y in x..s.n {
            let val = &p[x][y] - &pw[x] - &pw[y] + &shift;
            sub[y][x] = val.clone();
            sub[x][y] = val;
        }
    }
    let base = g.vertices().len();
    let mut point_masses = mu.masses.clone();
    point_masses.resize(s.n, Rational::zero());
    let values: QMatrix = (0..base).map(|x| sub[x][..base].to_vec()).collect();
    let mut diagonal = Vec::with_capacity(g.edges().len());
    for (i, e) in g.edges().iter().enumerate() {
        let [u, a, b, v] = s.points[i];
        let q = EdgeQuadratic::through(&e.length, &sub[u][u], &sub[b][b], &sub[v][v]);
        if q.eval(&(&e.length / int(4))) != sub[a][a] {
            return Err(Error::IdentityViolation(format!(
                "green diagonal on edge `{}` is not quadratic",
                e.id
            )));
        }
        diagonal.push(q);
    }
    Ok(GreenFunction {
        measure: mu.clone(),
        values,
        diagonal,
        sub,
        points: s.points,
        sub_edges: s.edges,
        sub_density: s.density,
        point_masses,
    })
}

/// Vertex masses `1 - v(p)/2`, density `F(e)/ℓ(e)`.
pub fn canonical_measure(g: &PolarizedWeightedGraph) -> GraphMeasure {
    let f = foster_all(g);
    GraphMeasure {
        masses: (0..g.vertices().len())
            .map(|p| Rational::one() - Rational::new(g.valency(p).into(), 2.into()))
            .collect(),
        densities: g.edges().iter().zip(&f).map(|(e, f)| f / &e.length).collect(),
    }
}

/// The constant value of `g_{μcan}(x, x)`.
pub fn tau(g: &PolarizedWeightedGraph) -> Result<Rational> {
    let gf = green_function(g, &canonical_measure(g))?;
    let t = gf.values[0][0].clone();
    for p in 0..g.vertices().len() {
        if gf.values[p][p] != t {
            return Err(Error::NonConstantDiagonal(format!("at vertex `{}`", g.vertices()[p].id)));
        }
    }
    for (i, q) in gf.diagonal.iter().enumerate() {
        if q.a != t || !q.b.is_zero() || !q.c.is_zero() {
            return Err(Error::NonConstantDiagonal(format!("on edge `{}`", g.edges()[i].id)));
        }
    }
    Ok(t)
}

/// `(1/g)(Σ q(p) δ_p + Σ F(e)/ℓ(e) dx)`.
fn admissible_candidate(g: &PolarizedWeightedGraph) -> GraphMeasure {
    let genus = int(g.genus() as i64);
    let f = foster_all(g);
    GraphMeasure {
        masses: g.vertices().iter().map(|v| int(v.genus as i64) / &genus).collect(),
        densities: g
            .edges()
            .iter()
            .zip(&f)
            .map(|(e, f)| f / (&e.length * &genus))
            .collect(),
    }
}

/// Green's function of the admissible measure, after checking that
/// `g(K, x) + g(x, x)` is constant at every vertex and at every subdivision
/// sample point.
pub fn admissible_green(g: &PolarizedWeightedGraph) -> Result<GreenFunction> {
    if g.genus() < 1 {
        return Err(Error::GenusTooSmall(g.genus()));
    }
    let mu = admissible_candidate(g);
    let gf = green_function(g, &mu)?;
    let k = g.canonical_divisor().by_index;
    let level = |x: usize| -> Rational {
        let pair: Rational = k.iter().enumerate().map(|(p, &d)| int(d) * &gf.sub[p][x]).sum();
        pair + &gf.sub[x][x]
    };
    let c = level(0);
    if let Some(x) = (0..gf.sub.len()).find(|&x| level(x) != c) {
        return Err(Error::AdmissibilityCheckFailed(format!(
            "g(K,x) + g(x,x) differs at subdivision point {x}"
        )));
    }
    Ok(gf)
}

pub fn admissible_measure(g: &PolarizedWeightedGraph) -> Result<GraphMeasure> {
    Ok(admissible_green(g)?.measure)
}
