//! Exact bounded polytopes containing the origin: vertex enumeration by double
//! description, a pulling triangulation of the boundary, and the exact
//! moments of the solid.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::rational::{int, Rational};

const WORDS: usize = 4;

/// Fixed-width set of constraint indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Bits([u64; WORDS]);

impl Bits {
    pub const CAPACITY: usize = 64 * WORDS;

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(std::array::from_fn(|w| self.0[w] & other.0[w]))
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..Self::CAPACITY).filter(|&i| self.contains(i))
    }
}

/// Volume, first moment `∫β` and second moment `∫ββᵀ` of a solid.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub volume: Rational,
    pub first: Vec<Rational>,
    pub second: QMatrix,
}

impl Moments {
    pub fn zero(d: usize) -> Self {
        Moments { volume: Rational::zero(), first: vec![Rational::zero(); d], second: linalg::zeros(d, d) }
    }

    pub fn add(&mut self, other: &Moments) {
        self.volume += &other.volume;
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        for (ra, rb) in self.second.iter_mut().zip(&other.second) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
    }

    /// `∫ βᵀZβ = tr(Z · ∫ββᵀ)`.
    pub fn quadratic(&self, z: &QMatrix) -> Rational {
        let mut acc = Rational::zero();
        for (zr, sr) in z.iter().zip(&self.second) {
            for (a, b) in zr.iter().zip(sr) {
                acc += a * b;
            }
        }
        acc
    }

    pub fn quadratic_f64(&self, z: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for (zr, sr) in z.iter().zip(&self.second) {
            for (a, b) in zr.iter().zip(sr) {
                acc += a * crate::rational::to_f64(b);
            }
        }
        acc
    }
}

/// Moments of the simplex with the given vertices (`d + 1` points in `R^d`).
pub fn simplex_moments(points: &[Vec<Rational>]) -> Moments {
    let d = points.len() - 1;
    let edges: QMatrix = points[1..]
        .iter()
        .map(|p| p.iter().zip(&points[0]).map(|(a, b)| a - b).collect())
        .collect();
    let fact: i64 = (1..=d as i64).product();
    let volume = linalg::det(&edges).abs() / int(fact);
    let sum: Vec<Rational> = (0..d).map(|i| points.iter().map(|p| &p[i]).sum()).collect();
    let first = sum.iter().map(|s| s * &volume / int(d as i64 + 1)).collect();
    let k = &volume / int((d as i64 + 1) * (d as i64 + 2));
    let mut second = linalg::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc: Rational = points.iter().map(|p| &p[i] * &p[j]).sum();
            acc += &sum[i] * &sum[j];
            let v = acc * &k;
            second[j][i] = v.clone();
            second[i][j] = v;
        }
    }
    Moments { volume, first, second }
}

/// `{β : a_k · β ≤ b_k}` with every `b_k > 0`.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub normals: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub vertices: Vec<Vec<Rational>>,
    /// Constraints tight at each vertex.
    pub incidence: Vec<Bits>,
    /// Simplices of a triangulation of the boundary, one list of `dim`
    /// vertex indices each; the solid is the union of their cones from the
    /// origin.
    pub simplices: Vec<Vec<usize>>,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Polytope {
    /// Builds the polytope from half-spaces. `bound` must satisfy
    /// `P ⊂ [-bound, bound]^d`; a vertex on that box is reported as an error.
    pub fn from_halfspaces(normals: Vec<Vec<Rational>>, rhs: Vec<Rational>, bound: &Rational) -> Result<Self> {
        let d = normals.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::Input("polytope needs dimension at least one".into()));
        }
        if rhs.iter().any(|b| !b.is_positive()) {
            return Err(Error::Input("origin must be interior".into()));
        }
        if normals.len() + 2 * d > Bits::CAPACITY {
            return Err(Error::DimensionTooLarge(normals.len(), Bits::CAPACITY - 2 * d));
        }
        // Box constraints come first: index 2i is β_i ≤ B, 2i+1 is -β_i ≤ B.
        let mut all_normals = Vec::with_capacity(2 * d + normals.len());
        for i in 0..d {
            for s in [1, -1] {
                let mut n = vec![Rational::zero(); d];
                n[i] = int(s);
                all_normals.push(n);
            }
        }
        all_normals.extend(normals.iter().cloned());
        let mut all_rhs = vec![bound.clone(); 2 * d];
        all_rhs.extend(rhs.iter().cloned());

        let mut verts: Vec<(Vec<Rational>, Bits)> = (0..1usize << d)
            .map(|mask| {
                let mut bits = Bits::default();
                let v = (0..d)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            bits.set(2 * i);
                            bound.clone()
                        } else {
                            bits.set(2 * i + 1);
                            -bound.clone()
                        }
                    })
                    .collect();
                (v, bits)
            })
            .collect();

        for k in 2 * d..all_normals.len() {
            let (a, c) = (&all_normals[k], &all_rhs[k]);
            let slack: Vec<Rational> = verts.iter().map(|(v, _)| dot(a, v) - c).collect();
            let pos: Vec<usize> = (0..verts.len()).filter(|&i| slack[i].is_positive()).collect();
            if pos.is_empty() {
                for (i, (_, bits)) in verts.iter_mut().enumerate() {
                    if slack[i].is_zero() {
                        bits.set(k);
                    }
                }
                continue;
            }
            let neg: Vec<usize> = (0..verts.len()).filter(|&i| slack[i].is_negative()).collect();
            let mut fresh = Vec::new();
            for &p in &pos {
                for &n in &neg {
                    let common = verts[p].1.and(&verts[n].1);
                    if (common.count() as usize) < d - 1 {
                        continue;
                    }
                    if d > 1 {
                        let rows: Vec<Vec<Rational>> = common.iter().map(|i| all_normals[i].clone()).collect();
                        if linalg::rank(&rows) != d - 1 {
                            continue;
                        }
                    }
                    let t = &slack[n] / (&slack[n] - &slack[p]);
                    let (vp, vn) = (&verts[p].0, &verts[n].0);
                    let point = vn.iter().zip(vp).map(|(x, y)| x + &t * (y - x)).collect();
                    let mut bits = common;
                    bits.set(k);
                    fresh.push((point, bits));
                }
            }
            let mut next = Vec::with_capacity(verts.len() + fresh.len());
            for (i, (v, mut bits)) in verts.into_iter().enumerate() {
                if slack[i].is_zero() {
                    bits.set(k);
                    next.push((v, bits));
                } else if slack[i].is_negative() {
                    next.push((v, bits));
                }
            }
            next.extend(fresh);
            verts = next;
        }

        if verts.iter().any(|(_, bits)| (0..2 * d).any(|i| bits.contains(i))) {
            return Err(Error::NonConvergent("polytope reaches its bounding box".into()));
        }
        let shift = |b: &Bits| {
            let mut out = Bits::default();
            for i in b.iter().filter(|&i| i >= 2 * d) {
                out.set(i - 2 * d);
            }
            out
        };
        let vertices: Vec<Vec<Rational>> = verts.iter().map(|(v, _)| v.clone()).collect();
        let incidence: Vec<Bits> = verts.iter().map(|(_, b)| shift(b)).collect();
        let mut poly = Polytope { dim: d, normals, rhs, vertices, incidence, simplices: Vec::new() };
        poly.simplices = poly.triangulate_boundary();
        Ok(poly)
    }

    /// Vertex indices of each facet.
    fn facet_vertex_sets(&self) -> Vec<Vec<usize>> {
        (0..self.normals.len())
            .map(|k| (0..self.vertices.len()).filter(|&v| self.incidence[v].contains(k)).collect())
            .collect()
    }

    fn triangulate_boundary(&self) -> Vec<Vec<usize>> {
        let facets = self.facet_vertex_sets();
        let mut out = Vec::new();
        for f in &facets {
            if f.len() >= self.dim {
                triangulate_face(f, self.dim - 1, &facets, &mut out);
            }
        }
        out
    }

    /// Vertices scaled by the least common denominator `D` of their
    /// coordinates, with `D`.
    fn integer_vertices(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut den = BigInt::one();
        for x in self.vertices.iter().flatten() {
            den = den.lcm(x.denom());
        }
        let verts = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| x.numer() * (&den / x.denom())).collect())
            .collect();
        (verts, den)
    }

    /// Sums `|det|`, `|det|·s` and `|det|·(Σ p pᵀ + s sᵀ)` over the cone
    /// simplices, all in integers.
    fn integer_sums(&self, verts: &[Vec<BigInt>], second: bool) -> (BigInt, Vec<BigInt>, Vec<Vec<BigInt>>) {
        let d = self.dim;
        let mut vol = BigInt::zero();
        let mut first = vec![BigInt::zero(); d];
        let mut sec = vec![vec![BigInt::zero(); d]; d];
        for simplex in &self.simplices {
            let rows: Vec<Vec<BigInt>> = simplex.iter().map(|&i| verts[i].clone()).collect();
            let det = det_int(rows.clone()).abs();
            vol += &det;
            if !second {
                continue;
            }
            let sum: Vec<BigInt> = (0..d).map(|i| rows.iter().map(|p| &p[i]).sum()).collect();
            for i in 0..d {
                first[i] += &det * &sum[i];
                for j in i..d {
                    let mut acc: BigInt = rows.iter().map(|p| &p[i] * &p[j]).sum();
                    acc += &sum[i] * &sum[j];
                    sec[i][j] += &det * acc;
                }
            }
        }
        (vol, first, sec)
    }

    pub fn moments(&self) -> Moments {
        let d = self.dim as i64;
        let (verts, den) = self.integer_vertices();
        let (vol, first, sec) = self.integer_sums(&verts, true);
        let fact: BigInt = (1..=d).product::<i64>().into();
        let vden = &fact * den.pow(d as u32);
        let volume = Rational::new(vol, vden.clone());
        let fden = &vden * &den * BigInt::from(d + 1);
        let first = first.into_iter().map(|x| Rational::new(x, fden.clone())).collect();
        let sden = &fden * &den * BigInt::from(d + 2);
        let mut second = linalg::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = Rational::new(sec[i][j].clone(), sden.clone());
                second[j][i] = v.clone();
                second[i][j] = v;
            }
        }
        Moments { volume, first, second }
    }

    pub fn volume(&self) -> Rational {
        let d = self.dim as i64;
        let (verts, den) = self.integer_vertices();
        let (vol, _, _) = self.integer_sums(&verts, false);
        let fact: BigInt = (1..=d).product::<i64>().into();
        Rational::new(vol, fact * den.pow(d as u32))
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.normals.iter().zip(&self.rhs).all(|(a, b)| dot(a, x) <= *b)
    }
}

/// Fraction-free determinant of an integer matrix.
fn det_int(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    intersect(a, b).len() == a.len()
}

/// Pulling triangulation of a face of dimension `k` with sorted vertex set
/// `face`: cone its first vertex over the triangulated sub-faces that miss it.
fn triangulate_face(face: &[usize], k: usize, facets: &[Vec<usize>], out: &mut Vec<Vec<usize>>) {
    if face.len() == k + 1 {
        out.push(face.to_vec());
        return;
    }
    let apex = face[0];
    let mut subs: Vec<Vec<usize>> = Vec::new();
    for f in facets {
        let s = intersect(face, f);
        if s.is_empty() || s.len() == face.len() || subs.contains(&s) {
            continue;
        }
        subs.push(s);
    }
    let maximal: Vec<&Vec<usize>> = subs
        .iter()
        .filter(|s| !subs.iter().any(|t| t.len() > s.len() && is_subset(s, t)))
        .collect();
    for s in maximal {
        if s.binary_search(&apex).is_ok() {
            continue;
        }
        let mut inner = Vec::new();
        triangulate_face(s, k - 1, facets, &mut inner);
        for mut simplex in inner {
            simplex.insert(0, apex);
            out.push(simplex);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cube(d: usize) -> Polytope {
        let mut normals = Vec::new();
        for i in 0..d {
            for s in [1, -1] {
                let mut n = vec![Rational::zero(); d];
                n[i] = int(s);
                normals.push(n);
            }
        }
        Polytope::from_halfspaces(normals, vec![ratio(1, 2); 2 * d], &int(2)).unwrap()
    }

    #[test]
    fn cubes() {
        for d in 1..=4 {
            let c = cube(d);
            assert_eq!(c.vertices.len(), 1 << d);
            assert_eq!(c.volume(), int(1));
            let m = c.moments();
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { ratio(1, 12) } else { int(0) };
                    assert_eq!(m.second[i][j], want);
                }
                assert_eq!(m.first[i], int(0));
            }
        }
    }

    #[test]
    fn cross_polytope_is_degenerate_friendly() {
        // |x| + |y| + |z| <= 1: every vertex has four tight facets.
        let mut normals = Vec::new();
        for mask in 0..8 {
            normals.push((0..3).map(|i| int(if mask >> i & 1 == 1 { 1 } else { -1 })).collect());
        }
        let p = Polytope::from_halfspaces(normals, vec![int(1); 8], &int(3)).unwrap();
        assert_eq!(p.vertices.len(), 6);
        assert_eq!(p.volume(), ratio(4, 3));
    }

    #[test]
    fn integer_sums_match_rational_simplices() {
        let normals = vec![
            vec![int(2), int(1), int(0)],
            vec![int(-1), int(3), int(1)],
            vec![int(0), int(-1), int(2)],
            vec![int(-1), int(-1), int(-1)],
            vec![int(1), int(0), int(-3)],
        ];
        let rhs = vec![ratio(1, 3), int(1), ratio(2, 5), ratio(3, 7), int(2)];
        let p = Polytope::from_halfspaces(normals, rhs, &int(20)).unwrap();
        let mut want = Moments::zero(3);
        for s in &p.simplices {
            let mut pts = vec![vec![int(0); 3]];
            pts.extend(s.iter().map(|&i| p.vertices[i].clone()));
            want.add(&simplex_moments(&pts));
        }
        assert_eq!(p.moments(), want);
        assert_eq!(p.volume(), want.volume);
    }

    #[test]
    fn too_small_box_is_reported() {
        let normals = vec![vec![int(1)], vec![int(-1)]];
        assert!(Polytope::from_halfspaces(normals, vec![int(5), int(5)], &int(2)).is_err());
    }

    #[test]
    fn simplex_moment_against_direct_integral() {
        // Triangle (0,0), (1,0), (0,1): ∫x² = 1/12, ∫xy = 1/24.
        let m = simplex_moments(&[vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)]]);
        assert_eq!(m.volume, ratio(1, 2));
        assert_eq!(m.second[0][0], ratio(1, 12));
        assert_eq!(m.second[0][1], ratio(1, 24));
        assert_eq!(m.first[0], ratio(1, 6));
    }
}
