//! Scalar invariants of polarized graphs: σ-weights, slope, δ-profile and
//! Zhang's φ, ε, λ, with λ computed two independent ways.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BlockKind, PolarizedWeightedGraph};
use crate::jump::{self, VanishingClass};
use crate::laplace;
use crate::rational::{int, Rational, RationalJson};
use crate::tropical;

/// σ(p) for every vertex of a bridgeless graph.
///
/// `σ(p) = Σ_q r(p,q) q(q) + Σ_e j^{G∖e}_p(e⁺, e⁻) F(e)`. For a loop `e` at
/// `w` the deleted graph has the same resistances, so the term is `r(p, w)`.
pub fn sigmas(g: &PolarizedWeightedGraph) -> Result<Vec<Rational>> {
    if !g.is_bridgeless() {
        return Err(Error::HasBridge);
    }
    let n = g.vertices().len();
    let r = laplace::resistance_matrix(g);
    let f = laplace::foster_all(g);
    let mut out: Vec<Rational> = (0..n)
        .map(|p| {
            g.vertices()
                .iter()
                .enumerate()
                .map(|(q, v)| &r[p][q] * int(v.genus as i64))
                .sum()
        })
        .collect();
    for (i, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            for (p, s) in out.iter_mut().enumerate() {
                *s += &r[p][e.u];
            }
            continue;
        }
        let minus = g.delete_edge(i).ok_or(Error::HasBridge)?;
        // j_p(x, y) = M_xy - M_xp - M_py + M_pp with M grounded anywhere.
        let m = laplace::grounded_inverse(&minus, 0);
        let (x, y) = (e.u, e.v);
        for (p, s) in out.iter_mut().enumerate() {
            let j = &m[x][y] - &m[x][p] - &m[p][y] + &m[p][p];
            *s += j * &f[i];
        }
    }
    Ok(out)
}

pub fn sigma(g: &PolarizedWeightedGraph, p: usize) -> Result<Rational> {
    Ok(sigmas(g)?.swap_remove(p))
}

/// `Σ_p K(p) σ(p)` on a bridgeless graph.
pub fn slope_bridgeless(g: &PolarizedWeightedGraph) -> Result<Rational> {
    let s = sigmas(g)?;
    let k = g.canonical_divisor().by_index;
    Ok(k.iter().zip(&s).map(|(&k, s)| int(k) * s).sum())
}

/// Sum of the slopes of the loop and 2-connected blocks; bridges contribute
/// nothing.
pub fn slope(g: &PolarizedWeightedGraph) -> Result<Rational> {
    if g.genus() < 2 {
        return Err(Error::GenusTooSmall(g.genus()));
    }
    let mut total = Rational::zero();
    for b in g.blocks().blocks {
        if b.kind != BlockKind::Bridge {
            total += slope_bridgeless(&b.graph)?;
        }
    }
    Ok(total)
}

/// `g δ0 + Σ_h 4h(g-h) δ_h`.
pub fn boundary_weight(g: &PolarizedWeightedGraph) -> Rational {
    let genus = g.genus() as i64;
    let p = g.edge_profile();
    let bridges: Rational = p
        .delta_h
        .iter()
        .map(|(&h, d)| int(4 * h as i64 * (genus - h as i64)) * d)
        .sum();
    int(genus) * p.delta0 + bridges
}

/// Pipeline A: `λ = (s + g δ0 + Σ 4h(g-h) δ_h) / (8g + 4)`.
pub fn lambda_from_slope(g: &PolarizedWeightedGraph) -> Result<Rational> {
    let s = slope(g)?;
    Ok((s + boundary_weight(g)) / int(8 * g.genus() as i64 + 4))
}

/// φ, ε and λ from the admissible Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct ZhangInvariants {
    pub phi: Rational,
    pub epsilon: Rational,
    pub lambda: Rational,
}

pub fn zhang_invariants(g: &PolarizedWeightedGraph) -> Result<ZhangInvariants> {
    let gf = laplace::admissible_green(g)?;
    let genus = int(g.genus() as i64);
    let against_mu = gf.integrate_diagonal(g, &gf.measure);
    let against_k: Rational = g
        .canonical_divisor()
        .by_index
        .iter()
        .enumerate()
        .map(|(p, &k)| int(k) * &gf.values[p][p])
        .sum();
    let delta = g.total_length();
    let phi = -&delta / int(4) + ((int(10) * &genus + int(2)) * &against_mu - &against_k) / int(4);
    let epsilon = (int(2) * &genus - int(2)) * &against_mu + &against_k;
    let lambda = (&genus - int(1)) / (int(6) * (int(2) * &genus + int(1))) * &phi
        + (&delta + &epsilon) / int(12);
    Ok(ZhangInvariants { phi, epsilon, lambda })
}

pub fn phi(g: &PolarizedWeightedGraph) -> Result<Rational> {
    Ok(zhang_invariants(g)?.phi)
}

pub fn epsilon(g: &PolarizedWeightedGraph) -> Result<Rational> {
    Ok(zhang_invariants(g)?.epsilon)
}

/// Pipeline B: `λ = (g-1)/(6(2g+1)) φ + (δ + ε)/12`.
pub fn lambda_direct(g: &PolarizedWeightedGraph) -> Result<Rational> {
    Ok(zhang_invariants(g)?.lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub genus: u32,
    pub delta: Rational,
    pub delta0: Rational,
    pub delta_h: BTreeMap<u32, Rational>,
    pub phi: Rational,
    pub epsilon: Rational,
    pub lambda_a: Rational,
    pub lambda_b: Rational,
    pub slope: Rational,
    pub tau: Rational,
    pub moment: Rational,
    pub class: VanishingClass,
}

#[derive(Serialize)]
struct ReportJson {
    genus: u32,
    delta: RationalJson,
    delta0: RationalJson,
    #[serde(rename = "deltaH")]
    delta_h: BTreeMap<String, RationalJson>,
    phi: RationalJson,
    epsilon: RationalJson,
    lambda: BTreeMap<String, RationalJson>,
    slope: RationalJson,
    tau: RationalJson,
    moment: RationalJson,
    vanishing: VanishingClass,
    identities: BTreeMap<String, bool>,
}

impl InvariantReport {
    pub fn to_json(&self) -> serde_json::Value {
        let r = ReportJson {
            genus: self.genus,
            delta: (&self.delta).into(),
            delta0: (&self.delta0).into(),
            delta_h: self.delta_h.iter().map(|(h, d)| (h.to_string(), d.into())).collect(),
            phi: (&self.phi).into(),
            epsilon: (&self.epsilon).into(),
            lambda: BTreeMap::from([
                ("pipelineA".to_string(), (&self.lambda_a).into()),
                ("pipelineB".to_string(), (&self.lambda_b).into()),
            ]),
            slope: (&self.slope).into(),
            tau: (&self.tau).into(),
            moment: (&self.moment).into(),
            vanishing: self.class,
            identities: BTreeMap::from([
                ("lambda_pipelines".to_string(), true),
                ("moment_plus_half_tau".to_string(), true),
                ("phi_epsilon_moment".to_string(), true),
                ("slope_nonnegative".to_string(), true),
            ]),
        };
        serde_json::to_value(r).expect("report serializes")
    }
}

/// Every invariant at once, after checking the cross-identities:
/// the two λ pipelines agree, `I + τ/2 = δ/8`, `2φ = δ + ε - 12 I` and
/// `s ≥ 0`. Any failure is reported as [`Error::IdentityViolation`].
pub fn report(g: &PolarizedWeightedGraph) -> Result<InvariantReport> {
    if g.genus() < 2 {
        return Err(Error::GenusTooSmall(g.genus()));
    }
    let profile = g.edge_profile();
    let z = zhang_invariants(g)?;
    let slope = slope(g)?;
    let lambda_a = (&slope + boundary_weight(g)) / int(8 * g.genus() as i64 + 4);
    let tau = laplace::tau(g)?;
    let moment = tropical::jac_moment(g)?;
    let delta = profile.delta.clone();
    if lambda_a != z.lambda {
        return Err(Error::IdentityViolation(format!(
            "lambda pipelines disagree: {lambda_a} vs {}",
            z.lambda
        )));
    }
    if &moment + &tau / int(2) != &delta / int(8) {
        return Err(Error::IdentityViolation("I + tau/2 != delta/8".into()));
    }
    if int(2) * &z.phi != &delta + &z.epsilon - int(12) * &moment {
        return Err(Error::IdentityViolation("2 phi != delta + eps - 12 I".into()));
    }
    if slope.is_negative() {
        return Err(Error::IdentityViolation("negative slope".into()));
    }
    let class = jump::classify_vanishing(g)?;
    Ok(InvariantReport {
        genus: g.genus(),
        delta,
        delta0: profile.delta0,
        delta_h: profile.delta_h,
        phi: z.phi,
        epsilon: z.epsilon,
        lambda_a,
        lambda_b: z.lambda,
        slope,
        tau,
        moment,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build;
    use crate::graph::fixtures::*;
    use crate::rational::ratio;

    fn two_gon_slope(g: u32, h: u32, m1: &Rational, m2: &Rational) -> Rational {
        int(4 * (h * (g - h - 1)) as i64) * m1 * m2 / (m1 + m2)
    }

    #[test]
    fn sigma_examples() {
        let (m1, m2) = (int(2), int(3));
        let tg = two_gon(5, 1, m1.clone(), m2.clone());
        assert_eq!(sigma(&tg, 0).unwrap(), ratio(6, 5) * int(3));
        assert_eq!(sigma(&loops(&[int(3)], 1), 0).unwrap(), int(0));
        let b = banana(&[int(1), int(2), int(3)], (0, 0));
        assert_eq!(sigmas(&b).unwrap(), vec![int(0), int(0)]);
        assert_eq!(sigmas(&segment(1, 1, int(1))).unwrap_err(), Error::HasBridge);
    }

    #[test]
    fn slope_examples() {
        let (m1, m2) = (ratio(3, 2), int(5));
        for (g, h) in [(3, 1), (4, 1), (5, 2), (6, 2)] {
            let tg = two_gon(g, h, m1.clone(), m2.clone());
            assert_eq!(slope(&tg).unwrap(), two_gon_slope(g, h, &m1, &m2));
        }
        let lengths: Vec<_> = (1..=4).map(int).collect();
        assert_eq!(slope(&banana(&lengths, (0, 0))).unwrap(), int(0));
        assert_eq!(slope(&loops(&[int(2)], 1)).unwrap(), int(0));
        assert_eq!(slope(&dumbbell(int(1), int(2), int(3))).unwrap(), int(0));
        assert!(slope(&k4_unit()).unwrap().is_positive());
    }

    #[test]
    fn k4_slope_matches_float_oracle() {
        // Independent floating-point evaluation of the σ-formula.
        let g = k4_unit();
        let n = 4;
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        let resist = |edges: &[(usize, usize)]| -> Vec<Vec<f64>> {
            let mut l = vec![vec![0.0; n]; n];
            for &(u, v) in edges {
                l[u][u] += 1.0;
                l[v][v] += 1.0;
                l[u][v] -= 1.0;
                l[v][u] -= 1.0;
            }
            // Pseudo-inverse via L + J/n.
            let mut a = l.clone();
            for row in a.iter_mut() {
                for x in row.iter_mut() {
                    *x += 1.0 / n as f64;
                }
            }
            let inv = invert(a);
            inv.iter()
                .map(|row| row.iter().map(|x| x - 1.0 / n as f64).collect())
                .collect()
        };
        let pinv = resist(&pairs);
        let mut s = 0.0;
        for p in 0..n {
            let mut sigma = 0.0;
            for (i, &(x, y)) in pairs.iter().enumerate() {
                let r_xy = pinv[x][x] + pinv[y][y] - 2.0 * pinv[x][y];
                let f = 1.0 - r_xy;
                let rest: Vec<_> = pairs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &e)| e).collect();
                let m = resist(&rest);
                sigma += (m[x][y] - m[x][p] - m[p][y] + m[p][p]) * f;
            }
            s += 1.0 * sigma;
        }
        let exact = slope(&g).unwrap();
        assert!((crate::rational::to_f64(&exact) - s).abs() < 1e-12);
        assert_eq!(exact, ratio(3, 4));
    }

    fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            inv.swap(c, p);
            let d = a[c][c];
            for j in 0..n {
                a[c][j] /= d;
                inv[c][j] /= d;
            }
            for i in 0..n {
                if i != c {
                    let f = a[i][c];
                    for j in 0..n {
                        a[i][j] -= f * a[c][j];
                        inv[i][j] -= f * inv[c][j];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn lambda_examples() {
        for g in 2..=5u32 {
            let l = loops(&vec![int(1); g as usize], 0);
            let lam = lambda_from_slope(&l).unwrap();
            assert_eq!(lam, int(g as i64 * g as i64) / int(8 * g as i64 + 4));
            assert_eq!(lambda_direct(&l).unwrap(), lam);
        }
        let (h, g) = (1u32, 3u32);
        let s = segment(h, g - h, int(7));
        let expect = int(4 * (h * (g - h)) as i64 * 7) / int(8 * g as i64 + 4);
        assert_eq!(lambda_from_slope(&s).unwrap(), expect);
        assert_eq!(lambda_direct(&s).unwrap(), expect);
        assert_eq!(lambda_from_slope(&point(3)).unwrap(), int(0));
        assert_eq!(lambda_direct(&point(3)).unwrap(), int(0));
    }

    #[test]
    fn circle_genus_one() {
        let c = loops(&[int(6)], 0);
        let z = zhang_invariants(&c).unwrap();
        assert_eq!(z.phi, int(0));
        assert_eq!(z.epsilon, int(0));
        assert_eq!(z.lambda, ratio(1, 2));
        assert_eq!(lambda_from_slope(&c).unwrap_err(), Error::GenusTooSmall(1));
    }

    #[test]
    fn pipelines_agree_on_fixtures() {
        let fixtures = [
            two_gon(4, 1, int(2), int(3)),
            theta([int(1), int(2), int(3)]),
            dumbbell(int(1), int(2), int(3)),
            k4_unit(),
            caterpillar(3, &ratio(1, 2)),
            banana(&[int(1), int(1), int(2)], (1, 0)),
            build(&[("u", 0), ("v", 1)], &[("a", "u", "v", int(1)), ("b", "u", "v", int(2)), ("l", "u", "u", int(3))]).unwrap(),
        ];
        for g in &fixtures {
            let r = report(g).unwrap();
            assert_eq!(r.lambda_a, r.lambda_b);
        }
    }

    #[test]
    fn segment_phi_and_epsilon() {
        // λ from the segment formula pins φ once ε is known.
        let (h, g) = (2u32, 5u32);
        let s = segment(h, g - h, int(3));
        let z = zhang_invariants(&s).unwrap();
        let lam = lambda_from_slope(&s).unwrap();
        let gg = int(g as i64);
        let phi = (lam - (int(3) + &z.epsilon) / int(12)) * int(6) * (int(2) * &gg + int(1)) / (gg - int(1));
        assert_eq!(z.phi, phi);
    }

    #[test]
    fn report_flags() {
        let lengths: Vec<_> = (1..=3).map(int).collect();
        let r = report(&banana(&lengths, (0, 0))).unwrap();
        assert_eq!(r.slope, int(0));
        assert_eq!(r.class, VanishingClass::Banana);
        let r = report(&k4_unit()).unwrap();
        assert_eq!(r.class, VanishingClass::Nonvanishing);
        let r = report(&dumbbell(int(1), int(2), int(3))).unwrap();
        assert_eq!(r.class, VanishingClass::LoopsAndBridges);
        let js = r.to_json();
        assert_eq!(js["slope"]["exact"], "0");
        assert_eq!(js["deltaH"]["1"]["exact"], "2");
    }
}
