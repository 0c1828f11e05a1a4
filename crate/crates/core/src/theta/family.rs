//! Degenerating period families `Ω(t) = (1/2πi) A log t + B(t)` over the
//! punctured disk, with `A = diag(A0, 0)` and `B` a matrix polynomial.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::{LN_2, PI};

use super::{mean_log_theta, Cell, Estimate, FundamentalDomain, McConfig, SiegelMatrix};
use crate::error::{Error, Result};
use crate::rational::int;
use crate::tropical::{self, Domain, GramLattice};

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodFamily {
    g: usize,
    r: usize,
    a0: Vec<Vec<i64>>,
    /// `(k, B_k)`, sorted by `k`.
    coeffs: Vec<(u32, DMatrix<Complex64>)>,
    radius: f64,
}

fn complex_matrix(re: &[Vec<f64>], im: &[Vec<f64>], g: usize) -> Result<DMatrix<Complex64>> {
    let ok = |m: &[Vec<f64>]| m.len() == g && m.iter().all(|r| r.len() == g);
    if !ok(re) || !ok(im) {
        return Err(Error::Input(format!("coefficient matrices must be {g}x{g}")));
    }
    Ok(DMatrix::from_fn(g, g, |i, j| Complex64::new(re[i][j], im[i][j])))
}

impl PeriodFamily {
    pub fn new(g: usize, a0: Vec<Vec<i64>>, coeffs: Vec<(u32, DMatrix<Complex64>)>, radius: f64) -> Result<Self> {
        let r = a0.len();
        if g == 0 || r > g {
            return Err(Error::Input(format!("need 0 <= r <= g and g >= 1, got g={g}, r={r}")));
        }
        if a0.iter().any(|row| row.len() != r) {
            return Err(Error::Input("A0 must be square".into()));
        }
        if r > 0 {
            let q = a0.iter().map(|row| row.iter().map(|&x| int(x)).collect()).collect();
            GramLattice::new(q).map_err(|_| Error::Input("A0 must be symmetric positive definite".into()))?;
        }
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::Input(format!("radius must lie in (0, 1], got {radius}")));
        }
        let mut coeffs = coeffs;
        coeffs.sort_by_key(|(k, _)| *k);
        if coeffs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Input("repeated coefficient index".into()));
        }
        for (k, m) in &coeffs {
            if m.shape() != (g, g) {
                return Err(Error::Input(format!("B_{k} must be {g}x{g}")));
            }
            if (m - m.transpose()).iter().any(|x| x.norm() > 1e-12 * (1.0 + m.norm())) {
                return Err(Error::Input(format!("B_{k} is not symmetric")));
            }
            if m.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::Input(format!("B_{k} has a non-finite entry")));
            }
        }
        let fam = PeriodFamily { g, r, a0, coeffs, radius };
        if g > r {
            fam.abelian_part()?;
        }
        Ok(fam)
    }

    /// `g = 1`, `A = [1]`, `B ≡ b`.
    pub fn tate(b: Complex64) -> Self {
        Self::new(1, vec![vec![1]], vec![(0, DMatrix::from_element(1, 1, b))], 1.0).expect("valid family")
    }

    /// Constant `B ≡ b0` with the given `A0`.
    pub fn constant(a0: Vec<Vec<i64>>, b0: DMatrix<Complex64>) -> Result<Self> {
        Self::new(b0.nrows(), a0, vec![(0, b0)], 1.0)
    }

    /// `{"g","r","A0","B":[{"k","re","im"}],"radius"}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |what: &str| Error::Input(format!("period family json: bad or missing `{what}`"));
        let g = v.get("g").and_then(|x| x.as_u64()).ok_or_else(|| bad("g"))? as usize;
        let r = v.get("r").and_then(|x| x.as_u64()).ok_or_else(|| bad("r"))? as usize;
        let a0: Vec<Vec<i64>> = match v.get("A0") {
            Some(m) => serde_json::from_value(m.clone()).map_err(|_| bad("A0"))?,
            None => Vec::new(),
        };
        if a0.len() != r {
            return Err(Error::Input(format!("A0 has size {}, but r = {r}", a0.len())));
        }
        let mut coeffs = Vec::new();
        for c in v.get("B").and_then(|b| b.as_array()).ok_or_else(|| bad("B"))? {
            let k = c.get("k").and_then(|x| x.as_u64()).ok_or_else(|| bad("B.k"))? as u32;
            let re = super::json_rows(c.get("re").ok_or_else(|| bad("B.re"))?)?;
            let im = super::json_rows(c.get("im").ok_or_else(|| bad("B.im"))?)?;
            coeffs.push((k, complex_matrix(&re, &im, g)?));
        }
        let radius = v.get("radius").and_then(|x| x.as_f64()).ok_or_else(|| bad("radius"))?;
        Self::new(g, a0, coeffs, radius)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let part = |m: &DMatrix<Complex64>, f: fn(&Complex64) -> f64| {
            (0..self.g).map(|i| (0..self.g).map(|j| f(&m[(i, j)])).collect::<Vec<_>>()).collect::<Vec<_>>()
        };
        let b: Vec<_> = self
            .coeffs
            .iter()
            .map(|(k, m)| json!({"k": k, "re": part(m, |z| z.re), "im": part(m, |z| z.im)}))
            .collect();
        json!({"g": self.g, "r": self.r, "A0": self.a0, "B": b, "radius": self.radius})
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn toric_rank(&self) -> usize {
        self.r
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn b_at(&self, t: Complex64) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.g, self.g);
        for (k, c) in &self.coeffs {
            m += c * t.powu(*k);
        }
        m
    }

    /// `Ω(t) = A arg t/2π - i A ln|t|/2π + B(t)`.
    pub fn omega(&self, t: Complex64) -> Result<SiegelMatrix> {
        if !(t.norm() > 0.0 && t.norm() < self.radius) {
            return Err(Error::Input(format!("t = {t} is outside the punctured disk of radius {}", self.radius)));
        }
        let b = self.b_at(t);
        let mut re = b.map(|z| z.re);
        let mut im = b.map(|z| z.im);
        for i in 0..self.r {
            for j in 0..self.r {
                let a = self.a0[i][j] as f64;
                re[(i, j)] += a * t.arg() / (2.0 * PI);
                im[(i, j)] -= a * t.norm().ln() / (2.0 * PI);
            }
        }
        SiegelMatrix::from_parts(re, im)
            .map_err(|_| Error::Input(format!("Im Ω(t) is not positive definite at t = {t}")))
    }

    /// `B_{g-r,g-r}(0)`, the period matrix of the abelian part.
    pub fn abelian_part(&self) -> Result<SiegelMatrix> {
        let b = self.b_at(Complex64::new(0.0, 0.0));
        let s = self.g - self.r;
        let block = b.view((self.r, self.r), (s, s)).into_owned();
        SiegelMatrix::from_parts(block.map(|z| z.re), block.map(|z| z.im))
            .map_err(|_| Error::Input("Im B(0) of the abelian part is not positive definite".into()))
    }

    fn a0_lattice(&self) -> Option<GramLattice> {
        (self.r > 0).then(|| {
            GramLattice::new(self.a0.iter().map(|row| row.iter().map(|&x| int(x)).collect()).collect())
                .expect("checked at construction")
        })
    }

    /// `I(Σ) = I(A0)`, the tropical moment of the monodromy lattice.
    pub fn tropical_moment(&self) -> Result<f64> {
        match self.a0_lattice() {
            Some(lat) => Ok(crate::rational::to_f64(&tropical::moment(&lat)?)),
            None => Ok(0.0),
        }
    }

    /// `V = Vor(A0) × Vor(Im B_{g-r,g-r}(0))`.
    pub fn limit_domain(&self) -> Result<FundamentalDomain> {
        let mut cells = Vec::new();
        if let Some(lat) = self.a0_lattice() {
            cells.push(Cell::voronoi(&lat)?);
        }
        if self.g > self.r {
            let p = self.abelian_part()?;
            cells.push(Cell::voronoi_f64(&super::to_rows(p.im()))?);
        }
        Ok(FundamentalDomain { cells })
    }
}

/// `∫_{F(V, Ω(t))} log |θ(z, Ω(t))| dμ`, which extends continuously to `t = 0`.
pub fn log_theta_fiber_integral(family: &PeriodFamily, t: Complex64, mc: &McConfig) -> Result<Estimate> {
    mean_log_theta(&family.omega(t)?, &family.limit_domain()?, mc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub t_re: f64,
    pub t_im: f64,
    pub two_i: f64,
    pub two_i_sigma: f64,
    /// `I(Σ) log |t|`.
    pub moment_log: f64,
    /// `½ log det Im Ω(t)`.
    pub half_log_det: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scan {
    pub rows: Vec<ScanRow>,
    pub tropical_moment: f64,
    pub limit: Estimate,
}

impl Scan {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# |t|\targ_t\t2I\tsigma\tI(S)log|t|\thalf_logdet\th\n");
        for r in &self.rows {
            let t = Complex64::new(r.t_re, r.t_im);
            out.push_str(&format!(
                "{:.6e}\t{:.6}\t{:.10}\t{:.3e}\t{:.10}\t{:.10}\t{:.10}\n",
                t.norm(),
                t.arg(),
                r.two_i,
                r.two_i_sigma,
                r.moment_log,
                r.half_log_det,
                r.h
            ));
        }
        out
    }
}

pub fn default_schedule() -> Vec<Complex64> {
    (2..=8).map(|k| Complex64::new(10f64.powi(-k), 0.0)).collect()
}

/// `h(t) = 2I(A_Ω(t)) + I(Σ) log|t| + ½ log det Im Ω(t)` along the
/// schedule. The limit is the mean of the last two values, with their half
/// difference and the last Monte Carlo error added in quadrature.
pub fn degeneration_scan(family: &PeriodFamily, schedule: &[Complex64], mc: &McConfig) -> Result<Scan> {
    if schedule.len() < 2 {
        return Err(Error::Input("schedule needs at least two values of t".into()));
    }
    let moment = family.tropical_moment()?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &t in schedule {
        let omega = family.omega(t)?;
        let two_i = super::i_invariant(&omega, mc)?.affine(2.0, 0.0);
        let moment_log = moment * t.norm().ln();
        let half_log_det = 0.5 * omega.log_det_im();
        rows.push(ScanRow {
            t_re: t.re,
            t_im: t.im,
            two_i: two_i.value,
            two_i_sigma: two_i.sigma,
            moment_log,
            half_log_det,
            h: two_i.value + moment_log + half_log_det,
        });
    }
    let (a, b) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let spread = 0.5 * (a.h - b.h).abs();
    let limit = Estimate { value: 0.5 * (a.h + b.h), sigma: spread.hypot(b.two_i_sigma) };
    Ok(Scan { rows, tropical_moment: moment, limit })
}

/// The limit of `h(t)` in closed form:
/// `-(r/2) log 2 + 2I(P) + ½ log det Im B_ss(0) + I_{Vor(A0)}(Q_rr - Q_rs Q_ss⁻¹ Q_sr)`
/// with `Q = 2π Im B(0)` and `P` the abelian part.
pub fn limit_constant(family: &PeriodFamily, mc: &McConfig) -> Result<Estimate> {
    let (g, r) = (family.g, family.r);
    let mut total = Estimate::exact(-(r as f64) / 2.0 * LN_2);
    if g > r {
        let p = family.abelian_part()?;
        let ip = super::i_invariant(&p, mc)?;
        total = total.plus(ip.affine(2.0, 0.5 * p.log_det_im()));
    }
    if r > 0 {
        let q = family.b_at(Complex64::new(0.0, 0.0)).map(|z| 2.0 * PI * z.im);
        let s = g - r;
        let mut schur = q.view((0, 0), (r, r)).into_owned();
        if s > 0 {
            let qss = q.view((r, r), (s, s)).into_owned();
            let inv = qss.try_inverse().ok_or(Error::NotPositiveDefinite)?;
            schur -= q.view((0, r), (r, s)) * inv * q.view((r, 0), (s, r));
        }
        let lat = family.a0_lattice().expect("r > 0");
        let cell = tropical::voronoi_cell(&lat)?;
        let value = tropical::moment_over_f64(&Domain::Polytope(&cell.polytope), &super::to_rows(&schur));
        total = total.plus(Estimate::exact(value));
    }
    Ok(total)
}

/// `log det Im Ω(t)`.
pub fn log_det_growth(family: &PeriodFamily, t: Complex64) -> Result<f64> {
    Ok(family.omega(t)?.log_det_im())
}

/// Fit of `log det Im Ω(t) ≈ log c + r log(L + s)` with `L = -log|t|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub log_c: f64,
    pub exponent: f64,
    pub shift: f64,
    pub residual: f64,
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (icpt, slope, res)
}

/// The shift `s` is chosen by a grid search on `[0, 100]` refined by
/// golden-section search; for fixed `s` the fit is linear.
pub fn fit_log_det_growth(family: &PeriodFamily, ts: &[f64]) -> Result<GrowthFit> {
    if ts.len() < 3 {
        return Err(Error::Input("growth fit needs at least three values of t".into()));
    }
    let ls: Vec<f64> = ts.iter().map(|t| -t.abs().ln()).collect();
    let ys = ts
        .iter()
        .map(|&t| log_det_growth(family, Complex64::new(t, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let fit = |s: f64| {
        let xs: Vec<f64> = ls.iter().map(|l| (l + s).ln()).collect();
        line_fit(&xs, &ys)
    };
    let mut best = 0.0;
    for k in 0..=400 {
        let s = k as f64 * 0.25;
        if fit(s).2 < fit(best).2 {
            best = s;
        }
    }
    let (mut lo, mut hi) = ((best - 0.25f64).max(0.0), best + 0.25);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (a, b) = (hi - gr * (hi - lo), lo + gr * (hi - lo));
        if fit(a).2 < fit(b).2 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let s = 0.5 * (lo + hi);
    let (log_c, exponent, residual) = fit(s);
    Ok(GrowthFit { log_c, exponent, shift: s, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::euler_product_log;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn genus_two_family() -> PeriodFamily {
        let b0 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.1), c(0.0, 0.1), c(0.0, 1.0)]);
        PeriodFamily::constant(vec![vec![1]], b0).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let f = genus_two_family();
        assert_eq!(PeriodFamily::from_json(&f.to_json()).unwrap(), f);
        let bad = json!({"g": 1, "r": 1, "A0": [[-1]], "B": [], "radius": 0.5});
        assert!(PeriodFamily::from_json(&bad).is_err());
        let bad = json!({"g": 2, "r": 1, "A0": [[1]], "B": [{"k": 0, "re": [[0,0],[0,0]], "im": [[1,0],[0,0]]}], "radius": 0.5});
        assert!(PeriodFamily::from_json(&bad).is_err());
    }

    #[test]
    fn omega_of_tate_family() {
        let f = PeriodFamily::tate(c(0.0, 0.0));
        let om = f.omega(c(0.5, 0.0)).unwrap();
        // The nome exp(2πiΩ(t)) is t itself.
        let nome = (c(0.0, 2.0 * PI) * om.entry(0, 0)).exp();
        assert!((nome - c(0.5, 0.0)).norm() < 1e-14);
        let z = c(-0.3, 0.4);
        let nome = (c(0.0, 2.0 * PI) * f.omega(z).unwrap().entry(0, 0)).exp();
        assert!((nome - z).norm() < 1e-14);
        assert!(f.omega(c(0.0, 0.0)).is_err());
        assert!(f.omega(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn fiber_integral_product_formula() {
        let mc = McConfig::new(20_000, 2).unwrap();
        let f = PeriodFamily::tate(c(0.0, 0.0));
        for t in [0.5, 0.1] {
            let e = log_theta_fiber_integral(&f, c(t, 0.0), &mc).unwrap();
            let exact = euler_product_log(c(t, 0.0));
            assert!(e.agrees_with(exact, 3.0, 2e-3), "t={t}: {e:?} vs {exact}");
        }
    }

    #[test]
    fn tate_limit_constant() {
        let mc = McConfig::new(2000, 1).unwrap();
        let v = limit_constant(&PeriodFamily::tate(c(0.0, 1.0)), &mc).unwrap();
        assert!((v.value - (-0.5 * LN_2 + PI / 6.0)).abs() < 1e-12);
        assert_eq!(v.sigma, 0.0);
    }

    #[test]
    fn growth_exponents() {
        let ts: Vec<f64> = (3..=10).map(|k| 10f64.powi(-k)).collect();
        let fit = fit_log_det_growth(&PeriodFamily::tate(c(0.0, 1.0)), &ts).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-6, "{fit:?}");
        let fit = fit_log_det_growth(&genus_two_family(), &ts).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-6, "{fit:?}");
        let b0 = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        let two = PeriodFamily::constant(vec![vec![1, 0], vec![0, 1]], b0.clone()).unwrap();
        let fit = fit_log_det_growth(&two, &ts).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-6, "{fit:?}");
        let zero = PeriodFamily::constant(vec![], b0).unwrap();
        let fit = fit_log_det_growth(&zero, &ts).unwrap();
        assert!(fit.exponent.abs() < 1e-9, "{fit:?}");
    }

    #[test]
    fn constant_family_scan_is_flat() {
        let mc = McConfig::new(4000, 3).unwrap();
        let b0 = DMatrix::from_row_slice(2, 2, &[c(0.1, 1.2), c(0.0, 0.3), c(0.0, 0.3), c(-0.2, 0.9)]);
        let f = PeriodFamily::constant(vec![], b0).unwrap();
        let scan = degeneration_scan(&f, &default_schedule()[..3], &mc).unwrap();
        let h0 = scan.rows[0].h;
        assert!(scan.rows.iter().all(|r| (r.h - h0).abs() < 1e-12));
    }
}
