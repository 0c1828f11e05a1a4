//! Riemann theta numerics for principally polarized abelian varieties
//! `A_Ω = C^g / (Z^g + ΩZ^g)`: the theta function, its invariant norm, the
//! I-invariant, and degenerating period families.

pub mod family;
pub mod mc;

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use serde_json::json;
use statrs::function::gamma::{gamma, gamma_ur};
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tropical::{self, Domain, GramLattice, Polytope};

pub use family::{
    default_schedule,
    degeneration_scan, fit_log_det_growth, limit_constant, log_det_growth, log_theta_fiber_integral, GrowthFit,
    PeriodFamily, Scan, ScanRow,
};
pub use mc::{Estimate, McConfig};

pub const DEFAULT_TOL: f64 = 1e-12;
/// Largest truncation radius, in units where the summand is `exp(-R²)`.
const MAX_RADIUS: f64 = 12.0;
const MAX_TERMS: f64 = 2e6;

/// `Ω = X + iY` symmetric with `Y` positive definite.
#[derive(Debug, Clone)]
pub struct SiegelMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    log_det_im: f64,
    min_eig: f64,
    /// Fincke–Pohst form of `Y`.
    form: Vec<Vec<f64>>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input("matrix must be square and non-empty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn json_rows(v: &serde_json::Value) -> Result<Vec<Vec<f64>>> {
    let bad = || Error::Input("expected a matrix of numbers".into());
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|r| r.as_array().ok_or_else(bad)?.iter().map(|x| x.as_f64().ok_or_else(bad)).collect())
        .collect()
}

impl SiegelMatrix {
    pub fn new(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        Self::from_parts(from_rows(re)?, from_rows(im)?)
    }

    pub fn from_parts(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        let g = re.nrows();
        if g == 0 || re.shape() != im.shape() || !re.is_square() {
            return Err(Error::Input("real and imaginary parts must be square of equal size".into()));
        }
        if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite period matrix entry".into()));
        }
        let scale = re.abs().max().max(im.abs().max()).max(f64::MIN_POSITIVE);
        let asym = (&re - re.transpose()).abs().max().max((&im - im.transpose()).abs().max());
        if asym > 1e-12 * scale {
            return Err(Error::Input("period matrix is not symmetric".into()));
        }
        let re = (&re + re.transpose()) * 0.5;
        let im = (&im + im.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(im.clone()).eigenvalues.min();
        let chol = Cholesky::<f64, Dyn>::new(im.clone()).filter(|_| min_eig > 0.0).ok_or(Error::NotPositiveDefinite)?;
        let log_det_im = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let im_inv = chol.inverse();
        let form = tropical::quadratic_form(&to_rows(&im));
        Ok(SiegelMatrix { re, im, im_inv, log_det_im, min_eig, form })
    }

    /// `{"re": [[...]], "im": [[...]]}`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let re = v.get("re").ok_or_else(|| Error::Input("period matrix needs `re`".into()))?;
        let im = v.get("im").ok_or_else(|| Error::Input("period matrix needs `im`".into()))?;
        Self::new(&json_rows(re)?, &json_rows(im)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"re": to_rows(&self.re), "im": to_rows(&self.im)})
    }

    pub fn diagonal_imaginary(diag: &[f64]) -> Result<Self> {
        let g = diag.len();
        Self::from_parts(DMatrix::zeros(g, g), DMatrix::from_fn(g, g, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn log_det_im(&self) -> f64 {
        self.log_det_im
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    /// `Ω n` for an integer vector.
    pub fn apply(&self, n: &[i64]) -> Vec<Complex64> {
        let g = self.dim();
        (0..g).map(|i| (0..g).map(|j| self.entry(i, j) * n[j] as f64).sum()).collect()
    }

    /// Smallest `R` with the Gaussian tail bound
    /// `(g/2)(2/ρ)^g Γ(g/2, (R - ρ/2)²) ≤ tol`, `ρ = √(π λ_min(Y))`.
    pub fn radius(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
        }
        let g = self.dim() as f64;
        let rho = (PI * self.min_eig).sqrt();
        let bound = |r: f64| {
            let x = (r - rho / 2.0).powi(2);
            (g / 2.0) * (2.0 / rho).powf(g) * gamma_ur(g / 2.0, x) * gamma(g / 2.0)
        };
        let mut r = (g.sqrt() + rho) / 2.0;
        while bound(r) > tol {
            r += 0.05;
            if r > MAX_RADIUS {
                return Err(Error::NonConvergent(format!("theta tail bound {tol} needs radius beyond {MAX_RADIUS}")));
            }
        }
        // Number of lattice points in the ellipsoid, roughly.
        let ball = PI.powf(g / 2.0) / gamma(g / 2.0 + 1.0);
        let terms = ball * (r / PI.sqrt()).powf(g) * (-0.5 * self.log_det_im).exp();
        if terms > MAX_TERMS {
            return Err(Error::NonConvergent(format!("theta sum needs about {terms:.0} terms")));
        }
        Ok(r)
    }

    /// `c = Y⁻¹ Im z`.
    fn centre(&self, z: &[Complex64]) -> Vec<f64> {
        let g = self.dim();
        (0..g).map(|i| (0..g).map(|j| self.im_inv[(i, j)] * z[j].im).sum()).collect()
    }

    /// `θ̃(x, c) = Σ_n exp(-π(n+c)ᵀY(n+c)) exp(i(π nᵀXn + 2π nᵀx))` over the
    /// ellipsoid `(n+c)ᵀY(n+c) ≤ R²/π`. For `z = x + iYc`,
    /// `θ(z) = exp(π cᵀYc) θ̃`.
    fn reduced_sum(&self, x: &[f64], c: &[f64], radius: f64) -> Complex64 {
        let g = self.dim();
        let q = &self.form;
        let mut n = vec![0i64; g];
        let mut acc = Complex64::new(0.0, 0.0);
        let bound = radius * radius / PI;
        self.visit(g - 1, bound, q, c, &mut n, &mut |n, used| {
            let mut phase = 0.0;
            for i in 0..g {
                let ni = n[i] as f64;
                phase += 2.0 * ni * x[i] + ni * ni * self.re[(i, i)];
                for j in i + 1..g {
                    phase += 2.0 * ni * n[j] as f64 * self.re[(i, j)];
                }
            }
            acc += Complex64::from_polar((-PI * used).exp(), PI * phase);
        });
        acc
    }

    fn visit(
        &self,
        i: usize,
        rest: f64,
        q: &[Vec<f64>],
        c: &[f64],
        n: &mut Vec<i64>,
        f: &mut impl FnMut(&[i64], f64),
    ) {
        let g = q.len();
        let shift: f64 = (i + 1..g).map(|j| q[i][j] * (n[j] as f64 + c[j])).sum();
        // u_i = n_i + c_i must satisfy q_ii (u_i + shift)² ≤ rest.
        let centre = -shift - c[i];
        let width = (rest.max(0.0) / q[i][i]).sqrt();
        let lo = (centre - width).ceil() as i64;
        let hi = (centre + width).floor() as i64;
        for ni in lo..=hi {
            n[i] = ni;
            let t = q[i][i] * (ni as f64 - centre).powi(2);
            let left = rest - t;
            if i == 0 {
                let total = q_total(q, c, n);
                f(n, total);
            } else {
                self.visit(i - 1, left, q, c, n, f);
            }
        }
        n[i] = 0;
    }
}

/// `(n+c)ᵀY(n+c)` from the Fincke–Pohst form.
fn q_total(q: &[Vec<f64>], c: &[f64], n: &[i64]) -> f64 {
    let g = q.len();
    (0..g)
        .map(|i| {
            let s: f64 = (n[i] as f64 + c[i]) + (i + 1..g).map(|j| q[i][j] * (n[j] as f64 + c[j])).sum::<f64>();
            q[i][i] * s * s
        })
        .sum()
}

/// `θ(z, Ω)` as `exp(log_scale) · reduced`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub log_scale: f64,
    pub reduced: Complex64,
}

impl ThetaValue {
    pub fn value(&self) -> Complex64 {
        self.reduced * self.log_scale.exp()
    }

    pub fn log_abs(&self) -> f64 {
        self.log_scale + self.reduced.norm().ln()
    }
}

fn check_point(z: &[Complex64], omega: &SiegelMatrix) -> Result<()> {
    if z.len() != omega.dim() {
        return Err(Error::Input(format!("point has {} coordinates, expected {}", z.len(), omega.dim())));
    }
    if z.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
        return Err(Error::Input("non-finite point".into()));
    }
    Ok(())
}

/// Theta with the scale factor `exp(π cᵀYc)` kept separate. The truncation
/// error of `reduced` is at most `tol`.
pub fn theta_scaled(z: &[Complex64], omega: &SiegelMatrix, tol: f64) -> Result<ThetaValue> {
    check_point(z, omega)?;
    let r = omega.radius(tol)?;
    let c = omega.centre(z);
    let x: Vec<f64> = z.iter().map(|w| w.re).collect();
    let g = omega.dim();
    let ycy: f64 = (0..g).map(|i| (0..g).map(|j| c[i] * omega.im[(i, j)] * c[j]).sum::<f64>()).sum();
    Ok(ThetaValue { log_scale: PI * ycy, reduced: omega.reduced_sum(&x, &c, r) })
}

/// `θ(z, Ω) = Σ_n exp(πi nᵀΩn + 2πi nᵀz)`, truncated so the neglected terms
/// sum to at most `tol · exp(π (Im z)ᵀ Y⁻¹ (Im z))`.
pub fn theta(z: &[Complex64], omega: &SiegelMatrix, tol: f64) -> Result<Complex64> {
    theta_scaled(z, omega, tol).map(|t| t.value())
}

/// `‖θ‖(z) = (det Y)^{1/4} exp(-π (Im z)ᵀY⁻¹(Im z)) |θ(z)|`.
pub fn theta_norm(z: &[Complex64], omega: &SiegelMatrix) -> Result<f64> {
    let t = theta_scaled(z, omega, DEFAULT_TOL)?;
    Ok((0.25 * omega.log_det_im).exp() * t.reduced.norm())
}

/// Split a unit-cube point into `(α, β)`.
fn split(u: &[f64], g: usize) -> (&[f64], &[f64]) {
    (&u[..g], &u[g..2 * g])
}

/// `x = α + Xβ`, the real part of `α + Ωβ`; its imaginary part is `Yβ`.
fn real_part(omega: &SiegelMatrix, alpha: &[f64], beta: &[f64]) -> Vec<f64> {
    let g = omega.dim();
    (0..g).map(|i| alpha[i] + (0..g).map(|j| omega.re[(i, j)] * beta[j]).sum::<f64>()).collect()
}

/// Monte Carlo value of `∫_{A_Ω} ‖θ‖² dμ_H`, which should be `2^{-g/2}`.
pub fn l2_norm_check(omega: &SiegelMatrix, mc: &McConfig) -> Result<Estimate> {
    let g = omega.dim();
    let r = omega.radius(mc.tol)?;
    let scale = (0.5 * omega.log_det_im).exp();
    Ok(mc::integrate(2 * g, mc, |u| {
        let (alpha, beta) = split(u, g);
        scale * omega.reduced_sum(&real_part(omega, alpha, beta), beta, r).norm_sqr()
    }))
}

/// One factor of a product fundamental domain for `Z^d`.
#[derive(Debug, Clone)]
pub enum Cell {
    CenteredBox(usize),
    UnitBox(usize),
    /// Exact Voronoi cell of a Gram matrix; `gram` is that matrix in floats.
    Voronoi { polytope: Polytope, relevant: Vec<Vec<i64>>, gram: Vec<Vec<f64>> },
}

impl Cell {
    pub fn voronoi(lat: &GramLattice) -> Result<Cell> {
        let cell = tropical::voronoi_cell(lat)?;
        Ok(Cell::Voronoi { polytope: cell.polytope, relevant: cell.relevant, gram: lat.to_f64() })
    }

    /// Voronoi cell of a float matrix, after rounding its entries to
    /// multiples of `2^-30`.
    pub fn voronoi_f64(y: &[Vec<f64>]) -> Result<Cell> {
        let den = BigInt::from(1u64 << 30);
        let z = y
            .iter()
            .map(|r| r.iter().map(|&x| Rational::new(BigInt::from((x * (1u64 << 30) as f64).round() as i64), den.clone())).collect())
            .collect();
        Self::voronoi(&GramLattice::new(z)?)
    }

    pub fn dim(&self) -> usize {
        match self {
            Cell::CenteredBox(d) | Cell::UnitBox(d) => *d,
            Cell::Voronoi { polytope, .. } => polytope.dim,
        }
    }

    fn domain(&self) -> Domain<'_> {
        match self {
            Cell::CenteredBox(d) => Domain::CenteredBox(*d),
            Cell::UnitBox(d) => Domain::UnitBox(*d),
            Cell::Voronoi { polytope, .. } => Domain::Polytope(polytope),
        }
    }

    /// Maps a unit-cube point to a uniform point of the cell.
    fn place(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Cell::UnitBox(_) => out.copy_from_slice(u),
            Cell::CenteredBox(_) => out.iter_mut().zip(u).for_each(|(o, x)| *o = x - 0.5),
            Cell::Voronoi { relevant, gram, .. } => {
                out.iter_mut().zip(u).for_each(|(o, x)| *o = x - 0.5);
                tropical::reduce_to_cell(out, relevant, gram);
            }
        }
    }
}

/// Product `W = W_1 × ... × W_k` of fundamental domains.
#[derive(Debug, Clone)]
pub struct FundamentalDomain {
    pub cells: Vec<Cell>,
}

impl FundamentalDomain {
    pub fn centered_box(g: usize) -> Self {
        FundamentalDomain { cells: vec![Cell::CenteredBox(g)] }
    }

    pub fn dim(&self) -> usize {
        self.cells.iter().map(Cell::dim).sum()
    }

    fn place(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        let mut at = 0;
        for c in &self.cells {
            let d = c.dim();
            c.place(&u[at..at + d], &mut out[at..at + d]);
            at += d;
        }
        out
    }

    /// `I_W(Y) = ∫_W βᵀYβ dβ`.
    pub fn moment(&self, y: &DMatrix<f64>) -> f64 {
        let domain = Domain::Product(self.cells.iter().map(Cell::domain).collect());
        tropical::moment_over_f64(&domain, &to_rows(y))
    }
}

/// `∫_{F(W,Ω)} log |θ| dμ`, sampling `α` uniformly in a unit box and `β`
/// in `W`. Pointwise `log |θ(α + Ωβ)| = π βᵀYβ + log |θ̃|`, which stays
/// bounded as `Y` degenerates when `W` is adapted to it.
pub fn mean_log_theta(omega: &SiegelMatrix, w: &FundamentalDomain, mc: &McConfig) -> Result<Estimate> {
    let g = omega.dim();
    if w.dim() != g {
        return Err(Error::Input(format!("domain has dimension {}, expected {g}", w.dim())));
    }
    let r = omega.radius(mc.tol)?;
    Ok(mc::integrate(2 * g, mc, |u| {
        let (alpha, b) = split(u, g);
        let beta = w.place(b);
        let quad: f64 = (0..g).map(|i| (0..g).map(|j| beta[i] * omega.im[(i, j)] * beta[j]).sum::<f64>()).sum();
        PI * quad + omega.reduced_sum(&real_part(omega, alpha, &beta), &beta, r).norm().ln()
    }))
}

/// The I-invariant of `A_Ω` from a fundamental domain `F(W, Ω)`:
/// `2I = -(g/2) log 2 - ½ log det Y + 2π I_W(Y) - 2 ∫ log |θ|`.
pub fn i_invariant_over(omega: &SiegelMatrix, w: &FundamentalDomain, mc: &McConfig) -> Result<Estimate> {
    let g = omega.dim() as f64;
    let two_i = mean_log_theta(omega, w, mc)?
        .affine(-2.0, -0.5 * g * LN_2 - 0.5 * omega.log_det_im + 2.0 * PI * w.moment(&omega.im));
    Ok(two_i.affine(0.5, 0.0))
}

/// The I-invariant with `W` the centered unit box.
pub fn i_invariant(omega: &SiegelMatrix, mc: &McConfig) -> Result<Estimate> {
    i_invariant_over(omega, &FundamentalDomain::centered_box(omega.dim()), mc)
}

/// `log |Π_{k≥1} (1 - q^k)|`.
pub fn euler_product_log(q: Complex64) -> f64 {
    let mut acc = 0.0;
    let mut p = q;
    while p.norm() > 1e-18 {
        acc += (Complex64::new(1.0, 0.0) - p).norm().ln();
        p *= q;
    }
    acc
}

/// I-invariant of an elliptic curve `C/(Z + τZ)` in closed form, from the
/// product expansion of theta.
pub fn elliptic_i_invariant(tau: Complex64) -> f64 {
    let y = tau.im;
    let q = (Complex64::new(0.0, 2.0 * PI) * tau).exp();
    0.5 * (-0.5 * LN_2 - 0.5 * y.ln() + PI * y / 6.0 - 2.0 * euler_product_log(q))
}
