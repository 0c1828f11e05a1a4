use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slopelab::theta::{self, default_schedule, McConfig, PeriodFamily, SiegelMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn period_matrices() -> Vec<SiegelMatrix> {
    vec![
        SiegelMatrix::new(&[vec![0.25]], &[vec![0.9]]).unwrap(),
        SiegelMatrix::new(&[vec![0.3, -0.2], vec![-0.2, 0.1]], &[vec![1.1, 0.4], vec![0.4, 0.8]]).unwrap(),
        SiegelMatrix::new(
            &[vec![0.0, 0.5, 0.1], vec![0.5, -0.3, 0.0], vec![0.1, 0.0, 0.2]],
            &[vec![1.3, 0.2, -0.1], vec![0.2, 0.9, 0.3], vec![-0.1, 0.3, 1.0]],
        )
        .unwrap(),
    ]
}

#[test]
fn quasi_periodicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for omega in period_matrices() {
        let g = omega.dim();
        for _ in 0..100 {
            let z: Vec<Complex64> = (0..g).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.8..0.8))).collect();
            let n: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
            let on = omega.apply(&n);
            let w: Vec<Complex64> = (0..g).map(|i| z[i] + on[i] + rng.gen_range(-3..=3) as f64).collect();
            let (a, b) = (theta::theta_norm(&z, &omega).unwrap(), theta::theta_norm(&w, &omega).unwrap());
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn modular_invariance() {
    let mc = McConfig::new(40_000, 5).unwrap();
    let tau = c(0.2, 0.9);
    let i = |t: Complex64| {
        let om = SiegelMatrix::new(&[vec![t.re]], &[vec![t.im]]).unwrap();
        theta::i_invariant(&om, &mc).unwrap()
    };
    let base = i(tau);
    for other in [i(tau + 1.0), i(-1.0 / tau)] {
        assert!((base.value - other.value).abs() <= 3.0 * base.sigma.hypot(other.sigma) + 1e-4, "{base:?} vs {other:?}");
    }
}

#[test]
fn l2_normalization() {
    let mc = McConfig::new(20_000, 8).unwrap();
    for omega in period_matrices() {
        let target = 2f64.powf(-(omega.dim() as f64) / 2.0);
        let e = theta::l2_norm_check(&omega, &mc).unwrap();
        assert!(e.value > 0.0);
        assert!((e.value - target).abs() <= (3.0 * e.sigma).max(0.01 * target), "{e:?} vs {target}");
    }
}

#[test]
fn i_invariant_is_positive() {
    let mc = McConfig::new(10_000, 2).unwrap();
    for omega in period_matrices() {
        assert!(theta::i_invariant(&omega, &mc).unwrap().value > 0.0);
    }
}

#[test]
fn tate_scan_is_cauchy() {
    let mc = McConfig::new(20_000, 4).unwrap();
    let scan = theta::degeneration_scan(&PeriodFamily::tate(c(0.0, 1.0)), &default_schedule(), &mc).unwrap();
    let h: Vec<f64> = scan.rows.iter().map(|r| r.h).collect();
    // Rows start at t = 1e-2; k >= 3 starts at the second row.
    let diffs: Vec<f64> = h.windows(2).skip(1).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs.windows(2).all(|d| d[1] <= d[0]), "{diffs:?}");
}

#[test]
fn fiber_integral_continuity() {
    let mc = McConfig::new(20_000, 6).unwrap();
    let f = PeriodFamily::tate(c(0.0, 1.0));
    let vals: Vec<f64> = (3..=7)
        .map(|k| theta::log_theta_fiber_integral(&f, c(10f64.powi(-k), 0.0), &mc).unwrap().value)
        .collect();
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    assert!(diffs.iter().all(|d| *d < 1e-3), "{vals:?}");
    let rotated = theta::log_theta_fiber_integral(&f, c(0.0, 1e-6), &mc).unwrap();
    assert!((rotated.value - vals[3]).abs() < 3.0 * rotated.sigma + 1e-3);
}
