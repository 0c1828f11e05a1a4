mod common;

use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slopelab::corpus::{random_unimodular, spanning_tree_polynomial};
use slopelab::linalg;
use slopelab::rational::{int, ratio};
use slopelab::tropical::{self, GramLattice};
use slopelab::Rational;

/// Random positive definite Gram matrices `(MᵀM + I)/d` with small entries.
fn lattices() -> impl Strategy<Value = GramLattice> {
    (1usize..=4, any::<u64>()).prop_map(|(b, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<Vec<i64>> = (0..b).map(|_| (0..b).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let den = rng.gen_range(1..=3);
        let z = (0..b)
            .map(|i| {
                (0..b)
                    .map(|j| {
                        let s: i64 = (0..b).map(|k| m[k][i] * m[k][j]).sum();
                        ratio(s + i64::from(i == j), den)
                    })
                    .collect()
            })
            .collect();
        GramLattice::new(z).unwrap()
    })
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn basis_invariance(lat in lattices(), seed in any::<u64>()) {
        let u = random_unimodular(lat.dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let moved = lat.transformed(&u).unwrap();
        prop_assert_eq!(tropical::moment(&moved).unwrap(), tropical::moment(&lat).unwrap());
    }

    #[test]
    fn scaling(lat in lattices(), c in positive_rational()) {
        let i = tropical::moment(&lat).unwrap();
        prop_assert_eq!(tropical::moment(&lat.scaled(&c).unwrap()).unwrap(), i * c);
    }

    #[test]
    fn unit_volume(lat in lattices()) {
        prop_assert_eq!(tropical::voronoi_cell(&lat).unwrap().polytope.volume(), int(1));
    }

    #[test]
    fn matrix_tree(g in graphs()) {
        prop_assume!(g.first_betti() > 0);
        let lat = tropical::cycle_gram(&g).unwrap();
        prop_assert_eq!(linalg::det(lat.matrix()), spanning_tree_polynomial(&g));
    }
}

/// `β ∈ Vor(Z)` iff `βᵀZβ ≤ (β - n)ᵀZ(β - n)` for all lattice vectors `n`.
fn in_cell_by_definition(z: &linalg::QMatrix, beta: &[Rational], reach: i64) -> bool {
    let b = beta.len();
    let norm = |v: &[Rational]| linalg::bilinear(z, v, v);
    let base = norm(beta);
    let mut n = vec![-reach; b];
    loop {
        let diff: Vec<Rational> = beta.iter().zip(&n).map(|(x, &k)| x - int(k)).collect();
        if norm(&diff) < base {
            return false;
        }
        let mut i = 0;
        while i < b && n[i] == reach {
            n[i] = -reach;
            i += 1;
        }
        if i == b {
            return true;
        }
        n[i] += 1;
    }
}

#[test]
fn membership_agrees_with_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let lattices = [
        vec![vec![int(2), int(1)], vec![int(1), int(2)]],
        vec![vec![int(3), int(-1), int(1)], vec![int(-1), int(2), int(0)], vec![int(1), int(0), ratio(5, 2)]],
    ];
    for z in lattices {
        let lat = GramLattice::new(z.clone()).unwrap();
        let cell = tropical::voronoi_cell(&lat).unwrap();
        let (mut inside, mut outside) = (0, 0);
        for _ in 0..1000 {
            let beta: Vec<Rational> = (0..lat.dim())
                .map(|_| Rational::new(BigInt::from(rng.gen_range(-60..=60)), BigInt::from(rng.gen_range(60..=90))))
                .collect();
            let by_cell = cell.contains(&beta);
            assert_eq!(by_cell, in_cell_by_definition(&z, &beta, 3), "{beta:?}");
            if by_cell {
                inside += 1;
            } else {
                outside += 1;
            }
        }
        assert!(inside > 50 && outside > 50);
    }
}
