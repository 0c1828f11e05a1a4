#![allow(dead_code)]

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slopelab::corpus;
use slopelab::{PolarizedWeightedGraph, Rational};

pub fn graph_from_seed(seed: u64) -> PolarizedWeightedGraph {
    corpus::random_graph(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn graphs() -> impl Strategy<Value = PolarizedWeightedGraph> {
    any::<u64>().prop_map(graph_from_seed)
}

/// Positive rationals `p/q` with `1 <= p, q <= 12`.
pub fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=12).prop_map(|(p, q)| Rational::new(BigInt::from(p), BigInt::from(q)))
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}
