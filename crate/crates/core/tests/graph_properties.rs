mod common;

use common::*;
use proptest::prelude::*;
use slopelab::graph::BlockKind;
use slopelab::Rational;

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn canonical_degree(g in graphs()) {
        prop_assert_eq!(g.canonical_divisor().degree(), 2 * g.genus() as i64 - 2);
    }

    #[test]
    fn blocks_partition_the_cycles(g in graphs()) {
        let bd = g.blocks();
        prop_assert!(bd.is_tree());
        prop_assert_eq!(bd.blocks.iter().map(|b| b.graph.first_betti()).sum::<usize>(), g.first_betti());
        prop_assert_eq!(bd.blocks.iter().map(|b| b.edges.len()).sum::<usize>(), g.edges().len());
        for b in &bd.blocks {
            prop_assert_eq!(b.graph.genus(), g.genus());
            if g.is_stable() {
                prop_assert!(b.graph.is_stable());
            }
            match b.kind {
                BlockKind::Loop => prop_assert!(b.edges.len() == 1 && g.edges()[b.edges[0]].is_loop()),
                BlockKind::Bridge => prop_assert!(b.edges.len() == 1 && g.bridges()[b.edges[0]]),
                BlockKind::TwoConnected => prop_assert!(b.graph.is_two_connected()),
            }
        }
    }

    #[test]
    fn minimal_model_is_idempotent(g in graphs()) {
        let mm = g.minimal_model().unwrap();
        prop_assert_eq!(mm.minimal_model().unwrap(), mm.clone());
        prop_assert_eq!(mm.genus(), g.genus());
        prop_assert!(mm.is_stable());
        prop_assert_eq!(mm.edge_profile(), g.edge_profile());
        prop_assert_eq!(mm.total_length(), g.total_length());
    }

    #[test]
    fn contraction_shape(g in graphs()) {
        let bridges = g.bridges();
        for e in 0..g.edges().len() {
            let c = g.contract_all_but(e).unwrap();
            prop_assert_eq!(c.graph.edges().len(), 1);
            prop_assert_eq!(c.graph.genus(), g.genus());
            let kept = &c.graph.edges()[0];
            prop_assert_eq!(&kept.length, &g.edges()[e].length);
            prop_assert_eq!(kept.is_loop(), !bridges[e]);
            prop_assert_eq!(c.graph.vertices().len(), if bridges[e] { 2 } else { 1 });
        }
    }

    #[test]
    fn profile_totals(g in graphs()) {
        let p = g.edge_profile();
        let split: Rational = &p.delta0 + p.delta_h.values().sum::<Rational>();
        prop_assert_eq!(&split, &p.delta);
        prop_assert_eq!(&p.delta, &g.total_length());
        for h in p.delta_h.keys() {
            prop_assert!(2 * h <= g.genus());
        }
    }
}
