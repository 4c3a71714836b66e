//! Randomized algebraic invariants of the pairing and the germ calculus.

use proptest::prelude::*;

use blct_surf_core::lattice::{DivisorClass, ModelParams, SurfaceModel};
use blct_surf_core::lc_local::{germ_intersection, GermBranch, GermConfiguration};
use blct_surf_core::rat::{rat, Rat};

fn model_r7() -> SurfaceModel {
    SurfaceModel::build(ModelParams::standard(7, rat(1, 100)).unwrap()).unwrap()
}

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

fn arb_class(rank: usize) -> impl Strategy<Value = DivisorClass> {
    proptest::collection::vec(arb_rat(), rank).prop_map(DivisorClass::from_coeffs)
}

proptest! {
    #[test]
    fn pairing_is_symmetric_and_bilinear(
        a in arb_class(9),
        b in arb_class(9),
        c in arb_class(9),
        s in arb_rat(),
    ) {
        let m = model_r7();
        let ab = m.intersect(&a, &b).unwrap();
        prop_assert_eq!(ab.clone(), m.intersect(&b, &a).unwrap());
        let lhs = m.intersect(&a.add_scaled(&b, &s), &c).unwrap();
        let rhs = m.intersect(&a, &c).unwrap() + s * m.intersect(&b, &c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rational_string_round_trip(n in -9_000_000_000i64..9_000_000_000, d in 1i64..=1_000_000) {
        let r = rat(n, d);
        let back: Rat = r.to_string().parse().unwrap();
        prop_assert_eq!(r, back);
    }

    #[test]
    fn germ_intersection_symmetric(
        tail_i in 0usize..3,
        tail_j in 0usize..3,
        wi in arb_rat(),
        wj in arb_rat(),
    ) {
        // Two branches sharing a chain prefix of random lengths.
        let chain = ["p", "q", "s"];
        let edges = vec![
            ("p".to_string(), "q".to_string()),
            ("q".to_string(), "s".to_string()),
        ];
        let path = |len: usize| -> Vec<String> {
            chain[..=len].iter().map(|s| s.to_string()).collect()
        };
        let branches = vec![
            GermBranch { path: path(tail_i), coefficient: wi.abs() },
            GermBranch { path: path(tail_j), coefficient: wj.abs() },
        ];
        let cfg = GermConfiguration::new(edges, branches).unwrap();
        let ij = germ_intersection(&cfg, 0, 1).unwrap();
        prop_assert_eq!(ij.clone(), germ_intersection(&cfg, 1, 0).unwrap());
        prop_assert_eq!(ij, Rat::int(1 + tail_i.min(tail_j) as i64));
    }
}
