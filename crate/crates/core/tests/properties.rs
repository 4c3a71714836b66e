//! Property tests pairing each exact computation with an independent
//! oracle route: Darboux sums against the profile integral, pointwise
//! volumes against the chamber quadratics, and threshold orderings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blct_surf_core::lattice::{CurveLabel, ModelParams, PointLabel, SurfaceModel};
use blct_surf_core::positivity::{pseff_threshold, seshadri, volume, ThresholdOutcome};
use blct_surf_core::rat::{rat, Rat};
use blct_surf_core::vanishing::volume_profile;

fn model_r7() -> SurfaceModel {
    SurfaceModel::build(ModelParams::standard(7, rat(1, 100)).unwrap()).unwrap()
}

fn ray_labels() -> Vec<CurveLabel> {
    vec![
        CurveLabel::PiF,
        CurveLabel::C,
        CurveLabel::E(PointLabel::Finite(1)),
        CurveLabel::F(PointLabel::Finite(2)),
        CurveLabel::PiG,
    ]
}

/// Random rational grid over [0, tau] including both endpoints.
fn random_grid(rng: &mut ChaCha8Rng, tau: &Rat, cells: usize) -> Vec<Rat> {
    let mut cuts: Vec<Rat> = (0..cells)
        .map(|_| {
            let den = rng.gen_range(50..=400i64);
            let num = rng.gen_range(0..=den);
            tau * rat(num, den)
        })
        .collect();
    cuts.push(Rat::zero());
    cuts.push(tau.clone());
    cuts.sort();
    cuts.dedup();
    cuts
}

#[test]
fn darboux_sums_bracket_profile_integral() {
    let m = model_r7();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for label in ray_labels() {
        let z = m.class_of(label).unwrap();
        let profile = volume_profile(&m, m.neg_k_beta(), &z).unwrap();
        let exact = profile.integral();
        for _ in 0..3 {
            let grid = random_grid(&mut rng, &profile.tau, 24);
            let mut lower = Rat::zero();
            let mut upper = Rat::zero();
            for w in grid.windows(2) {
                let width = &w[1] - &w[0];
                // Independent pointwise route: a fresh decomposition at
                // each grid point, not the chamber-walk quadratics.
                let vol_left = volume(&m, &m.neg_k_beta().add_scaled(&z, &-&w[0])).unwrap();
                let vol_right = volume(&m, &m.neg_k_beta().add_scaled(&z, &-&w[1])).unwrap();
                // The profile is non-increasing, so left/right endpoint
                // values give upper/lower Darboux sums.
                assert!(vol_right <= vol_left, "monotonicity at {label}");
                lower = lower + &width * vol_right;
                upper = upper + &width * vol_left;
            }
            assert!(
                lower <= exact && exact <= upper,
                "Darboux bracket for {label}"
            );
        }
    }
}

#[test]
fn profile_matches_pointwise_volume() {
    let m = model_r7();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for label in ray_labels() {
        let z = m.class_of(label).unwrap();
        let profile = volume_profile(&m, m.neg_k_beta(), &z).unwrap();
        for _ in 0..40 {
            let den = rng.gen_range(10..=1000i64);
            let num = rng.gen_range(0..=den);
            let x = &profile.tau * rat(num, den);
            let direct = volume(&m, &m.neg_k_beta().add_scaled(&z, &-&x)).unwrap();
            assert_eq!(profile.value_at(&x), direct, "x = {x} along {label}");
        }
        // Just past tau the volume is zero.
        let past = &profile.tau + rat(1, 997);
        assert_eq!(
            volume(&m, &m.neg_k_beta().add_scaled(&z, &-&past)).unwrap(),
            Rat::zero()
        );
    }
}

#[test]
fn sigma_never_exceeds_tau() {
    for (r, beta) in [(7u32, rat(1, 100)), (8, rat(1, 37)), (11, rat(1, 200))] {
        let m = SurfaceModel::build(ModelParams::standard(r, beta).unwrap()).unwrap();
        for rec in m.catalog() {
            let sigma = seshadri(&m, m.neg_k_beta(), &rec.cls).unwrap();
            let tau = match pseff_threshold(&m, m.neg_k_beta(), &rec.cls).unwrap() {
                ThresholdOutcome::Value(v) => v,
                ThresholdOutcome::Unbounded => continue,
            };
            assert!(sigma <= tau, "sigma > tau against {}", rec.label);
        }
    }
}

#[test]
fn volume_weakly_decreasing_in_beta_direction() {
    // Spot check of ray monotonicity on coarse rational grids for other
    // base points than the log anticanonical class.
    let m = model_r7();
    let l = m.parse_class("2*f + 3*g - e1 - e2").unwrap();
    let z = m.class_of(CurveLabel::PiG).unwrap();
    let mut prev = volume(&m, &l).unwrap();
    for k in 1..=40 {
        let x = rat(k, 10);
        let v = volume(&m, &l.add_scaled(&z, &-&x)).unwrap();
        assert!(v <= prev);
        prev = v;
    }
}
