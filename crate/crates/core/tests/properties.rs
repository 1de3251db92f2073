//! Randomized invariants over the public API.

use std::sync::OnceLock;

use proptest::prelude::*;

use erltel_core::algebra::table::{generate_table, truncation_for};
use erltel_core::bessel::{bessel_i, bessel_j};
use erltel_core::density::{self, ModelParams, Region};
use erltel_core::mc::{child_rng, sample_position};
use erltel_core::UFunctionTable;

fn shared_table() -> &'static UFunctionTable {
    static TABLE: OnceLock<UFunctionTable> = OnceLock::new();
    TABLE.get_or_init(|| generate_table(2, 4, truncation_for(9.0, 10)).unwrap())
}

proptest! {
    #[test]
    fn bessel_j_three_term_recurrence(r in 0.1f64..10.0, k in 1u32..6) {
        let a = bessel_j(k - 1, r).unwrap();
        let b = bessel_j(k + 1, r).unwrap();
        let lhs = a + b;
        let rhs = 2.0 * k as f64 / r * bessel_j(k, r).unwrap();
        // each value carries absolute error ~eps * its own magnitude plus the
        // series' ~1e-18 truncation floor (amplified by 2k/r at small r), so
        // scale by the terms, not the (possibly cancelling) sums
        let scale = a.abs().max(b.abs()).max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale + 1e-15);
    }

    #[test]
    fn bessel_i_three_term_recurrence(r in 0.1f64..10.0, k in 1u32..6) {
        let a = bessel_i(k - 1, r).unwrap();
        let b = bessel_i(k + 1, r).unwrap();
        let lhs = a - b;
        let rhs = 2.0 * k as f64 / r * bessel_i(k, r).unwrap();
        let scale = a.abs().max(b.abs()).max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale + 1e-15);
    }

    #[test]
    fn bessel_j_bounded_by_one(r in 0.0f64..12.0, k in 0u32..6) {
        prop_assert!(bessel_j(k, r).unwrap().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn term_sum_derivatives_match_finite_differences(
        t in 0.8f64..2.5,
        frac in -0.8f64..0.8,
        l in 0usize..4,
        k in 0usize..3,
    ) {
        let y = frac * t;
        let entry = shared_table().entry(l, k).unwrap();
        let h = 1e-5;
        let dt = entry.diff_t().unwrap().eval(t, y);
        let dt_fd = (entry.eval(t + h, y) - entry.eval(t - h, y)) / (2.0 * h);
        prop_assert!((dt - dt_fd).abs() <= 1e-6 * (1.0 + dt.abs()));
        let dy = entry.diff_y().unwrap().eval(t, y);
        let dy_fd = (entry.eval(t, y + h) - entry.eval(t, y - h)) / (2.0 * h);
        prop_assert!((dy - dy_fd).abs() <= 1e-6 * (1.0 + dy.abs()));
    }

    #[test]
    fn sampled_positions_stay_in_the_cone(
        seed in any::<u64>(),
        m in 1u32..6,
        t in 0.1f64..4.0,
    ) {
        let params = ModelParams::unit(m);
        let mut rng = child_rng(seed, 0);
        for _ in 0..64 {
            let s = sample_position(&params, t, &mut rng);
            prop_assert!(s.x.abs() <= params.v * t + 1e-12);
            if !s.alternated {
                // no alternation puts the particle exactly on the cone
                prop_assert_eq!(s.x, params.v * t);
            }
        }
    }

    #[test]
    fn density_scaling_covariance(
        m in 1u32..3,
        lambda in 0.2f64..4.0,
        v in 0.2f64..4.0,
        t in 0.3f64..3.0,
        frac in -0.95f64..0.95,
    ) {
        let x = frac * v * t;
        let params = ModelParams::new(m, lambda, v).unwrap();
        let scaled = density::density(&params, t, x).unwrap();
        let unit = density::density(&ModelParams::unit(m), lambda * t, lambda * x / v).unwrap();
        let expect = lambda / v * unit.continuous;
        prop_assert!(
            (scaled.continuous - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
            "{} vs {}", scaled.continuous, expect
        );
    }

    #[test]
    fn density_is_nonnegative_and_classified(
        m in 1u32..3,
        t in 0.2f64..4.0,
        frac in -1.3f64..1.3,
    ) {
        let params = ModelParams::unit(m);
        let x = frac * t;
        let d = density::density(&params, t, x).unwrap();
        prop_assert!(d.continuous >= 0.0);
        prop_assert!(d.atom_mass >= 0.0);
        if frac.abs() > 1.0 {
            prop_assert_eq!(d.region, Region::Outside);
            prop_assert_eq!(d.continuous, 0.0);
        }
    }

    #[test]
    fn atom_mass_is_a_probability_decreasing_in_t(
        m in 1u32..8,
        t in 0.05f64..5.0,
        dt in 0.01f64..1.0,
    ) {
        let params = ModelParams::unit(m);
        let a = density::atom_mass(&params, t);
        let b = density::atom_mass(&params, t + dt);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }
}
