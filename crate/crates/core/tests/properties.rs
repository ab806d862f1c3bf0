use std::f64::consts::PI;

use henon_core::exact_poly::rat;
use henon_core::resummation::{distributional_sum, LeroyOrder, QuadConfig};
use henon_core::scaled_hamiltonian::{
    assemble, coercivity_check, numerical_range_check, sector_membership, BasisTruncation, ScalingParams,
};
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

/// `(|β|, arg β, Im θ)` strictly inside the parallelogram.
fn sector_point() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01f64..0.24, 0.02f64..PI - 0.02, 0.05f64..0.95).prop_map(|(rho, s, frac)| {
        let t = -s / 5.0 + frac * PI / 5.0;
        (rho, s, t)
    })
}

fn order() -> impl Strategy<Value = LeroyOrder> {
    prop_oneof![Just(LeroyOrder::Half), Just(LeroyOrder::One)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn range_and_coercivity_hold_in_sector((rho, s, t) in sector_point(), seed in any::<u64>()) {
        prop_assume!(sector_membership(s, t));
        let p = ScalingParams::polar(rho, s, Complex64::new(0.0, t)).unwrap();
        let h = assemble(p, BasisTruncation::new(8)).unwrap();
        let range = numerical_range_check(&h, 60, seed).unwrap();
        prop_assert!(range.passed, "violation {}", range.max_violation);
        let coercive = coercivity_check(&h, 60, seed).unwrap();
        prop_assert!(coercive.passed, "slack {}", coercive.min_slack);
    }

    #[test]
    fn parity_and_conjugation_are_exact(
        beta_re in -0.5f64..0.5,
        beta_im in -0.5f64..0.5,
        theta_re in -0.5f64..0.5,
        theta_im in -0.6f64..0.6,
    ) {
        let beta = Complex64::new(beta_re, beta_im);
        let theta = Complex64::new(theta_re, theta_im);
        let tr = BasisTruncation::new(6);
        let h = assemble(ScalingParams::new(beta, theta).unwrap(), tr).unwrap();
        let minus = assemble(ScalingParams::new(-beta, theta).unwrap(), tr).unwrap();
        let conj = assemble(ScalingParams::new(beta.conj(), theta.conj()).unwrap(), tr).unwrap();
        let parity = h.x2_parity();
        for i in 0..tr.dim() {
            for j in 0..tr.dim() {
                prop_assert_eq!(h.entry(i, j), h.entry(j, i));
                prop_assert_eq!(h.entry(i, j) * (parity[i] * parity[j]), minus.entry(i, j));
                prop_assert_eq!(h.entry(i, j).conj(), conj.entry(i, j));
            }
        }
    }

    #[test]
    fn constant_series_sums_to_itself(num in -50i64..50, den in 1i64..20, beta in 0.01f64..1.0, q in order()) {
        let c = rat(num, den);
        let r = distributional_sum(std::slice::from_ref(&c), beta, q, 0, 0, &QuadConfig::default()).unwrap();
        let expect = num as f64 / den as f64;
        prop_assert!((r.f - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        prop_assert_eq!(r.d, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sum_is_real_with_imaginary_discontinuity(a in 1i64..4, beta in 0.05f64..0.4) {
        // ã_n = n!/a^n: B(t) = a/(a − t), one pole on the path with residue −a
        let coeffs: Vec<BigRational> = (0..4u32)
            .map(|n| BigRational::from_integer((1..=n as i64).product::<i64>().into()) / BigRational::from_integer(a.pow(n).into()))
            .collect();
        let r = distributional_sum(&coeffs, beta, LeroyOrder::One, 0, 1, &QuadConfig::default()).unwrap();
        prop_assert_eq!(r.d.re, 0.0);
        prop_assert!(r.d.im > 0.0);
        prop_assert_eq!(r.phi_lower, r.phi_upper.conj());
        prop_assert_eq!(r.f, r.phi_upper.re);
    }

    #[test]
    fn beta_and_g_pipelines_agree(g1 in -6i64..-1, g2 in 1i64..8, beta in 0.05f64..0.5) {
        // g-series 1, g1 g, g2 g²; β-series with zero odd orders
        let zero = rat(0, 1);
        let g = [rat(1, 1), rat(g1, 1), rat(g2, 1)];
        let b = [g[0].clone(), zero.clone(), g[1].clone(), zero, g[2].clone()];
        let cfg = QuadConfig::default();
        let one = distributional_sum(&g, beta * beta, LeroyOrder::One, 1, 1, &cfg);
        let half = distributional_sum(&b, beta, LeroyOrder::Half, 2, 2, &cfg);
        prop_assume!(one.is_ok() && half.is_ok());
        let (one, half) = (one.unwrap(), half.unwrap());
        prop_assert!((one.f - half.f).abs() < 1e-10, "{} vs {}", one.f, half.f);
    }
}
