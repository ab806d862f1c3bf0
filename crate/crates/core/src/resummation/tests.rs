use std::sync::OnceLock;

use num_bigint::BigInt;

use super::*;
use crate::exact_poly::rat;
use crate::rspe::{reindex_to_g, rspe_generate};

fn beta_series() -> &'static Vec<BigRational> {
    static S: OnceLock<Vec<BigRational>> = OnceLock::new();
    S.get_or_init(|| rspe_generate(38).unwrap().a)
}

fn g_series() -> Vec<BigRational> {
    reindex_to_g(beta_series()).unwrap().coeffs
}

fn factorials(n: usize) -> Vec<BigRational> {
    let mut out = Vec::new();
    let mut f = BigInt::one();
    for k in 0..n {
        if k > 0 {
            f *= k;
        }
        out.push(BigRational::from_integer(f.clone()));
    }
    out
}

fn ei(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..400 {
        term *= x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add < 1e-18 * sum {
            break;
        }
    }
    EULER + x.ln() + sum
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    rec(f, a, b, f(a), f(m), f(b), whole, tol, depth)
}

/// PV of `∫₀^∞ e^{−u/β}/(1 − u) du/β` by folding about `u = 1` and adaptive
/// Simpson on the pieces.
fn pv_oracle(beta: f64) -> f64 {
    let folded = |s: f64| {
        if s == 0.0 {
            // limit of (e^{−(1−s)/β} − e^{−(1+s)/β})/(βs)
            2.0 * (-1.0 / beta).exp() / (beta * beta)
        } else {
            ((-(1.0 - s) / beta).exp() - (-(1.0 + s) / beta).exp()) / (beta * s)
        }
    };
    let outer = |u: f64| (-u / beta).exp() / (beta * (1.0 - u));
    let near = simpson(&folded, 0.0, 1.0, 1e-14, 50);
    let far = simpson(&outer, 2.0, 2.0 + 80.0 * beta, 1e-16, 50);
    near + far
}

#[test]
fn borel_examples() {
    let b = borel_transform(&[rat(2, 1)], LeroyOrder::Half).unwrap();
    assert_eq!(b.b, vec![2.0]);

    let b = borel_transform(&[rat(2, 1), rat(0, 1), rat(-1, 18)], LeroyOrder::Half).unwrap();
    assert_eq!(b.exact.unwrap(), vec![rat(2, 1), rat(0, 1), rat(-1, 18)]);

    let b = borel_transform(&factorials(12), LeroyOrder::One).unwrap();
    assert!(b.b.iter().all(|&v| v == 1.0));

    let b = borel_transform(&[rat(0, 1), rat(1, 1), rat(0, 1), rat(1, 1)], LeroyOrder::Half).unwrap();
    assert!(b.exact.is_none());
    assert!((b.b[1] - 2.0 / PI.sqrt()).abs() < 1e-15);
    assert!((b.b[3] - 1.0 / (0.75 * PI.sqrt())).abs() < 1e-15);

    assert!(borel_transform(&[], LeroyOrder::One).is_err());
    assert!(matches!("1/3".parse::<LeroyOrder>(), Err(Error::UnsupportedOrder(_))));
}

#[test]
fn half_order_in_beta_equals_first_order_in_g() {
    let b = borel_transform(beta_series(), LeroyOrder::Half).unwrap().exact.unwrap();
    let g = borel_transform(&g_series(), LeroyOrder::One).unwrap().exact.unwrap();
    for (n, gn) in g.iter().enumerate() {
        assert_eq!(&b[2 * n], gn);
        if 2 * n + 1 < b.len() {
            assert!(b[2 * n + 1].is_zero());
        }
    }
}

#[test]
fn pade_examples() {
    let ones = borel_transform(&factorials(5), LeroyOrder::One).unwrap();
    let p = pade_fit(&ones, 0, 1).unwrap();
    assert_eq!(p.denominator, vec![1.0, -1.0]);
    assert_eq!(p.poles.len(), 1);
    assert!((p.poles[0].t - 1.0).norm() < 1e-15);
    assert!((p.poles[0].residue + 1.0).norm() < 1e-15);

    let c = borel_transform(&[rat(2, 1)], LeroyOrder::One).unwrap();
    let p = pade_fit(&c, 0, 0).unwrap();
    assert_eq!(p.numerator, vec![2.0]);
    assert!(p.poles.is_empty());

    assert!(matches!(pade_fit(&ones, 1, 2), Err(Error::PadeDegenerate { l: 1, m: 2 })));
    assert!(matches!(pade_fit(&ones, 3, 3), Err(Error::Precondition(_))));
    assert_eq!(default_orders(20), (9, 10));
    assert_eq!(default_orders(21), (10, 10));
}

#[test]
fn float_pade_matches_exact() {
    let g = g_series();
    let exact = borel_transform(&g[..20], LeroyOrder::One).unwrap();
    let mut float = exact.clone();
    float.exact = None;
    let a = pade_fit(&exact, 4, 5).unwrap();
    let b = pade_fit(&float, 4, 5).unwrap();
    assert!(a.exact && !b.exact);
    for t in [0.5, 2.0, 4.0] {
        assert!((a.eval_real(t) - b.eval_real(t)).abs() < 1e-8 * a.eval_real(t).abs());
    }
}

#[test]
fn pade_reproduces_series_and_pole_data() {
    let borel = borel_transform(&g_series()[..20], LeroyOrder::One).unwrap();
    let p = pade_fit(&borel, 9, 10).unwrap();
    assert_eq!(p.denominator[0], 1.0);
    assert_eq!(p.poles.len(), 10);
    for pole in &p.poles {
        assert!(horner(&p.denominator, pole.t).norm() < 1e-8 * horner_deriv(&p.denominator, pole.t).norm() * pole.t.norm());
    }
    // Taylor coefficients of P/Q agree with b through order L + M
    let t = 1e-2;
    let series: f64 = borel.b.iter().take(20).rev().fold(0.0, |acc, &b| acc * t + b);
    assert!((p.eval_real(t) - series).abs() < 1e-14);

    let near = p.nearest_pole().unwrap();
    assert!(near.t.re > 0.0 && near.t.im.abs() < 0.1 * near.t.re, "{near:?}");
}

#[test]
fn boundary_value_examples() {
    let ones = borel_transform(&factorials(3), LeroyOrder::One).unwrap();
    let p = pade_fit(&ones, 0, 1).unwrap();
    let eps = default_eps_schedule();
    let v = boundary_value(&p, 2.0, &eps).unwrap();
    assert!((v.value - Complex64::new(-1.0, 0.0)).norm() < 1e-10);

    assert!(matches!(boundary_value(&p, 1.0, &eps), Err(Error::PoleProximity { .. })));

    let t = 1.0 + 1e-3;
    let v = boundary_value(&p, t, &eps).unwrap();
    // ε/|t − 1| reaches 0.1, so extrapolation only removes most of the offset
    assert!((v.value.re + 1000.0).abs() < 0.1, "{v:?}");
    assert!(v.value.im.abs() < 0.1 && v.error < 0.1);
    assert!(p.eval(Complex64::new(t, eps[0])).im > 0.0);

    assert!(boundary_value(&p, 2.0, &[1e-5, 1e-4]).is_err());
    assert!(boundary_value(&p, -1.0, &eps).is_err());
}

#[test]
fn nevanlinna_examples() {
    let r = 0.09;
    for beta in [0.1, 0.29, 0.31, 0.5] {
        let inside = nevanlinna_check(Complex64::new(beta, 0.0), r, LeroyOrder::Half).unwrap();
        assert_eq!(inside, beta * beta < r);
    }
    let rho = 0.2f64;
    let eps = (rho * rho / r).asin();
    let on = |e: f64| Complex64::from_polar(rho, -PI / 4.0 + e / 2.0);
    let w = (on(eps) * on(eps)).inv().re;
    assert!((w - 1.0 / r).abs() < 1e-12 * w);
    assert!(nevanlinna_check(on(eps + 1e-6), r, LeroyOrder::Half).unwrap());
    assert!(!nevanlinna_check(on(eps - 1e-6), r, LeroyOrder::Half).unwrap());

    let vertical = Complex64::from_polar(0.1, PI / 4.0);
    assert!(!nevanlinna_check(vertical, 1e6, LeroyOrder::Half).unwrap());
    assert!(nevanlinna_check(Complex64::new(0.0, 0.0), 1.0, LeroyOrder::Half).is_err());
    assert!(nevanlinna_check(Complex64::new(0.1, 0.0), 0.0, LeroyOrder::Half).is_err());
}

#[test]
fn constant_series_is_reproduced() {
    for q in [LeroyOrder::Half, LeroyOrder::One] {
        for beta in [0.05, 0.1, 0.3] {
            let r = distributional_sum(&[rat(2, 1)], beta, q, 0, 0, &QuadConfig::default()).unwrap();
            assert!((r.f - 2.0).abs() < 1e-12, "q = {q}, β = {beta}: {}", r.f);
            assert_eq!(r.d, Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn geometric_borel_matches_oracles() {
    let coeffs = factorials(4);
    for beta in [0.05, 0.1, 0.2] {
        let r = distributional_sum(&coeffs, beta, LeroyOrder::One, 0, 1, &QuadConfig::default()).unwrap();
        let exact = (-1.0 / beta).exp() * ei(1.0 / beta) / beta;
        let pv = pv_oracle(beta);
        assert!((pv - exact).abs() < 1e-9 * exact, "oracles disagree at {beta}: {pv} {exact}");
        assert!((r.f - pv).abs() < 1e-8, "β = {beta}: {} vs {pv}", r.f);
        let width = 2.0 * PI * (-1.0 / beta).exp() / beta;
        assert!((r.d.norm() / width - 1.0).abs() < 0.01);
        // residue −1 at t = 1 puts the upper sum above the axis
        assert!(r.phi_upper.im > 0.0);
        assert_eq!(r.d.re, 0.0);
        assert_eq!(r.phi_lower, r.phi_upper.conj());
    }
}

#[test]
fn nonsimple_real_pole_is_rejected() {
    // B = 1/(1 − t)², a double pole at t = 1
    let coeffs: Vec<BigRational> = factorials(5).iter().enumerate().map(|(n, f)| f * BigInt::from(n + 1)).collect();
    let err = distributional_sum(&coeffs, 0.1, LeroyOrder::One, 0, 2, &QuadConfig::default()).unwrap_err();
    assert!(matches!(err, Error::UnsupportedPole(_)), "{err}");
}

#[test]
fn accuracy_failure_is_reported() {
    let cfg = QuadConfig {
        tol: 1e-30,
        max_panels: 3,
        ..Default::default()
    };
    let err = distributional_sum(&factorials(4), 0.1, LeroyOrder::One, 0, 1, &cfg).unwrap_err();
    assert!(matches!(err, Error::Accuracy { .. }), "{err}");
}

#[test]
fn working_radius_gate() {
    let cfg = QuadConfig {
        working_radius: Some(0.01),
        ..Default::default()
    };
    assert!(distributional_sum(&[rat(1, 1)], 0.05, LeroyOrder::Half, 0, 0, &cfg).is_ok());
    assert!(matches!(
        distributional_sum(&[rat(1, 1)], 0.2, LeroyOrder::Half, 0, 0, &cfg),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn henon_heiles_both_orders_agree() {
    let g = g_series();
    let (l, m) = default_orders(20);
    for beta in [0.1, 0.2] {
        let half = distributional_sum(&beta_series()[..39], beta, LeroyOrder::Half, 2 * l, 2 * m, &QuadConfig::default()).unwrap();
        let one = distributional_sum(&g[..20], beta * beta, LeroyOrder::One, l, m, &QuadConfig::default()).unwrap();
        assert!((half.f - one.f).abs() < 1e-10, "β = {beta}: {} {}", half.f, one.f);
        assert!((half.d - one.d).norm() <= 1e-6 * one.d.norm() + 1e-300);
        assert!(half.d.im < 0.0);
        assert!((half.f - (2.0 - beta * beta / 18.0)).abs() < 1e-3);
    }
}

#[test]
fn henon_heiles_pade_stability() {
    let g = g_series();
    let rows = pade_stability(&g[..20], LeroyOrder::One, &[0.01, 0.0225, 0.04, 0.0625], 8, 9, &QuadConfig::default()).unwrap();
    for r in &rows {
        assert!(r.difference < 1e-6, "{r:?}");
    }
    let radius = working_radius(&rows, 1e-6, LeroyOrder::One).unwrap();
    assert!(radius >= 0.0625);
}

#[test]
fn remainder_shape() {
    // Σ n! βⁿ with q = 1 has remainder ~ N! βᴺ; in the order-½ normalisation
    // Γ(N/2+1) the fitted σ absorbs the difference, so just check the fit runs
    let coeffs: Vec<f64> = (0..30).map(|n| (1..=n).map(|k| k as f64).product()).collect();
    let beta: f64 = 0.05;
    let f = (-1.0 / beta).exp() * ei(1.0 / beta) / beta;
    let fit = remainder_fit(&coeffs, beta, f, 4..16).unwrap();
    assert!(fit.a > 0.0 && fit.sigma > 0.0);
    assert!(fit.points.len() >= 10);
    assert!(remainder_fit(&coeffs, beta, f, 4..5).is_err());
}
