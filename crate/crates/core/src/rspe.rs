//! Exact Rayleigh–Schrödinger expansion of the level at `E₀ = 2`.
//!
//! Corrections are kept as polynomial factors `ψ_n = P_n e^{−|x|²/2}` in
//! intermediate normalization (`<P₀, P_n> = 0` for `n ≥ 1`), so the recursion
//! stays inside the rationals:
//!
//! ```text
//! a_n = <1, V P_{n−1}>
//! D P_n = Σ_{k=1..n} a_k P_{n−k} − V P_{n−1}
//! ```

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_poly::{format_rational, parse_rational, rational_to_f64, Poly2};
use crate::par;

pub const DEFAULT_BETA_ORDERS: usize = 40;

/// Coefficients `a_s` of `E(β) ~ Σ a_s βˢ` and the corrections that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSeries {
    pub order: usize,
    pub a: Vec<BigRational>,
    pub corrections: Vec<Poly2>,
}

/// The same series in `g = β²`: `ã_n = a_{2n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GSeries {
    pub coeffs: Vec<BigRational>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Sign of `ã_n` for `n = 1..`, as −1, 0 or 1.
    pub signs: Vec<i8>,
    /// Common sign of all `ã_n`, `n ≥ 1`, if there is one.
    pub constant_sign: Option<i8>,
    /// `σ_n = |ã_{n+1}| / ((n+1)|ã_n|)` for `n = 1..`.
    pub ratios: Vec<f64>,
    /// Linear extrapolation of `σ_n` in `1/n` from the last two ratios.
    pub sigma_limit: f64,
    pub ratios_positive: bool,
    pub ratio_max: f64,
}

/// Runs the recursion to order `order` in β.
pub fn rspe_generate(order: usize) -> Result<PerturbationSeries> {
    let mut a = vec![BigRational::from_integer(2.into())];
    let mut corrections = vec![Poly2::one()];
    for n in 1..=order {
        let vp = corrections[n - 1].multiply_by_v();
        let an = vp.gaussian_mean();
        a.push(an);

        let scaled = par::map_range(n, |i| {
            let k = i + 1;
            corrections[n - k].scale(&a[k])
        });
        let mut rhs = Poly2::zero();
        for p in &scaled {
            rhs.add_scaled(p, &BigRational::one());
        }
        rhs.add_scaled(&vp, &-BigRational::one());
        corrections.push(Poly2::solve_hermite(&rhs)?);
    }
    Ok(PerturbationSeries {
        order,
        a,
        corrections,
    })
}

impl PerturbationSeries {
    pub fn to_f64(&self) -> Vec<f64> {
        self.a.iter().map(rational_to_f64).collect()
    }

    /// Partial sum `Σ_{s<n} a_s βˢ`.
    pub fn partial_sum(&self, beta: f64, n: usize) -> f64 {
        self.to_f64()
            .iter()
            .take(n)
            .rev()
            .fold(0.0, |acc, &c| acc * beta + c)
    }
}

/// Compresses a β-series with vanishing odd coefficients into a series in `g = β²`.
pub fn reindex_to_g(beta_coeffs: &[BigRational]) -> Result<GSeries> {
    for (i, c) in beta_coeffs.iter().enumerate().skip(1).step_by(2) {
        if !c.is_zero() {
            return Err(Error::ParityViolation {
                index: i,
                value: format_rational(c),
            });
        }
    }
    Ok(GSeries {
        coeffs: beta_coeffs.iter().step_by(2).cloned().collect(),
    })
}

impl GSeries {
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    /// Expands back to the β-series with zero odd coefficients.
    pub fn to_beta_coeffs(&self) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                out.push(BigRational::zero());
            }
            out.push(c.clone());
        }
        out
    }
}

pub fn growth_diagnostics(g: &GSeries) -> Result<GrowthReport> {
    const MIN_ORDERS: usize = 5;
    let tail = &g.coeffs[1.min(g.coeffs.len())..];
    let nonzero = tail.iter().filter(|c| !c.is_zero()).count();
    if nonzero < MIN_ORDERS {
        return Err(Error::UnderLength {
            needed: MIN_ORDERS,
            have: nonzero,
        });
    }
    let signs: Vec<i8> = tail
        .iter()
        .map(|c| {
            if c.is_zero() {
                0
            } else if c.is_positive() {
                1
            } else {
                -1
            }
        })
        .collect();
    let constant_sign = match signs.first() {
        Some(&s) if s != 0 && signs.iter().all(|&x| x == s) => Some(s),
        _ => None,
    };
    let mut ratios = Vec::new();
    for n in 1..g.coeffs.len() - 1 {
        let (cur, next) = (&g.coeffs[n], &g.coeffs[n + 1]);
        if cur.is_zero() {
            ratios.push(f64::NAN);
            continue;
        }
        let r = (next / cur).abs() / BigRational::from_integer((n as i64 + 1).into());
        ratios.push(rational_to_f64(&r));
    }
    let sigma_limit = match ratios.len() {
        0 => f64::NAN,
        1 => ratios[0],
        k => {
            // σ_n ≈ σ + c/n: eliminate c between the last two ratios
            let (n1, n2) = ((k - 1) as f64, k as f64);
            (n2 * ratios[k - 1] - n1 * ratios[k - 2]) / (n2 - n1)
        }
    };
    let ratios_positive = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let ratio_max = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(GrowthReport {
        signs,
        constant_sign,
        ratios,
        sigma_limit,
        ratios_positive,
        ratio_max,
    })
}

/// On-disk coefficient table.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeriesFile {
    #[serde(rename = "E0")]
    pub e0: String,
    pub beta_coeffs: Vec<String>,
    pub g_coeffs: Vec<String>,
    pub orders: usize,
}

impl SeriesFile {
    pub fn from_series(series: &PerturbationSeries) -> Result<Self> {
        let g = reindex_to_g(&series.a)?;
        Ok(SeriesFile {
            e0: format_rational(&series.a[0]),
            beta_coeffs: series.a.iter().map(format_rational).collect(),
            g_coeffs: g.coeffs.iter().map(format_rational).collect(),
            orders: series.order,
        })
    }

    pub fn beta_coeffs(&self) -> Result<Vec<BigRational>> {
        self.beta_coeffs.iter().map(|s| parse_rational(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_poly::{gaussian_inner, rat};

    #[test]
    fn zeroth_order() {
        let s = rspe_generate(0).unwrap();
        assert_eq!(s.a, vec![rat(2, 1)]);
        assert_eq!(s.corrections, vec![Poly2::one()]);
    }

    #[test]
    fn second_order_against_sum_over_states() {
        let s = rspe_generate(2).unwrap();
        assert!(s.a[1].is_zero());
        assert_eq!(
            s.corrections[1],
            Poly2::from_terms([(2, 1, rat(-1, 6)), (0, 3, rat(1, 18))])
        );
        // V|0,0> = 1/2 |2,1> - sqrt(3)/6 |0,3>, both at energy 8
        let oracle = (rat(1, 4) + rat(3, 36)) / rat(2 - 8, 1);
        assert_eq!(oracle, rat(-1, 18));
        assert_eq!(s.a[2], oracle);
    }

    #[test]
    fn structural_invariants_through_order_twelve() {
        let s = rspe_generate(12).unwrap();
        for (n, p) in s.corrections.iter().enumerate().skip(1) {
            assert!(gaussian_inner(p, &Poly2::one()).is_zero(), "mean of P_{n}");
            assert!(p.degree().unwrap() <= 3 * n as u32);
        }
        for n in (1..=12).step_by(2) {
            assert!(s.a[n].is_zero(), "a_{n}");
        }
    }

    #[test]
    fn reindex() {
        let g = reindex_to_g(&[rat(2, 1), rat(0, 1), rat(-1, 18)]).unwrap();
        assert_eq!(g.coeffs, vec![rat(2, 1), rat(-1, 18)]);
        assert_eq!(reindex_to_g(&[rat(2, 1)]).unwrap().coeffs, vec![rat(2, 1)]);
        assert!(matches!(
            reindex_to_g(&[rat(2, 1), rat(1, 7), rat(0, 1)]),
            Err(Error::ParityViolation { index: 1, .. })
        ));
        assert_eq!(g.to_beta_coeffs(), vec![rat(2, 1), rat(0, 1), rat(-1, 18)]);
    }

    #[test]
    fn growth_needs_five_orders() {
        let g = reindex_to_g(&rspe_generate(6).unwrap().a).unwrap();
        assert!(matches!(growth_diagnostics(&g), Err(Error::UnderLength { .. })));
    }

    #[test]
    fn growth_signs_and_ratios() {
        let g = reindex_to_g(&rspe_generate(20).unwrap().a).unwrap();
        let rep = growth_diagnostics(&g).unwrap();
        assert_eq!(rep.constant_sign, Some(-1));
        assert!(rep.ratios_positive);
        assert!(rep.ratio_max < 10.0);
    }

    #[test]
    fn series_file_layout() {
        let f = SeriesFile::from_series(&rspe_generate(4).unwrap()).unwrap();
        assert_eq!(f.e0, "2/1");
        assert_eq!(f.beta_coeffs[2], "-1/18");
        assert_eq!(f.g_coeffs.len(), 3);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.starts_with(r#"{"E0":"2/1","beta_coeffs":["2/1","0/1","-1/18""#));
    }
}
