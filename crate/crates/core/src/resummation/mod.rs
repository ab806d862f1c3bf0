//! Distributional Borel–Leroy summation of a real divergent series
//! `Σ a_s βˢ`:
//!
//! ```text
//! B(t) = Σ a_s tˢ / Γ(qs + 1)
//! f(β) = (1/(qβ)) ∫₀^∞ PP B(t) e^{−(t/β)^{1/q}} (t/β)^{1/q − 1} dt
//! ```
//!
//! `B` is continued past its radius of convergence by a Padé approximant.
//! After `u = (t/β)^{1/q}` the integral becomes `∫₀^∞ PP B(βu^q) e^{−u} du`;
//! simple poles on the positive axis are subtracted and their principal value
//! added back in closed form, while their half residues give the imaginary
//! part of the upper sum.

pub mod quad;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_poly::rational_to_f64;
use crate::linalg::{eigenvalues, solve_dense_real, CMatrix};
use crate::par;

/// Borel–Leroy order `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LeroyOrder {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "1")]
    One,
}

impl LeroyOrder {
    pub fn value(self) -> f64 {
        match self {
            LeroyOrder::Half => 0.5,
            LeroyOrder::One => 1.0,
        }
    }

    /// `u^q`
    fn pow_q(self, u: f64) -> f64 {
        match self {
            LeroyOrder::Half => u.sqrt(),
            LeroyOrder::One => u,
        }
    }

    /// `x^{1/q}`
    fn pow_inv_q(self, x: f64) -> f64 {
        match self {
            LeroyOrder::Half => x * x,
            LeroyOrder::One => x,
        }
    }
}

impl FromStr for LeroyOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" | "0.5" | ".5" | "half" => Ok(LeroyOrder::Half),
            "1" | "1.0" | "1/1" | "one" => Ok(LeroyOrder::One),
            other => Err(Error::UnsupportedOrder(other.to_string())),
        }
    }
}

impl fmt::Display for LeroyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeroyOrder::Half => "1/2",
            LeroyOrder::One => "1",
        })
    }
}

/// Coefficients `b_s = a_s / Γ(qs + 1)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BorelSeries {
    pub q: LeroyOrder,
    pub b: Vec<f64>,
    /// The same coefficients as exact rationals, when no factor of `√π`
    /// appears (always for `q = 1`; for `q = 1/2` when odd `a_s` vanish).
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
    pub note: String,
}

pub fn borel_transform(coeffs: &[BigRational], q: LeroyOrder) -> Result<BorelSeries> {
    if coeffs.is_empty() {
        return Err(Error::Precondition("empty series".into()));
    }
    let sqrt_pi = PI.sqrt();
    let mut exact = Vec::with_capacity(coeffs.len());
    let mut all_rational = true;
    let mut b = Vec::with_capacity(coeffs.len());
    // running n! and (2n+1)!!/2^{n+1}
    let mut fact = BigInt::one();
    let mut half_gamma = BigRational::new(BigInt::one(), BigInt::from(2));
    for (s, a) in coeffs.iter().enumerate() {
        let (value, rational) = match q {
            LeroyOrder::One => {
                if s > 0 {
                    fact *= s;
                }
                let r = a / BigRational::from_integer(fact.clone());
                (rational_to_f64(&r), Some(r))
            }
            LeroyOrder::Half if s % 2 == 0 => {
                let n = s / 2;
                if n > 0 {
                    fact *= n;
                }
                let r = a / BigRational::from_integer(fact.clone());
                (rational_to_f64(&r), Some(r))
            }
            LeroyOrder::Half => {
                // Γ(n + 3/2) = (2n+1)!!/2^{n+1} · √π
                let n = s / 2;
                if n > 0 {
                    half_gamma *= BigRational::new(BigInt::from(2 * n + 1), BigInt::from(2));
                }
                let r = a / &half_gamma;
                if a.is_zero() {
                    (0.0, Some(r))
                } else {
                    (rational_to_f64(&r) / sqrt_pi, None)
                }
            }
        };
        if !value.is_finite() {
            return Err(Error::Precondition(format!("b[{s}] is not finite")));
        }
        b.push(value);
        match rational {
            Some(r) => exact.push(r),
            None => all_rational = false,
        }
    }
    let note = if all_rational {
        "exact rational, rounded once".to_string()
    } else {
        "rational over sqrt(pi), rounded once".to_string()
    };
    Ok(BorelSeries {
        q,
        b,
        exact: all_rational.then_some(exact),
        note,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub t: Complex64,
    pub residue: Complex64,
}

impl Pole {
    pub fn is_real(&self) -> bool {
        self.t.im == 0.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PadeApproximant {
    pub l: usize,
    pub m: usize,
    /// Ascending coefficients of `P`.
    pub numerator: Vec<f64>,
    /// Ascending coefficients of `Q`, `Q(0) = 1`.
    pub denominator: Vec<f64>,
    pub poles: Vec<Pole>,
    /// Whether `Q` and `P` were solved for in rational arithmetic.
    pub exact: bool,
}

/// Roots closer to the real axis than this, relative to their modulus, are
/// taken to be real.
const REAL_POLE_TOL: f64 = 1e-9;

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner_deriv(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &a)| acc * z + a * k as f64)
}

impl PadeApproximant {
    pub fn eval(&self, t: Complex64) -> Complex64 {
        horner(&self.numerator, t) / horner(&self.denominator, t)
    }

    pub fn eval_real(&self, t: f64) -> f64 {
        let p = self.numerator.iter().rev().fold(0.0, |acc, &a| acc * t + a);
        let q = self.denominator.iter().rev().fold(0.0, |acc, &a| acc * t + a);
        p / q
    }

    /// Pole of smallest modulus.
    pub fn nearest_pole(&self) -> Option<Pole> {
        self.poles.iter().copied().min_by(|a, b| a.t.norm().total_cmp(&b.t.norm()))
    }

    pub fn positive_real_poles(&self) -> Vec<Pole> {
        let mut v: Vec<Pole> = self.poles.iter().copied().filter(|p| p.is_real() && p.t.re > 0.0).collect();
        v.sort_by(|a, b| a.t.re.total_cmp(&b.t.re));
        v
    }
}

/// `(L, M) = (⌊(N−1)/2⌋, ⌈(N−1)/2⌉)` for `N` coefficients.
pub fn default_orders(n: usize) -> (usize, usize) {
    let k = n.saturating_sub(1);
    (k / 2, k - k / 2)
}

fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero())?;
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let l = &a[i][k] / &a[k][k];
            for j in k..n {
                let t = &l * &a[k][j];
                a[i][j] -= t;
            }
            let t = &l * &b[k];
            b[i] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for j in k + 1..n {
            s -= &a[k][j] * &x[j];
        }
        x[k] = s / &a[k][k];
    }
    Some(x)
}

/// `[L/M]` Padé approximant of the Borel series, matching it through order
/// `L + M`.
pub fn pade_fit(series: &BorelSeries, l: usize, m: usize) -> Result<PadeApproximant> {
    let len = l + m + 1;
    if len > series.b.len() {
        return Err(Error::Precondition(format!(
            "[{l}/{m}] needs {len} coefficients, have {}",
            series.b.len()
        )));
    }
    let idx = |k: isize| -> Option<usize> { (k >= 0).then_some(k as usize) };
    let (numerator, denominator, exact) = match &series.exact {
        Some(c) => {
            let cat = |k: isize| idx(k).map(|k| c[k].clone()).unwrap_or_else(BigRational::zero);
            let a: Vec<Vec<BigRational>> = (1..=m)
                .map(|i| (1..=m).map(|j| cat((l + i) as isize - j as isize)).collect())
                .collect();
            let rhs: Vec<BigRational> = (1..=m).map(|i| -cat((l + i) as isize)).collect();
            let qs = solve_rational(a, rhs).ok_or(Error::PadeDegenerate { l, m })?;
            let mut den = vec![BigRational::one()];
            den.extend(qs);
            let num: Vec<BigRational> = (0..=l)
                .map(|i| {
                    (0..=i.min(m)).fold(BigRational::zero(), |acc, j| acc + &den[j] * &c[i - j])
                })
                .collect();
            (
                num.iter().map(rational_to_f64).collect::<Vec<_>>(),
                den.iter().map(rational_to_f64).collect::<Vec<_>>(),
                true,
            )
        }
        None => {
            let c = &series.b;
            let cat = |k: isize| idx(k).map(|k| c[k]).unwrap_or(0.0);
            let a: Vec<Vec<f64>> = (1..=m)
                .map(|i| (1..=m).map(|j| cat((l + i) as isize - j as isize)).collect())
                .collect();
            let rhs: Vec<f64> = (1..=m).map(|i| -cat((l + i) as isize)).collect();
            let qs = if m == 0 {
                Vec::new()
            } else {
                solve_dense_real(&a, &rhs, 1e-13).map_err(|_| Error::PadeDegenerate { l, m })?
            };
            let mut den = vec![1.0];
            den.extend(qs);
            let num: Vec<f64> = (0..=l)
                .map(|i| (0..=i.min(m)).map(|j| den[j] * c[i - j]).sum())
                .collect();
            (num, den, false)
        }
    };
    if numerator.iter().chain(&denominator).any(|v| !v.is_finite()) {
        return Err(Error::PadeDegenerate { l, m });
    }
    let mut trimmed = denominator.clone();
    while trimmed.len() > 1 && *trimmed.last().expect("non-empty") == 0.0 {
        trimmed.pop();
    }
    let poles = polynomial_roots(&trimmed)?
        .into_iter()
        .map(|t| Pole {
            t,
            residue: horner(&numerator, t) / horner_deriv(&denominator, t),
        })
        .collect();
    Ok(PadeApproximant {
        l,
        m,
        numerator,
        denominator,
        poles,
        exact,
    })
}

/// Roots of the real polynomial with ascending coefficients `c`, from the
/// companion matrix and polished by Newton's method.
pub fn polynomial_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = c[d];
    let comp = CMatrix::from_fn(d, |i, j| {
        if i == 0 {
            Complex64::new(-c[d - 1 - j] / lead, 0.0)
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let raw = if d == 1 { vec![Complex64::new(-c[0] / c[1], 0.0)] } else { eigenvalues(&comp)? };
    Ok(raw
        .into_iter()
        .map(|mut z| {
            if z.im.abs() <= REAL_POLE_TOL * z.norm() {
                z.im = 0.0;
            }
            for _ in 0..8 {
                let dz = horner(c, z) / horner_deriv(c, z);
                if !dz.re.is_finite() || !dz.im.is_finite() {
                    break;
                }
                z -= if z.im == 0.0 { Complex64::new(dz.re, 0.0) } else { dz };
                if dz.norm() <= 4.0 * f64::EPSILON * z.norm() {
                    break;
                }
            }
            z
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValue {
    pub value: Complex64,
    pub error: f64,
}

pub fn default_eps_schedule() -> Vec<f64> {
    vec![1e-4, 5e-5, 2.5e-5, 1.25e-5]
}

/// `P(t + i0)` by evaluating along `t + iε` and extrapolating `ε → 0⁺`
/// with Neville's scheme.
pub fn boundary_value(p: &PadeApproximant, t: f64, eps: &[f64]) -> Result<BoundaryValue> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("t must be positive, got {t}")));
    }
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("ε schedule must be positive and decreasing".into()));
    }
    for pole in &p.poles {
        let distance = (pole.t - t).norm();
        if distance < eps[0] {
            return Err(Error::PoleProximity { t, distance });
        }
    }
    let values: Vec<Complex64> = eps.iter().map(|&e| p.eval(Complex64::new(t, e))).collect();
    let mut table = values.clone();
    let mut prev_best = table[0];
    let mut best = table[0];
    for k in 1..eps.len() {
        for i in (k..eps.len()).rev() {
            let (ei, eik) = (eps[i], eps[i - k]);
            table[i] = (table[i] * eik - table[i - 1] * ei) / (eik - ei);
        }
        prev_best = best;
        best = table[eps.len() - 1];
    }
    Ok(BoundaryValue {
        value: best,
        error: if eps.len() > 1 { (best - prev_best).norm() } else { f64::INFINITY },
    })
}

/// `Re β^{−1/q} > 1/R`.
pub fn nevanlinna_check(beta: Complex64, r: f64, q: LeroyOrder) -> Result<bool> {
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius must be positive, got {r}")));
    }
    if beta == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition("β = 0".into()));
    }
    let w = match q {
        LeroyOrder::Half => (beta * beta).inv(),
        LeroyOrder::One => beta.inv(),
    };
    Ok(w.re > 1.0 / r)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Absolute tolerance on the integral, relative to `max(1, |a₀|)`.
    pub tol: f64,
    pub max_panels: usize,
    /// The cutoff `T` grows until `|B(βT^q)| e^{−T}` falls below this,
    /// relative to `max(1, |a₀|)`.
    pub tail_tol: f64,
    /// Working Nevanlinna radius; when set, `β` must lie in its disc.
    pub working_radius: Option<f64>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-12,
            max_panels: 4000,
            tail_tol: 1e-17,
            working_radius: None,
        }
    }
}

/// A real pole of `B` on the integration path, in both variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub t: f64,
    pub u: f64,
    pub residue_t: f64,
    /// Residue of `B(βu^q) e^{−u}` at `u`.
    pub residue_u: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummationResult {
    pub beta: f64,
    pub q: LeroyOrder,
    pub l: usize,
    pub m: usize,
    pub f: f64,
    pub phi_upper: Complex64,
    pub phi_lower: Complex64,
    /// `φ₊ − φ₋ = 2i Im φ₊`
    pub d: Complex64,
    pub quad_error: f64,
    pub tail_bound: f64,
    pub cutoff: f64,
    pub real_poles: Vec<PoleTerm>,
}

/// Fits `[L/M]` to the Borel–Leroy transform of `coeffs` and sums at `β`.
pub fn distributional_sum(
    coeffs: &[BigRational],
    beta: f64,
    q: LeroyOrder,
    l: usize,
    m: usize,
    cfg: &QuadConfig,
) -> Result<SummationResult> {
    let pade = pade_fit(&borel_transform(coeffs, q)?, l, m)?;
    distributional_sum_pade(&pade, beta, q, cfg)
}

pub fn distributional_sum_pade(pade: &PadeApproximant, beta: f64, q: LeroyOrder, cfg: &QuadConfig) -> Result<SummationResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Precondition(format!("β must be positive, got {beta}")));
    }
    if let Some(r) = cfg.working_radius {
        if !nevanlinna_check(Complex64::new(beta, 0.0), r, q)? {
            return Err(Error::Precondition(format!("β = {beta} lies outside the Nevanlinna disc of radius {r}")));
        }
    }
    let qv = q.value();
    let b_at = |u: f64| pade.eval_real(beta * q.pow_q(u));
    let g = |u: f64| b_at(u) * (-u).exp();

    if let Some(p) = pade
        .poles
        .iter()
        .find(|p| p.t.re > 0.0 && p.t.im != 0.0 && p.t.im.abs() <= 1e-6 * p.t.norm())
    {
        return Err(Error::UnsupportedPole(format!(
            "pole pair pinching the positive axis at t = {}",
            p.t
        )));
    }
    let mut terms: Vec<PoleTerm> = pade
        .positive_real_poles()
        .into_iter()
        .map(|p| {
            let u = q.pow_inv_q(p.t.re / beta);
            let jac = u.powf(1.0 - qv) / (qv * beta);
            PoleTerm {
                t: p.t.re,
                u,
                residue_t: p.residue.re,
                residue_u: p.residue.re * jac * (-u).exp(),
            }
        })
        .collect();
    terms.sort_by(|a, b| a.u.total_cmp(&b.u));
    for w in terms.windows(2) {
        if (w[1].u - w[0].u).abs() <= 1e-9 * w[1].u {
            return Err(Error::UnsupportedPole(format!(
                "repeated real pole near t = {} (u = {})",
                w[0].t, w[0].u
            )));
        }
    }

    let scale = pade.numerator.first().map_or(1.0, |v| v.abs()).max(1.0);
    let mut cutoff = 36.0f64;
    let tail = loop {
        if let Some(p) = terms.iter().find(|p| p.u > cutoff - 1.0 && p.u < cutoff + 2.0) {
            cutoff = p.u + 2.0;
            continue;
        }
        let tail = b_at(cutoff).abs() * (-cutoff).exp();
        if tail <= cfg.tail_tol * scale || cutoff > 2000.0 {
            break tail;
        }
        cutoff += 8.0;
    };
    let inside: Vec<PoleTerm> = terms.iter().copied().filter(|p| p.u < cutoff).collect();

    let subtracted = |u: f64, skip: Option<usize>| {
        let mut v = g(u);
        for (j, p) in inside.iter().enumerate() {
            if Some(j) != skip {
                v -= p.residue_u / (u - p.u);
            }
        }
        v
    };
    let half_widths: Vec<f64> = (0..inside.len())
        .map(|k| {
            let u = inside[k].u;
            let left = if k == 0 { u } else { u - inside[k - 1].u };
            let right = if k + 1 == inside.len() { cutoff - u } else { inside[k + 1].u - u };
            (0.4 * left).min(0.4 * right).min(1.0)
        })
        .collect();

    let n_pieces = 2 * inside.len() + 1;
    let piece_tol = cfg.tol * scale / n_pieces as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = 0.0;
    for (k, p) in inside.iter().enumerate() {
        let h = half_widths[k];
        let est = quad::integrate(|u| subtracted(u, None), lo, p.u - h, piece_tol, cfg.max_panels);
        value += est.value;
        error += est.error;
        // the 1/(u − u_k) parts cancel between the two mirrored points
        let folded = quad::integrate(
            |s| subtracted(p.u + s, Some(k)) + subtracted(p.u - s, Some(k)),
            0.0,
            h,
            piece_tol,
            cfg.max_panels,
        );
        value += folded.value;
        error += folded.error;
        lo = p.u + h;
    }
    let est = quad::integrate(|u| subtracted(u, None), lo, cutoff, piece_tol, cfg.max_panels);
    value += est.value;
    error += est.error;
    for p in &inside {
        value += p.residue_u * ((cutoff - p.u) / p.u).ln();
    }
    if !value.is_finite() || error > cfg.tol * scale {
        return Err(Error::Accuracy {
            estimate: error,
            tolerance: cfg.tol * scale,
        });
    }
    let im_phi = -PI * terms.iter().map(|p| p.residue_u).sum::<f64>();
    let phi = Complex64::new(value, im_phi);
    Ok(SummationResult {
        beta,
        q,
        l: pade.l,
        m: pade.m,
        f: value,
        phi_upper: phi,
        phi_lower: phi.conj(),
        d: Complex64::new(0.0, 2.0 * im_phi),
        quad_error: error,
        tail_bound: 2.0 * tail,
        cutoff,
        real_poles: terms,
    })
}

/// `[L/M]` against `[L+1/M+1]` at one coupling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRow {
    pub beta: f64,
    pub f: f64,
    pub f_next: f64,
    pub difference: f64,
    pub quad_error: f64,
}

pub fn pade_stability(
    coeffs: &[BigRational],
    q: LeroyOrder,
    betas: &[f64],
    l: usize,
    m: usize,
    cfg: &QuadConfig,
) -> Result<Vec<StabilityRow>> {
    let borel = borel_transform(coeffs, q)?;
    let p0 = pade_fit(&borel, l, m)?;
    let p1 = pade_fit(&borel, l + 1, m + 1)?;
    par::map_slice(betas, |&beta| {
        let a = distributional_sum_pade(&p0, beta, q, cfg)?;
        let b = distributional_sum_pade(&p1, beta, q, cfg)?;
        Ok(StabilityRow {
            beta,
            f: a.f,
            f_next: b.f,
            difference: (a.f - b.f).abs(),
            quad_error: a.quad_error.max(b.quad_error),
        })
    })
    .into_iter()
    .collect()
}

/// Radius `R = β_max^{1/q}` of the Nevanlinna disc through the largest `β`
/// up to which every scanned row (in increasing `β`) is Padé-stable to `tol`.
pub fn working_radius(rows: &[StabilityRow], tol: f64, q: LeroyOrder) -> Option<f64> {
    let mut sorted: Vec<&StabilityRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    let last = sorted.iter().take_while(|r| r.difference <= tol).last()?;
    Some(q.pow_inv_q(last.beta) * (1.0 + 1e-12))
}

/// `ln Γ(N/2 + 1)`
fn ln_gamma_half_plus_one(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..=n / 2).map(|k| (k as f64).ln()).sum()
    } else {
        let k = n / 2;
        // Γ(k + 3/2) = (2k+1)!!/2^{k+1} √π
        (0..=k).map(|j| ((2 * j + 1) as f64 / 2.0).ln()).sum::<f64>() + 0.5 * PI.ln()
    }
}

/// Fit of `|f − Σ_{s<N} a_s βˢ| ≈ A σ^N Γ(N/2 + 1) β^N` over a window of `N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RemainderFit {
    pub a: f64,
    pub sigma: f64,
    /// `(N, |f − S_N|)` used in the fit.
    pub points: Vec<(usize, f64)>,
    /// Largest ratio, over the window, of the observed remainder to the fitted bound.
    pub max_ratio: f64,
}

pub fn remainder_fit(coeffs: &[f64], beta: f64, f: f64, window: std::ops::Range<usize>) -> Result<RemainderFit> {
    let mut points = Vec::new();
    let mut partial = 0.0;
    let mut power = 1.0;
    for (n, c) in coeffs.iter().enumerate().take(window.end) {
        if window.contains(&n) {
            let r = (f - partial).abs();
            if r > 0.0 {
                points.push((n, r));
            }
        }
        partial += c * power;
        power *= beta;
    }
    if points.len() < 2 {
        return Err(Error::UnderLength {
            needed: 2,
            have: points.len(),
        });
    }
    let ys: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, r)| (n as f64, r.ln() - ln_gamma_half_plus_one(n) - n as f64 * beta.ln()))
        .collect();
    let k = ys.len() as f64;
    let mx = ys.iter().map(|p| p.0).sum::<f64>() / k;
    let my = ys.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = ys.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = ys.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_ratio = ys
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).exp())
        .fold(0.0, f64::max);
    Ok(RemainderFit {
        a: intercept.exp(),
        sigma: slope.exp(),
        points,
        max_ratio,
    })
}

#[cfg(test)]
mod tests;
