//! Multiprecision refinement of a resonance whose width is far below the
//! double-precision rounding level of its real part.
//!
//! `V` is even in `x₁`, so the ground resonance lives on the states with even
//! `n₁`; only that block is assembled. Banded LU and inverse iteration run in
//! MPFR arithmetic at a chosen precision, and the eigenvalue is read off the
//! bilinear Rayleigh quotient.

use std::collections::HashMap;

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled_hamiltonian::ScalingParams;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreciseOptions {
    pub n_max: usize,
    /// Mantissa bits.
    pub precision: u32,
    pub max_iterations: usize,
    /// Stop once successive eigenvalue estimates differ by less than this,
    /// relative to `|E|`.
    pub rel_tol: f64,
}

impl Default for PreciseOptions {
    fn default() -> Self {
        PreciseOptions {
            n_max: 80,
            precision: 200,
            max_iterations: 12,
            rel_tol: 1e-45,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreciseResonance {
    /// Decimal expansions of the real and imaginary parts at full precision.
    pub re: String,
    pub im: String,
    pub value: Complex64,
    pub n_max: usize,
    pub precision: u32,
    pub iterations: usize,
    /// `|E_k − E_{k−1}|` at the last iteration.
    pub increment: f64,
}

#[derive(Clone, Debug)]
struct MpC {
    re: Float,
    im: Float,
}

impl MpC {
    fn zero(prec: u32) -> Self {
        MpC {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    fn from_c64(prec: u32, z: Complex64) -> Self {
        MpC {
            re: Float::with_val(prec, z.re),
            im: Float::with_val(prec, z.im),
        }
    }

    fn polar(prec: u32, modulus: &Float, arg: &Float) -> Self {
        let (sin, cos) = arg.clone().sin_cos(Float::new(prec));
        MpC {
            re: Float::with_val(prec, modulus * &cos),
            im: Float::with_val(prec, modulus * &sin),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &MpC) -> MpC {
        let p = self.re.prec();
        MpC {
            re: Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im),
            im: Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re),
        }
    }

    fn scale(&self, x: &Float) -> MpC {
        let p = self.re.prec();
        MpC {
            re: Float::with_val(p, &self.re * x),
            im: Float::with_val(p, &self.im * x),
        }
    }

    fn add_assign(&mut self, o: &MpC) {
        self.re += &o.re;
        self.im += &o.im;
    }

    fn sub_assign(&mut self, o: &MpC) {
        self.re -= &o.re;
        self.im -= &o.im;
    }

    fn norm_sqr(&self) -> Float {
        let p = self.re.prec();
        Float::with_val(p, self.re.clone().square() + self.im.clone().square())
    }

    fn recip(&self) -> MpC {
        let p = self.re.prec();
        let n = self.norm_sqr();
        MpC {
            re: Float::with_val(p, &self.re / &n),
            im: -Float::with_val(p, &self.im / &n),
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// `√(num/den)` at precision `prec`.
fn sqrt_ratio(prec: u32, num: u64, den: u64) -> Float {
    (Float::with_val(prec, num) / den).sqrt()
}

fn x_el(prec: u32, m: usize, n: usize) -> Float {
    let (lo, hi) = (m.min(n), m.max(n));
    if hi == lo + 1 {
        sqrt_ratio(prec, hi as u64, 2)
    } else {
        Float::new(prec)
    }
}

fn x2_el(prec: u32, m: usize, n: usize, sign_off: i32) -> Float {
    let (lo, hi) = (m.min(n), m.max(n));
    match hi - lo {
        0 => Float::with_val(prec, 2 * lo + 1) / 2u32,
        2 => sqrt_ratio(prec, ((lo + 1) * (lo + 2)) as u64, 4) * sign_off,
        _ => Float::new(prec),
    }
}

fn x3_el(prec: u32, m: usize, n: usize) -> Float {
    let (lo, hi) = (m.min(n), m.max(n));
    let k = lo as u64;
    match hi - lo {
        1 => sqrt_ratio(prec, k + 1, 8) * (3 * (k + 1)),
        3 => sqrt_ratio(prec, (k + 1) * (k + 2) * (k + 3), 8),
        _ => Float::new(prec),
    }
}

struct Band {
    dim: usize,
    bw: usize,
    width: usize,
    data: Vec<MpC>,
    piv: Vec<usize>,
}

impl Band {
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        (j + self.bw >= i && j <= i + 2 * self.bw && j < self.dim).then(|| i * self.width + (j + self.bw - i))
    }

    fn factor(&mut self) -> Result<()> {
        let (dim, bw) = (self.dim, self.bw);
        let prec = self.data[0].re.prec();
        for k in 0..dim {
            let last = (k + bw).min(dim - 1);
            let mut best = k;
            let mut best_val = Float::with_val(prec, -1);
            for r in k..=last {
                if let Some(p) = self.slot(r, k) {
                    let v = self.data[p].norm_sqr();
                    if v > best_val {
                        best_val = v;
                        best = r;
                    }
                }
            }
            if best_val.is_zero() {
                return Err(Error::Singular("multiprecision band LU"));
            }
            self.piv[k] = best;
            if best != k {
                for j in k..(k + 2 * bw + 1).min(dim) {
                    match (self.slot(k, j), self.slot(best, j)) {
                        (Some(a), Some(b)) => self.data.swap(a, b),
                        (Some(a), None) => self.data[a] = MpC::zero(prec),
                        _ => {}
                    }
                }
            }
            let inv = self.data[self.slot(k, k).expect("diagonal")].recip();
            for r in k + 1..=last {
                let Some(p) = self.slot(r, k) else { continue };
                if self.data[p].is_zero() {
                    continue;
                }
                let l = self.data[p].mul(&inv);
                for j in k + 1..(k + 2 * bw + 1).min(dim) {
                    let Some(kj) = self.slot(k, j) else { continue };
                    if self.data[kj].is_zero() {
                        continue;
                    }
                    let prod = l.mul(&self.data[kj]);
                    let rj = self.slot(r, j).expect("fill stays inside the band");
                    self.data[rj].sub_assign(&prod);
                }
                self.data[p] = l;
            }
        }
        Ok(())
    }

    fn solve(&self, rhs: &[MpC]) -> Vec<MpC> {
        let (dim, bw) = (self.dim, self.bw);
        let mut y = rhs.to_vec();
        for k in 0..dim {
            if self.piv[k] != k {
                y.swap(k, self.piv[k]);
            }
            for r in k + 1..=(k + bw).min(dim - 1) {
                if let Some(p) = self.slot(r, k) {
                    let pr = self.data[p].mul(&y[k]);
                    y[r].sub_assign(&pr);
                }
            }
        }
        for k in (0..dim).rev() {
            for j in k + 1..(k + 2 * bw + 1).min(dim) {
                if let Some(p) = self.slot(k, j) {
                    let pr = self.data[p].mul(&y[j]);
                    y[k].sub_assign(&pr);
                }
            }
            y[k] = y[k].mul(&self.data[self.slot(k, k).expect("diagonal")].recip());
        }
        y
    }
}

/// Inverse iteration for the eigenvalue of `H(β,θ)` nearest `seed`, on the
/// even-`n₁` states with `n₁ + n₂ ≤ n_max`.
pub fn refine_resonance(params: ScalingParams, seed: Complex64, opts: &PreciseOptions) -> Result<PreciseResonance> {
    if opts.n_max < 3 {
        return Err(Error::TruncationTooSmall { n_max: opts.n_max });
    }
    let prec = opts.precision;
    let states: Vec<(usize, usize)> = (0..=opts.n_max)
        .flat_map(|l| (0..=l).step_by(2).map(move |n1| (n1, l - n1)))
        .collect();
    let index: HashMap<(usize, usize), usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let dim = states.len();

    let th_re = Float::with_val(prec, params.theta.re);
    let th_im = Float::with_val(prec, params.theta.im);
    let weight = |k: i32| {
        let modulus = Float::with_val(prec, &th_re * k).exp();
        MpC::polar(prec, &modulus, &Float::with_val(prec, &th_im * k))
    };
    let (wt, wx) = (weight(-2), weight(2));
    let beta = {
        let modulus = Float::with_val(prec, params.beta_mod);
        if params.beta_arg == 0.0 {
            MpC {
                re: modulus,
                im: Float::new(prec),
            }
        } else {
            MpC::polar(prec, &modulus, &Float::with_val(prec, params.beta_arg))
        }
    };
    let wv = beta.mul(&weight(3));
    let third = Float::with_val(prec, 1) / 3u32;

    let mut entries: Vec<(usize, usize, MpC)> = Vec::new();
    let mut bw = 0;
    for (j, &(n1, n2)) in states.iter().enumerate() {
        for m1 in (n1.saturating_sub(2)..=n1 + 2).step_by(2) {
            for m2 in n2.saturating_sub(3)..=n2 + 3 {
                let Some(&i) = index.get(&(m1, m2)) else { continue };
                let mut t = Float::new(prec);
                let mut x = Float::new(prec);
                let mut v = Float::with_val(prec, x2_el(prec, m1, n1, 1) * x_el(prec, m2, n2));
                if m2 == n2 {
                    t += x2_el(prec, m1, n1, -1);
                    x += x2_el(prec, m1, n1, 1);
                }
                if m1 == n1 {
                    t += x2_el(prec, m2, n2, -1);
                    x += x2_el(prec, m2, n2, 1);
                    v -= Float::with_val(prec, x3_el(prec, m2, n2) * &third);
                }
                let mut z = wt.scale(&t);
                z.add_assign(&wx.scale(&x));
                z.add_assign(&wv.scale(&v));
                if z.is_zero() {
                    continue;
                }
                bw = bw.max(i.abs_diff(j));
                entries.push((i, j, z));
            }
        }
    }

    let width = 3 * bw + 1;
    let mut band = Band {
        dim,
        bw,
        width,
        data: vec![MpC::zero(prec); dim * width],
        piv: vec![0; dim],
    };
    for (i, j, z) in &entries {
        let p = band.slot(*i, *j).expect("entry inside band");
        band.data[p] = z.clone();
    }
    let sigma = MpC::from_c64(prec, seed);
    for i in 0..dim {
        let p = band.slot(i, i).expect("diagonal");
        band.data[p].sub_assign(&sigma);
    }
    band.factor()?;

    let apply = |v: &[MpC]| {
        let mut out = vec![MpC::zero(prec); dim];
        for (i, j, z) in &entries {
            out[*i].add_assign(&z.mul(&v[*j]));
        }
        out
    };
    let bilinear = |a: &[MpC], b: &[MpC]| {
        let mut s = MpC::zero(prec);
        for (x, y) in a.iter().zip(b) {
            s.add_assign(&x.mul(y));
        }
        s
    };

    let mut v = vec![MpC::zero(prec); dim];
    v[0] = MpC::from_c64(prec, Complex64::new(1.0, 0.0));
    let mut estimate: Option<MpC> = None;
    let mut increment = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let w = band.solve(&v);
        let norm = w
            .iter()
            .fold(Float::new(prec), |acc, z| acc + z.norm_sqr())
            .sqrt();
        let inv = Float::with_val(prec, 1) / &norm;
        v = w.iter().map(|z| z.scale(&inv)).collect();
        let e = bilinear(&v, &apply(&v)).mul(&bilinear(&v, &v).recip());
        if let Some(prev) = &estimate {
            let mut d = e.clone();
            d.sub_assign(prev);
            increment = d.norm_sqr().sqrt().to_f64();
            let scale = e.norm_sqr().sqrt().to_f64();
            if increment <= opts.rel_tol * scale {
                return Ok(finish(e, opts, it, increment));
            }
        }
        estimate = Some(e);
    }
    let e = estimate.expect("at least one iteration");
    Err(Error::NonConvergence {
        best: finish(e, opts, opts.max_iterations, increment).value.to_string(),
        increment,
    })
}

fn finish(e: MpC, opts: &PreciseOptions, iterations: usize, increment: f64) -> PreciseResonance {
    PreciseResonance {
        re: e.re.to_string_radix(10, Some(40)),
        im: e.im.to_string_radix(10, Some(20)),
        value: e.to_c64(),
        n_max: opts.n_max,
        precision: opts.precision,
        iterations,
        increment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{locate_resonance, E0};
    use crate::scaled_hamiltonian::{ladder, BasisTruncation};

    #[test]
    fn closed_form_elements_match_double_precision() {
        for m in 0..10 {
            for n in 0..10 {
                assert!((x_el(128, m, n).to_f64() - ladder::x(m, n)).abs() < 1e-14);
                assert!((x2_el(128, m, n, 1).to_f64() - ladder::x2(m, n)).abs() < 1e-14);
                assert!((x2_el(128, m, n, -1).to_f64() - ladder::p2(m, n)).abs() < 1e-14);
                assert!((x3_el(128, m, n).to_f64() - ladder::x3(m, n)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn agrees_with_double_precision_where_width_is_visible() {
        let p = ScalingParams::real(0.5, 0.25).unwrap();
        let f = locate_resonance(p, BasisTruncation::new(30), E0).unwrap();
        let opts = PreciseOptions {
            n_max: 30,
            precision: 128,
            rel_tol: 1e-30,
            ..Default::default()
        };
        let m = refine_resonance(p, f.value, &opts).unwrap();
        assert!((m.value - f.value).norm() < 1e-11, "{} vs {}", m.value, f.value);
        assert!(m.value.im < 0.0);
    }
}
