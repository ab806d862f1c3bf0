//! Exact bivariate polynomials over the rationals.
//!
//! States of the form `P(x) e^{-|x|^2/2}` are carried by their polynomial
//! factor `P`. In that representation the oscillator `-Δ + x²` acts as
//! `D + 2` with `D = -Δ + 2 x·∇`, and the L² inner product becomes a
//! Gaussian moment sum normalized so that `<1, 1> = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exponent pair `x₁^d1 x₂^d2`, ordered graded-lex (total degree, then `d1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub d1: u32,
    pub d2: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { d1: 0, d2: 0 };

    pub fn new(d1: u32, d2: u32) -> Self {
        Monomial { d1, d2 }
    }

    pub fn degree(self) -> u32 {
        self.d1 + self.d2
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.d1).cmp(&(other.degree(), other.d1))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in `x₁, x₂` with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly2 {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `"num/den"` with the denominator always written out.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Nearest f64 to an exact rational; exact-ratio rounding even when numerator
/// and denominator individually overflow f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn one() -> Self {
        Poly2::monomial(Monomial::ONE, BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Poly2::zero();
        p.add_term(m, c);
        p
    }

    /// Build from `(d1, d2, coefficient)` triples; repeated exponents accumulate.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, BigRational)>,
    {
        let mut p = Poly2::zero();
        for (d1, d2, c) in terms {
            p.add_term(Monomial::new(d1, d2), c);
        }
        p
    }

    /// The cubic coupling `x₁²x₂ − x₂³/3`.
    pub fn henon_heiles_potential() -> Self {
        Poly2::from_terms([(2, 1, rat(1, 1)), (0, 3, rat(-1, 3))])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, d1: u32, d2: u32) -> BigRational {
        self.terms
            .get(&Monomial::new(d1, d2))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (Monomial, &BigRational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    /// Maximum total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Poly2, scale: &BigRational) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in other.terms() {
            self.add_term(m, c * scale);
        }
    }

    pub fn scale(&self, s: &BigRational) -> Poly2 {
        if s.is_zero() {
            return Poly2::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    /// Exact product.
    pub fn mul_poly(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(Monomial::new(ma.d1 + mb.d1, ma.d2 + mb.d2), ca * cb);
            }
        }
        out
    }

    /// `(x₁²x₂ − x₂³/3) · P`.
    pub fn multiply_by_v(&self) -> Poly2 {
        let third = rat(1, 3);
        let mut out = Poly2::zero();
        for (m, c) in self.terms() {
            out.add_term(Monomial::new(m.d1 + 2, m.d2 + 1), c.clone());
            out.add_term(Monomial::new(m.d1, m.d2 + 3), -(c * &third));
        }
        out
    }

    /// `−ΔP` only.
    pub fn neg_laplacian(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for (m, c) in self.terms() {
            if m.d1 >= 2 {
                let f = BigInt::from(m.d1 as u64 * (m.d1 as u64 - 1));
                out.add_term(Monomial::new(m.d1 - 2, m.d2), -(c * BigRational::from_integer(f)));
            }
            if m.d2 >= 2 {
                let f = BigInt::from(m.d2 as u64 * (m.d2 as u64 - 1));
                out.add_term(Monomial::new(m.d1, m.d2 - 2), -(c * BigRational::from_integer(f)));
            }
        }
        out
    }

    /// `D P = −ΔP + 2 x·∇P`; on a monomial the Euler part is `2|α| x^α`.
    pub fn apply_d(&self) -> Poly2 {
        let mut out = self.neg_laplacian();
        for (m, c) in self.terms() {
            let k = BigRational::from_integer(BigInt::from(2 * m.degree()));
            out.add_term(m, c * k);
        }
        out
    }

    /// The harmonic oscillator conjugated by the ground-state Gaussian:
    /// `(−Δ + x²)(P e^{−x²/2}) = ((D + 2)P) e^{−x²/2}`.
    pub fn apply_hermite_op(&self) -> Poly2 {
        let mut out = self.apply_d();
        out.add_scaled(self, &rat(2, 1));
        out
    }

    /// Gaussian-weighted mean `π⁻¹∫ P e^{−|x|²} dx`.
    pub fn gaussian_mean(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in self.terms() {
            if m.d1 % 2 == 1 || m.d2 % 2 == 1 {
                continue;
            }
            acc += c * gaussian_moment(m.d1 / 2) * gaussian_moment(m.d2 / 2);
        }
        acc
    }

    /// Solves `D P = rhs` with `<P, 1> = 0` by back-substitution in descending
    /// graded order. `D` is triangular there with diagonal `2|α|`, so the only
    /// obstruction is the constant left over at the end, which equals
    /// `<rhs, 1>`.
    pub fn solve_hermite(rhs: &Poly2) -> Result<Poly2> {
        let mut residual = rhs.clone();
        let mut sol = Poly2::zero();
        loop {
            let Some((m, c)) = residual.terms.iter().next_back().map(|(m, c)| (*m, c.clone()))
            else {
                break;
            };
            if m == Monomial::ONE {
                return Err(Error::Solvability {
                    mean: format_rational(&c),
                });
            }
            let coef = c / BigRational::from_integer(BigInt::from(2 * m.degree()));
            // D x^α = 2|α| x^α − Δ x^α; the lowering part stays in the residual
            residual.terms.remove(&m);
            let lowered = Poly2::monomial(m, coef.clone()).neg_laplacian();
            for (lm, lc) in lowered.terms() {
                residual.add_term(lm, -lc.clone());
            }
            sol.add_term(m, coef);
        }
        let mean = sol.gaussian_mean();
        sol.add_term(Monomial::ONE, -mean);
        Ok(sol)
    }

    /// True when every monomial is even in `x₂`.
    pub fn is_even_in_x2(&self) -> bool {
        self.terms.keys().all(|m| m.d2 % 2 == 0)
    }

    pub fn eval_f64(&self, x1: f64, x2: f64) -> f64 {
        self.terms()
            .map(|(m, c)| rational_to_f64(c) * x1.powi(m.d1 as i32) * x2.powi(m.d2 as i32))
            .sum()
    }
}

/// `<x^{2a}>` for the 1-D normalized weight `e^{−x²}/√π`: `(2a−1)!!/2^a`.
pub fn gaussian_moment(a: u32) -> BigRational {
    let mut num = BigInt::one();
    let mut k = 1u64;
    while k < 2 * a as u64 {
        num *= BigInt::from(k);
        k += 2;
    }
    BigRational::new(num, BigInt::one() << (a as usize))
}

/// Gaussian-weighted inner product `π⁻¹∫ P Q e^{−|x|²} dx` (all coefficients real).
pub fn gaussian_inner(p: &Poly2, q: &Poly2) -> BigRational {
    let mut acc = BigRational::zero();
    for (ma, ca) in p.terms() {
        for (mb, cb) in q.terms() {
            let (e1, e2) = (ma.d1 + mb.d1, ma.d2 + mb.d2);
            if e1 % 2 == 1 || e2 % 2 == 1 {
                continue;
            }
            acc += ca * cb * gaussian_moment(e1 / 2) * gaussian_moment(e2 / 2);
        }
    }
    acc
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        out.add_scaled(rhs, &BigRational::one());
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        out.add_scaled(rhs, &-BigRational::one());
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        self.mul_poly(rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(&-BigRational::one())
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms().rev() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{mag}")?;
            if m.d1 > 0 {
                write!(f, "*x1^{}", m.d1)?;
            }
            if m.d2 > 0 {
                write!(f, "*x2^{}", m.d2)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Poly2Repr {
    terms: Vec<(u32, u32, String)>,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Poly2Repr {
            terms: self
                .terms()
                .map(|(m, c)| (m.d1, m.d2, format_rational(c)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = Poly2Repr::deserialize(d)?;
        let mut p = Poly2::zero();
        for (d1, d2, c) in repr.terms {
            let c = parse_rational(&c).map_err(D::Error::custom)?;
            p.add_term(Monomial::new(d1, d2), c);
        }
        Ok(p)
    }
}
