//! The complex-dilated operator
//! `H(β,θ) = −e^{−2θ}Δ + e^{2θ}x² + β e^{3θ}V(x)`
//! compressed onto the oscillator states `|n₁,n₂⟩` with `n₁ + n₂ ≤ N_max`.
//!
//! The kinetic, harmonic and cubic blocks are real symmetric and kept apart;
//! the assembled matrix is complex symmetric but not Hermitian.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BandLu, CMatrix};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Half-width of the strip `|Re θ| < 1`.
pub const MAX_RE_THETA: f64 = 1.0;

/// Angular tolerance for numerical-range containment.
pub const RANGE_ANGLE_TOL: f64 = 1e-10;

/// Absolute tolerance on the coercivity slack.
pub const COERCIVITY_TOL: f64 = 1e-10;

/// Smallest `sin α` accepted by the coercivity check (`ξ = 1/sin α`).
pub const MIN_SIN_ALPHA: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub beta_mod: f64,
    /// `arg β` in radians; kept as given rather than reduced mod 2π.
    pub beta_arg: f64,
    pub theta: Complex64,
    /// `β` exactly as given to [`ScalingParams::new`]; the polar form does not
    /// round-trip, which would break the exact `β → −β` and `β → β̄` symmetries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cartesian: Option<Complex64>,
}

impl ScalingParams {
    pub fn new(beta: Complex64, theta: Complex64) -> Result<Self> {
        let arg = if beta == ZERO { 0.0 } else { beta.arg() };
        let mut p = Self::polar(beta.norm(), arg, theta)?;
        if beta.re.is_finite() && beta.im.is_finite() {
            p.cartesian = Some(beta);
        }
        Ok(p)
    }

    pub fn polar(beta_mod: f64, beta_arg: f64, theta: Complex64) -> Result<Self> {
        if !(beta_mod >= 0.0) || !beta_arg.is_finite() || !theta.re.is_finite() || !theta.im.is_finite() {
            return Err(Error::Precondition("non-finite scaling parameters".into()));
        }
        if theta.re.abs() >= MAX_RE_THETA {
            return Err(Error::Precondition(format!(
                "|Re θ| = {} must be below {MAX_RE_THETA}",
                theta.re.abs()
            )));
        }
        Ok(ScalingParams {
            beta_mod,
            beta_arg,
            theta,
            cartesian: None,
        })
    }

    /// Real coupling with purely imaginary dilation `θ = i t`.
    pub fn real(beta: f64, t: f64) -> Result<Self> {
        Self::new(Complex64::new(beta, 0.0), Complex64::new(0.0, t))
    }

    pub fn beta(&self) -> Complex64 {
        if let Some(b) = self.cartesian {
            b
        } else if self.beta_arg == 0.0 {
            Complex64::new(self.beta_mod, 0.0)
        } else if self.beta_arg == PI || self.beta_arg == -PI {
            Complex64::new(-self.beta_mod, 0.0)
        } else {
            Complex64::from_polar(self.beta_mod, self.beta_arg)
        }
    }

    /// `(s, t) = (arg β, Im θ)`.
    pub fn sector_coords(&self) -> (f64, f64) {
        (self.beta_arg, self.theta.im)
    }

    pub fn in_sector(&self) -> bool {
        sector_membership(self.beta_arg, self.theta.im)
    }

    /// Inside the parallelogram, or `β = 0` with `0 ≤ Im θ ≤ π/5`, where the
    /// sector conditions on `arg β` carry no content.
    pub fn admissible(&self) -> bool {
        if self.beta_mod == 0.0 {
            let t = self.theta.im;
            t >= 0.0 && 5.0 * t <= PI
        } else {
            self.in_sector()
        }
    }
}

/// The parallelogram `0 < t + s < π`, `0 < 5t + s < π` in the `(s, t)` plane.
pub fn sector_membership(s: f64, t: f64) -> bool {
    let a = t + s;
    let b = 5.0 * t + s;
    a > 0.0 && a < PI && b > 0.0 && b < PI
}

/// Oscillator states with `n₁ + n₂ ≤ N_max`, ordered by `n₁ + n₂` and then
/// by ascending `n₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisTruncation {
    pub n_max: usize,
}

impl BasisTruncation {
    pub fn new(n_max: usize) -> Self {
        BasisTruncation { n_max }
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 2) / 2
    }

    pub fn index(&self, n1: usize, n2: usize) -> Option<usize> {
        let l = n1 + n2;
        (l <= self.n_max).then(|| l * (l + 1) / 2 + n1)
    }

    pub fn state(&self, index: usize) -> (usize, usize) {
        // largest l with l(l+1)/2 <= index
        let mut l = (((8 * index + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
        while (l + 1) * (l + 2) / 2 <= index {
            l += 1;
        }
        while l * (l + 1) / 2 > index {
            l -= 1;
        }
        let n1 = index - l * (l + 1) / 2;
        (n1, l - n1)
    }

    pub fn states(&self) -> Vec<(usize, usize)> {
        (0..self.dim()).map(|i| self.state(i)).collect()
    }
}

/// One-dimensional oscillator matrix elements for `p² + x²` with
/// `x = (a + a†)/√2`.
pub mod ladder {
    fn ordered(m: usize, n: usize) -> (usize, usize) {
        if m <= n {
            (m, n)
        } else {
            (n, m)
        }
    }

    pub fn x(m: usize, n: usize) -> f64 {
        let (lo, hi) = ordered(m, n);
        if hi == lo + 1 {
            (hi as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    }

    pub fn x2(m: usize, n: usize) -> f64 {
        let (lo, hi) = ordered(m, n);
        match hi - lo {
            0 => lo as f64 + 0.5,
            2 => ((lo + 1) as f64 * (lo + 2) as f64).sqrt() / 2.0,
            _ => 0.0,
        }
    }

    /// `p² = −d²/dx²`; equals `x²` on the diagonal and its negative two
    /// levels off it, so `p² + x²` is diagonal.
    pub fn p2(m: usize, n: usize) -> f64 {
        let (lo, hi) = ordered(m, n);
        match hi - lo {
            0 => lo as f64 + 0.5,
            2 => -((lo + 1) as f64 * (lo + 2) as f64).sqrt() / 2.0,
            _ => 0.0,
        }
    }

    pub fn x3(m: usize, n: usize) -> f64 {
        let (lo, hi) = ordered(m, n);
        let k = lo as f64;
        match hi - lo {
            1 => 3.0 * (k + 1.0).powf(1.5) / (2.0 * 2f64.sqrt()),
            3 => ((k + 1.0) * (k + 2.0) * (k + 3.0)).sqrt() / (2.0 * 2f64.sqrt()),
            _ => 0.0,
        }
    }
}

/// Real symmetric sparse block stored by columns.
#[derive(Clone, Debug, Default)]
pub struct SparseBlock {
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseBlock {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cols[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// `⟨u, A u⟩`, real because `A` is real symmetric.
    pub fn quadratic_form(&self, u: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                acc += v * (u[i].conj() * u[j]).re;
            }
        }
        acc
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, v)| (i, j, v)))
    }
}

#[derive(Clone, Debug)]
pub struct ScaledHamiltonian {
    pub params: ScalingParams,
    pub trunc: BasisTruncation,
    /// `−Δ`
    pub kinetic: SparseBlock,
    /// `x²`
    pub harmonic: SparseBlock,
    /// `V = x₁²x₂ − x₂³/3`
    pub cubic: SparseBlock,
    cols: Vec<Vec<(usize, Complex64)>>,
    bandwidth: usize,
}

/// Block coefficients `(e^{−2θ}, e^{2θ}, β e^{3θ})`.
pub fn block_weights(params: &ScalingParams) -> (Complex64, Complex64, Complex64) {
    let th = params.theta;
    ((-2.0 * th).exp(), (2.0 * th).exp(), params.beta() * (3.0 * th).exp())
}

pub fn assemble(params: ScalingParams, trunc: BasisTruncation) -> Result<ScaledHamiltonian> {
    if trunc.n_max < 3 {
        return Err(Error::TruncationTooSmall { n_max: trunc.n_max });
    }
    let dim = trunc.dim();
    let columns = par::map_range(dim, |j| {
        let (n1, n2) = trunc.state(j);
        let mut t = Vec::new();
        let mut x = Vec::new();
        let mut v = Vec::new();
        for m1 in n1.saturating_sub(2)..=n1 + 2 {
            for m2 in n2.saturating_sub(3)..=n2 + 3 {
                let Some(i) = trunc.index(m1, m2) else { continue };
                let (d1, d2) = (m1 == n1, m2 == n2);
                let tv = if d2 { ladder::p2(m1, n1) } else { 0.0 }
                    + if d1 { ladder::p2(m2, n2) } else { 0.0 };
                let xv = if d2 { ladder::x2(m1, n1) } else { 0.0 }
                    + if d1 { ladder::x2(m2, n2) } else { 0.0 };
                let vv = ladder::x2(m1, n1) * ladder::x(m2, n2)
                    - if d1 { ladder::x3(m2, n2) / 3.0 } else { 0.0 };
                if tv != 0.0 {
                    t.push((i, tv));
                }
                if xv != 0.0 {
                    x.push((i, xv));
                }
                if vv != 0.0 {
                    v.push((i, vv));
                }
            }
        }
        (t, x, v)
    });
    let mut kinetic = SparseBlock::default();
    let mut harmonic = SparseBlock::default();
    let mut cubic = SparseBlock::default();
    for (t, x, v) in columns {
        kinetic.cols.push(t);
        harmonic.cols.push(x);
        cubic.cols.push(v);
    }
    let mut h = ScaledHamiltonian {
        params,
        trunc,
        kinetic,
        harmonic,
        cubic,
        cols: Vec::new(),
        bandwidth: 0,
    };
    h.combine();
    Ok(h)
}

impl ScaledHamiltonian {
    fn combine(&mut self) {
        let (wt, wx, wv) = block_weights(&self.params);
        let dim = self.dim();
        let mut bandwidth = 0;
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut col: Vec<(usize, Complex64)> = Vec::new();
            let mut push = |i: usize, z: Complex64| match col.iter_mut().find(|(r, _)| *r == i) {
                Some((_, acc)) => *acc += z,
                None => col.push((i, z)),
            };
            for &(i, v) in &self.kinetic.cols[j] {
                push(i, wt * v);
            }
            for &(i, v) in &self.harmonic.cols[j] {
                push(i, wx * v);
            }
            if wv != ZERO {
                for &(i, v) in &self.cubic.cols[j] {
                    push(i, wv * v);
                }
            }
            col.retain(|(_, z)| *z != ZERO);
            col.sort_by_key(|(i, _)| *i);
            for (i, _) in &col {
                bandwidth = bandwidth.max(i.abs_diff(j));
            }
            cols.push(col);
        }
        self.cols = cols;
        self.bandwidth = bandwidth;
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    /// Largest `|i − j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.cols[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map(|(_, z)| *z)
            .unwrap_or(ZERO)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(i, z)| (i, j, z)))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim());
        for (i, j, z) in self.entries() {
            m.set(i, j, z);
        }
        m
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            for &(i, z) in col {
                y[i] += z * xj;
            }
        }
        y
    }

    /// LU factors of `H − shift`.
    pub fn shifted_lu(&self, shift: Complex64) -> Result<BandLu> {
        let bw = self.bandwidth;
        let dim = self.dim();
        let diag = (0..dim).map(|i| (i, i, -shift));
        BandLu::factor(dim, bw, bw, self.entries().chain(diag))
    }

    /// `(−1)^{n₂}` for each basis state.
    pub fn x2_parity(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if self.trunc.state(i).1.is_multiple_of(2) { 1.0 } else { -1.0 })
            .collect()
    }

    pub fn export(&self) -> MatrixExport {
        let dense = self.to_dense();
        MatrixExport {
            dim: self.dim(),
            n_max: self.trunc.n_max,
            params: self.params,
            basis: self.trunc.states(),
            data: dense.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    fn quotient_parts(&self, u: &[Complex64]) -> (f64, f64, f64, f64) {
        let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        (
            self.kinetic.quadratic_form(u) / norm,
            self.harmonic.quadratic_form(u) / norm,
            self.cubic.quadratic_form(u) / norm,
            norm,
        )
    }
}

/// Row-major dense dump of the matrix with its basis table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixExport {
    pub dim: usize,
    pub n_max: usize,
    pub params: ScalingParams,
    pub basis: Vec<(usize, usize)>,
    pub data: Vec<[f64; 2]>,
}

fn random_unit_vector(dim: usize, seed: u64, sample: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    let mut u: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let n: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    u.iter_mut().for_each(|z| *z /= n);
    u
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeReport {
    pub seed: u64,
    pub n_samples: usize,
    /// Upper edge `arg β + 3 Im θ` of the half-plane for `H`; the lower edge is
    /// `π` below it.
    pub alpha_h: f64,
    /// The same edge for `K = e^{2θ}H`, against which the samples are tested.
    pub alpha_k: f64,
    pub angle_tolerance: f64,
    pub max_violation: f64,
    pub worst_sample: usize,
    /// Rayleigh quotient of `K` at the worst sample.
    pub worst_quotient: [f64; 2],
    pub passed: bool,
}

/// Distance in angle from `z` to the closed half-plane
/// `{−π + α ≤ arg z ≤ α}`; zero inside.
pub fn half_plane_violation(z: Complex64, alpha: f64) -> f64 {
    let w = z * Complex64::from_polar(1.0, -alpha);
    if w.im <= 0.0 {
        return 0.0;
    }
    let ang = w.im.atan2(w.re);
    ang.min(PI - ang)
}

pub fn numerical_range_check(h: &ScaledHamiltonian, n_samples: usize, seed: u64) -> Result<RangeReport> {
    let (s, t) = h.params.sector_coords();
    if !h.params.admissible() {
        return Err(Error::Precondition(format!(
            "(arg β, Im θ) = ({s}, {t}) lies outside the parallelogram"
        )));
    }
    let (wt, wx, wv) = block_weights(&h.params);
    let alpha_h = s + 3.0 * t;
    let alpha_k = alpha_h + 2.0 * t;
    let to_k = (2.0 * h.params.theta).exp();
    let quotients = par::map_range(n_samples, |k| {
        let u = random_unit_vector(h.dim(), seed, k);
        let (qt, qx, qv, _) = h.quotient_parts(&u);
        to_k * (wt * qt + wx * qx + wv * qv)
    });
    let mut worst = (0.0, 0usize);
    for (k, z) in quotients.iter().enumerate() {
        let v = half_plane_violation(*z, alpha_k);
        if v > worst.0 {
            worst = (v, k);
        }
    }
    let wq = quotients.get(worst.1).copied().unwrap_or(ZERO);
    Ok(RangeReport {
        seed,
        n_samples,
        alpha_h,
        alpha_k,
        angle_tolerance: RANGE_ANGLE_TOL,
        max_violation: worst.0,
        worst_sample: worst.1,
        worst_quotient: [wq.re, wq.im],
        passed: worst.0 <= RANGE_ANGLE_TOL,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub seed: u64,
    pub n_samples: usize,
    pub alpha: f64,
    pub xi: f64,
    pub tolerance: f64,
    pub min_slack: f64,
    pub worst_sample: usize,
    pub passed: bool,
}

/// Samples `ξ Re[e^{−i(α−π/2)}⟨u, K u⟩] − ⟨u, −Δu⟩` with `K = e^{2θ}H`,
/// `α = arg(β e^{5θ})` and `ξ = 1/sin α`.
pub fn coercivity_check(h: &ScaledHamiltonian, n_samples: usize, seed: u64) -> Result<CoercivityReport> {
    let th = h.params.theta;
    let gamma = (4.0 * th).exp();
    let beta_k = h.params.beta() * (5.0 * th).exp();
    let alpha = h.params.beta_arg + 5.0 * th.im;
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Precondition(format!("α = arg β + 5 Im θ = {alpha} must lie in (0, π)")));
    }
    if alpha.sin() < MIN_SIN_ALPHA {
        return Err(Error::Precondition(format!("sin α = {} too small: ξ = 1/sin α unbounded", alpha.sin())));
    }
    let arg_gamma = 4.0 * th.im;
    if !(arg_gamma > alpha - PI && arg_gamma < alpha) {
        return Err(Error::Precondition(format!(
            "arg γ = {arg_gamma} violates −π + α < arg γ < α (α = {alpha})"
        )));
    }
    if !(gamma.norm_sqr() > 4.0 * beta_k.norm() * alpha.sin()) {
        return Err(Error::Precondition(format!(
            "|γ|² = {} violates |γ|² > 4|β'| sin α = {}",
            gamma.norm_sqr(),
            4.0 * beta_k.norm() * alpha.sin()
        )));
    }
    let xi = 1.0 / alpha.sin();
    let rot = Complex64::from_polar(1.0, -(alpha - PI / 2.0));
    let slacks = par::map_range(n_samples, |k| {
        let u = random_unit_vector(h.dim(), seed, k);
        let (qt, qx, qv, _) = h.quotient_parts(&u);
        let form = Complex64::new(qt, 0.0) + gamma * qx + beta_k * qv;
        xi * (rot * form).re - qt
    });
    let (worst_sample, min_slack) = slacks
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY));
    Ok(CoercivityReport {
        seed,
        n_samples,
        alpha,
        xi,
        tolerance: COERCIVITY_TOL,
        min_slack,
        worst_sample,
        passed: min_slack >= -COERCIVITY_TOL,
    })
}
