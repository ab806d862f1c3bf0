//! Locating the resonance `E(β)` near `E₀ = 2` in the truncated dilated
//! spectrum, converging it in the basis size and dilation angle, and
//! continuing it in `arg β`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, shift_invert_eigenvalues};
use crate::par;
use crate::scaled_hamiltonian::{assemble, half_plane_violation, BasisTruncation, ScaledHamiltonian, ScalingParams};

#[cfg(feature = "multiprecision")]
pub mod precise;

pub const E0: Complex64 = Complex64::new(2.0, 0.0);

/// Dilation angle used for real couplings when nothing else is requested.
pub const DEFAULT_IM_THETA: f64 = 0.35;

/// A second eigenvalue closer to the seed than this multiple of the nearest
/// one's distance makes the choice ambiguous.
pub const DEFAULT_SEPARATION: f64 = 3.0;

const KRYLOV: usize = 24;
const RITZ_WANTED: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub value: Complex64,
    pub beta: Complex64,
    pub theta: Complex64,
    pub n_max: usize,
    /// Last increment in the basis-size sequence, or the Ritz residual for a
    /// single solve.
    pub est_error: f64,
    /// `|ΔE|` when `Im θ` moves to a neighbouring grid point; zero when not
    /// measured.
    pub theta_sensitivity: f64,
}

impl Resonance {
    fn unperturbed(beta: Complex64, theta: Complex64) -> Self {
        Resonance {
            value: E0,
            beta,
            theta,
            n_max: 0,
            est_error: 0.0,
            theta_sensitivity: 0.0,
        }
    }

    /// Whether the value lies in the half-plane
    /// `−π + arg β + 3 Im θ ≤ arg E ≤ arg β + 3 Im θ` that contains the
    /// numerical range of `H(β,θ)`.
    pub fn within_half_plane(&self, angle_tol: f64) -> bool {
        let alpha = if self.beta == Complex64::new(0.0, 0.0) { 0.0 } else { self.beta.arg() };
        half_plane_violation(self.value, alpha + 3.0 * self.theta.im) <= angle_tol
    }
}

pub fn all_eigenvalues(h: &ScaledHamiltonian) -> Result<Vec<Complex64>> {
    eigenvalues(&h.to_dense())
}

pub fn locate_resonance(params: ScalingParams, trunc: BasisTruncation, seed: Complex64) -> Result<Resonance> {
    locate_resonance_with(params, trunc, seed, DEFAULT_SEPARATION)
}

/// Nearest eigenvalue to `seed` by shift-and-invert Arnoldi on the banded
/// matrix.
pub fn locate_resonance_with(
    params: ScalingParams,
    trunc: BasisTruncation,
    seed: Complex64,
    separation: f64,
) -> Result<Resonance> {
    if !params.admissible() {
        let (s, t) = params.sector_coords();
        return Err(Error::Precondition(format!(
            "(arg β, Im θ) = ({s}, {t}) lies outside the parallelogram"
        )));
    }
    let h = assemble(params, trunc)?;
    locate_in(&h, seed, separation)
}

fn locate_in(h: &ScaledHamiltonian, seed: Complex64, separation: f64) -> Result<Resonance> {
    // keep the shift off any eigenvalue that the seed might hit exactly
    let sigma = seed + Complex64::new(1e-7, -1e-7) * seed.norm().max(1.0);
    let lu = h.shifted_lu(sigma)?;
    let mut ritz = shift_invert_eigenvalues(&lu, sigma, |x| h.matvec(x), KRYLOV, RITZ_WANTED, true)?;
    ritz.sort_by(|a, b| (a.value - seed).norm().total_cmp(&(b.value - seed).norm()));
    let first = ritz
        .first()
        .copied()
        .ok_or(Error::Solver { iterations: KRYLOV })?;
    if let Some(second) = ritz.get(1) {
        let d1 = (first.value - seed).norm();
        let d2 = (second.value - seed).norm();
        if d2 < separation * d1 {
            return Err(Error::Ambiguous {
                seed: seed.to_string(),
                first: first.value.to_string(),
                second: second.value.to_string(),
            });
        }
    }
    Ok(Resonance {
        value: first.value,
        beta: h.params.beta(),
        theta: h.params.theta,
        n_max: h.trunc.n_max,
        est_error: first.residual,
        theta_sensitivity: 0.0,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergeOptions {
    /// Candidate `Im θ` values for a positive coupling. For `arg β = s` each
    /// `t` becomes `t(1 − 2s/π)`, which runs from `t` to `−t` as `s` goes from
    /// 0 to π; points outside the parallelogram are dropped.
    pub t_grid: Vec<f64>,
    /// Basis size used to compare the grid points.
    pub scan_n_max: usize,
    pub n_start: usize,
    pub n_step: usize,
    pub n_budget: usize,
    pub separation: f64,
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        ConvergeOptions {
            t_grid: vec![0.25, 0.3, DEFAULT_IM_THETA, 0.4, 0.45],
            scan_n_max: 30,
            n_start: 20,
            n_step: 5,
            n_budget: 60,
            separation: DEFAULT_SEPARATION,
        }
    }
}

impl ConvergeOptions {
    /// Pins the dilation angle to one value.
    pub fn fixed_t(t: f64) -> Self {
        ConvergeOptions {
            t_grid: vec![t],
            ..Default::default()
        }
    }

    fn candidates(&self, s: f64) -> Vec<f64> {
        self.t_grid
            .iter()
            .map(|t| t * (1.0 - 2.0 * s / PI))
            .filter(|&t| crate::scaled_hamiltonian::sector_membership(s, t))
            .collect()
    }
}

pub fn converge_resonance(beta: Complex64, tol: f64) -> Result<Resonance> {
    converge_resonance_with(beta, tol, &ConvergeOptions::default())
}

/// Picks the grid angle where `E` moves least between neighbours, then grows
/// `N_max` until two successive values agree to `tol`.
pub fn converge_resonance_with(beta: Complex64, tol: f64, opts: &ConvergeOptions) -> Result<Resonance> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let s = if beta == Complex64::new(0.0, 0.0) { 0.0 } else { beta.arg() };
    let ts = opts.candidates(s);
    let Some(&t_first) = ts.first() else {
        return Err(Error::Precondition(format!("no grid angle lies in the parallelogram for arg β = {s}")));
    };
    if beta.norm() == 0.0 {
        return Ok(Resonance::unperturbed(beta, Complex64::new(0.0, DEFAULT_IM_THETA.max(t_first))));
    }
    let params_at = |t: f64| ScalingParams::polar(beta.norm(), s, Complex64::new(0.0, t));
    let at = |t: f64, n: usize, seed: Complex64| -> Result<Resonance> {
        locate_resonance_with(params_at(t)?, BasisTruncation::new(n), seed, opts.separation)
    };

    let t_star = if ts.len() == 1 {
        ts[0]
    } else {
        let scan: Vec<Result<Resonance>> = par::map_slice(&ts, |&t| at(t, opts.scan_n_max, E0));
        let values: Vec<Complex64> = scan
            .into_iter()
            .map(|r| r.map(|r| r.value))
            .collect::<Result<_>>()?;
        let sensitivity = |k: usize| {
            let left = k.checked_sub(1).map(|j| (values[k] - values[j]).norm());
            let right = values.get(k + 1).map(|v| (v - values[k]).norm());
            left.into_iter().chain(right).fold(0.0, f64::max)
        };
        let best = (0..ts.len())
            .min_by(|&a, &b| sensitivity(a).total_cmp(&sensitivity(b)))
            .unwrap_or(0);
        ts[best]
    };

    let mut n = opts.n_start.max(3);
    let mut prev = at(t_star, n, E0)?;
    let mut increment = f64::INFINITY;
    while n + opts.n_step <= opts.n_budget && opts.n_step > 0 {
        n += opts.n_step;
        let cur = at(t_star, n, prev.value)?;
        increment = (cur.value - prev.value).norm();
        prev = cur;
        if increment < tol {
            break;
        }
    }
    if !(increment < tol) {
        return Err(Error::NonConvergence {
            best: format!("{} at N_max = {}, Im θ = {t_star}", prev.value, prev.n_max),
            increment,
        });
    }
    let neighbour = [t_star + 0.05, t_star - 0.05]
        .into_iter()
        .find(|&t| crate::scaled_hamiltonian::sector_membership(s, t));
    let theta_sensitivity = match neighbour {
        Some(t) => (at(t, n, prev.value)?.value - prev.value).norm(),
        None => 0.0,
    };
    Ok(Resonance {
        est_error: increment,
        theta_sensitivity,
        ..prev
    })
}

/// `Im θ` along the line `Im θ = π/6 − arg β / 3`, which stays inside the
/// parallelogram for every `arg β ∈ [0, π]`.
pub fn continuation_t(s: f64) -> f64 {
    PI / 6.0 - s / 3.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub n_max: usize,
    /// Bound on `|E(s_mid) − (E(s_j) + E(s_{j+1}))/2|`; a larger deviation
    /// from the chord means the step was too coarse to follow one branch.
    pub step_bound: f64,
    pub separation: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            n_max: 36,
            step_bound: 1e-4,
            separation: DEFAULT_SEPARATION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub s: f64,
    pub t: f64,
    #[serde(rename = "re_E")]
    pub re_e: f64,
    #[serde(rename = "im_E")]
    pub im_e: f64,
}

impl TrackPoint {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re_e, self.im_e)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub rho: f64,
    pub n_max: usize,
    pub points: Vec<TrackPoint>,
    /// `|E_{j+1} − E_j|`
    pub increments: Vec<f64>,
    /// Largest midpoint deviation from the chord over all steps.
    pub max_chord_deviation: f64,
    pub start: Complex64,
    pub end: Complex64,
    /// `|E(π) − conj E(0)|`
    pub endpoint_error: f64,
}

pub fn continue_argument(rho: f64, steps: usize) -> Result<ContinuationResult> {
    continue_argument_with(rho, steps, &ContinuationOptions::default())
}

/// Follows `E` along `β = ρ e^{is}`, `s: 0 → π`, seeding each solve with the
/// previous value and checking every step at its midpoint.
pub fn continue_argument_with(rho: f64, steps: usize, opts: &ContinuationOptions) -> Result<ContinuationResult> {
    if steps == 0 {
        return Err(Error::Precondition("continuation needs at least one step".into()));
    }
    if !(rho >= 0.0) {
        return Err(Error::Precondition(format!("modulus must be non-negative, got {rho}")));
    }
    let s_at = |j: usize| if j == steps { PI } else { PI * j as f64 / steps as f64 };
    let trunc = BasisTruncation::new(opts.n_max);
    let solve = |s: f64, seed: Complex64| -> Result<Complex64> {
        let t = continuation_t(s);
        let params = ScalingParams::polar(rho, s, Complex64::new(0.0, t))?;
        Ok(locate_resonance_with(params, trunc, seed, opts.separation)?.value)
    };

    let mut points = Vec::with_capacity(steps + 1);
    let mut increments = Vec::with_capacity(steps);
    let mut max_dev: f64 = 0.0;
    let mut prev = if rho == 0.0 { E0 } else { solve(0.0, E0)? };
    points.push(point(0.0, prev));
    for j in 0..steps {
        let (s0, s1) = (s_at(j), s_at(j + 1));
        let next = if rho == 0.0 { E0 } else { solve(s1, prev)? };
        if rho > 0.0 {
            let chord = (prev + next) * 0.5;
            let mid = solve(0.5 * (s0 + s1), chord)?;
            let dev = (mid - chord).norm();
            max_dev = max_dev.max(dev);
            if dev > opts.step_bound {
                return Err(Error::BranchJump {
                    step: j,
                    jump: dev,
                    bound: opts.step_bound,
                });
            }
        }
        increments.push((next - prev).norm());
        points.push(point(s1, next));
        prev = next;
    }
    let start = points[0].value();
    let end = prev;
    Ok(ContinuationResult {
        rho,
        n_max: opts.n_max,
        points,
        increments,
        max_chord_deviation: max_dev,
        start,
        end,
        endpoint_error: (end - start.conj()).norm(),
    })
}

fn point(s: f64, e: Complex64) -> TrackPoint {
    TrackPoint {
        s,
        t: continuation_t(s),
        re_e: e.re,
        im_e: e.im,
    }
}
