//! Eigenvalues of general complex matrices: Householder reduction to upper
//! Hessenberg form followed by single-shift QR sweeps with Wilkinson shifts
//! and deflation.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// All eigenvalues of `a`, in no particular order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let mut h = a.clone();
    reduce_to_hessenberg(&mut h);
    hessenberg_eigenvalues(h)
}

fn reduce_to_hessenberg(a: &mut CMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| a.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a.get(k + 1, k);
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in 0..n {
            v[i] = ZERO;
        }
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a.get(i, k);
        }
        let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut().skip(k + 1) {
            *vi /= vnorm;
        }
        // A ← (I − 2vv*) A
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * a.get(i, j);
            }
            let s2 = s * 2.0;
            for i in k + 1..n {
                *a.at(i, j) -= v[i] * s2;
            }
        }
        // A ← A (I − 2vv*)
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += a.get(i, j) * v[j];
            }
            let s2 = s * 2.0;
            for j in k + 1..n {
                *a.at(i, j) -= s2 * v[j].conj();
            }
        }
        a.set(k + 1, k, alpha);
        for i in k + 2..n {
            a.set(i, k, ZERO);
        }
    }
}

/// Eigenvalues of a matrix already in upper Hessenberg form (entries below the
/// first subdiagonal are ignored).
pub fn hessenberg_eigenvalues(mut h: CMatrix) -> Result<Vec<Complex64>> {
    let n = h.dim();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            out.push(h.get(0, 0));
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1).norm();
            let diag = h.get(lo, lo).norm() + h.get(lo - 1, lo - 1).norm();
            if sub <= f64::EPSILON * diag || sub < f64::MIN_POSITIVE {
                h.set(lo, lo - 1, ZERO);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out.push(h.get(hi, hi));
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= max_iter {
            return Err(Error::Solver { iterations: total });
        }
        total += 1;
        since_deflation += 1;

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h.get(hi, hi) + Complex64::new(0.75, 0.25) * h.get(hi, hi - 1).norm()
        } else {
            wilkinson_shift(
                h.get(hi - 1, hi - 1),
                h.get(hi - 1, hi),
                h.get(hi, hi - 1),
                h.get(hi, hi),
            )
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit-shift QR step `H − μ = QR, H ← RQ + μ` on rows/columns `lo..=hi`.
fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    for k in lo..=hi {
        *h.at(k, k) -= mu;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h.get(k, k), h.get(k + 1, k));
        for j in k..=hi {
            let (x, y) = (h.get(k, j), h.get(k + 1, j));
            h.set(k, j, x * c + s * y);
            h.set(k + 1, j, -s.conj() * x + y * c);
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for i in lo..=top {
            let (x, y) = (h.get(i, k), h.get(i, k + 1));
            h.set(i, k, x * c + y * s.conj());
            h.set(i, k + 1, -x * s + y * c);
        }
    }
    for k in lo..=hi {
        *h.at(k, k) += mu;
    }
}

/// Rotation `[[c, s], [−s̄, c]]` with real `c` that zeroes `y` in `(x, y)ᵀ`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let (ax, ay) = (x.norm(), y.norm());
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_dense;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn one_by_one() {
        let m = CMatrix::from_fn(1, |_, _| c(3.0, -2.0));
        assert_eq!(eigenvalues(&m).unwrap(), vec![c(3.0, -2.0)]);
    }

    #[test]
    fn triangular_and_diagonal() {
        let m = CMatrix::from_fn(5, |i, j| {
            if i == j {
                c(i as f64 + 1.0, 0.5 * i as f64)
            } else if j > i {
                c(0.3, 0.1 * (i + j) as f64)
            } else {
                ZERO
            }
        });
        let ev = sorted(eigenvalues(&m).unwrap());
        for (k, z) in ev.iter().enumerate() {
            assert!((z - c(k as f64 + 1.0, 0.5 * k as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // (z − 1)(z − 2i)(z + 0.5 − 0.5i)(z − 3)
        let roots = [c(1.0, 0.0), c(0.0, 2.0), c(-0.5, 0.5), c(3.0, 0.0)];
        let mut poly = vec![c(1.0, 0.0)];
        for r in roots {
            let mut next = vec![ZERO; poly.len() + 1];
            for (k, p) in poly.iter().enumerate() {
                next[k + 1] += *p;
                next[k] -= *p * r;
            }
            poly = next;
        }
        let n = roots.len();
        let comp = CMatrix::from_fn(n, |i, j| {
            if i == 0 {
                -poly[n - 1 - j]
            } else if i == j + 1 {
                c(1.0, 0.0)
            } else {
                ZERO
            }
        });
        let ev = eigenvalues(&comp).unwrap();
        for r in roots {
            assert!(ev.iter().any(|z| (z - r).norm() < 1e-10), "missing {r}");
        }
    }

    #[test]
    fn random_matrix_eigenvalues_are_singular_points() {
        let n = 30;
        let m = CMatrix::from_fn(n, |i, j| {
            let s = ((i * 37 + j * 101 + 7) % 97) as f64 / 97.0 - 0.5;
            let t = ((i * 53 + j * 29 + 3) % 89) as f64 / 89.0 - 0.5;
            c(s, t)
        });
        let ev = eigenvalues(&m).unwrap();
        assert_eq!(ev.len(), n);
        let trace: Complex64 = (0..n).map(|k| m.get(k, k)).sum();
        let sum: Complex64 = ev.iter().sum();
        assert!((trace - sum).norm() < 1e-10);
        for z in ev {
            let shifted = CMatrix::from_fn(n, |i, j| m.get(i, j) - if i == j { z } else { ZERO });
            let x = solve_dense(&shifted, &vec![c(1.0, 0.0); n]);
            if let Ok(x) = x {
                let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                assert!(norm > 1e8, "eigenvalue {z} not singular enough: {norm}");
            }
        }
    }
}
