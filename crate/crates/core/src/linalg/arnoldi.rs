//! Shift-and-invert Arnoldi: the eigenvalues of `A` nearest a shift `σ` are
//! the dominant eigenvalues `μ = 1/(λ − σ)` of `(A − σ)⁻¹`.

use num_complex::Complex64;

use super::{hessenberg_eigenvalues, solve_dense, BandLu, CMatrix};
use crate::error::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug)]
pub struct RitzPair {
    /// Eigenvalue estimate, refined by the complex-symmetric Rayleigh quotient.
    pub value: Complex64,
    /// `‖A x − λ x‖ / ‖x‖` for the Ritz vector `x`.
    pub residual: f64,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Runs `krylov` Arnoldi steps on `(A − σ)⁻¹` (given by its factorization
/// `lu`) and returns the `want` Ritz pairs nearest `σ`, nearest first.
/// `apply` multiplies by `A` itself and is used for residuals. When `A` is
/// complex symmetric (`Aᵀ = A`) the estimate is polished with the bilinear
/// Rayleigh quotient `xᵀAx / xᵀx`, which is stationary at eigenvectors.
pub fn shift_invert_eigenvalues<F>(
    lu: &BandLu,
    sigma: Complex64,
    apply: F,
    krylov: usize,
    want: usize,
    complex_symmetric: bool,
) -> Result<Vec<RitzPair>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = lu.dim();
    let m = krylov.min(n).max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut v0: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.3) / ((i + 1) as f64).powi(2))
        .collect();
    let s = norm(&v0);
    v0.iter_mut().for_each(|z| *z /= s);
    basis.push(v0);
    let mut hm = CMatrix::zeros(m);
    let mut steps = m;
    for j in 0..m {
        let mut w = basis[j].clone();
        lu.solve(&mut w);
        // modified Gram-Schmidt, twice
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let h = dot_h(q, &w);
                for (wk, qk) in w.iter_mut().zip(q) {
                    *wk -= h * qk;
                }
                *hm.at(i, j) += h;
            }
        }
        let beta = norm(&w);
        if j + 1 < m {
            hm.set(j + 1, j, Complex64::new(beta, 0.0));
        }
        let scale = (0..=j).map(|i| hm.get(i, j).norm()).fold(0.0, f64::max);
        if beta <= 1e-14 * scale {
            steps = j + 1;
            break;
        }
        if j + 1 < m {
            w.iter_mut().for_each(|z| *z /= beta);
            basis.push(w);
        }
    }
    let small = CMatrix::from_fn(steps, |i, j| hm.get(i, j));
    let mut mus = hessenberg_eigenvalues(small.clone())?;
    mus.retain(|mu| mu.norm() > 0.0);
    mus.sort_by(|a, b| b.norm().total_cmp(&a.norm()));

    let mut out = Vec::new();
    for &mu in mus.iter().take(want) {
        // eigenvector of the projected matrix by two steps of inverse iteration
        let shift = mu * (1.0 + 1e-10) + Complex64::new(1e-14, 1e-14) * mu.norm();
        let shifted =
            CMatrix::from_fn(steps, |i, j| small.get(i, j) - if i == j { shift } else { ZERO });
        let mut y = vec![Complex64::new(1.0, 0.0); steps];
        for _ in 0..2 {
            y = solve_dense(&shifted, &y)?;
            let s = norm(&y);
            y.iter_mut().for_each(|z| *z /= s);
        }
        let mut x = vec![ZERO; n];
        for (yk, q) in y.iter().zip(&basis) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += yk * qi;
            }
        }
        let ax = apply(&x);
        let num: Complex64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let den: Complex64 = x.iter().map(|a| a * a).sum();
        let coarse = sigma + 1.0 / mu;
        let value = if complex_symmetric && den.norm() > 1e-8 * norm(&x).powi(2) { num / den } else { coarse };
        let r: Vec<Complex64> = ax.iter().zip(&x).map(|(a, b)| a - value * b).collect();
        out.push(RitzPair {
            value,
            residual: norm(&r) / norm(&x),
        });
    }
    out.sort_by(|a, b| (a.value - sigma).norm().total_cmp(&(b.value - sigma).norm()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_nearest_eigenvalues_of_tridiagonal() {
        // non-symmetric tridiagonal with known spectrum: diag + similarity
        let n = 60;
        let diag = |i: usize| Complex64::new(i as f64 * 0.5 + 1.0, -0.01 * i as f64);
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, diag(i)));
            if i + 1 < n {
                // upper-triangular coupling keeps the eigenvalues on the diagonal
                entries.push((i, i + 1, Complex64::new(0.2, 0.1)));
            }
        }
        let sigma = Complex64::new(4.1, 0.0);
        let shifted: Vec<_> = entries
            .iter()
            .map(|&(i, j, v)| (i, j, if i == j { v - sigma } else { v }))
            .collect();
        let lu = BandLu::factor(n, 0, 1, shifted).unwrap();
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            let mut y = vec![ZERO; n];
            for &(i, j, v) in &entries {
                y[i] += v * x[j];
            }
            y
        };
        let pairs = shift_invert_eigenvalues(&lu, sigma, apply, 30, 3, false).unwrap();
        let nearest = pairs[0].value;
        let expect = diag(6);
        assert!((nearest - expect).norm() < 1e-8, "{nearest} vs {expect}");
    }
}
