//! Dense and banded complex linear algebra used by the eigenvalue routes.

mod arnoldi;
mod band;
mod eig;

pub use arnoldi::{shift_invert_eigenvalues, RitzPair};
pub use band::BandLu;
pub use eig::{eigenvalues, hessenberg_eigenvalues};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub(crate) fn at(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Solves `A x = b` for a small dense complex system by Gaussian elimination
/// with partial pivoting.
pub fn solve_dense(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m.get(i, k).norm().total_cmp(&m.get(j, k).norm()))
            .unwrap();
        if m.get(p, k).norm() <= scale * 1e-300 {
            return Err(Error::Singular("dense solve"));
        }
        if p != k {
            for j in 0..n {
                let t = m.get(k, j);
                m.set(k, j, m.get(p, j));
                m.set(p, j, t);
            }
            x.swap(k, p);
        }
        let piv = m.get(k, k);
        for i in k + 1..n {
            let l = m.get(i, k) / piv;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = m.get(k, j);
                *m.at(i, j) -= l * v;
            }
            let xk = x[k];
            x[i] -= l * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m.get(k, j) * x[j];
        }
        x[k] = s / m.get(k, k);
    }
    Ok(x)
}

/// Real counterpart of [`solve_dense`]; reports a singular system when a pivot
/// falls below `rel_tol` times the largest entry.
pub fn solve_dense_real(a: &[Vec<f64>], b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[p][k].abs() <= scale * rel_tol {
            return Err(Error::Singular("real dense solve"));
        }
        m.swap(k, p);
        x.swap(k, p);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            if l == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= l * m[k][j];
            }
            x[i] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dense_solve_roundtrip() {
        let a = CMatrix::from_fn(4, |i, j| {
            c((i * 3 + j) as f64 % 5.0 + if i == j { 4.0 } else { 0.0 }, (i as f64 - j as f64) * 0.3)
        });
        let x: Vec<Complex64> = (0..4).map(|k| c(k as f64, 1.0 - k as f64)).collect();
        let b = a.matvec(&x);
        let y = solve_dense(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = CMatrix::zeros(3);
        assert!(solve_dense(&a, &[c(1.0, 0.0); 3]).is_err());
        let r = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense_real(&r, &[1.0, 1.0], 1e-13).is_err());
    }
}
