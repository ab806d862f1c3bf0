//! LU factorization with partial pivoting for complex band matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Factored band matrix with lower bandwidth `kl` and upper bandwidth `ku`.
///
/// Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl` columns hold
/// the fill produced by row interchanges. Multipliers of step `k` live in
/// column `k` below the diagonal and are not permuted by later swaps.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    piv: Vec<usize>,
}

impl BandLu {
    /// Factors the matrix given by its nonzero entries `(row, col, value)`;
    /// repeated positions accumulate. Entries outside the declared band are
    /// rejected with a precondition error.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![ZERO; n * width],
            piv: vec![0; n],
        };
        for (i, j, v) in entries {
            if j + kl < i || j > i + ku {
                return Err(Error::Precondition(format!(
                    "entry ({i}, {j}) outside band kl={kl}, ku={ku}"
                )));
            }
            let idx = lu.idx(i, j);
            lu.data[idx] += v;
        }
        lu.decompose()?;
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    fn decompose(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = -1.0;
            for r in k..=last {
                let v = self.data[self.idx(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= scale * f64::EPSILON * 1e-6 || best == 0.0 {
                return Err(Error::Singular("band LU"));
            }
            self.piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let inv = 1.0 / self.data[self.idx(k, k)];
            let krow = self.idx(k, k);
            for r in k + 1..=last {
                let ik = self.idx(r, k);
                let l = self.data[ik] * inv;
                self.data[ik] = l;
                if l == ZERO {
                    continue;
                }
                let rrow = self.idx(r, k);
                for off in 1..=(jmax - k) {
                    let u = self.data[krow + off];
                    self.data[rrow + off] -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == ZERO {
                continue;
            }
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.data[self.idx(r, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            let row = self.idx(k, k);
            for off in 1..=((k + kl + ku).min(n - 1) - k) {
                s -= self.data[row + off] * b[k + off];
            }
            b[k] = s / self.data[row];
        }
    }
}
