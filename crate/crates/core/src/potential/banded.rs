//! Banded LU factorization with partial pivoting (LAPACK `gbtrf`-style
//! storage: column-major bands with `kl` extra rows for pivot fill).

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    /// Leading dimension 2*kl + ku + 1.
    ldab: usize,
    /// Column-major: A(i,j) lives at ab[j*ldab + kl + ku + i - j].
    ab: Vec<f64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandedMatrix { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i);
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.ab[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let o = self.offset(i, j);
        self.ab[o] += v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            return 0.0;
        }
        self.ab[self.offset(i, j)]
    }

    /// y = A x, using only the original band.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let i0 = j.saturating_sub(self.ku);
            let i1 = (j + self.kl).min(self.n - 1);
            let base = j * self.ldab + self.kl + self.ku;
            for i in i0..=i1 {
                y[i] += self.ab[base + i - j] * xj;
            }
        }
        y
    }

    /// LU factorization with row partial pivoting. Consumes the matrix.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        let mut mults = vec![0.0; kl];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j
            let col = j * ldab + kl + ku;
            let mut p = 0usize;
            let mut pmax = self.ab[col].abs();
            for i in 1..=km {
                let v = self.ab[col + i].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(Error::SingularMatrix { row: j });
            }
            ipiv[j] = j + p;
            let jend = (j + kl + ku).min(n - 1);
            if p != 0 {
                // swap rows j and j+p across columns j..=jend
                for c in j..=jend {
                    let base = c * ldab + kl + ku;
                    self.ab.swap(base + j - c, base + j + p - c);
                }
            }
            let pivot = self.ab[col];
            for i in 1..=km {
                self.ab[col + i] /= pivot;
            }
            mults[..km].copy_from_slice(&self.ab[col + 1..=col + km]);
            // rank-1 update of the trailing band
            for c in j + 1..=jend {
                let base = c * ldab + kl + ku;
                let f = self.ab[base + j - c];
                if f != 0.0 {
                    let lo = base + j + 1 - c;
                    let tail = &mut self.ab[lo..lo + km];
                    for (t, m) in tail.iter_mut().zip(&mults[..km]) {
                        *t -= m * f;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, ldab, ab: self.ab, ipiv })
    }
}

/// Factored form; upper bandwidth grows to kl + ku from pivoting.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        assert_eq!(b.len(), n);
        // L solve with row swaps
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let bj = b[j];
            if bj != 0.0 {
                let km = kl.min(n - 1 - j);
                let col = j * ldab + kl + ku;
                for i in 1..=km {
                    b[j + i] -= self.ab[col + i] * bj;
                }
            }
        }
        // U solve, upper bandwidth kl + ku
        for j in (0..n).rev() {
            let col = j * ldab + kl + ku;
            b[j] /= self.ab[col];
            let bj = b[j];
            if bj != 0.0 {
                let i0 = j.saturating_sub(kl + ku);
                let base = j * ldab + kl + ku;
                for i in i0..j {
                    b[i] -= self.ab[base + i - j] * bj;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve_check(n: usize, kl: usize, ku: usize, seed: u64) {
        // deterministic pseudo-random band
        let mut s = seed;
        let mut rng = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = BandedMatrix::new(n, kl, ku);
        for j in 0..n {
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                a.set(i, j, rng());
            }
            a.add(j, j, 4.0); // keep it comfortably nonsingular
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        let lu = a.factor().unwrap();
        lu.solve(&mut b);
        let err = b
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-11, "n={n} kl={kl} ku={ku}: max err {err:e}");
    }

    #[test]
    fn random_band_roundtrip() {
        dense_solve_check(50, 3, 3, 1);
        dense_solve_check(200, 11, 11, 2);
        dense_solve_check(64, 1, 5, 3);
        dense_solve_check(64, 5, 1, 4);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::new(4, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 1.0);
        // rows 2,3 left zero
        assert!(matches!(a.factor(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [0 1; 1 0] needs a row swap
        let mut a = BandedMatrix::new(2, 1, 1);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        let mut b = vec![2.0, 3.0];
        a.factor().unwrap().solve(&mut b);
        assert_eq!(b, vec![3.0, 2.0]);
    }
}
