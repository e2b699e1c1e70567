//! Dense complex LU with partial pivoting and a Hager–Higham 1-norm
//! condition estimate.

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `P A = L U` with unit lower `L`; both factors share one buffer.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<Complex64>,
    /// Row `i` of `P A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    singular: bool,
}

impl LuFactor {
    pub fn new(matrix: DenseMatrix) -> Self {
        let n = matrix.n;
        let mut lu = matrix.data;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&a, &b| lu[a * n + k].norm().total_cmp(&lu[b * n + k].norm()))
                .unwrap_or(k);
            if lu[pivot * n + k].norm() == 0.0 {
                singular = true;
                continue;
            }
            if pivot != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
            }
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let inv = pivot_row[k].inv();
            tail.par_chunks_mut(n).for_each(|row| {
                let factor = row[k] * inv;
                row[k] = factor;
                if factor.norm_sqr() != 0.0 {
                    for (r, p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *r -= factor * p;
                    }
                }
            });
        }
        Self {
            n,
            lu,
            perm,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: Complex64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let at = |i: usize, j: usize| self.lu[i * n + j];
        // U^H w = b (forward)
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= at(j, i).conj() * w[j];
            }
            w[i] = s / at(i, i).conj();
        }
        // L^H v = w (backward, unit diagonal)
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= at(j, i).conj() * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    /// Hager–Higham estimate of `||A^{-1}||_1`.
    pub fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.n;
        if self.singular {
            return f64::INFINITY;
        }
        let norm1 = |v: &[Complex64]| v.iter().map(|c| c.norm()).sum::<f64>();
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0;
        let mut last_index = usize::MAX;
        for iter in 0..5 {
            let y = self.solve(&x);
            let est = norm1(&y);
            if iter > 0 && est <= estimate {
                break;
            }
            estimate = est;
            let xi: Vec<Complex64> = y
                .iter()
                .map(|c| if c.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { c / c.norm() })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((0, 0.0));
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && (zmax <= ztx || j == last_index) {
                break;
            }
            last_index = j;
            x = vec![Complex64::new(0.0, 0.0); n];
            x[j] = Complex64::new(1.0, 0.0);
        }
        // Higham's alternating vector guards against unlucky starts.
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let alt_est = 2.0 * norm1(&self.solve(&alt)) / (3.0 * n as f64);
        estimate.max(alt_est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn test_matrix(n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, |i, j| {
            let base = c(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 - 2.0);
            if i == j {
                base + c(20.0, 1.0)
            } else {
                base
            }
        })
    }

    #[test]
    fn solve_and_adjoint_solve() {
        let a = test_matrix(40);
        let x: Vec<Complex64> = (0..40).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let b = a.mul_vec(&x);
        let lu = LuFactor::new(a.clone());
        let got = lu.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
        // A^H y = b
        let ah = DenseMatrix::from_fn(40, |i, j| a.get(j, i).conj());
        let b2 = ah.mul_vec(&x);
        let got = lu.solve_adjoint(&b2);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-12);
        }
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let mut a = DenseMatrix::zeros(6);
        for i in 0..6 {
            a.set(i, i, c(10f64.powi(i as i32), 0.0));
        }
        let lu = LuFactor::new(a.clone());
        let cond = a.norm_one() * lu.inverse_norm_one_estimate();
        assert!((cond - 1e5).abs() < 1e-6);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(2.0, 0.0));
        let lu = LuFactor::new(a);
        assert!(!lu.is_singular());
        let x = lu.solve(&[c(3.0, 0.0), c(4.0, 0.0)]);
        assert!((x[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((x[1] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix_detected() {
        let lu = LuFactor::new(DenseMatrix::zeros(3));
        assert!(lu.is_singular());
        assert!(lu.inverse_norm_one_estimate().is_infinite());
    }
}
