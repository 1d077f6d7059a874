//! Dense complex linear algebra: LU factorization with partial pivoting.
//!
//! Networks handled here stay below ~100 nodes, so a dense solver is the
//! right tool; no sparsity machinery.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] += value;
    }

    /// Largest entry magnitude, used for singularity thresholds.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Factor in place and solve for one or more right-hand sides.
    /// The matrix is consumed; callers re-assemble per frequency anyway.
    pub fn solve(mut self, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.dim;
        for b in rhs {
            assert_eq!(b.len(), n, "rhs length mismatch");
        }
        let scale = self.max_norm();
        if n == 0 {
            return Ok(rhs.iter().map(|_| Vec::new()).collect());
        }
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Singular("nodal matrix is zero or non-finite".into()));
        }

        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            // partial pivot
            let mut pivot_row = col;
            let mut pivot_mag = self.get(col, col).norm();
            for row in col + 1..n {
                let mag = self.get(row, col).norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = row;
                }
            }
            // ill-conditioned systems are allowed through (the physics
            // near half-wave lines produces huge yet exactly-cancelling
            // entries); only an exact rank deficiency is fatal here, and
            // non-finite solutions are rejected after substitution
            if pivot_mag == 0.0 {
                return Err(Error::Singular(format!(
                    "nodal matrix singular at elimination column {col}"
                )));
            }
            if pivot_row != col {
                for j in 0..n {
                    let a = self.get(col, j);
                    let b = self.get(pivot_row, j);
                    self.set(col, j, b);
                    self.set(pivot_row, j, a);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = self.get(col, col);
            for row in col + 1..n {
                let factor = self.get(row, col) / pivot;
                self.set(row, col, factor);
                for j in col + 1..n {
                    let delta = factor * self.get(col, j);
                    let cur = self.get(row, j);
                    self.set(row, j, cur - delta);
                }
            }
        }

        let mut solutions = Vec::with_capacity(rhs.len());
        for b in rhs {
            // apply permutation, then forward/back substitution
            let mut x: Vec<Complex64> = perm.iter().map(|&i| b[i]).collect();
            for col in 0..n {
                for row in col + 1..n {
                    let factor = self.get(row, col);
                    let delta = factor * x[col];
                    x[row] -= delta;
                }
            }
            for col in (0..n).rev() {
                for j in col + 1..n {
                    let delta = self.get(col, j) * x[j];
                    x[col] -= delta;
                }
                x[col] /= self.get(col, col);
            }
            if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Singular(
                    "nodal solve produced non-finite voltages".into(),
                ));
            }
            solutions.push(x);
        }
        Ok(solutions)
    }

    /// Matrix inverse via LU solves against identity columns.
    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.dim;
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![Complex64::ZERO; n];
            e[j] = Complex64::ONE;
            columns.push(e);
        }
        let solved = self.clone().solve(&columns)?;
        let mut inv = CMatrix::zeros(n);
        for (j, col) in solved.iter().enumerate() {
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::c64;

    #[test]
    fn solves_known_system() {
        // [[2, 1], [1, 3j]] x = [5, 1+3j]
        let mut a = CMatrix::zeros(2);
        a.set(0, 0, c64(2.0, 0.0));
        a.set(0, 1, c64(1.0, 0.0));
        a.set(1, 0, c64(1.0, 0.0));
        a.set(1, 1, c64(0.0, 3.0));
        let rhs = vec![vec![c64(5.0, 0.0), c64(1.0, 3.0)]];
        let x = a.clone().solve(&rhs).unwrap().remove(0);
        // residual check
        for i in 0..2 {
            let mut acc = Complex64::ZERO;
            for j in 0..2 {
                acc += a.get(i, j) * x[j];
            }
            assert!((acc - rhs[0][i]).norm() < 1e-12);
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut a = CMatrix::zeros(2);
        a.set(0, 1, c64(1.0, 0.0));
        a.set(1, 0, c64(1.0, 0.0));
        let x = a.solve(&[vec![c64(3.0, 0.0), c64(7.0, 0.0)]]).unwrap();
        assert!((x[0][0] - c64(7.0, 0.0)).norm() < 1e-14);
        assert!((x[0][1] - c64(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reports_singular() {
        let mut a = CMatrix::zeros(2);
        a.set(0, 0, c64(1.0, 0.0));
        a.set(0, 1, c64(2.0, 0.0));
        a.set(1, 0, c64(2.0, 0.0));
        a.set(1, 1, c64(4.0, 0.0));
        assert!(a.solve(&[vec![Complex64::ONE, Complex64::ONE]]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let mut a = CMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, c64((i + 2 * j) as f64, if i == j { 1.0 } else { 0.0 }));
            }
        }
        let inv = a.inverse().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::ZERO;
                for k in 0..3 {
                    acc += a.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                assert!((acc - expect).norm() < 1e-12, "ij {i}{j}");
            }
        }
    }
}
