//! Sparse CSR matrices and a banded LU direct solver.
//!
//! The Jacobians assembled here have vertex-adjacency sparsity on structured
//! box meshes, so after natural ordering they are narrow-banded; an
//! LAPACK-style banded LU with partial pivoting factors them directly and
//! handles the indefinite systems that arise at saddle-point solutions.

use crate::scalar::Real;
use crate::{Error, Result};

/// Compressed sparse row matrix with a fixed symmetric pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Build a zero matrix from per-row sorted column patterns.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values: vec![T::zero(); nnz],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn set_zero(&mut self) {
        for v in &mut self.values {
            *v = T::zero();
        }
    }

    /// Add `v` at `(i, j)`; the entry must exist in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        let pos = self.col_idx[lo..hi]
            .binary_search(&j)
            .expect("entry outside sparsity pattern");
        self.values[lo + pos] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => T::zero(),
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut acc = T::zero();
            for (c, v) in cols.iter().zip(vals) {
                acc += *v * x[*c];
            }
            y[i] = acc;
        }
        y
    }

    /// Maximum relative asymmetry `|a_ij - a_ji| / max |a|`.
    pub fn asymmetry(&self) -> T {
        let scale = self
            .values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()))
            .max(T::min_positive_value());
        let mut worst = T::zero();
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((*v - self.get(*c, i)).abs());
            }
        }
        worst / scale
    }

    /// Half bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0usize;
        for i in 0..self.n {
            let (cols, _) = self.row(i);
            for &c in cols {
                b = b.max(i.abs_diff(c));
            }
        }
        b
    }

    /// Solve `A x = rhs` by banded LU with partial pivoting.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let lu = BandedLu::factor(self)?;
        Ok(lu.solve(rhs))
    }
}

/// Banded LU factorization in LAPACK general-band layout: `A(i, j)` sits at
/// row `kl + ku + i - j` of column `j`, with `kl` extra leading rows for
/// pivot fill.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    /// Column-major band storage, `(2 kl + ku + 1) x n`.
    ab: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n();
        let band = a.bandwidth();
        let (kl, ku) = (band, band);
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![T::zero(); ldab * n];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                ab[j * ldab + (kl + ku + i) - j] = v;
            }
        }

        let mut pivots = vec![0usize; n];
        for j in 0..n {
            let row_hi = (j + kl).min(n - 1);
            let mut piv = j;
            let mut piv_abs = ab[j * ldab + (kl + ku)].abs();
            for i in (j + 1)..=row_hi {
                let v = ab[j * ldab + (kl + ku + i) - j].abs();
                if v > piv_abs {
                    piv = i;
                    piv_abs = v;
                }
            }
            if piv_abs == T::zero() {
                return Err(Error::SingularSystem);
            }
            pivots[j] = piv;
            let col_hi = (j + ku + kl).min(n - 1);
            if piv != j {
                for c in j..=col_hi {
                    let idx_j = c * ldab + (kl + ku + j) - c;
                    let idx_p = c * ldab + (kl + ku + piv) - c;
                    ab.swap(idx_j, idx_p);
                }
            }
            let diag = ab[j * ldab + (kl + ku)];
            let pivot_base = j * ldab + (kl + ku) - j;
            for i in (j + 1)..=row_hi {
                ab[pivot_base + i] /= diag;
            }
            // Right-looking update, one contiguous column slice at a time.
            for c in (j + 1)..=col_hi {
                let ujc = ab[c * ldab + (kl + ku + j) - c];
                if ujc == T::zero() {
                    continue;
                }
                let col_base = c * ldab + (kl + ku) - c;
                for i in (j + 1)..=row_hi {
                    let l = ab[pivot_base + i];
                    ab[col_base + i] -= l * ujc;
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ab,
            pivots,
        })
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let ldab = 2 * kl + ku + 1;
        let mut x = rhs.to_vec();
        for j in 0..n {
            x.swap(j, self.pivots[j]);
            let xj = x[j];
            if xj != T::zero() {
                let row_hi = (j + kl).min(n - 1);
                for i in (j + 1)..=row_hi {
                    let l = self.ab[j * ldab + (kl + ku + i) - j];
                    x[i] -= l * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let col_lo = j.saturating_sub(ku + kl);
            let xj = x[j] / self.ab[j * ldab + (kl + ku)];
            x[j] = xj;
            if xj != T::zero() {
                for c in col_lo..j {
                    let u = self.ab[j * ldab + (kl + ku + c) - j];
                    x[c] -= u * xj;
                }
            }
        }
        x
    }
}

/// Dense LU solve with partial pivoting; reference path for tests and tiny
/// systems.
pub fn dense_solve<T: Real>(a: &mut [Vec<T>], rhs: &[T]) -> Result<Vec<T>> {
    let n = rhs.len();
    let mut x = rhs.to_vec();
    for j in 0..n {
        let mut piv = j;
        for i in (j + 1)..n {
            if a[i][j].abs() > a[piv][j].abs() {
                piv = i;
            }
        }
        if a[piv][j] == T::zero() {
            return Err(Error::SingularSystem);
        }
        a.swap(j, piv);
        x.swap(j, piv);
        for i in (j + 1)..n {
            let l = a[i][j] / a[j][j];
            a[i][j] = l;
            for c in (j + 1)..n {
                let contrib = l * a[j][c];
                a[i][c] -= contrib;
            }
            let contrib = l * x[j];
            x[i] -= contrib;
        }
    }
    for j in (0..n).rev() {
        let mut acc = x[j];
        for c in (j + 1)..n {
            acc -= a[j][c] * x[c];
        }
        x[j] = acc / a[j][j];
    }
    Ok(x)
}
