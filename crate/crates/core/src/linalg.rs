//! Exact rank and kernel computations over `Qp` at capped precision.
//!
//! Elimination pivots on the entry of smallest valuation (largest p-adic
//! norm). An entry counts as zero only when its certified valuation clears the
//! configured cutoff; an entry that is neither certifiably zero nor usable as
//! a pivot stops the computation with an explicit precision error instead of
//! guessing a rank.

use crate::error::{Error, Result};
use crate::padic::PadicScalar;

/// Dense matrix of p-adic scalars.
#[derive(Debug, Clone)]
pub struct PMatrix {
    prime: u64,
    rows: usize,
    cols: usize,
    data: Vec<PadicScalar>,
}

/// Result of a reduction: rank, pivot columns, and a right-kernel basis.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub kernel: Vec<Vec<PadicScalar>>,
}

impl PMatrix {
    pub fn zero(prime: u64, rows: usize, cols: usize) -> Self {
        PMatrix {
            prime,
            rows,
            cols,
            data: vec![PadicScalar::zero(prime); rows * cols],
        }
    }

    pub fn from_fn(
        prime: u64,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> PadicScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        PMatrix {
            prime,
            rows,
            cols,
            data,
        }
    }

    pub fn from_columns(prime: u64, rows: usize, cols: &[Vec<PadicScalar>]) -> Self {
        Self::from_fn(prime, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn identity(prime: u64, n: usize, prec: u32) -> Result<Self> {
        let one = PadicScalar::one(prime, prec)?;
        Ok(Self::from_fn(prime, n, n, |i, j| {
            if i == j {
                one.clone()
            } else {
                PadicScalar::zero(prime)
            }
        }))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn get(&self, i: usize, j: usize) -> &PadicScalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PadicScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.prime, self.cols, self.rows, |i, j| {
            self.get(j, i).clone()
        })
    }

    /// Stack `self` on top of `other` (same column count).
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols || self.prime != other.prime {
            return Err(Error::DomainMismatch);
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(PMatrix {
            prime: self.prime,
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Concatenate columns of `self` and `other` (same row count).
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.prime != other.prime {
            return Err(Error::DomainMismatch);
        }
        Ok(Self::from_fn(
            self.prime,
            self.rows,
            self.cols + other.cols,
            |i, j| {
                if j < self.cols {
                    self.get(i, j).clone()
                } else {
                    other.get(i, j - self.cols).clone()
                }
            },
        ))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows || self.prime != other.prime {
            return Err(Error::DomainMismatch);
        }
        let mut out = Self::zero(self.prime, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_exact_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).add(&a.mul(b)?)?;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
        if v.len() != self.cols {
            return Err(Error::DomainMismatch);
        }
        let mut out = vec![PadicScalar::zero(self.prime); self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_exact_zero() || v[j].is_exact_zero() {
                    continue;
                }
                out[i] = out[i].add(&a.mul(&v[j])?)?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DomainMismatch);
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).sub(other.get(i, j))?);
            }
        }
        Ok(out)
    }

    /// Certified-zero test for an entry against the cutoff.
    fn entry_is_zero(e: &PadicScalar, cutoff: i64) -> Result<bool> {
        if e.is_exact_zero() {
            return Ok(true);
        }
        if let Some(v) = e.val_exact() {
            if v < cutoff {
                return Ok(false);
            }
            // a genuinely tiny nonzero entry is indistinguishable from noise here
            return Err(Error::EliminationPrecision {
                pivot_val: v,
                cutoff,
            });
        }
        // precision zero: O(p^abs)
        let abs = e.val_floor();
        if abs >= cutoff {
            Ok(true)
        } else {
            Err(Error::EliminationPrecision {
                pivot_val: abs,
                cutoff,
            })
        }
    }

    /// Row reduction with valuation pivoting.
    ///
    /// `cutoff` is the valuation at which entries must be certifiably zero;
    /// pivots must have valuation strictly below it.
    pub fn reduce(&self, cutoff: i64) -> Result<Echelon> {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; self.cols];
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // best pivot: smallest valuation among usable entries
            let mut best: Option<(usize, i64)> = None;
            for i in row..m.rows {
                let e = m.get(i, col);
                if Self::entry_is_zero(e, cutoff)? {
                    continue;
                }
                let v = e.val_exact().expect("usable pivot has exact valuation");
                if best.map_or(true, |(_, bv)| v < bv) {
                    best = Some((i, v));
                }
            }
            let Some((pi, _)) = best else {
                continue;
            };
            m.swap_rows(row, pi);
            // normalize pivot row
            let inv = m.get(row, col).inv()?;
            for j in col..m.cols {
                let v = m.get(row, j).mul(&inv)?;
                m.set(row, j, v);
            }
            // clear the column everywhere else
            for i in 0..m.rows {
                if i == row {
                    continue;
                }
                let factor = m.get(i, col).clone();
                if factor.is_exact_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.get(i, j).sub(&factor.mul(m.get(row, j))?)?;
                    m.set(i, j, v);
                }
            }
            pivot_cols.push(col);
            pivot_row_of_col[col] = Some(row);
            row += 1;
        }
        let rank = pivot_cols.len();
        // right kernel: one vector per free column
        let one = PadicScalar::one(self.prime, 32.min(crate::padic::max_precision(self.prime)))?;
        let mut kernel = Vec::new();
        for j in 0..m.cols {
            if pivot_row_of_col[j].is_some() {
                continue;
            }
            let mut vec = vec![PadicScalar::zero(self.prime); m.cols];
            vec[j] = one.clone();
            for (k, pr) in pivot_row_of_col.iter().enumerate() {
                if let Some(r) = pr {
                    vec[k] = m.get(*r, j).neg();
                }
            }
            kernel.push(vec);
        }
        Ok(Echelon {
            rank,
            pivot_cols,
            kernel,
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, cutoff: i64) -> Result<usize> {
        Ok(self.reduce(cutoff)?.rank)
    }

    /// Right kernel basis.
    pub fn kernel(&self, cutoff: i64) -> Result<Vec<Vec<PadicScalar>>> {
        Ok(self.reduce(cutoff)?.kernel)
    }

    /// Do the columns of `a` and `b` span the same subspace?
    pub fn same_column_span(a: &Self, b: &Self, cutoff: i64) -> Result<bool> {
        let ra = a.rank(cutoff)?;
        let rb = b.rank(cutoff)?;
        if ra != rb {
            return Ok(false);
        }
        let joint = a.hstack(b)?.rank(cutoff)?;
        Ok(joint == ra)
    }

    /// Are all columns of `b` inside the column span of `a`?
    pub fn columns_in_span(a: &Self, b: &Self, cutoff: i64) -> Result<bool> {
        let ra = a.rank(cutoff)?;
        let joint = a.hstack(b)?.rank(cutoff)?;
        Ok(joint == ra)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i128) -> PadicScalar {
        PadicScalar::from_integer(5, n, 20).unwrap()
    }

    #[test]
    fn rank_and_kernel_of_small_matrix() {
        // rows: (1 2 3), (2 4 6), (0 1 1) -> rank 2, kernel dim 1
        let rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]];
        let m = PMatrix::from_fn(5, 3, 3, |i, j| s(rows[i][j]));
        let red = m.reduce(12).unwrap();
        assert_eq!(red.rank, 2);
        assert_eq!(red.kernel.len(), 1);
        let k = &red.kernel[0];
        let img = m.matvec(k).unwrap();
        for e in img {
            assert!(e.val_at_least(10), "kernel vector maps near zero, got {e}");
        }
    }

    #[test]
    fn pivots_prefer_small_valuation() {
        // (5 1; 1 0) must pivot on the unit, not on 5
        let m = PMatrix::from_fn(5, 2, 2, |i, j| match (i, j) {
            (0, 0) => s(5),
            (0, 1) => s(1),
            (1, 0) => s(1),
            _ => s(0),
        });
        assert_eq!(m.rank(12).unwrap(), 2);
    }

    #[test]
    fn precision_exhaustion_is_detected() {
        let m = PMatrix::from_fn(5, 1, 1, |_, _| PadicScalar::big_o(5, 3));
        match m.rank(10) {
            Err(Error::EliminationPrecision { pivot_val, cutoff }) => {
                assert_eq!(pivot_val, 3);
                assert_eq!(cutoff, 10);
            }
            other => panic!("expected precision error, got {other:?}"),
        }
    }

    #[test]
    fn span_comparison() {
        let a = PMatrix::from_fn(5, 3, 2, |i, j| if i == j { s(1) } else { s(0) });
        let b = PMatrix::from_fn(5, 3, 2, |i, j| {
            // same span, different basis
            if i == 2 {
                s(0)
            } else {
                s([[1, 1], [1, -1]][i][j])
            }
        });
        assert!(PMatrix::same_column_span(&a, &b, 12).unwrap());
        let c = PMatrix::from_fn(5, 3, 1, |i, _| if i == 2 { s(1) } else { s(0) });
        assert!(!PMatrix::columns_in_span(&a, &c, 12).unwrap());
    }
}
