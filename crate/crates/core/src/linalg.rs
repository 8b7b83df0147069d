//! Dense square matrices and a partially pivoted Gauss-Jordan inverse.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    size: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_row_major(size: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                found: data.len(),
            });
        }
        Ok(Self { size, data })
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        let s = self.size;
        let mut out = vec![0.0; s * s];
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..s {
                    out[i * s + j] += a * other.get(k, j);
                }
            }
        }
        Ok(SquareMatrix { size: s, data: out })
    }

    /// Row vector times matrix, `v M`.
    pub fn left_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.size];
        for (vi, row) in v.iter().zip(self.data.chunks_exact(self.size)) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += vi * m;
            }
        }
        Ok(out)
    }

    /// `max |M - I|` entrywise.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.size {
            for j in 0..self.size {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// Gauss-Jordan elimination with partial pivoting.
    ///
    /// A pivot at or below `size * f64::EPSILON * max|entry|` is reported as
    /// numerical singularity.
    pub fn inverse(&self) -> Result<SquareMatrix> {
        let s = self.size;
        let scale = self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let threshold = s as f64 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut a = self.data.clone();
        let mut inv = SquareMatrix::identity(s).data;
        for col in 0..s {
            let (pivot_row, pivot_abs) = (col..s)
                .map(|r| (r, a[r * s + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold {
                return Err(Error::Singular {
                    column: col,
                    pivot: pivot_abs,
                });
            }
            if pivot_row != col {
                for j in 0..s {
                    a.swap(col * s + j, pivot_row * s + j);
                    inv.swap(col * s + j, pivot_row * s + j);
                }
            }
            let pivot = a[col * s + col];
            for j in 0..s {
                a[col * s + j] /= pivot;
                inv[col * s + j] /= pivot;
            }
            for r in 0..s {
                if r == col {
                    continue;
                }
                let factor = a[r * s + col];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..s {
                    a[r * s + j] -= factor * a[col * s + j];
                    inv[r * s + j] -= factor * inv[col * s + j];
                }
            }
        }
        Ok(SquareMatrix { size: s, data: inv })
    }
}
