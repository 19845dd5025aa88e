use std::fmt;
use std::sync::Arc;

use super::field::FieldCtx;
use crate::error::{Error, Result};

/// Dense row-major matrix over the full field of its context.
///
/// A context with `m = 1` makes this a matrix over `GF(q)`.
#[derive(Clone)]
pub struct Matrix {
    ctx: Arc<FieldCtx>,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Field operation tally for complexity telemetry.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCount(pub u64);

impl Matrix {
    pub fn zeros(ctx: &Arc<FieldCtx>, rows: usize, cols: usize) -> Matrix {
        Matrix {
            ctx: ctx.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(ctx: &Arc<FieldCtx>, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = ctx.one();
        }
        m
    }

    pub fn from_vec(ctx: &Arc<FieldCtx>, rows: usize, cols: usize, data: Vec<u32>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(&bad) = data.iter().find(|&&v| v >= ctx.order()) {
            return Err(Error::Precondition(format!(
                "entry {bad} outside GF({}^{})",
                ctx.q(),
                ctx.m()
            )));
        }
        Ok(Matrix {
            ctx: ctx.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(ctx: &Arc<FieldCtx>, rows: &[Vec<u32>]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::from_vec(ctx, rows.len(), cols, rows.concat())
    }

    /// Single-row matrix.
    pub fn row_vector(ctx: &Arc<FieldCtx>, v: &[u32]) -> Result<Matrix> {
        Matrix::from_vec(ctx, 1, v.len(), v.to_vec())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        debug_assert!(v < self.ctx.order());
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn check_ctx(&self, other: &Matrix) -> Result<()> {
        if self.ctx.same_field(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_ctx(other)?;
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.ctx;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_ctx(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension("addition of differently shaped matrices".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| self.ctx.add(a, b))
            .collect();
        Ok(Matrix {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, lambda: u32) -> Matrix {
        let data = self.data.iter().map(|&a| self.ctx.mul(lambda, a)).collect();
        Matrix {
            data,
            ..self.clone()
        }
    }

    /// `M x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        let f = &self.ctx;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect())
    }

    /// `x M` for a row vector `x`.
    pub fn vec_mul(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} rows",
                x.len(),
                self.rows
            )));
        }
        let f = &self.ctx;
        let mut out = vec![0u32; self.cols];
        for (i, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(i)) {
                *o = f.add(*o, f.mul(a, b));
            }
        }
        Ok(out)
    }

    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("nothing to stack".into()))?;
        let rows = first.rows;
        let mut cols = 0;
        for p in parts {
            first.check_ctx(p)?;
            if p.rows != rows {
                return Err(Error::Dimension("hstack of matrices with different heights".into()));
            }
            cols += p.cols;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for p in parts {
                data.extend_from_slice(p.row(i));
            }
        }
        Ok(Matrix {
            ctx: first.ctx.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("nothing to stack".into()))?;
        let cols = first.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            first.check_ctx(p)?;
            if p.cols != cols {
                return Err(Error::Dimension("vstack of matrices with different widths".into()));
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Matrix {
            ctx: first.ctx.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.ctx, self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + k] = self.get(i, j);
            }
        }
        out
    }

    pub fn column_range(&self, start: usize, end: usize) -> Matrix {
        let cols: Vec<usize> = (start..end).collect();
        self.select_columns(&cols)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            ctx: self.ctx.clone(),
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = eliminate(&self.ctx, &mut m.data, self.rows, self.cols, self.cols, None);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        let mut data = self.data.clone();
        eliminate(&self.ctx, &mut data, self.rows, self.cols, self.cols, None).len()
    }

    /// Any `x` with `M x = rhs`, or `None` when the system is inconsistent.
    pub fn solve(&self, rhs: &[u32]) -> Result<Option<Vec<u32>>> {
        self.solve_counted(rhs, &mut OpCount::default())
    }

    /// As [`Matrix::solve`], adding every field multiplication and addition
    /// performed to `ops`.
    pub fn solve_counted(&self, rhs: &[u32], ops: &mut OpCount) -> Result<Option<Vec<u32>>> {
        if rhs.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let width = self.cols + 1;
        let mut aug = Vec::with_capacity(self.rows * width);
        for (i, &b) in rhs.iter().enumerate() {
            aug.extend_from_slice(self.row(i));
            aug.push(b);
        }
        let pivots = eliminate(&self.ctx, &mut aug, self.rows, width, self.cols, Some(ops));
        let rank = pivots.len();
        if (rank..self.rows).any(|i| aug[i * width + self.cols] != 0) {
            return Ok(None);
        }
        let mut x = vec![0u32; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = aug[i * width + self.cols];
        }
        Ok(Some(x))
    }

    /// Inverse of a square non-singular matrix; `None` otherwise.
    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let id = Matrix::identity(&self.ctx, n);
        let aug = Matrix::hstack(&[self, &id]).ok()?;
        let mut data = aug.data;
        let pivots = eliminate(&self.ctx, &mut data, n, 2 * n, n, None);
        if pivots.len() < n {
            return None;
        }
        let mut inv = Matrix::zeros(&self.ctx, n, n);
        for i in 0..n {
            inv.data[i * n..(i + 1) * n].copy_from_slice(&data[i * 2 * n + n..(i + 1) * 2 * n]);
        }
        Some(inv)
    }

    /// Basis (as rows) of `{x : M x = 0}`, with an identity on the free columns.
    pub fn kernel(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = &self.ctx;
        let mut k = Matrix::zeros(f, free.len(), self.cols);
        for (row, &fc) in free.iter().enumerate() {
            k.data[row * self.cols + fc] = f.one();
            for (i, &pc) in pivots.iter().enumerate() {
                k.data[row * self.cols + pc] = f.neg(r.get(i, fc));
            }
        }
        k
    }

    /// Whether both matrices have the same row space.
    pub fn same_row_space(&self, other: &Matrix) -> bool {
        if self.cols != other.cols || !self.ctx.same_field(&other.ctx) {
            return false;
        }
        let ra = self.rank();
        ra == other.rank()
            && Matrix::vstack(&[self, other]).map(|s| s.rank()) == Ok(ra)
    }

    /// Embeds a matrix over `GF(q)` into the extension `ext`.
    pub fn lift(&self, ext: &Arc<FieldCtx>) -> Result<Matrix> {
        if !self.ctx.same_field(&ext.base_ctx()) {
            return Err(Error::ContextMismatch);
        }
        if self.ctx.same_field(ext) {
            return Ok(self.clone());
        }
        let data = self.data.iter().map(|&a| ext.embed_base(a)).collect();
        Ok(Matrix {
            ctx: ext.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

/// Gauss-Jordan elimination in place, pivoting on the first `pivot_cols`
/// columns. Returns the pivot columns.
pub(crate) fn eliminate(
    f: &FieldCtx,
    data: &mut [u32],
    rows: usize,
    cols: usize,
    pivot_cols: usize,
    mut ops: Option<&mut OpCount>,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| data[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = f.inv(data[r * cols + c]).expect("pivot is nonzero");
        if inv != f.one() {
            for j in c..cols {
                data[r * cols + j] = f.mul(inv, data[r * cols + j]);
            }
            if let Some(o) = ops.as_deref_mut() {
                o.0 += (cols - c) as u64;
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = data[i * cols + c];
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let t = f.mul(factor, data[r * cols + j]);
                data[i * cols + j] = f.sub(data[i * cols + j], t);
            }
            if let Some(o) = ops.as_deref_mut() {
                o.0 += 2 * (cols - c) as u64;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
            && self.ctx.same_field(&other.ctx)
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over GF({}^{})", self.rows, self.cols, self.ctx.q(), self.ctx.m())?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}
