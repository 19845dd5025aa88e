//! Exact arithmetic in `GF(q)` and `GF(q^m)`, dense linear algebra, and the
//! matrix representation map between `GF(q^m)`-vectors and `GF(q)`-matrices.

mod field;
mod matrix;
mod poly;

use std::fmt::Write as _;
use std::sync::Arc;

pub use field::{prime_power, FieldCtx, FieldElement, FieldOp, MAX_FIELD_ORDER};
pub use matrix::{Matrix, OpCount};

use crate::error::{Error, Result};

/// Applies `op` to `a` (and `b` for binary operations).
pub fn field_arith(a: &FieldElement, b: Option<&FieldElement>, op: FieldOp) -> Result<FieldElement> {
    a.apply(op, b)
}

/// The `m x n` matrix over `GF(q)` whose column `j` holds the basis
/// coordinates of `c[j]`.
pub fn matrix_rep(c: &[u32], ctx: &Arc<FieldCtx>) -> Result<Matrix> {
    let m = ctx.m() as usize;
    let n = c.len();
    let mut data = vec![0u32; m * n];
    for (j, &x) in c.iter().enumerate() {
        if x >= ctx.order() {
            return Err(Error::ContextMismatch);
        }
        for (i, coord) in ctx.coords(x).into_iter().enumerate() {
            data[i * n + j] = coord;
        }
    }
    Matrix::from_vec(&ctx.base_ctx(), m, n, data)
}

/// Inverse of [`matrix_rep`].
pub fn from_matrix_rep(mat: &Matrix, ctx: &Arc<FieldCtx>) -> Result<Vec<u32>> {
    if mat.rows() != ctx.m() as usize {
        return Err(Error::Dimension(format!(
            "{} rows for extension degree {}",
            mat.rows(),
            ctx.m()
        )));
    }
    if !mat.ctx().same_field(&ctx.base_ctx()) {
        return Err(Error::ContextMismatch);
    }
    Ok((0..mat.cols())
        .map(|j| ctx.from_coords(&mat.column(j)))
        .collect())
}

/// Rank over `GF(q)` of the matrix representation of `c`.
///
/// Avoids building a [`Matrix`]; this sits on the hot path of every weight
/// computation.
pub fn rank_of_rep(c: &[u32], ctx: &FieldCtx) -> usize {
    if ctx.m() == 1 {
        return usize::from(c.iter().any(|&x| x != 0));
    }
    let q = ctx.q();
    let m = ctx.m() as usize;
    let base = ctx.base_tables();
    // rows = the n vectors' coordinate columns; rank is the same either way
    let mut rows: Vec<Vec<u32>> = c
        .iter()
        .filter(|&&x| x != 0)
        .map(|&x| {
            let mut x = x;
            (0..m)
                .map(|_| {
                    let d = x % q;
                    x /= q;
                    d
                })
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..m {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = base.inv(rows[rank][col]);
        let pivot: Vec<u32> = rows[rank].iter().map(|&v| base.mul(inv, v)).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let factor = row[col];
            if factor != 0 {
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v = base.sub(*v, base.mul(factor, pv));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

impl Matrix {
    /// Serializes to the matrix text format: a `q m rows cols` header line,
    /// then one line of space-separated element encodings per row.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} {} {} {}\n",
            self.ctx().q(),
            self.ctx().m(),
            self.rows(),
            self.cols()
        );
        for i in 0..self.rows() {
            let mut first = true;
            for &v in self.row(i) {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses the matrix text format, building the default context for the
    /// header's `(q, m)`.
    pub fn from_text(text: &str) -> Result<Matrix> {
        let (q, m, rows, cols, entries) = parse_text(text)?;
        let ctx = FieldCtx::new(q, m)?;
        Matrix::from_vec(&ctx, rows, cols, entries)
    }

    /// Parses the matrix text format into an existing context.
    pub fn from_text_in(text: &str, ctx: &Arc<FieldCtx>) -> Result<Matrix> {
        let (q, m, rows, cols, entries) = parse_text(text)?;
        if (q, m) != (ctx.q(), ctx.m()) {
            return Err(Error::ContextMismatch);
        }
        Matrix::from_vec(ctx, rows, cols, entries)
    }
}

fn parse_text(text: &str) -> Result<(u32, u32, usize, usize, Vec<u32>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
    let head: Vec<u64> = header
        .split_whitespace()
        .map(|t| t.parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("header: {e}")))?;
    let [q, m, rows, cols] = head[..] else {
        return Err(Error::Parse("header must be `q m rows cols`".into()));
    };
    let (q, m) = (
        u32::try_from(q).map_err(|_| Error::Parse("q too large".into()))?,
        u32::try_from(m).map_err(|_| Error::Parse("m too large".into()))?,
    );
    let (rows, cols) = (rows as usize, cols as usize);
    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for line in lines {
        let row: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", seen_rows + 1)))?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {cols}",
                seen_rows + 1,
                row.len()
            )));
        }
        entries.extend(row);
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse(format!("{seen_rows} rows, expected {rows}")));
    }
    Ok((q, m, rows, cols, entries))
}
