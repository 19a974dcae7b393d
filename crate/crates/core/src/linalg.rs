//! Small dense complex least-squares helpers.

use crate::{CMatrix, Error, Result, C64};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares solution and which columns were left out of the solve.
#[derive(Debug, Clone)]
pub struct LsSolution {
    /// One row per column of the system matrix.
    pub coefficients: CMatrix,
    /// Columns that were identically zero; their coefficients are zero.
    pub zero_columns: Vec<usize>,
}

/// Minimum-norm solution of `min ||b - a x||_F`, column by column of `b`.
///
/// Uses an SVD with relative tolerance [`RANK_TOLERANCE`], so nearly
/// dependent columns share weight instead of blowing up. All-zero columns are
/// dropped from the solve and get zero coefficients.
pub fn least_squares(a: &CMatrix, b: &CMatrix) -> Result<LsSolution> {
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "system has {} rows but right-hand side has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let (kept, zero_columns): (Vec<usize>, Vec<usize>) =
        (0..a.ncols()).partition(|&j| a.column(j).iter().any(|z| *z != C64::new(0.0, 0.0)));

    let mut coefficients = CMatrix::zeros(a.ncols(), b.ncols());
    if kept.is_empty() {
        return Ok(LsSolution {
            coefficients,
            zero_columns,
        });
    }
    let reduced = a.select_columns(kept.iter());
    let svd = reduced.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let x = svd
        .solve(b, RANK_TOLERANCE * sigma_max)
        .map_err(|e| Error::Shape(e.to_string()))?;
    for (row, &j) in kept.iter().enumerate() {
        coefficients.row_mut(j).copy_from(&x.row(row));
    }
    Ok(LsSolution {
        coefficients,
        zero_columns,
    })
}

/// Repeats `a` vertically `times` times.
pub fn stack_rows(a: &CMatrix, times: usize) -> CMatrix {
    let n = a.nrows();
    CMatrix::from_fn(n * times, a.ncols(), |r, c| a[(r % n, c)])
}

/// Sum of the `blocks` equal-height row blocks of `a`.
pub fn sum_row_blocks(a: &CMatrix, blocks: usize) -> CMatrix {
    let n = a.nrows() / blocks;
    let mut out = a.rows(0, n).into_owned();
    for t in 1..blocks {
        out += a.rows(t * n, n);
    }
    out
}
