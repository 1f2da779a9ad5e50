//! Classic dynamic time warping and the 0/1 matrix form of alignments.

use nalgebra::DMatrix;

use crate::data::{AlignmentPath, TimeSeries};
use crate::error::{Error, Result};

/// Non-negative matching weights between the samples of two sequences.
/// When built from a path it is 0/1 valued.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMatrix(DMatrix<f64>);

impl CorrespondenceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::OutOfRange(
                "correspondence weights must be finite and non-negative".into(),
            ));
        }
        Ok(Self(entries))
    }

    /// Ones at (1, 1) and (n, m) only; the starting correspondence of the
    /// warping loops.
    pub fn endpoints(n: usize, m: usize) -> Self {
        let mut w = DMatrix::zeros(n, m);
        w[(0, 0)] = 1.0;
        w[(n - 1, m - 1)] = 1.0;
        Self(w)
    }

    /// Matrix of the path hugging the straight line from (1, 1) to (n, m);
    /// the diagonal when `n == m`.
    pub fn linear(n: usize, m: usize) -> Self {
        let grid = |k: usize| DMatrix::from_fn(k, 1, |i, _| if k > 1 { i as f64 / (k - 1) as f64 } else { 0.0 });
        let (path, _) = dtw_align_with(&grid(n), &grid(m), |a, b| (a[0] - b[0]).abs())
            .expect("non-empty grids");
        path_to_matrix(&path, n, m).expect("path fits its own shape")
    }

    /// Ones on the first `l` diagonal pairs.
    pub fn leading_identity(n: usize, m: usize, l: usize) -> Self {
        let mut w = DMatrix::zeros(n, m);
        for k in 0..l.min(n).min(m) {
            w[(k, k)] = 1.0;
        }
        Self(w)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }
}

/// Squared Euclidean distance between two equal-length rows.
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Optimal alignment under squared Euclidean sample distance.
pub fn dtw_align(x: &TimeSeries, y: &TimeSeries) -> Result<(AlignmentPath, f64)> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "squared Euclidean DTW needs equal feature counts, got {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    dtw_align_with(x.samples(), y.samples(), sq_euclidean)
}

/// Optimal alignment of the rows of `x` and `y` under an arbitrary
/// non-negative row distance. O(nm) time; the backtracking table costs one
/// byte per cell on top of the cost matrix.
///
/// Ties prefer the diagonal step, then (1,0), then (0,1).
pub fn dtw_align_with<F>(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    dist: F,
) -> Result<(AlignmentPath, f64)>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let (n, m) = (x.nrows(), y.nrows());
    if n == 0 || m == 0 {
        return Err(Error::InvalidSeries("DTW needs non-empty sequences".into()));
    }
    let rows = |a: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..a.nrows())
            .map(|r| a.row(r).iter().copied().collect())
            .collect()
    };
    let (xr, yr) = (rows(x), rows(y));

    const DIAG: u8 = 0;
    const UP: u8 = 1; // came from (i-1, j): step (1,0)
    const LEFT: u8 = 2; // came from (i, j-1): step (0,1)

    let mut cost = vec![0.0f64; n * m];
    let mut from = vec![DIAG; n * m];
    for i in 0..n {
        for j in 0..m {
            let d = dist(&xr[i], &yr[j]);
            let idx = i * m + j;
            if i == 0 && j == 0 {
                cost[idx] = d;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut dir = DIAG;
            if i > 0 && j > 0 {
                best = cost[(i - 1) * m + j - 1];
            }
            if i > 0 && cost[(i - 1) * m + j] < best {
                best = cost[(i - 1) * m + j];
                dir = UP;
            }
            if j > 0 && cost[i * m + j - 1] < best {
                best = cost[i * m + j - 1];
                dir = LEFT;
            }
            cost[idx] = best + d;
            from[idx] = dir;
        }
    }

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    loop {
        pairs.push((i + 1, j + 1));
        if i == 0 && j == 0 {
            break;
        }
        match from[i * m + j] {
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
    }
    pairs.reverse();
    Ok((AlignmentPath::new(pairs)?, cost[n * m - 1]))
}

/// 0/1 matrix with a one at every path cell.
pub fn path_to_matrix(p: &AlignmentPath, n: usize, m: usize) -> Result<CorrespondenceMatrix> {
    let mut w = DMatrix::zeros(n, m);
    for &(i, j) in p.pairs() {
        if i == 0 || j == 0 || i > n || j > m {
            return Err(Error::InvalidPath(format!(
                "pair ({i}, {j}) outside {n} x {m}"
            )));
        }
        w[(i - 1, j - 1)] = 1.0;
    }
    Ok(CorrespondenceMatrix(w))
}

/// Row-wise extent [first, last] of the ones, or None for a malformed matrix.
fn row_spans(w: &DMatrix<f64>) -> Option<Vec<(usize, usize)>> {
    let mut spans = Vec::with_capacity(w.nrows());
    for i in 0..w.nrows() {
        let mut first = None;
        let mut last = 0;
        for j in 0..w.ncols() {
            let v = w[(i, j)];
            if v == 1.0 {
                if first.is_none() {
                    first = Some(j);
                } else if last + 1 != j {
                    return None; // zero between two ones
                }
                last = j;
            } else if v != 0.0 {
                return None;
            }
        }
        spans.push((first?, last));
    }
    Some(spans)
}

/// True iff `w` is the matrix of some valid alignment path.
pub fn validate_dtw_matrix(w: &CorrespondenceMatrix) -> bool {
    let w = w.matrix();
    if w.nrows() == 0 || w.ncols() == 0 {
        return false;
    }
    let Some(spans) = row_spans(w) else {
        return false;
    };
    if spans[0].0 != 0 || spans[spans.len() - 1].1 != w.ncols() - 1 {
        return false;
    }
    // each row must start where the previous ended or one column later;
    // this also forces non-empty, contiguous columns
    spans
        .windows(2)
        .all(|s| s[1].0 == s[0].1 || s[1].0 == s[0].1 + 1)
}

/// Inverse of [`path_to_matrix`] for valid DTW matrices.
pub fn matrix_to_path(w: &CorrespondenceMatrix) -> Result<AlignmentPath> {
    if !validate_dtw_matrix(w) {
        return Err(Error::InvalidPath("matrix is not a DTW matrix".into()));
    }
    let spans = row_spans(w.matrix()).expect("validated");
    let pairs = spans
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| (a..=b).map(move |j| (i + 1, j + 1)))
        .collect();
    AlignmentPath::new(pairs)
}
