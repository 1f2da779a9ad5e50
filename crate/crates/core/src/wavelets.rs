//! Diffusion wavelet tree: epsilon-rank-revealing QR, dyadic powers of a
//! diffusion operator compressed onto shrinking scaling-function bases,
//! and transport of coefficient vectors between scales.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::data::write_matrix_csv;
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_defect, spectral_norm};

/// Rank-revealing QR with relative tolerance.
///
/// Greedy column-pivoted Gram-Schmidt (with one re-orthogonalization pass)
/// that stops once the Frobenius norm of the unexplained residual drops to
/// `epsilon * |A|_2`. Returns `Q` with orthonormal columns and the
/// coefficient matrix `R = Q^T A`, so `|A - Q R|_2 <= epsilon |A|_2`.
pub fn rank_revealing_qr(a: &DMatrix<f64>, epsilon: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let norm = spectral_norm(a);
    if norm == 0.0 || rows == 0 || cols == 0 {
        return (DMatrix::zeros(rows, 0), DMatrix::zeros(0, cols));
    }
    let threshold = epsilon * norm;
    let mut resid = a.clone();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while basis.len() < rows.min(cols) {
        let col_norms: Vec<f64> = resid.column_iter().map(|c| c.norm_squared()).collect();
        let frob: f64 = col_norms.iter().sum::<f64>().sqrt();
        if frob <= threshold {
            break;
        }
        let pivot = (0..cols)
            .max_by(|&i, &j| col_norms[i].total_cmp(&col_norms[j]).then(j.cmp(&i)))
            .expect("non-empty");
        let mut q = resid.column(pivot).clone_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&q);
                q.axpy(-proj, b, 1.0);
            }
        }
        let qn = q.norm();
        if qn == 0.0 || !qn.is_finite() {
            break;
        }
        q /= qn;
        let coeff = q.transpose() * &resid;
        resid -= &q * coeff;
        basis.push(q);
    }
    let q = if basis.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&basis)
    };
    let r = q.transpose() * a;
    (q, r)
}

/// Multiscale bases and compressed dyadic powers of a diffusion operator.
///
/// Level `j` carries `T_j = [T^{2^j}]` on the level-`j` basis (`p_j x p_j`);
/// `bases[j]` is `[phi_{j+1}]_{phi_j}` (`p_j x p_{j+1}`).
#[derive(Debug, Clone)]
pub struct WaveletTree {
    phi0: DMatrix<f64>,
    bases: Vec<DMatrix<f64>>,
    ops: Vec<DMatrix<f64>>,
    epsilon: f64,
    max_levels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Coarse coefficients at a level to finest-scale coordinates.
    ToFinest,
    /// Finest-scale vector compressed to a level's coefficients.
    ToLevel,
}

impl WaveletTree {
    /// Number of levels, counting level 0.
    pub fn num_levels(&self) -> usize {
        self.ops.len()
    }

    /// Basis sizes `p_0, p_1, ...`.
    pub fn dims(&self) -> Vec<usize> {
        self.ops.iter().map(|t| t.nrows()).collect()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_levels(&self) -> usize {
        self.max_levels
    }

    /// `T_j`, the compressed operator at level `j`.
    pub fn op(&self, j: usize) -> Option<&DMatrix<f64>> {
        self.ops.get(j)
    }

    /// `[phi_{j+1}]_{phi_j}`.
    pub fn basis_local(&self, j: usize) -> Option<&DMatrix<f64>> {
        self.bases.get(j)
    }

    /// `[phi_j]_{phi_0}` expressed in finest coordinates: `phi0 Q_0 ... Q_{j-1}`.
    pub fn extended_basis(&self, j: usize) -> Result<DMatrix<f64>> {
        if j >= self.num_levels() {
            return Err(Error::OutOfRange(format!(
                "level {j} out of range (tree has {} levels)",
                self.num_levels()
            )));
        }
        Ok(self.bases[..j]
            .iter()
            .fold(self.phi0.clone(), |acc, q| acc * q))
    }

    /// Extends level-`j` coefficients to the finest scale, or compresses a
    /// finest-scale vector onto level `j`.
    pub fn transport_vector(
        &self,
        v: &DVector<f64>,
        level: usize,
        direction: Direction,
    ) -> Result<DVector<f64>> {
        let phi = self.extended_basis(level)?;
        let expected = match direction {
            Direction::ToFinest => phi.ncols(),
            Direction::ToLevel => phi.nrows(),
        };
        if v.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {}, level {level} expects {expected}",
                v.len()
            )));
        }
        Ok(match direction {
            Direction::ToFinest => phi * v,
            Direction::ToLevel => phi.transpose() * v,
        })
    }

    /// Writes `T_j` and `log10 |T_j|` grids per level plus a manifest.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (j, t) in self.ops.iter().enumerate() {
            write_matrix_csv(t, None, std::fs::File::create(dir.join(format!("level_{j}_op.csv")))?)?;
            let log = t.map(|v| v.abs().max(1e-16).log10());
            write_matrix_csv(
                &log,
                None,
                std::fs::File::create(dir.join(format!("level_{j}_log10.csv")))?,
            )?;
        }
        let mut m = std::fs::File::create(dir.join("manifest.txt"))?;
        let dims: Vec<String> = self.dims().iter().map(|d| d.to_string()).collect();
        writeln!(m, "levels={}", self.num_levels())?;
        writeln!(m, "epsilon={}", self.epsilon)?;
        writeln!(m, "max_levels={}", self.max_levels)?;
        writeln!(m, "dims={}", dims.join(","))?;
        Ok(())
    }
}

/// Allowed slack on `|T|_2 <= 1`.
pub const NORM_SLACK: f64 = 1e-8;

/// Builds the tree by alternating rank-revealing QR and squaring in the
/// compressed basis. Stops after `max_levels` squarings or when a level has
/// at most one basis function.
///
/// `phi0` defaults to the identity and must have orthonormal columns.
pub fn build_dwt(
    t: &DMatrix<f64>,
    phi0: Option<&DMatrix<f64>>,
    epsilon: f64,
    max_levels: usize,
) -> Result<WaveletTree> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "diffusion operator must be square, got {:?}",
            t.shape()
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::OutOfRange(format!("epsilon must be positive, got {epsilon}")));
    }
    let norm = spectral_norm(t);
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::OperatorNorm { norm });
    }
    let n = t.nrows();
    let phi0 = match phi0 {
        Some(p) => {
            if p.nrows() != n || orthonormality_defect(p) > 1e-8 {
                return Err(Error::DimensionMismatch(
                    "initial basis must be n x p with orthonormal columns".into(),
                ));
            }
            p.clone()
        }
        None => DMatrix::identity(n, n),
    };
    let mut ops = vec![phi0.transpose() * t * &phi0];
    let mut bases = Vec::new();
    for j in 0..max_levels {
        let current = &ops[j];
        if current.nrows() <= 1 {
            break;
        }
        let (q, r) = rank_revealing_qr(current, epsilon);
        let rq = &r * &q;
        let next = &rq * &rq;
        bases.push(q);
        let empty = next.nrows() == 0;
        ops.push(next);
        if empty {
            break;
        }
    }
    Ok(WaveletTree {
        phi0,
        bases,
        ops,
        epsilon,
        max_levels,
    })
}
