//! Dense helpers shared by the spectral modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Singular values below this fraction of the largest are treated as zero
/// wherever a pseudoinverse or a rank is taken.
pub const PINV_RTOL: f64 = 1e-10;

/// Eigenvalues below this fraction of the largest magnitude count as zero
/// when selecting "smallest non-zero" eigenvectors.
pub const ZERO_EIG_RTOL: f64 = 1e-9;

/// Symmetric eigen-decomposition sorted by ascending eigenvalue. The input
/// is symmetrized first.
pub fn sym_eigen_sorted(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .total_cmp(&eig.eigenvalues[j])
            .then(i.cmp(&j))
    });
    let values = DVector::from_fn(n, |k, _| eig.eigenvalues[order[k]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        canonical_sign(&mut col);
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

/// Flips `v` so its first entry of non-negligible magnitude is positive.
pub fn canonical_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Indices (into ascending eigenvalues) of the `d` smallest non-zero ones.
/// Falls back to zero eigenvalues only when too few non-zero ones exist.
pub fn smallest_nonzero(values: &DVector<f64>, d: usize) -> Vec<usize> {
    smallest_above(values, d, ZERO_EIG_RTOL)
}

/// [`smallest_nonzero`] with an explicit relative zero threshold.
pub fn smallest_above(values: &DVector<f64>, d: usize, rtol: f64) -> Vec<usize> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = rtol * scale;
    let mut picked: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cut).take(d).collect();
    if picked.len() < d {
        let extra: Vec<usize> = (0..values.len())
            .filter(|i| !picked.contains(i))
            .take(d - picked.len())
            .collect();
        picked.extend(extra);
        picked.sort_unstable();
    }
    picked
}

pub fn select_columns(m: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Moore-Penrose pseudoinverse with the relative cutoff [`PINV_RTOL`].
pub fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = PINV_RTOL * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Pseudoinverse of a symmetric matrix through its eigen-decomposition.
pub fn pinv_sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_sorted(a);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = PINV_RTOL * scale;
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for k in 0..vals.len() {
        if vals[k].abs() > cut {
            let v = vecs.column(k);
            out += v * v.transpose() / vals[k];
        }
    }
    out
}

pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Orthonormal basis of the column span (via SVD with the pinv cutoff).
pub fn orth(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.is_empty() {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > PINV_RTOL * smax && smax > 0.0)
        .collect();
    select_columns(svd.u.as_ref().expect("u requested"), &keep)
}

/// Spectral-norm distance between the orthogonal projectors onto the
/// column spans of `a` and `b`.
pub fn projector_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orth(a);
    let qb = orth(b);
    let pa = &qa * qa.transpose();
    let pb = &qb * qb.transpose();
    spectral_norm(&(pa - pb))
}

/// max |A^T A - I|.
pub fn orthonormality_defect(a: &DMatrix<f64>) -> f64 {
    let g = a.transpose() * a;
    (g - DMatrix::identity(a.ncols(), a.ncols())).amax()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_ascending_with_sign() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (v, e) = sym_eigen_sorted(&a);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);
        assert!(e[(0, 0)] > 0.0 && e[(0, 1)] > 0.0);
    }

    #[test]
    fn pinv_of_rank_one() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv(&a);
        assert!((&p - DMatrix::from_element(2, 2, 0.25)).amax() < 1e-12);
        assert!((pinv_sym(&a) - p).amax() < 1e-12);
    }

    #[test]
    fn smallest_nonzero_skips_null() {
        let v = DVector::from_vec(vec![1e-14, 0.5, 1.0, 2.0]);
        assert_eq!(smallest_nonzero(&v, 2), vec![1, 2]);
        assert_eq!(smallest_nonzero(&v, 4), vec![0, 1, 2, 3]);
    }
}
