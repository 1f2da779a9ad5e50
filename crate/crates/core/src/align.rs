//! Joint embeddings of two datasets: the pseudoinverse reduction of the
//! generalized eigenproblem, multiscale manifold alignment on the diffusion
//! wavelet tree, and low-rank alignment.

use nalgebra::{DMatrix, DVector};

use crate::dtw::CorrespondenceMatrix;
use crate::error::{Error, Result};
use crate::graph::{block_data, block_m, check_mu, coupling_laplacian, joint_weight, low_rank_reconstruct, WeightMatrix};
use crate::linalg::{pinv_sym, select_columns, smallest_above, spectral_norm, sym_eigen_sorted, PINV_RTOL};
use crate::wavelets::{build_dwt, WaveletTree};

/// One solution `(gamma, lambda)` of `Z L Z^T gamma = lambda Z D Z^T gamma`.
#[derive(Debug, Clone)]
pub struct GenEigenPair {
    pub vector: DVector<f64>,
    pub value: f64,
}

/// `F` with `F F^T = S` for symmetric PSD `S`, keeping the `r` eigenvalues
/// above the pseudoinverse cutoff: `F = V_r Lambda_r^{1/2}`.
pub fn joint_factor(s: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_sorted(s);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..vals.len())
        .rev()
        .filter(|&k| vals[k] > PINV_RTOL * scale && scale > 0.0)
        .collect();
    let mut f = select_columns(&vecs, &keep);
    for (c, &k) in keep.iter().enumerate() {
        f.column_mut(c).scale_mut(vals[k].sqrt());
    }
    f
}

/// Pseudoinverse of a factor with orthogonal columns `V diag(s)`.
fn factor_pinv(f: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = f.transpose();
    for (r, col) in f.column_iter().enumerate() {
        let s2 = col.norm_squared();
        out.row_mut(r).scale_mut(1.0 / s2);
    }
    out
}

/// Reduced operator `T = F^+ Z L Z^T (F^T)^+` together with `F` and `F^+`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub factor: DMatrix<f64>,
    pub factor_pinv: DMatrix<f64>,
    pub operator: DMatrix<f64>,
}

pub fn reduce_system(z: &DMatrix<f64>, l: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<ReducedSystem> {
    let n = z.ncols();
    if l.shape() != (n, n) || d.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Z has {n} columns but L is {:?} and D is {:?}",
            l.shape(),
            d.shape()
        )));
    }
    let factor = joint_factor(&(z * d * z.transpose()));
    let factor_pinv = factor_pinv(&factor);
    let zl = z * l * z.transpose();
    let operator = &factor_pinv * zl * factor_pinv.transpose();
    let operator = (&operator + operator.transpose()) * 0.5;
    Ok(ReducedSystem {
        factor,
        factor_pinv,
        operator,
    })
}

/// All solutions of the generalized problem obtainable through `F`, sorted
/// by ascending eigenvalue. Works for singular `Z D Z^T` too, where the
/// eigenvectors are one choice among many.
pub fn generalized_eig_pinv(
    z: &DMatrix<f64>,
    l: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<Vec<GenEigenPair>> {
    let sys = reduce_system(z, l, d)?;
    let (vals, vecs) = sym_eigen_sorted(&sys.operator);
    let lift = sys.factor_pinv.transpose();
    Ok((0..vals.len())
        .map(|k| GenEigenPair {
            vector: &lift * vecs.column(k),
            value: vals[k],
        })
        .collect())
}

/// Per-level mapping functions of multiscale manifold alignment.
#[derive(Debug, Clone)]
pub struct MmaResult {
    /// `[alpha_k; beta_k]`, (p+q) x d_k per level.
    pub maps: Vec<DMatrix<f64>>,
    /// Feature counts of the two inputs.
    pub p: usize,
    pub q: usize,
    pub system: ReducedSystem,
    pub tree: WaveletTree,
}

impl MmaResult {
    pub fn dims(&self) -> Vec<usize> {
        self.maps.iter().map(|m| m.ncols()).collect()
    }

    pub fn alpha(&self, k: usize) -> DMatrix<f64> {
        self.maps[k].rows(0, self.p).clone_owned()
    }

    pub fn beta(&self, k: usize) -> DMatrix<f64> {
        self.maps[k].rows(self.p, self.q).clone_owned()
    }

    /// Level-`k` maps cut down to `d` columns by Rayleigh-Ritz on the
    /// reduced operator (smallest non-zero Ritz values), so the result stays
    /// normalized against `Z D Z^T`.
    pub fn reduced(&self, k: usize, d: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let phi = self.tree.extended_basis(k)?;
        let sub = crate::embed::reduce_level(&phi, &self.system.operator, d)?;
        let map = self.system.factor_pinv.transpose() * sub;
        Ok((
            map.rows(0, self.p).clone_owned(),
            map.rows(self.p, self.q).clone_owned(),
        ))
    }
}

/// Multiscale alignment of an arbitrary block system: builds
/// `T = F^+ Z L Z^T (F^T)^+`, runs the wavelet tree on `T^+` (scaled to unit
/// norm) and lifts every level basis through `(F^T)^+`.
pub fn mma_system(
    z: &DMatrix<f64>,
    l: &DMatrix<f64>,
    d: &DMatrix<f64>,
    p: usize,
    epsilon: f64,
    max_levels: usize,
) -> Result<MmaResult> {
    if p > z.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "split at {p} exceeds {} rows of Z",
            z.nrows()
        )));
    }
    let system = reduce_system(z, l, d)?;
    let mut tp = pinv_sym(&system.operator);
    let norm = spectral_norm(&tp);
    if norm > 0.0 {
        tp /= norm;
    }
    let tree = build_dwt(&tp, None, epsilon, max_levels)?;
    let lift = system.factor_pinv.transpose();
    let maps = (0..tree.num_levels())
        .map(|k| Ok(&lift * tree.extended_basis(k)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(MmaResult {
        maps,
        p,
        q: z.nrows() - p,
        system,
        tree,
    })
}

/// Multiscale manifold alignment of row-sample datasets `x` (n x p) and
/// `y` (m x q) with intra-set graphs and a correspondence matrix.
#[allow(clippy::too_many_arguments)]
pub fn mma(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    wx: &WeightMatrix,
    wy: &WeightMatrix,
    c: &CorrespondenceMatrix,
    mu: f64,
    epsilon: f64,
    max_levels: usize,
) -> Result<MmaResult> {
    if x.nrows() != wx.len() || y.nrows() != wy.len() {
        return Err(Error::DimensionMismatch("data and graph sizes differ".into()));
    }
    let joint = joint_weight(wx, wy, c, mu)?;
    let z = block_data(x, y);
    mma_system(&z, &joint.laplacian, &joint.degree, x.ncols(), epsilon, max_levels)
}

/// Joint embedding `F = [F_X; F_Y]` with `F^T F = I`.
#[derive(Debug, Clone)]
pub struct JointEmbedding {
    pub fx: DMatrix<f64>,
    pub fy: DMatrix<f64>,
    pub mu: f64,
    pub eigenvalues: Vec<f64>,
}

impl JointEmbedding {
    pub fn stacked(&self) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(self.fx.nrows() + self.fy.nrows(), self.fx.ncols());
        f.rows_mut(0, self.fx.nrows()).copy_from(&self.fx);
        f.rows_mut(self.fx.nrows(), self.fy.nrows()).copy_from(&self.fy);
        f
    }
}

/// `(1 - mu) M + 2 mu L_C`, the matrix whose eigenvectors give the
/// low-rank alignment.
pub fn lra_matrix(m: &DMatrix<f64>, c: &CorrespondenceMatrix, mu: f64) -> DMatrix<f64> {
    m * (1.0 - mu) + coupling_laplacian(c.matrix()) * (2.0 * mu)
}

/// Low-rank alignment from a precomputed `M`.
pub fn lra_from_m(
    m: &DMatrix<f64>,
    c: &CorrespondenceMatrix,
    mu: f64,
    d: usize,
) -> Result<JointEmbedding> {
    check_mu(mu)?;
    let (nx, ny) = c.matrix().shape();
    if m.shape() != (nx + ny, nx + ny) {
        return Err(Error::DimensionMismatch(format!(
            "M is {:?}, correspondence is {nx} x {ny}",
            m.shape()
        )));
    }
    if d == 0 || d >= nx + ny {
        return Err(Error::OutOfRange(format!("need 1 <= d < {}, got {d}", nx + ny)));
    }
    let (vals, vecs) = sym_eigen_sorted(&lra_matrix(m, c, mu));
    // M is positive definite, so its tiny eigenvalues (1 / (tau s^2))^2 are
    // genuine; only roundoff-level ones count as zero here
    let idx = smallest_above(&vals, d, f64::EPSILON * (nx + ny) as f64);
    let f = select_columns(&vecs, &idx);
    Ok(JointEmbedding {
        fx: f.rows(0, nx).clone_owned(),
        fy: f.rows(nx, ny).clone_owned(),
        mu,
        eigenvalues: idx.iter().map(|&k| vals[k]).collect(),
    })
}

/// Low-rank alignment: reconstructions of both sets (computed in
/// parallel), `M = (I - R)^T (I - R)`, and the `d` smallest non-zero
/// eigenvectors of `(1 - mu) M + 2 mu L`.
pub fn lra(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    c: &CorrespondenceMatrix,
    mu: f64,
    d: usize,
    tau: f64,
) -> Result<JointEmbedding> {
    check_mu(mu)?;
    if c.matrix().shape() != (x.nrows(), y.nrows()) {
        return Err(Error::DimensionMismatch(format!(
            "correspondence is {:?}, data has {} and {} samples",
            c.matrix().shape(),
            x.nrows(),
            y.nrows()
        )));
    }
    let (rx, ry) = rayon::join(|| low_rank_reconstruct(x, tau), || low_rank_reconstruct(y, tau));
    let m = block_m(&rx?, &ry?);
    lra_from_m(&m, c, mu, d)
}

fn check_loss_shapes(
    fx: &DMatrix<f64>,
    fy: &DMatrix<f64>,
    c: &DMatrix<f64>,
    wx: &DMatrix<f64>,
    wy: &DMatrix<f64>,
) -> Result<()> {
    let ok = fx.ncols() == fy.ncols()
        && c.shape() == (fx.nrows(), fy.nrows())
        && wx.shape() == (fx.nrows(), fx.nrows())
        && wy.shape() == (fy.nrows(), fy.nrows());
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "F_X {:?}, F_Y {:?}, C {:?}, W_X {:?}, W_Y {:?}",
            fx.shape(),
            fy.shape(),
            c.shape(),
            wx.shape(),
            wy.shape()
        )))
    }
}

pub(crate) fn row_sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols())
        .map(|k| {
            let d = a[(i, k)] - b[(j, k)];
            d * d
        })
        .sum()
}

/// Weighted sum `sum_ij w_ij |a_i - b_j|^2` over all ordered pairs.
pub(crate) fn weighted_pair_sum(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let mut s = 0.0;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            let wij = w[(i, j)];
            if wij != 0.0 {
                s += wij * row_sq_dist(a, i, b, j);
            }
        }
    }
    s
}

/// Manifold alignment loss: `mu/2` times the correspondence term plus
/// `(1-mu)/2` times each intra-set term, all as explicit pair sums.
pub fn loss_ma(
    fx: &DMatrix<f64>,
    fy: &DMatrix<f64>,
    c: &CorrespondenceMatrix,
    wx: &WeightMatrix,
    wy: &WeightMatrix,
    mu: f64,
) -> Result<f64> {
    check_loss_shapes(fx, fy, c.matrix(), wx.matrix(), wy.matrix())?;
    Ok(0.5 * mu * weighted_pair_sum(fx, fy, c.matrix())
        + 0.5 * (1.0 - mu) * weighted_pair_sum(fx, fx, wx.matrix())
        + 0.5 * (1.0 - mu) * weighted_pair_sum(fy, fy, wy.matrix()))
}

/// Low-rank alignment loss in trace form:
/// `(1-mu) tr(F^T M F) + 2 mu tr(F^T L F)`.
pub fn loss_lra(f: &DMatrix<f64>, m: &DMatrix<f64>, c: &CorrespondenceMatrix, mu: f64) -> f64 {
    let l = coupling_laplacian(c.matrix());
    (1.0 - mu) * (f.transpose() * m * f).trace() + 2.0 * mu * (f.transpose() * l * f).trace()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_metric_reduces_to_standard_problem() {
        let z = DMatrix::identity(3, 3);
        let l = DMatrix::from_row_slice(3, 3, &[2., -1., 0., -1., 2., -1., 0., -1., 2.]);
        let d = DMatrix::identity(3, 3);
        let pairs = generalized_eig_pinv(&z, &l, &d).unwrap();
        let (vals, _) = sym_eigen_sorted(&l);
        for (p, v) in pairs.iter().zip(vals.iter()) {
            assert!((p.value - v).abs() < 1e-12);
            assert!((&l * &p.vector - &p.vector * p.value).amax() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let z = DMatrix::identity(2, 3);
        assert!(generalized_eig_pinv(&z, &DMatrix::identity(2, 2), &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn factor_reproduces_gram() {
        let a = DMatrix::from_row_slice(3, 2, &[1., 2., 0., 1., 1., 0.]);
        let s = &a * a.transpose();
        let f = joint_factor(&s);
        assert_eq!(f.ncols(), 2);
        assert!((&f * f.transpose() - s).amax() < 1e-12);
    }

    #[test]
    fn loss_ma_zero_for_constant_embeddings() {
        let fx = DMatrix::from_element(3, 2, 0.7);
        let fy = DMatrix::from_element(4, 2, 0.7);
        let wx = WeightMatrix::new(DMatrix::from_element(3, 3, 1.0)).unwrap();
        let wy = WeightMatrix::new(DMatrix::from_element(4, 4, 1.0)).unwrap();
        let c = CorrespondenceMatrix::new(DMatrix::from_element(3, 4, 1.0)).unwrap();
        assert_eq!(loss_ma(&fx, &fy, &c, &wx, &wy, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn lra_mu_bounds() {
        let x = DMatrix::from_fn(5, 2, |r, c| (r + c) as f64);
        let c = CorrespondenceMatrix::endpoints(5, 5);
        assert!(lra(&x, &x, &c, -0.1, 2, 1.0).is_err());
        assert!(lra(&x, &x, &c, 0.5, 10, 1.0).is_err());
    }

    #[test]
    fn mma_identical_sets_symmetric() {
        let x = DMatrix::from_fn(14, 3, |i, j| ((i * (j + 2)) as f64 * 0.37).sin() + 0.1 * j as f64);
        let w = crate::graph::heat_kernel_knn(&x, 4, None).unwrap();
        let c = CorrespondenceMatrix::new(DMatrix::identity(14, 14)).unwrap();
        let res = mma(&x, &x, &w, &w, &c, 0.5, 1e-8, 6).unwrap();
        let mut swap = DMatrix::zeros(6, 6);
        for k in 0..3 {
            swap[(k, k + 3)] = 1.0;
            swap[(k + 3, k)] = 1.0;
        }
        for k in 0..res.maps.len() {
            let q = crate::linalg::orth(&res.maps[k]);
            let p = &q * q.transpose();
            assert!((&swap * &p * &swap - &p).amax() < 1e-6, "level {k}");
        }
        let (a, b) = res.reduced(0, 2).unwrap();
        assert!((a - b).amax() < 1e-8);
    }
}