//! Similarity graphs, Laplacians, diffusion operators, joint block
//! matrices and low-rank self-reconstructions.
//!
//! Point sets are passed as matrices with one sample per row.

use nalgebra::{DMatrix, DVector};

use crate::dtw::CorrespondenceMatrix;
use crate::error::{Error, Result};
use crate::linalg::block_diag;

/// Symmetric, non-negative similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix must be square, got {:?}",
                entries.shape()
            )));
        }
        if entries.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::OutOfRange("weights must be finite and non-negative".into()));
        }
        if (&entries - entries.transpose()).amax() > 1e-12 {
            return Err(Error::OutOfRange("weight matrix is not symmetric".into()));
        }
        Ok(Self(entries))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.nrows() == 0
    }

    /// Number of undirected edges (non-zero entries above the diagonal).
    pub fn edge_count(&self) -> usize {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.0[(i, j)] > 0.0)
            .count()
    }

    /// Iterator over undirected edges (i < j).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.0[(i, j)] > 0.0)
    }
}

/// Degree vector and the three derived operators of a weight matrix.
#[derive(Debug, Clone)]
pub struct GraphMatrices {
    pub degree: DVector<f64>,
    /// D - W
    pub combinatorial: DMatrix<f64>,
    /// I - D^{-1/2} W D^{-1/2}
    pub normalized: DMatrix<f64>,
    /// I - normalized = D^{-1/2} W D^{-1/2}
    pub diffusion: DMatrix<f64>,
}

impl GraphMatrices {
    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.degree)
    }
}

fn pairwise_sq_dists(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (x.row(i) - x.row(j)).norm_squared();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// k-nearest-neighbour graph with heat-kernel weights
/// `exp(-|x_i - x_j|^2 / (2 sigma^2))`, symmetrized by the max rule.
///
/// With `sigma = None` the bandwidth is the median length of the kNN edges.
pub fn heat_kernel_knn(x: &DMatrix<f64>, k: usize, sigma: Option<f64>) -> Result<WeightMatrix> {
    knn_heat(x, k, sigma, false)
}

/// [`heat_kernel_knn`] plus an edge between every pair of consecutive
/// samples, weighted by the same kernel. Keeps a sampled curve connected
/// across gaps wider than its neighbourhoods.
pub fn heat_kernel_knn_sequential(x: &DMatrix<f64>, k: usize, sigma: Option<f64>) -> Result<WeightMatrix> {
    knn_heat(x, k, sigma, true)
}

fn knn_heat(x: &DMatrix<f64>, k: usize, sigma: Option<f64>, sequential: bool) -> Result<WeightMatrix> {
    let n = x.nrows();
    if k == 0 || k >= n {
        return Err(Error::OutOfRange(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    if let Some(s) = sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::OutOfRange(format!("sigma must be positive, got {s}")));
        }
    }
    let d2 = pairwise_sq_dists(x);
    let mut neighbours = Vec::with_capacity(n);
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d2[(i, a)].total_cmp(&d2[(i, b)]).then(a.cmp(&b)));
        others.truncate(k);
        neighbours.push(others);
    }
    let sigma = match sigma {
        Some(s) => s,
        None => {
            let lens: Vec<f64> = neighbours
                .iter()
                .enumerate()
                .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j)))
                .map(|(i, j)| d2[(i, j)].sqrt())
                .collect();
            let med = median(lens.clone());
            if med > 0.0 {
                med
            } else {
                let nz: Vec<f64> = lens.into_iter().filter(|v| *v > 0.0).collect();
                if nz.is_empty() {
                    1.0
                } else {
                    median(nz)
                }
            }
        }
    };
    let mut w = DMatrix::zeros(n, n);
    for (i, nb) in neighbours.iter().enumerate() {
        for &j in nb {
            let v = (-d2[(i, j)] / (2.0 * sigma * sigma)).exp();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    if sequential {
        for i in 0..n - 1 {
            let v = (-d2[(i, i + 1)] / (2.0 * sigma * sigma)).exp();
            w[(i, i + 1)] = v;
            w[(i + 1, i)] = v;
        }
    }
    WeightMatrix::new(w)
}

/// Degree, combinatorial and normalized Laplacians, and the diffusion
/// operator of `w`. Every vertex must have positive degree.
pub fn laplacians(w: &WeightMatrix) -> Result<GraphMatrices> {
    let w = w.matrix();
    let n = w.nrows();
    let degree = DVector::from_fn(n, |i, _| w.row(i).sum());
    if let Some(i) = degree.iter().position(|d| *d <= 0.0) {
        return Err(Error::IsolatedVertex(i));
    }
    let combinatorial = DMatrix::from_diagonal(&degree) - w;
    let inv_sqrt = degree.map(|d| 1.0 / d.sqrt());
    let diffusion = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * w[(i, j)] * inv_sqrt[j]);
    let normalized = DMatrix::identity(n, n) - &diffusion;
    Ok(GraphMatrices {
        degree,
        combinatorial,
        normalized,
        diffusion,
    })
}

/// `diag(A 1) - A` for any square adjacency.
pub fn laplacian_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let deg = DVector::from_fn(a.nrows(), |i, _| a.row(i).sum());
    DMatrix::from_diagonal(&deg) - a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainKernel {
    /// Every kept lag has weight 1.
    Unit,
    /// Heat kernel; `None` picks the median lag-1 step length as bandwidth.
    Heat(Option<f64>),
}

/// Temporal chain graph linking each sample to the next `k0` samples.
pub fn chain_weights(x: &DMatrix<f64>, k0: usize, kernel: ChainKernel) -> Result<WeightMatrix> {
    let n = x.nrows();
    if k0 == 0 || k0 >= n {
        return Err(Error::OutOfRange(format!("need 1 <= k0 < n, got k0={k0}, n={n}")));
    }
    let step_sq = |i: usize, j: usize| (x.row(i) - x.row(j)).norm_squared();
    let sigma = match kernel {
        ChainKernel::Unit => None,
        ChainKernel::Heat(Some(s)) if s > 0.0 => Some(s),
        ChainKernel::Heat(Some(s)) => {
            return Err(Error::OutOfRange(format!("sigma must be positive, got {s}")))
        }
        ChainKernel::Heat(None) => {
            let med = median((0..n - 1).map(|i| step_sq(i, i + 1).sqrt()).collect());
            Some(if med > 0.0 { med } else { 1.0 })
        }
    };
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..=(i + k0).min(n - 1) {
            let v = match sigma {
                None => 1.0,
                Some(s) => (-step_sq(i, j) / (2.0 * s * s)).exp(),
            };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    WeightMatrix::new(w)
}

/// Block matrices of two coupled graphs.
///
/// `weight` is `[(1-mu) W_X, mu C; mu C^T, (1-mu) W_Y]`. `laplacian` keeps
/// the unscaled intra-set Laplacians and adds the coupling as
/// `Omega_1 = mu diag(C 1)`, `Omega_2 = mu C`, `Omega_3 = mu C^T`,
/// `Omega_4 = mu diag(C^T 1)`; `degree` is `diag(D_X, D_Y)`.
#[derive(Debug, Clone)]
pub struct JointGraph {
    pub weight: DMatrix<f64>,
    pub degree: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub mu: f64,
    pub n_x: usize,
    pub n_y: usize,
}

pub fn joint_weight(
    wx: &WeightMatrix,
    wy: &WeightMatrix,
    c: &CorrespondenceMatrix,
    mu: f64,
) -> Result<JointGraph> {
    check_mu(mu)?;
    let (nx, ny) = (wx.len(), wy.len());
    if c.matrix().shape() != (nx, ny) {
        return Err(Error::DimensionMismatch(format!(
            "correspondence is {:?}, graphs have {nx} and {ny} vertices",
            c.matrix().shape()
        )));
    }
    let cm = c.matrix();
    let mut weight = block_diag(&(wx.matrix() * (1.0 - mu)), &(wy.matrix() * (1.0 - mu)));
    weight.view_mut((0, nx), (nx, ny)).copy_from(&(cm * mu));
    weight.view_mut((nx, 0), (ny, nx)).copy_from(&(cm.transpose() * mu));

    let dx = DVector::from_fn(nx, |i, _| wx.matrix().row(i).sum());
    let dy = DVector::from_fn(ny, |i, _| wy.matrix().row(i).sum());
    let degree = DMatrix::from_diagonal(&DVector::from_iterator(
        nx + ny,
        dx.iter().chain(dy.iter()).copied(),
    ));
    let laplacian = block_diag(
        &laplacian_matrix(wx.matrix()),
        &laplacian_matrix(wy.matrix()),
    ) + coupling_laplacian(cm) * mu;
    Ok(JointGraph {
        weight,
        degree,
        laplacian,
        mu,
        n_x: nx,
        n_y: ny,
    })
}

/// Laplacian of the bipartite graph `[0, C; C^T, 0]`:
/// `[diag(C 1), -C; -C^T, diag(C^T 1)]`.
pub fn coupling_laplacian(c: &DMatrix<f64>) -> DMatrix<f64> {
    let (nx, ny) = c.shape();
    let mut a = DMatrix::zeros(nx + ny, nx + ny);
    a.view_mut((0, nx), (nx, ny)).copy_from(c);
    a.view_mut((nx, 0), (ny, nx)).copy_from(&c.transpose());
    laplacian_matrix(&a)
}

/// `diag(X^T, Y^T)`: the (p+q) x (n_x+n_y) block data matrix.
pub fn block_data(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    block_diag(&x.transpose(), &y.transpose())
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("mu must lie in [0, 1], got {mu}")))
    }
}

/// Closed-form minimizer of `(tau/2) |A - A R|_F^2 + |R|_*` where `A` has
/// one column per sample (the transpose of the row-sample matrix).
#[derive(Debug, Clone)]
pub struct LowRankReconstruction {
    pub r: DMatrix<f64>,
    pub tau: f64,
}

/// `R = V1 (I - Lambda1^{-2} / tau) V1^T` over the singular values above
/// `1/sqrt(tau)`; `V1` are the sample-side singular vectors.
pub fn low_rank_reconstruct(x: &DMatrix<f64>, tau: f64) -> Result<LowRankReconstruction> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::OutOfRange(format!("tau must be positive, got {tau}")));
    }
    let n = x.nrows();
    let mut r = DMatrix::zeros(n, n);
    if x.ncols() > 0 && n > 0 {
        let svd = x.clone().svd(true, false);
        let u = svd.u.as_ref().expect("u requested");
        let cut = 1.0 / tau.sqrt();
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > cut {
                let v = u.column(k);
                r += v * v.transpose() * (1.0 - 1.0 / (tau * s * s));
            }
        }
    }
    Ok(LowRankReconstruction { r, tau })
}

/// Objective `(tau/2) |A - A R|_F^2 + |R|_*` with `A = x^T`.
pub fn low_rank_objective(x: &DMatrix<f64>, r: &DMatrix<f64>, tau: f64) -> f64 {
    let a = x.transpose();
    let resid = &a - &a * r;
    let nuclear: f64 = r.clone().svd(false, false).singular_values.sum();
    0.5 * tau * resid.norm_squared() + nuclear
}

/// `M = (I - R)^T (I - R)` for `R = diag(R_X, R_Y)`.
pub fn block_m(rx: &LowRankReconstruction, ry: &LowRankReconstruction) -> DMatrix<f64> {
    let r = block_diag(&rx.r, &ry.r);
    let n = r.nrows();
    let i_r = DMatrix::identity(n, n) - r;
    i_r.transpose() * &i_r
}

/// Sparse graph read off a reconstruction matrix: each sample keeps the `k`
/// others with the largest affinity `(|R_ij| + |R_ji|) / 2`, union rule.
pub fn low_rank_graph(rec: &LowRankReconstruction, k: usize) -> Result<WeightMatrix> {
    let n = rec.r.nrows();
    if k == 0 || k >= n {
        return Err(Error::OutOfRange(format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    let aff = DMatrix::from_fn(n, n, |i, j| 0.5 * (rec.r[(i, j)].abs() + rec.r[(j, i)].abs()));
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| aff[(i, b)].total_cmp(&aff[(i, a)]).then(a.cmp(&b)));
        for &j in others.iter().take(k) {
            if aff[(i, j)] > 0.0 {
                w[(i, j)] = aff[(i, j)];
                w[(j, i)] = aff[(i, j)];
            }
        }
    }
    WeightMatrix::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen_sorted;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn identical_points_weight_one() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 0.0, 5.0]);
        let w = heat_kernel_knn(&x, 1, Some(1.0)).unwrap();
        assert_eq!(w.matrix()[(0, 1)], 1.0);
    }

    #[test]
    fn collinear_middle_links_both_ends() {
        let w = heat_kernel_knn(&col(&[0.0, 1.0, 2.0]), 1, Some(1.0)).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(w.matrix()[(0, 1)], e);
        assert_eq!(w.matrix()[(1, 2)], e);
        assert_eq!(w.matrix()[(0, 2)], 0.0);
    }

    #[test]
    fn knn_rejects_bad_k() {
        let x = col(&[0.0, 1.0, 2.0]);
        assert!(heat_kernel_knn(&x, 0, None).is_err());
        assert!(heat_kernel_knn(&x, 3, None).is_err());
    }

    #[test]
    fn two_node_laplacians() {
        let w = WeightMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let g = laplacians(&w).unwrap();
        assert_eq!(
            g.combinatorial,
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
        let (vals, _) = sym_eigen_sorted(&g.normalized);
        assert!(vals[0].abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertex_named() {
        let w = WeightMatrix::new(DMatrix::from_row_slice(
            3,
            3,
            &[0., 1., 0., 1., 0., 0., 0., 0., 0.],
        ))
        .unwrap();
        assert!(matches!(laplacians(&w), Err(Error::IsolatedVertex(2))));
    }

    #[test]
    fn chain_unit_bands() {
        let x = col(&[0.0, 3.0, 1.0, 7.0]);
        let w = chain_weights(&x, 1, ChainKernel::Unit).unwrap();
        let expect = DMatrix::from_fn(4, 4, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        assert_eq!(w.matrix(), &expect);
        let w2 = chain_weights(&x, 2, ChainKernel::Unit).unwrap();
        let expect2 = DMatrix::from_fn(4, 4, |i, j| {
            let d = i.abs_diff(j);
            if d == 1 || d == 2 {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(w2.matrix(), &expect2);
        assert!(chain_weights(&x, 4, ChainKernel::Unit).is_err());
    }

    #[test]
    fn chain_heat_constant_on_even_grid() {
        let x = col(&[0.0, 0.5, 1.0, 1.5, 2.0]);
        let w = chain_weights(&x, 1, ChainKernel::Heat(Some(1.0))).unwrap();
        let expect = (-0.25f64 / 2.0).exp();
        for i in 0..4 {
            assert!((w.matrix()[(i, i + 1)] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn joint_weight_limits() {
        let wx = WeightMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.])).unwrap();
        let wy = WeightMatrix::new(DMatrix::from_row_slice(2, 2, &[0., 2., 2., 0.])).unwrap();
        let c = CorrespondenceMatrix::new(DMatrix::identity(2, 2)).unwrap();
        let j0 = joint_weight(&wx, &wy, &c, 0.0).unwrap();
        assert_eq!(j0.weight, block_diag(wx.matrix(), wy.matrix()));
        let j1 = joint_weight(&wx, &wy, &c, 1.0).unwrap();
        assert_eq!(j1.weight.view((0, 0), (2, 2)).amax(), 0.0);
        assert_eq!(j1.weight.view((2, 2), (2, 2)).amax(), 0.0);
        assert_eq!(j1.weight[(0, 2)], 1.0);
        assert!(joint_weight(&wx, &wy, &c, 1.5).is_err());
        let bad = CorrespondenceMatrix::new(DMatrix::identity(2, 3)).unwrap();
        assert!(joint_weight(&wx, &wy, &bad, 0.5).is_err());
    }

    #[test]
    fn zero_tau_rejected_and_small_values_vanish() {
        let x = DMatrix::from_row_slice(3, 2, &[0.1, 0.0, 0.0, 0.1, 0.0, 0.0]);
        assert!(low_rank_reconstruct(&x, 0.0).is_err());
        let r = low_rank_reconstruct(&x, 1.0).unwrap();
        assert_eq!(r.r.amax(), 0.0);
    }

    #[test]
    fn rank_one_reconstruction() {
        // x = 2 * u v^T with unit u (samples) and v (features): sigma = 2
        let u = DMatrix::from_column_slice(3, 1, &[0.6, 0.8, 0.0]);
        let v = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let x = &u * &v * 2.0;
        let r = low_rank_reconstruct(&x, 1.0).unwrap();
        let expect = &u * u.transpose() * 0.75;
        assert!((r.r - expect).amax() < 1e-12);
    }

    #[test]
    fn block_m_identity_for_zero_r() {
        let z = |n| LowRankReconstruction {
            r: DMatrix::zeros(n, n),
            tau: 1.0,
        };
        assert_eq!(block_m(&z(2), &z(3)), DMatrix::identity(5, 5));
    }
}
