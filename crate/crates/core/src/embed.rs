//! Laplacian eigenmaps, locality preserving projections, and their
//! multiscale versions built on the diffusion wavelet tree.

use nalgebra::DMatrix;

use crate::align::{generalized_eig_pinv, joint_factor};
use crate::error::{Error, Result};
use crate::graph::{laplacians, WeightMatrix};
use crate::linalg::{pinv, pinv_sym, select_columns, smallest_nonzero, spectral_norm, sym_eigen_sorted};
use crate::wavelets::build_dwt;

/// Embedded coordinates, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    pub level: Option<usize>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }
}

/// Linear projection `x -> map^T x` learned from data.
#[derive(Debug, Clone)]
pub struct LinearMap {
    /// input dim x output dim
    pub map: DMatrix<f64>,
    /// `F` with `F F^T = X X^T` (features x rank).
    pub factor: DMatrix<f64>,
    pub level: Option<usize>,
}

impl LinearMap {
    /// Projects row samples: returns `x * map`.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.map.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "samples have {} features, map expects {}",
                x.ncols(),
                self.map.nrows()
            )));
        }
        Ok(x * &self.map)
    }
}

/// Number of connected components of the graph with edges `w_ij > 0`.
pub fn connected_components(w: &WeightMatrix) -> usize {
    let n = w.len();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && w.matrix()[(i, j)] > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    count
}

fn require_connected(w: &WeightMatrix) -> Result<()> {
    match connected_components(w) {
        1 => Ok(()),
        components => Err(Error::Disconnected { components }),
    }
}

/// Eigenvectors of the normalized Laplacian for the `d` smallest non-zero
/// eigenvalues, as unit-norm columns with the first significant entry
/// positive.
pub fn laplacian_eigenmaps(w: &WeightMatrix, d: usize) -> Result<Embedding> {
    let n = w.len();
    if d == 0 || d >= n {
        return Err(Error::OutOfRange(format!("need 1 <= d < n, got d={d}, n={n}")));
    }
    require_connected(w)?;
    let g = laplacians(w)?;
    let (vals, vecs) = sym_eigen_sorted(&g.normalized);
    let idx = smallest_nonzero(&vals, d);
    Ok(Embedding {
        coords: select_columns(&vecs, &idx),
        level: None,
    })
}

/// Locality preserving projections: generalized eigenvectors of
/// `X^T L X f = lambda X^T X f` (rows of `x` are samples) for the `d`
/// smallest non-zero eigenvalues, through the pseudoinverse reduction.
pub fn lpp(x: &DMatrix<f64>, w: &WeightMatrix, d: usize) -> Result<LinearMap> {
    if x.nrows() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but graph has {} vertices",
            x.nrows(),
            w.len()
        )));
    }
    require_connected(w)?;
    let g = laplacians(w)?;
    let z = x.transpose();
    let ident = DMatrix::identity(x.nrows(), x.nrows());
    let pairs = generalized_eig_pinv(&z, &g.normalized, &ident)?;
    let values = nalgebra::DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.value));
    if pairs.len() < d {
        return Err(Error::NotEnoughEigenvectors {
            wanted: d,
            found: pairs.len(),
        });
    }
    let idx = smallest_nonzero(&values, d);
    let cols: Vec<_> = idx.iter().map(|&k| pairs[k].vector.clone()).collect();
    Ok(LinearMap {
        map: DMatrix::from_columns(&cols),
        factor: joint_factor(&(&z * z.transpose())),
        level: None,
    })
}

/// Embeddings read off the diffusion wavelet tree of `T = I - L`: at level
/// `j` sample `i` maps to row `i` of the extended basis.
pub fn multiscale_eigenmaps(w: &WeightMatrix, epsilon: f64, max_levels: usize) -> Result<Vec<Embedding>> {
    require_connected(w)?;
    let g = laplacians(w)?;
    let tree = build_dwt(&g.diffusion, None, epsilon, max_levels)?;
    (0..tree.num_levels())
        .map(|j| {
            Ok(Embedding {
                coords: tree.extended_basis(j)?,
                level: Some(j),
            })
        })
        .collect()
}

/// Multiscale LPP: the tree is built on `(F^+ X^T L X (F^T)^+)^+`, scaled to
/// unit spectral norm, and level `j` yields the map `(F^T)^+ [phi_j]`.
pub fn multiscale_lpp(
    x: &DMatrix<f64>,
    w: &WeightMatrix,
    epsilon: f64,
    max_levels: usize,
) -> Result<Vec<LinearMap>> {
    if x.nrows() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but graph has {} vertices",
            x.nrows(),
            w.len()
        )));
    }
    require_connected(w)?;
    let g = laplacians(w)?;
    let z = x.transpose();
    let f = joint_factor(&(&z * z.transpose()));
    let f_pinv = pinv(&f);
    let inner = &f_pinv * &z * &g.normalized * z.transpose() * f_pinv.transpose();
    let mut t = pinv_sym(&inner);
    let norm = spectral_norm(&t);
    if norm > 0.0 {
        t /= norm;
    }
    let tree = build_dwt(&t, None, epsilon, max_levels)?;
    let ft_pinv = f_pinv.transpose();
    (0..tree.num_levels())
        .map(|j| {
            Ok(LinearMap {
                map: &ft_pinv * tree.extended_basis(j)?,
                factor: f.clone(),
                level: Some(j),
            })
        })
        .collect()
}

/// Deepest level whose basis still has at least `d` functions; level 0 if
/// none does.
pub fn select_level(dims: &[usize], d: usize) -> usize {
    dims.iter().rposition(|&p| p >= d).unwrap_or(0)
}

/// Best `d`-dimensional sub-basis of an orthonormal level basis `phi` for a
/// symmetric operator: Rayleigh-Ritz on `phi^T A phi`, keeping the `d`
/// smallest non-zero Ritz values. Columns stay orthonormal.
pub fn reduce_level(phi: &DMatrix<f64>, operator: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    if phi.ncols() < d {
        return Err(Error::NotEnoughEigenvectors {
            wanted: d,
            found: phi.ncols(),
        });
    }
    let ritz = phi.transpose() * operator * phi;
    let (vals, vecs) = sym_eigen_sorted(&ritz);
    let idx = smallest_nonzero(&vals, d);
    Ok(phi * select_columns(&vecs, &idx))
}

/// Multiscale eigenmap at a fixed dimension: picks a tree level (or the
/// override) with room for `d` non-trivial functions and reduces it to `d`
/// columns against the normalized Laplacian.
pub fn multiscale_embedding(
    w: &WeightMatrix,
    d: usize,
    epsilon: f64,
    max_levels: usize,
    level_override: Option<usize>,
) -> Result<Embedding> {
    let levels = multiscale_eigenmaps(w, epsilon, max_levels)?;
    let dims: Vec<usize> = levels.iter().map(|e| e.dim()).collect();
    // one extra function for the trivial degree vector
    let level = match level_override {
        Some(l) if l < levels.len() => l,
        Some(l) => {
            return Err(Error::OutOfRange(format!(
                "level {l} requested, tree has {} levels",
                levels.len()
            )))
        }
        None => select_level(&dims, d + 1),
    };
    let g = laplacians(w)?;
    let coords = reduce_level(&levels[level].coords, &g.normalized, d)?;
    Ok(Embedding {
        coords,
        level: Some(level),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::heat_kernel_knn;

    fn path_graph(n: usize) -> WeightMatrix {
        WeightMatrix::new(DMatrix::from_fn(n, n, |i, j| {
            if i.abs_diff(j) == 1 {
                1.0
            } else {
                0.0
            }
        }))
        .unwrap()
    }

    #[test]
    fn select_level_cases() {
        assert_eq!(select_level(&[10, 6, 3, 1], 2), 2);
        assert_eq!(select_level(&[10, 6, 3, 1], 12), 0);
        assert_eq!(select_level(&[5], 5), 0);
    }

    #[test]
    fn path_fiedler_is_monotone() {
        let e = laplacian_eigenmaps(&path_graph(3), 1).unwrap();
        let c = e.coords.column(0);
        assert!(c[0] > c[1] && c[1] > c[2] || c[0] < c[1] && c[1] < c[2]);
        assert!(c[0] > 0.0, "sign convention");
    }

    #[test]
    fn disconnected_rejected() {
        let w = WeightMatrix::new(DMatrix::from_row_slice(
            4,
            4,
            &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.],
        ))
        .unwrap();
        assert!(matches!(
            laplacian_eigenmaps(&w, 1),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(laplacian_eigenmaps(&path_graph(3), 3).is_err());
    }

    #[test]
    fn multiscale_level_zero_is_identity() {
        let levels = multiscale_eigenmaps(&path_graph(6), 1e-6, 4).unwrap();
        assert_eq!(levels[0].coords, DMatrix::identity(6, 6));
        let dims: Vec<usize> = levels.iter().map(|e| e.dim()).collect();
        assert!(dims.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn lpp_maps_training_rows_to_their_coordinates() {
        let x = DMatrix::from_fn(12, 3, |r, c| ((r * 7 + c * 3) % 11) as f64 + 0.1 * c as f64);
        let w = heat_kernel_knn(&x, 3, None).unwrap();
        let m = lpp(&x, &w, 2).unwrap();
        let y = m.apply(&x).unwrap();
        for r in 0..12 {
            let row = x.row(r) * &m.map;
            assert!((row - y.row(r)).amax() < 1e-12);
        }
        assert!(m.apply(&DMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn reduce_level_keeps_orthonormal_columns() {
        let w = path_graph(8);
        let e = multiscale_embedding(&w, 2, 1e-6, 6, None).unwrap();
        assert_eq!(e.coords.ncols(), 2);
        let g = e.coords.transpose() * &e.coords;
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-10);
    }
}
