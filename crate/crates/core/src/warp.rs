//! Iterative warping: alternate a joint embedding step at fixed
//! correspondence with a DTW step in the embedded space.
//!
//! Every loop keeps a new embedding only if it does not raise the loss at
//! the current correspondence; the DTW step can only lower the coupling
//! term, so each recorded loss sequence is nonincreasing.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::align::{generalized_eig_pinv, lra_from_m, mma_system, weighted_pair_sum};
use crate::data::{write_matrix_csv, AlignmentPath, TimeSeries};
use crate::dtw::{dtw_align_with, path_to_matrix, sq_euclidean, CorrespondenceMatrix};
use crate::embed::{laplacian_eigenmaps, multiscale_eigenmaps, reduce_level, select_level};
use crate::error::{Error, Result};
use crate::graph::{
    block_data, block_m, chain_weights, check_mu, heat_kernel_knn_sequential, laplacian_matrix, low_rank_graph,
    low_rank_reconstruct, ChainKernel, WeightMatrix,
};
use crate::linalg::{select_columns, smallest_nonzero, sym_eigen_sorted};

/// How the intra-set graphs are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    KnnHeat,
    LowRank,
    Chain,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::KnnHeat => "knn-heat",
            GraphKind::LowRank => "low-rank",
            GraphKind::Chain => "chain",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [GraphKind::KnnHeat, GraphKind::LowRank, GraphKind::Chain]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitCorrespondence {
    /// Only (1, 1) and (n, m) matched.
    Endpoints,
    /// The straight-line path.
    Linear,
}

impl InitCorrespondence {
    pub fn as_str(self) -> &'static str {
        match self {
            InitCorrespondence::Endpoints => "endpoints",
            InitCorrespondence::Linear => "linear",
        }
    }
}

impl fmt::Display for InitCorrespondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitCorrespondence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [InitCorrespondence::Endpoints, InitCorrespondence::Linear]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpConfig {
    pub d: usize,
    pub mu: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub k: usize,
    pub graph_kind: GraphKind,
    pub max_iters: usize,
    pub tol: f64,
    pub level_override: Option<usize>,
    /// Maximum number of wavelet-tree levels.
    pub max_levels: usize,
    /// Largest lag linked in chain graphs.
    pub chain_lag: usize,
    /// Correspondence the warping loops start from.
    pub init: InitCorrespondence,
}

impl Default for WarpConfig {
    fn default() -> Self {
        Self {
            d: 2,
            mu: 0.5,
            tau: 1.0,
            epsilon: 1e-6,
            k: 10,
            graph_kind: GraphKind::LowRank,
            max_iters: 50,
            tol: 1e-6,
            level_override: None,
            max_levels: 8,
            chain_lag: 1,
            init: InitCorrespondence::Linear,
        }
    }
}

impl WarpConfig {
    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        let bad = |what: &str| Err(Error::OutOfRange(what.to_string()));
        if self.d == 0 {
            return bad("d must be at least 1");
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad("tau must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.chain_lag == 0 {
            return bad("chain_lag must be at least 1");
        }
        Ok(())
    }

    /// `key=value` lines, one per field.
    pub fn to_kv(&self) -> String {
        let level = self
            .level_override
            .map(|l| l.to_string())
            .unwrap_or_else(|| "auto".into());
        format!(
            "d={}\nmu={}\ntau={}\nepsilon={}\nk={}\ngraph={}\nmax_iters={}\ntol={}\nlevel={}\nmax_levels={}\nchain_lag={}\ninit={}\n",
            self.d,
            self.mu,
            self.tau,
            self.epsilon,
            self.k,
            self.graph_kind,
            self.max_iters,
            self.tol,
            level,
            self.max_levels,
            self.chain_lag,
            self.init
        )
    }
}

#[derive(Debug, Clone)]
pub struct WarpResult {
    pub fx: DMatrix<f64>,
    pub fy: DMatrix<f64>,
    pub path: AlignmentPath,
    pub w_xy: CorrespondenceMatrix,
    pub loss_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl WarpResult {
    /// Writes `path.csv`, `FX.csv`, `FY.csv`, `loss_trace.csv` and a
    /// `config.txt` echo into `dir`.
    pub fn write_dir(&self, dir: &Path, cfg: &WarpConfig, method: &str) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        self.path.write_csv(std::fs::File::create(dir.join("path.csv"))?)?;
        write_matrix_csv(&self.fx, None, std::fs::File::create(dir.join("FX.csv"))?)?;
        write_matrix_csv(&self.fy, None, std::fs::File::create(dir.join("FY.csv"))?)?;
        let mut lt = std::fs::File::create(dir.join("loss_trace.csv"))?;
        writeln!(lt, "iteration,loss")?;
        for (t, l) in self.loss_trace.iter().enumerate() {
            writeln!(lt, "{},{l:e}", t + 1)?;
        }
        let mut c = std::fs::File::create(dir.join("config.txt"))?;
        writeln!(c, "method={method}")?;
        write!(c, "{}", cfg.to_kv())?;
        writeln!(c, "iterations={}", self.iterations)?;
        writeln!(c, "converged={}", self.converged)?;
        Ok(())
    }
}

/// Intra-set graph of one series. The kNN and low-rank graphs also link
/// consecutive samples; in the low-rank graph such links get the median
/// edge weight unless already present.
pub fn series_graph(x: &DMatrix<f64>, cfg: &WarpConfig, kind: GraphKind) -> Result<WeightMatrix> {
    let n = x.nrows();
    let k = cfg.k.min(n - 1);
    match kind {
        GraphKind::KnnHeat => heat_kernel_knn_sequential(x, k, None),
        GraphKind::LowRank => {
            let g = low_rank_graph(&low_rank_reconstruct(x, cfg.tau)?, k)?;
            let mut w = g.matrix().clone();
            let mut weights: Vec<f64> = w.iter().copied().filter(|v| *v > 0.0).collect();
            weights.sort_by(f64::total_cmp);
            let fill = weights.get(weights.len() / 2).copied().unwrap_or(1.0);
            for i in 0..n - 1 {
                if w[(i, i + 1)] == 0.0 {
                    w[(i, i + 1)] = fill;
                    w[(i + 1, i)] = fill;
                }
            }
            WeightMatrix::new(w)
        }
        GraphKind::Chain => chain_weights(x, cfg.chain_lag.min(n - 1), ChainKernel::Unit),
    }
}

fn split_rows(f: &DMatrix<f64>, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    (
        f.rows(0, n).clone_owned(),
        f.rows(n, f.nrows() - n).clone_owned(),
    )
}

fn stack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut f = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    f.rows_mut(0, a.nrows()).copy_from(a);
    f.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    f
}

/// Laplacian of `[[a WX, c W]; [c W^T, a WY]]`.
fn coupled_laplacian(wx: &DMatrix<f64>, wy: &DMatrix<f64>, w: &DMatrix<f64>, a: f64, c: f64) -> DMatrix<f64> {
    let (nx, ny) = w.shape();
    let mut adj = DMatrix::zeros(nx + ny, nx + ny);
    adj.view_mut((0, 0), (nx, nx)).copy_from(&(wx * a));
    adj.view_mut((nx, nx), (ny, ny)).copy_from(&(wy * a));
    adj.view_mut((0, nx), (nx, ny)).copy_from(&(w * c));
    adj.view_mut((nx, 0), (ny, nx)).copy_from(&(w.transpose() * c));
    laplacian_matrix(&adj)
}

fn quad(f: &DMatrix<f64>, l: &DMatrix<f64>) -> f64 {
    (f.transpose() * l * f).trace()
}

fn dtw_step(fx: &DMatrix<f64>, fy: &DMatrix<f64>) -> Result<(AlignmentPath, CorrespondenceMatrix)> {
    let (path, _) = dtw_align_with(fx, fy, sq_euclidean)?;
    let w = path_to_matrix(&path, fx.nrows(), fy.nrows())?;
    Ok((path, w))
}

/// One method plugged into the shared loop.
trait Stepper {
    /// Loss of the stacked embedding `[F_X; F_Y]` under correspondence `w`.
    fn loss(&self, f: &DMatrix<f64>, w: &CorrespondenceMatrix) -> f64;
    /// Candidate embedding at fixed `w`, given the current one.
    fn embed(&mut self, current: Option<&DMatrix<f64>>, w: &CorrespondenceMatrix) -> Result<DMatrix<f64>>;
}

fn run_loop<S: Stepper>(stepper: &mut S, n: usize, m: usize, cfg: &WarpConfig) -> Result<WarpResult> {
    let mut w = match cfg.init {
        InitCorrespondence::Endpoints => CorrespondenceMatrix::endpoints(n, m),
        InitCorrespondence::Linear => CorrespondenceMatrix::linear(n, m),
    };
    let mut f: Option<DMatrix<f64>> = None;
    let mut trace: Vec<f64> = Vec::new();
    let mut path = None;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        iterations += 1;
        let candidate = stepper.embed(f.as_ref(), &w)?;
        let next = match &f {
            Some(cur) if stepper.loss(&candidate, &w) > stepper.loss(cur, &w) => cur.clone(),
            _ => candidate,
        };
        let (fx, fy) = split_rows(&next, n);
        let (p, w_new) = dtw_step(&fx, &fy)?;
        let loss = stepper.loss(&next, &w_new);
        let unchanged = w_new == w;
        let stalled = trace
            .last()
            .is_some_and(|&prev| (prev - loss) <= cfg.tol * prev.abs().max(f64::MIN_POSITIVE));
        trace.push(loss);
        f = Some(next);
        w = w_new;
        path = Some(p);
        if unchanged || stalled {
            converged = true;
            break;
        }
    }
    let f = f.expect("at least one iteration");
    let (fx, fy) = split_rows(&f, n);
    Ok(WarpResult {
        fx,
        fy,
        path: path.expect("at least one iteration"),
        w_xy: w,
        loss_trace: trace,
        iterations,
        converged,
    })
}

fn one_shot(fx: DMatrix<f64>, fy: DMatrix<f64>, loss: impl Fn(&DMatrix<f64>, &CorrespondenceMatrix) -> f64) -> Result<WarpResult> {
    let (path, w) = dtw_step(&fx, &fy)?;
    let l = loss(&stack(&fx, &fy), &w);
    Ok(WarpResult {
        fx,
        fy,
        path,
        w_xy: w,
        loss_trace: vec![l],
        iterations: 1,
        converged: true,
    })
}

fn check_inputs(x: &TimeSeries, y: &TimeSeries, cfg: &WarpConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.d >= x.len().min(y.len()) {
        return Err(Error::OutOfRange(format!(
            "d = {} needs more samples than {} and {}",
            cfg.d,
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// `L_WOW` as an explicit sum: `(1-mu)` times each ordered intra-set pair
/// sum plus `mu` times the correspondence sum, on `F phi`.
#[allow(clippy::too_many_arguments)]
pub fn loss_wow(
    fx: &DMatrix<f64>,
    fy: &DMatrix<f64>,
    phi_x: &DMatrix<f64>,
    phi_y: &DMatrix<f64>,
    w_xy: &CorrespondenceMatrix,
    wx: &WeightMatrix,
    wy: &WeightMatrix,
    mu: f64,
) -> Result<f64> {
    if fx.ncols() != phi_x.nrows() || fy.ncols() != phi_y.nrows() || phi_x.ncols() != phi_y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "F_X {:?} phi_X {:?} F_Y {:?} phi_Y {:?}",
            fx.shape(),
            phi_x.shape(),
            fy.shape(),
            phi_y.shape()
        )));
    }
    if w_xy.matrix().shape() != (fx.nrows(), fy.nrows()) || wx.len() != fx.nrows() || wy.len() != fy.nrows() {
        return Err(Error::DimensionMismatch("graph sizes differ from embeddings".into()));
    }
    let gx = fx * phi_x;
    let gy = fy * phi_y;
    Ok((1.0 - mu) * weighted_pair_sum(&gx, &gx, wx.matrix())
        + (1.0 - mu) * weighted_pair_sum(&gy, &gy, wy.matrix())
        + mu * weighted_pair_sum(&gx, &gy, w_xy.matrix()))
}

/// `L_CW` as an explicit sum: intra-set edges counted once (all lags in
/// the chain graphs), correspondences weighted by `mu`.
pub fn loss_cw(
    fx: &DMatrix<f64>,
    fy: &DMatrix<f64>,
    w_xy: &CorrespondenceMatrix,
    wx: &WeightMatrix,
    wy: &WeightMatrix,
    mu: f64,
) -> Result<f64> {
    if fx.ncols() != fy.ncols()
        || w_xy.matrix().shape() != (fx.nrows(), fy.nrows())
        || wx.len() != fx.nrows()
        || wy.len() != fy.nrows()
    {
        return Err(Error::DimensionMismatch("embedding and graph sizes differ".into()));
    }
    Ok(0.5 * (1.0 - mu) * weighted_pair_sum(fx, fx, wx.matrix())
        + 0.5 * (1.0 - mu) * weighted_pair_sum(fy, fy, wy.matrix())
        + mu * weighted_pair_sum(fx, fy, w_xy.matrix()))
}

/// `L_W = diag(W 1) - W` for the curve-warping block matrix `W`.
pub fn cw_laplacian(wx: &WeightMatrix, wy: &WeightMatrix, w_xy: &CorrespondenceMatrix, mu: f64) -> DMatrix<f64> {
    coupled_laplacian(wx.matrix(), wy.matrix(), w_xy.matrix(), 1.0 - mu, mu)
}

struct WowStep {
    wx: DMatrix<f64>,
    wy: DMatrix<f64>,
    degree: DMatrix<f64>,
    init: (DMatrix<f64>, DMatrix<f64>),
    n: usize,
    mu: f64,
    d: usize,
    epsilon: f64,
    max_levels: usize,
    level_override: Option<usize>,
}

impl WowStep {
    fn q(&self, w: &CorrespondenceMatrix) -> DMatrix<f64> {
        coupled_laplacian(&self.wx, &self.wy, w.matrix(), 2.0 * (1.0 - self.mu), self.mu)
    }
}

impl Stepper for WowStep {
    fn loss(&self, f: &DMatrix<f64>, w: &CorrespondenceMatrix) -> f64 {
        quad(f, &self.q(w))
    }

    fn embed(&mut self, current: Option<&DMatrix<f64>>, w: &CorrespondenceMatrix) -> Result<DMatrix<f64>> {
        let (fx, fy) = match current {
            Some(f) => split_rows(f, self.n),
            None => self.init.clone(),
        };
        let z = block_data(&fx, &fy);
        let res = mma_system(&z, &self.q(w), &self.degree, fx.ncols(), self.epsilon, self.max_levels)?;
        let dims = res.dims();
        let level = match self.level_override {
            Some(l) => l.min(dims.len() - 1),
            None => select_level(&dims, self.d),
        };
        let (phi_x, phi_y) = res.reduced(level, self.d.min(dims[level]))?;
        Ok(stack(&(&fx * phi_x), &(&fy * phi_y)))
    }
}

/// Warping on wavelets: per-set multiscale eigenmaps (every scaling
/// function of the selected level), then alternate multiscale manifold
/// alignment of the current embeddings (`F <- F phi`) with DTW. The first
/// alignment maps the level bases down to `d` dimensions.
pub fn wow(x: &TimeSeries, y: &TimeSeries, cfg: &WarpConfig) -> Result<WarpResult> {
    check_inputs(x, y, cfg)?;
    let (xs, ys) = (x.samples(), y.samples());
    let wx = series_graph(xs, cfg, cfg.graph_kind)?;
    let wy = series_graph(ys, cfg, cfg.graph_kind)?;
    let ex = wow_initial(&wx, cfg)?;
    let ey = wow_initial(&wy, cfg)?;
    let (n, m) = (x.len(), y.len());
    let degree = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n + m,
        wx.matrix()
            .row_iter()
            .chain(wy.matrix().row_iter())
            .map(|r| r.sum()),
    ));
    let init = (ex, ey);
    let mut step = WowStep {
        wx: wx.matrix().clone(),
        wy: wy.matrix().clone(),
        degree,
        init,
        n,
        mu: cfg.mu,
        d: cfg.d,
        epsilon: cfg.epsilon,
        max_levels: cfg.max_levels,
        level_override: cfg.level_override,
    };
    run_loop(&mut step, n, m, cfg)
}

// All scaling functions of one series at the selected level except the
// trivial one, ordered by Ritz value on the normalized Laplacian.
fn wow_initial(w: &WeightMatrix, cfg: &WarpConfig) -> Result<DMatrix<f64>> {
    let levels = multiscale_eigenmaps(w, cfg.epsilon, cfg.max_levels)?;
    let dims: Vec<usize> = levels.iter().map(|e| e.dim()).collect();
    let level = match cfg.level_override {
        Some(l) => l.min(dims.len() - 1),
        None => select_level(&dims, cfg.d + 1),
    };
    let keep = (dims[level] - 1).max(cfg.d);
    let g = crate::graph::laplacians(w)?;
    reduce_level(&levels[level].coords, &g.normalized, keep)
}

struct WammStep {
    m: DMatrix<f64>,
    mu: f64,
    d: usize,
}

impl Stepper for WammStep {
    fn loss(&self, f: &DMatrix<f64>, w: &CorrespondenceMatrix) -> f64 {
        crate::align::loss_lra(f, &self.m, w, self.mu)
    }

    fn embed(&mut self, _current: Option<&DMatrix<f64>>, w: &CorrespondenceMatrix) -> Result<DMatrix<f64>> {
        Ok(lra_from_m(&self.m, w, self.mu, self.d)?.stacked())
    }
}

/// Warping on mixed manifolds: low-rank alignment at the current
/// correspondence, then DTW. The reconstructions are computed once.
pub fn wamm(x: &TimeSeries, y: &TimeSeries, cfg: &WarpConfig) -> Result<WarpResult> {
    check_inputs(x, y, cfg)?;
    let (rx, ry) = rayon::join(
        || low_rank_reconstruct(x.samples(), cfg.tau),
        || low_rank_reconstruct(y.samples(), cfg.tau),
    );
    let mut step = WammStep {
        m: block_m(&rx?, &ry?),
        mu: cfg.mu,
        d: cfg.d,
    };
    run_loop(&mut step, x.len(), y.len(), cfg)
}

struct CwStep {
    wx: WeightMatrix,
    wy: WeightMatrix,
    mu: f64,
    d: usize,
}

impl Stepper for CwStep {
    fn loss(&self, f: &DMatrix<f64>, w: &CorrespondenceMatrix) -> f64 {
        let q = quad(f, &cw_laplacian(&self.wx, &self.wy, w, self.mu));
        debug_assert!({
            let (fx, fy) = split_rows(f, self.wx.len());
            let sum = loss_cw(&fx, &fy, w, &self.wx, &self.wy, self.mu).expect("shapes match");
            (sum - q).abs() <= 1e-10 * (1.0 + q.abs())
        });
        q
    }

    fn embed(&mut self, _current: Option<&DMatrix<f64>>, w: &CorrespondenceMatrix) -> Result<DMatrix<f64>> {
        let (vals, vecs) = sym_eigen_sorted(&cw_laplacian(&self.wx, &self.wy, w, self.mu));
        Ok(select_columns(&vecs, &smallest_nonzero(&vals, self.d)))
    }
}

/// Curve warping on temporal chain graphs. With `two_step` each series is
/// embedded on its own chain and DTW runs once.
pub fn curve_warp(x: &TimeSeries, y: &TimeSeries, cfg: &WarpConfig, two_step: bool) -> Result<WarpResult> {
    check_inputs(x, y, cfg)?;
    let wx = series_graph(x.samples(), cfg, GraphKind::Chain)?;
    let wy = series_graph(y.samples(), cfg, GraphKind::Chain)?;
    let mu = cfg.mu;
    if two_step {
        let fx = laplacian_eigenmaps(&wx, cfg.d)?.coords;
        let fy = laplacian_eigenmaps(&wy, cfg.d)?.coords;
        return one_shot(fx, fy, |f, w| quad(f, &cw_laplacian(&wx, &wy, w, mu)));
    }
    let mut step = CwStep { wx, wy, mu, d: cfg.d };
    run_loop(&mut step, x.len(), y.len(), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineVariant {
    Linear,
    Nonlinear,
    TwoStep,
}

impl BaselineVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineVariant::Linear => "linear",
            BaselineVariant::Nonlinear => "nonlinear",
            BaselineVariant::TwoStep => "two-step",
        }
    }
}

impl FromStr for BaselineVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [BaselineVariant::Linear, BaselineVariant::Nonlinear, BaselineVariant::TwoStep]
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

struct MwStep {
    wx: WeightMatrix,
    wy: WeightMatrix,
    degree: DMatrix<f64>,
    z: Option<DMatrix<f64>>,
    mu: f64,
    d: usize,
}

impl MwStep {
    fn lap(&self, w: &CorrespondenceMatrix) -> DMatrix<f64> {
        coupled_laplacian(self.wx.matrix(), self.wy.matrix(), w.matrix(), 1.0 - self.mu, 0.5 * self.mu)
    }
}

impl Stepper for MwStep {
    fn loss(&self, f: &DMatrix<f64>, w: &CorrespondenceMatrix) -> f64 {
        quad(f, &self.lap(w))
    }

    fn embed(&mut self, _current: Option<&DMatrix<f64>>, w: &CorrespondenceMatrix) -> Result<DMatrix<f64>> {
        let l = self.lap(w);
        match &self.z {
            Some(z) => {
                let pairs = generalized_eig_pinv(z, &l, &self.degree)?;
                let vals = nalgebra::DVector::from_iterator(pairs.len(), pairs.iter().map(|p| p.value));
                if pairs.len() < self.d {
                    return Err(Error::NotEnoughEigenvectors {
                        wanted: self.d,
                        found: pairs.len(),
                    });
                }
                let cols: Vec<_> = smallest_nonzero(&vals, self.d)
                    .into_iter()
                    .map(|k| pairs[k].vector.clone())
                    .collect();
                Ok(z.transpose() * DMatrix::from_columns(&cols))
            }
            None => {
                let dinv = self.degree.map_diagonal(|v| 1.0 / v.sqrt());
                let dm = DMatrix::from_diagonal(&dinv);
                let (vals, vecs) = sym_eigen_sorted(&(&dm * l * &dm));
                Ok(dm * select_columns(&vecs, &smallest_nonzero(&vals, self.d)))
            }
        }
    }
}

/// Single-scale manifold warping: joint Laplacian eigenmaps (nonlinear),
/// joint linear projections (linear), or per-set eigenmaps followed by one
/// DTW (two-step).
pub fn manifold_warp_baseline(
    x: &TimeSeries,
    y: &TimeSeries,
    cfg: &WarpConfig,
    variant: BaselineVariant,
) -> Result<WarpResult> {
    check_inputs(x, y, cfg)?;
    let (xs, ys) = (x.samples(), y.samples());
    let wx = series_graph(xs, cfg, cfg.graph_kind)?;
    let wy = series_graph(ys, cfg, cfg.graph_kind)?;
    let (n, m) = (x.len(), y.len());
    let degree = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n + m,
        wx.matrix()
            .row_iter()
            .chain(wy.matrix().row_iter())
            .map(|r| r.sum()),
    ));
    let z = match variant {
        BaselineVariant::Linear => Some(block_data(xs, ys)),
        _ => None,
    };
    let mut step = MwStep {
        wx,
        wy,
        degree,
        z,
        mu: cfg.mu,
        d: cfg.d,
    };
    if variant == BaselineVariant::TwoStep {
        let fx = laplacian_eigenmaps(&step.wx, cfg.d)?.coords;
        let fy = laplacian_eigenmaps(&step.wy, cfg.d)?.coords;
        return one_shot(fx, fy, |f, w| step.loss(f, w));
    }
    run_loop(&mut step, n, m, cfg)
}

/// Plain DTW on the raw samples, packaged like the warping loops.
pub fn dtw_baseline(x: &TimeSeries, y: &TimeSeries) -> Result<WarpResult> {
    let (path, cost) = crate::dtw::dtw_align(x, y)?;
    let w = path_to_matrix(&path, x.len(), y.len())?;
    Ok(WarpResult {
        fx: x.samples().clone(),
        fy: y.samples().clone(),
        path,
        w_xy: w,
        loss_trace: vec![cost],
        iterations: 1,
        converged: true,
    })
}
