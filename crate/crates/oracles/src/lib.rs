//! Brute-force and textbook reference computations. Deliberately slow and
//! written without reference to the main crate.

use nalgebra::{DMatrix, DVector};

/// Minimum warping cost over every monotone path from (0, 0) to
/// (n-1, m-1), found by exhaustive depth-first enumeration. Costs are
/// summed from the start of the path.
pub fn brute_force_dtw(cost: &DMatrix<f64>) -> f64 {
    fn go(cost: &DMatrix<f64>, i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + cost[(i, j)];
        let (n, m) = cost.shape();
        if i == n - 1 && j == m - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < n && j + 1 < m {
            go(cost, i + 1, j + 1, acc, best);
        }
        if i + 1 < n {
            go(cost, i + 1, j, acc, best);
        }
        if j + 1 < m {
            go(cost, i, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, 0, 0.0, &mut best);
    best
}

/// Number of monotone paths, for sanity checks on the enumeration.
pub fn count_paths(n: usize, m: usize) -> u64 {
    let mut t = vec![vec![0u64; m]; n];
    for i in 0..n {
        for j in 0..m {
            t[i][j] = if i == 0 && j == 0 {
                1
            } else {
                let mut s = 0;
                if i > 0 {
                    s += t[i - 1][j];
                }
                if j > 0 {
                    s += t[i][j - 1];
                }
                if i > 0 && j > 0 {
                    s += t[i - 1][j - 1];
                }
                s
            };
        }
    }
    t[n - 1][m - 1]
}

type Pt = (f64, f64);

fn lex_lt(a: Pt, b: Pt) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn close(a: Pt, b: Pt) -> bool {
    (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
}

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: Pt, a: Pt, b: Pt) -> bool {
    cross(a, b, p).abs() < 1e-9
        && p.0 >= a.0.min(b.0) - 1e-9
        && p.0 <= a.0.max(b.0) + 1e-9
        && p.1 >= a.1.min(b.1) - 1e-9
        && p.1 <= a.1.max(b.1) + 1e-9
}

fn segment_hits(a0: Pt, a1: Pt, b0: Pt, b1: Pt, out: &mut Vec<Pt>) {
    let d = (a1.0 - a0.0) * (b1.1 - b0.1) - (a1.1 - a0.1) * (b1.0 - b0.0);
    if d.abs() > 1e-12 {
        let t = ((b0.0 - a0.0) * (b1.1 - b0.1) - (b0.1 - a0.1) * (b1.0 - b0.0)) / d;
        let u = ((b0.0 - a0.0) * (a1.1 - a0.1) - (b0.1 - a0.1) * (a1.0 - a0.0)) / d;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && (-1e-12..=1.0 + 1e-12).contains(&u) {
            out.push((a0.0 + t * (a1.0 - a0.0), a0.1 + t * (a1.1 - a0.1)));
        }
    } else {
        // parallel: collinear overlap contributes its endpoints
        for p in [a0, a1] {
            if on_segment(p, b0, b1) {
                out.push(p);
            }
        }
        for p in [b0, b1] {
            if on_segment(p, a0, a1) {
                out.push(p);
            }
        }
    }
}

fn shoelace(poly: &[Pt]) -> f64 {
    let k = poly.len();
    let mut s = 0.0;
    for i in 0..k {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % k];
        s += x0 * y1 - x1 * y0;
    }
    0.5 * s.abs()
}

/// Area enclosed between two monotone polylines with common endpoints:
/// split at every intersection and sum the shoelace areas of the pieces.
/// Vertices are 1-based grid pairs scaled into the unit square.
pub fn shoelace_area(a: &[(usize, usize)], b: &[(usize, usize)], n: usize, m: usize) -> f64 {
    let scale = |v: &[(usize, usize)]| -> Vec<Pt> {
        v.iter()
            .map(|&(i, j)| (i as f64 / n as f64, j as f64 / m as f64))
            .collect()
    };
    let (pa, pb) = (scale(a), scale(b));
    let mut hits = Vec::new();
    for sa in pa.windows(2) {
        for sb in pb.windows(2) {
            segment_hits(sa[0], sa[1], sb[0], sb[1], &mut hits);
        }
    }
    hits.push(pa[0]);
    hits.push(*pa.last().unwrap());
    hits.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    hits.dedup_by(|x, y| close(*x, *y));

    let between = |curve: &[Pt], lo: Pt, hi: Pt| -> Vec<Pt> {
        curve
            .iter()
            .copied()
            .filter(|&v| lex_lt(lo, v) && lex_lt(v, hi) && !close(v, lo) && !close(v, hi))
            .collect()
    };
    let mut total = 0.0;
    for w in hits.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut poly = vec![lo];
        poly.extend(between(&pa, lo, hi));
        poly.push(hi);
        let mut back = between(&pb, lo, hi);
        back.reverse();
        poly.extend(back);
        total += shoelace(&poly);
    }
    total
}

/// `t^(2^j)` by repeated dense squaring.
pub fn dyadic_power(t: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    let mut p = t.clone();
    for _ in 0..j {
        p = &p * &p;
    }
    p
}

/// `(tau/2) |A - A R|_F^2 + |R|_*`.
pub fn nuclear_objective(a: &DMatrix<f64>, r: &DMatrix<f64>, tau: f64) -> f64 {
    let resid = a - a * r;
    0.5 * tau * resid.norm_squared() + r.clone().svd(false, false).singular_values.sum()
}

/// Accelerated proximal gradient (FISTA) with singular value
/// soft-thresholding for the objective above.
pub fn nuclear_prox_gradient(a: &DMatrix<f64>, tau: f64, iters: usize) -> DMatrix<f64> {
    let n = a.ncols();
    let ata = a.transpose() * a;
    let lip = tau * ata.clone().symmetric_eigenvalues().amax();
    let step = 1.0 / lip;
    let mut r = DMatrix::<f64>::zeros(n, n);
    let mut yk = r.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = (&ata * &yk - &ata) * tau;
        let g = &yk - grad * step;
        let svd = g.svd(true, true);
        let shrunk = svd.singular_values.map(|s| (s - step).max(0.0));
        let next = svd.u.unwrap() * DMatrix::from_diagonal(&shrunk) * svd.v_t.unwrap();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        yk = &next + (&next - &r) * ((t - 1.0) / t_next);
        r = next;
        t = t_next;
    }
    r
}

/// Dense generalized symmetric-definite eigenproblem `A v = lambda B v`
/// through the Cholesky factor of `B`. Ascending eigenvalues; eigenvectors
/// are `B`-orthonormal columns. `None` when `B` is not positive definite.
pub fn cholesky_gen_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let chol = b.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let dim = c.nrows();
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_fn(idx.len(), |k, _| eig.eigenvalues[idx[k]]);
    let y = DMatrix::from_fn(dim, idx.len(), |r, k| eig.eigenvectors[(r, idx[k])]);
    Some((vals, linv.transpose() * y))
}

/// Orthonormal basis of the column span through Householder QR; the
/// columns must be linearly independent.
pub fn qr_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().qr().q()
}

/// Spectral norm of the difference of the orthogonal projectors onto the
/// spans of two matrices with independent columns.
pub fn projector_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = qr_basis(a);
    let qb = qr_basis(b);
    let diff = &qa * qa.transpose() - &qb * qb.transpose();
    diff.symmetric_eigenvalues().amax()
}

/// Paired t statistic from the textbook formula `mean(d) / (sd(d) / sqrt(n))`.
pub fn paired_t(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    mean / (var.sqrt() / n.sqrt())
}
