use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wowarp::align::*;
use wowarp::data::*;
use wowarp::dtw::{dtw_align_with, CorrespondenceMatrix};
use wowarp::graph::*;
use wowarp::linalg::{orthonormality_defect, select_columns, smallest_nonzero, spectral_norm};
use wowarp::warp::*;
use wowarp::wavelets::build_dwt;
use wowarp_oracles as oracle;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.1?}, limit {limit:?}"))
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen::<f64>())
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn dtw_exact() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for case in 0..200 {
        let (n, m) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let cost = uniform(&mut rng, n, m) * 10.0;
        let idx = |k: usize| DMatrix::from_fn(k, 1, |i, _| i as f64);
        let (_, total) = dtw_align_with(&idx(n), &idx(m), |a, b| cost[(a[0] as usize, b[0] as usize)])
            .map_err(|e| e.to_string())?;
        let want = oracle::brute_force_dtw(&cost);
        ensure(total == want, || format!("case {case} ({n}x{m}): {total} vs {want}"))?;
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("200 instances in {:.2?}", start.elapsed()))
}

fn wavelet_reconstruction() -> Check {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    for n in [16, 32, 64] {
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64);
        let w = chain_weights(&x, 1, ChainKernel::Unit).map_err(|e| e.to_string())?;
        let t = laplacians(&w).map_err(|e| e.to_string())?.diffusion;
        let tree = build_dwt(&t, None, 1e-8, 4).map_err(|e| e.to_string())?;
        for j in 0..tree.num_levels() {
            let phi = tree.extended_basis(j).map_err(|e| e.to_string())?;
            let approx = &phi * tree.op(j).ok_or("missing level")? * phi.transpose();
            let err = spectral_norm(&(approx - oracle::dyadic_power(&t, j)));
            let defect = orthonormality_defect(&phi);
            worst = (worst.0.max(err), worst.1.max(defect));
            ensure(err <= 1e-3, || format!("n={n} level {j}: error {err:.3e}"))?;
            ensure(defect <= 1e-8, || format!("n={n} level {j}: defect {defect:.3e}"))?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("max error {:.2e}, max defect {:.2e}", worst.0, worst.1))
}

fn generalized_residuals() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let s = rng.gen_range(3..=10);
        let n = rng.gen_range(3..=10);
        let mut z = gaussian(&mut rng, s, n);
        if case % 2 == 1 {
            let dup = z.row(0) * 2.0;
            z.set_row(s - 1, &dup);
        }
        let l = laplacian_matrix(&uniform(&mut rng, n, n).map(|v| v * v));
        let l = (&l + l.transpose()) * 0.5;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| 0.5 + rng.gen::<f64>()));
        let a = &z * &l * z.transpose();
        let b = &z * &d * z.transpose();
        let pairs = generalized_eig_pinv(&z, &l, &d).map_err(|e| e.to_string())?;
        ensure(!pairs.is_empty(), || format!("case {case}: no eigenpairs"))?;
        for p in &pairs {
            let r = (&a * &p.vector - &b * &p.vector * p.value).norm();
            worst = worst.max(r);
            ensure(r <= 1e-8, || format!("case {case}: residual {r:.3e}"))?;
        }
    }
    Ok(format!("50 systems, max residual {worst:.2e}"))
}

fn multiscale_subspaces() -> Check {
    let (mut checked, mut worst) = (0, 0.0f64);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (rng.gen_range(12..25), rng.gen_range(12..25));
        let (p, q) = (rng.gen_range(3..7), rng.gen_range(3..7));
        let x = uniform(&mut rng, n, p);
        let y = uniform(&mut rng, m, q);
        let wx = heat_kernel_knn(&x, 4, None).map_err(|e| e.to_string())?;
        let wy = heat_kernel_knn(&y, 4, None).map_err(|e| e.to_string())?;
        let c = CorrespondenceMatrix::leading_identity(n, m, n.min(m) / 2);
        let res = mma(&x, &y, &wx, &wy, &c, 0.5, 1e-10, 6).map_err(|e| e.to_string())?;
        let joint = joint_weight(&wx, &wy, &c, 0.5).map_err(|e| e.to_string())?;
        let z = block_data(&x, &y);
        let (vals, vecs) = oracle::cholesky_gen_eig(
            &(&z * &joint.laplacian * z.transpose()),
            &(&z * &joint.degree * z.transpose()),
        )
        .ok_or("oracle eigensolver failed")?;
        let nz = smallest_nonzero(&vals, 1)[0];
        for (k, dk) in res.dims().into_iter().enumerate().skip(1) {
            let idx = smallest_nonzero(&vals, dk);
            let power = 2f64.powi(k as i32 - 1);
            let nu = |i: usize| (vals[nz] / vals[i]).powf(power);
            let last = idx[dk - 1];
            let gap = nu(last) - if last + 1 < vals.len() { nu(last + 1) } else { 0.0 };
            if gap < 1e-6 {
                continue;
            }
            let dist = oracle::projector_gap(&res.maps[k], &select_columns(&vecs, &idx));
            worst = worst.max(dist);
            ensure(dist <= 1e-6, || format!("seed {seed} level {k}: distance {dist:.3e}"))?;
            checked += 1;
        }
    }
    ensure(checked > 0, || "no level passed the gap condition".into())?;
    Ok(format!("{checked} levels over 20 instances, max distance {worst:.2e}"))
}

fn low_rank_optimality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let (n, p) = (rng.gen_range(6..12), rng.gen_range(3..7));
        let tau = 0.5 + 4.0 * rng.gen::<f64>();
        let x = gaussian(&mut rng, n, p);
        let rec = low_rank_reconstruct(&x, tau).map_err(|e| e.to_string())?;
        let ours = low_rank_objective(&x, &rec.r, tau);
        let a = x.transpose();
        let pg = oracle::nuclear_objective(&a, &oracle::nuclear_prox_gradient(&a, tau, 4000), tau);
        let gap = (ours - pg) / pg.abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-4, || format!("case {case}: {ours} vs {pg}"))?;
        for _ in 0..1000 {
            let e = gaussian(&mut rng, n, n);
            let e = &e * (1e-3 / e.norm());
            let other = low_rank_objective(&x, &(&rec.r + e), tau);
            ensure(ours <= other, || format!("case {case}: perturbation lowers {ours} to {other}"))?;
        }
    }
    Ok(format!("20 matrices, max relative gap {worst:.2e}"))
}

type Method = fn(&TimeSeries, &TimeSeries, &WarpConfig) -> wowarp::Result<WarpResult>;

fn methods() -> Vec<(&'static str, Method)> {
    vec![
        ("wow", wow),
        ("wamm", wamm),
        ("cw", |x, y, c| curve_warp(x, y, c, false)),
        ("mw-linear", |x, y, c| manifold_warp_baseline(x, y, c, BaselineVariant::Linear)),
        ("mw-nonlinear", |x, y, c| manifold_warp_baseline(x, y, c, BaselineVariant::Nonlinear)),
    ]
}

fn monotone_loops() -> Check {
    let cfg = WarpConfig::default();
    let mut most = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kx = SyntheticKind::ALL[rng.gen_range(0..SyntheticKind::ALL.len())];
        let ky = SyntheticKind::ALL[rng.gen_range(0..SyntheticKind::ALL.len())];
        let (n, m) = (rng.gen_range(30..60), rng.gen_range(30..60));
        let pair = synthetic_pair(kx, ky, n, m, 0.05, seed).map_err(|e| e.to_string())?;
        for (name, run) in methods() {
            let res = run(&pair.x.series, &pair.y.series, &cfg).map_err(|e| format!("{name}: {e}"))?;
            most = most.max(res.iterations);
            ensure(res.iterations <= 50, || format!("{name} seed {seed}: {} iterations", res.iterations))?;
            for w in res.loss_trace.windows(2) {
                ensure(w[1] <= w[0] + 1e-9, || format!("{name} seed {seed}: {} -> {}", w[0], w[1]))?;
            }
        }
    }
    Ok(format!("100 runs, at most {most} iterations"))
}

fn synthetic_experiment() -> Check {
    let start = Instant::now();
    let cfg = WarpConfig::default();
    let (mut dtw, mut wow_sum, mut mw_sum, mut wins) = (0.0, 0.0, 0.0, 0);
    for seed in 0..10u64 {
        let pair = synthetic_pair(SyntheticKind::SwissRoll, SyntheticKind::BrokenSwissRoll, 100, 100, 0.05, seed)
            .map_err(|e| e.to_string())?;
        let (x, y) = (&pair.x.series, &pair.y.series);
        let err = |r: WarpResult| alignment_error(&r.path, &pair.truth).map_err(|e| e.to_string());
        let d = err(dtw_baseline(x, y).map_err(|e| e.to_string())?)?;
        let w = err(wow(x, y, &cfg).map_err(|e| e.to_string())?)?;
        let mw = err(manifold_warp_baseline(x, y, &cfg, BaselineVariant::Nonlinear).map_err(|e| e.to_string())?)?;
        dtw += d;
        wow_sum += w;
        mw_sum += mw;
        if w <= mw {
            wins += 1;
        }
    }
    let summary = format!(
        "mean error dtw {:.4}, wow {:.4}, mw-nonlinear {:.4}; wow <= mw on {wins}/10",
        dtw / 10.0,
        wow_sum / 10.0,
        mw_sum / 10.0
    );
    ensure(wow_sum < dtw, || summary.clone())?;
    ensure(wins >= 7, || summary.clone())?;
    within(start, Duration::from_secs(300))?;
    Ok(summary)
}

fn dollar_sign_graph() -> Check {
    let mut better = 0;
    for seed in 0..10 {
        let s = gen_synthetic_with_latent(SyntheticKind::DollarSign, 200, 0.05, seed).map_err(|e| e.to_string())?;
        let x = s.series.samples();
        let cross = |w: &WeightMatrix| w.edges().filter(|&(i, j)| s.label[i] != s.label[j]).count();
        let knn = heat_kernel_knn(x, 10, None).map_err(|e| e.to_string())?;
        let rec = low_rank_reconstruct(x, 1.0).map_err(|e| e.to_string())?;
        let lr = low_rank_graph(&rec, 10).map_err(|e| e.to_string())?;
        if cross(&lr) < cross(&knn) {
            better += 1;
        }
    }
    ensure(better >= 9, || format!("low-rank fewer cross edges on {better}/10 seeds"))?;
    Ok(format!("low-rank fewer cross edges on {better}/10 seeds"))
}

fn random_path(rng: &mut ChaCha8Rng, n: usize, m: usize) -> AlignmentPath {
    let (mut i, mut j) = (1, 1);
    let mut pairs = vec![(1, 1)];
    while (i, j) != (n, m) {
        match rng.gen_range(0..3) {
            0 if i < n && j < m => {
                i += 1;
                j += 1;
            }
            1 if i < n => i += 1,
            _ if j < m => j += 1,
            _ => i += 1,
        }
        pairs.push((i, j));
    }
    AlignmentPath::new(pairs).unwrap()
}

fn alignment_metric() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let (n, m) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let p = random_path(&mut rng, n, m);
        let q = random_path(&mut rng, n, m);
        let got = alignment_error(&p, &q).map_err(|e| e.to_string())?;
        let want = oracle::shoelace_area(p.pairs(), q.pairs(), n, m);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-12, || format!("case {case}: {got} vs {want}"))?;
        ensure(alignment_error(&p, &p).unwrap() == 0.0, || format!("case {case}: self error nonzero"))?;
        ensure(p == q || got > 0.0, || format!("case {case}: distinct paths score 0"))?;
    }
    Ok(format!("1000 pairs, max deviation {worst:.1e}"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wowarp"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().into(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn cli_determinism() -> Check {
    let root = std::env::temp_dir().join(format!("wowarp-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).map_err(|e| e.to_string())?;
    let spec = root.join("spec.txt");
    std::fs::write(&spec, "methods=dtw,wow,cw\ntrials=3\nseed=5\nkind_x=swiss-roll\nkind_y=twin-peaks\nn=40\nnoise=0.05\n")
        .map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let mut runs = Vec::new();
    for r in 0..2 {
        let run = root.join(format!("run{r}"));
        let pair = run.join("pair");
        run_cli(&["gen", "--kind", "swiss-roll", "--pair-kind", "broken-swiss-roll", "--n", "50", "--m", "45", "--noise", "0.05", "--seed", "3", "--out", &s(&pair)])?;
        let align = run.join("align");
        run_cli(&[
            "align", "--x", &s(&pair.join("x.csv")), "--y", &s(&pair.join("y.csv")),
            "--truth", &s(&pair.join("truth.csv")), "--out", &s(&align),
        ])?;
        let bench = run.join("bench");
        run_cli(&["bench", "--spec", &s(&spec), "--out", &s(&bench)])?;
        runs.push([files(&pair), files(&align), files(&bench)]);
    }
    let _ = std::fs::remove_dir_all(&root);
    for (stage, (a, b)) in ["gen", "align", "bench"].iter().zip(runs[0].iter().zip(runs[1].iter())) {
        ensure(!a.is_empty(), || format!("{stage} wrote nothing"))?;
        ensure(a == b, || format!("{stage} outputs differ between runs"))?;
    }
    Ok("gen, align and bench outputs byte-identical across two runs".into())
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("dtw matches exhaustive search", dtw_exact),
        ("diffusion wavelet levels reconstruct dyadic powers", wavelet_reconstruction),
        ("generalized eigenpairs satisfy their equation", generalized_residuals),
        ("multiscale maps span generalized eigenspaces", multiscale_subspaces),
        ("low-rank reconstruction is optimal", low_rank_optimality),
        ("warping losses nonincreasing and loops terminate", monotone_loops),
        ("wow beats dtw and manifold warping on swiss vs broken roll", synthetic_experiment),
        ("low-rank graph avoids dollar-sign short circuits", dollar_sign_graph),
        ("alignment error equals area between paths", alignment_metric),
        ("cli runs are deterministic", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1?}]", start.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.1?}]", start.elapsed());
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
