use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use wowarp::data::{alignment_error, synthetic_pair, AlignmentPath, TimeSeries};
use wowarp::warp::WarpConfig;
use wowarp::SyntheticKind;

use crate::{config, CliError, Method};

/// Where the trial data comes from.
#[derive(Debug, Clone)]
pub enum Dataset {
    Synthetic {
        kind_x: SyntheticKind,
        kind_y: SyntheticKind,
        n: usize,
        m: usize,
        noise: f64,
    },
    Files {
        x: PathBuf,
        y: PathBuf,
        truth: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub dataset: Dataset,
    pub cfg: WarpConfig,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PairedTest {
    pub a: Method,
    pub b: Method,
    pub mean_diff: f64,
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub methods: Vec<Method>,
    /// errors[method][trial]
    pub errors: Vec<Vec<f64>>,
    pub tests: Vec<PairedTest>,
}

fn spec_err(msg: String) -> anyhow::Error {
    CliError::new("E_SPEC", msg).into()
}

fn get<'a>(kv: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    kv.get(key)
        .map(String::as_str)
        .ok_or_else(|| spec_err(format!("missing key {key:?}")))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| spec_err(format!("invalid value {value:?} for {key}")))
}

const DATA_KEYS: [&str; 11] = [
    "methods", "method", "trials", "seed", "kind_x", "kind_y", "n", "m", "noise", "x", "y",
];

impl ExperimentSpec {
    /// Reads a spec file; relative data paths resolve against its directory.
    /// `cfg` overrides the file's hyperparameters.
    pub fn load(path: &Path, flags: &config::CfgFlags, trials: Option<usize>, seed: Option<u64>) -> Result<Self> {
        let text = config::read_text(path)?;
        let kv = config::parse_kv(&text, &path.display().to_string())?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&kv, base, flags, trials, seed)
    }

    pub fn from_kv(
        kv: &BTreeMap<String, String>,
        base: &Path,
        flags: &config::CfgFlags,
        trials: Option<usize>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let mut cfg_kv = BTreeMap::new();
        for (k, v) in kv {
            if DATA_KEYS.contains(&k.as_str()) || k == "truth" {
                continue;
            }
            let mut probe = WarpConfig::default();
            if !config::apply(&mut probe, k, v)? {
                return Err(spec_err(format!("unknown key {k:?}")));
            }
            cfg_kv.insert(k.clone(), v.clone());
        }
        let cfg = flags.resolve(&cfg_kv)?;

        let list = kv
            .get("methods")
            .or_else(|| kv.get("method"))
            .ok_or_else(|| spec_err("missing key \"methods\"".into()))?;
        let methods = list
            .split(',')
            .map(|s| parse::<Method>("methods", s.trim()))
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(spec_err("no methods listed".into()));
        }
        let trials = match trials {
            Some(t) => t,
            None => kv.get("trials").map(|v| parse("trials", v)).transpose()?.unwrap_or(1),
        };
        if trials == 0 {
            return Err(spec_err("trials must be at least 1".into()));
        }
        let seed = match seed {
            Some(s) => s,
            None => kv.get("seed").map(|v| parse("seed", v)).transpose()?.unwrap_or(0),
        };
        let dataset = if kv.contains_key("x") {
            let p = |k: &str| -> Result<PathBuf> { Ok(base.join(get(kv, k)?)) };
            Dataset::Files {
                x: p("x")?,
                y: p("y")?,
                truth: p("truth")?,
            }
        } else {
            let n: usize = parse("n", get(kv, "n")?)?;
            Dataset::Synthetic {
                kind_x: parse("kind_x", get(kv, "kind_x")?)?,
                kind_y: parse("kind_y", kv.get("kind_y").map_or(get(kv, "kind_x")?, |s| s.as_str()))?,
                n,
                m: kv.get("m").map(|v| parse("m", v)).transpose()?.unwrap_or(n),
                noise: kv.get("noise").map(|v| parse("noise", v)).transpose()?.unwrap_or(0.0),
            }
        };
        Ok(Self {
            methods,
            dataset,
            cfg,
            trials,
            seed,
        })
    }
}

fn trial_data(spec: &ExperimentSpec, t: usize) -> Result<(TimeSeries, TimeSeries, AlignmentPath)> {
    match &spec.dataset {
        Dataset::Synthetic {
            kind_x,
            kind_y,
            n,
            m,
            noise,
        } => {
            let p = synthetic_pair(*kind_x, *kind_y, *n, *m, *noise, spec.seed + t as u64)?;
            Ok((p.x.series, p.y.series, p.truth))
        }
        Dataset::Files { x, y, truth } => Ok((
            crate::load_series(x)?,
            crate::load_series(y)?,
            AlignmentPath::read_csv(truth)?,
        )),
    }
}

/// Two-sided paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let n = a.len();
    if n < 2 || b.len() != n {
        return None;
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Some(if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive df");
    Some((t, 2.0 * dist.cdf(-t.abs())))
}

pub fn run(spec: &ExperimentSpec) -> Result<BenchReport> {
    let per_trial: Vec<Vec<f64>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let (x, y, truth) = trial_data(spec, t)?;
            spec.methods
                .iter()
                .map(|m| Ok(alignment_error(&m.run(&x, &y, &spec.cfg)?.path, &truth)?))
                .collect()
        })
        .collect::<Result<_>>()?;
    let errors: Vec<Vec<f64>> = (0..spec.methods.len())
        .map(|k| per_trial.iter().map(|row| row[k]).collect())
        .collect();
    let mut tests = Vec::new();
    for i in 0..spec.methods.len() {
        for j in i + 1..spec.methods.len() {
            if let Some((t, p)) = paired_t_test(&errors[i], &errors[j]) {
                tests.push(PairedTest {
                    a: spec.methods[i],
                    b: spec.methods[j],
                    mean_diff: mean(&errors[i]) - mean(&errors[j]),
                    t,
                    p,
                    df: spec.trials - 1,
                });
            }
        }
    }
    Ok(BenchReport {
        methods: spec.methods.clone(),
        errors,
        tests,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

impl BenchReport {
    /// `errors.csv`, `summary.csv`, `ttests.csv` and `summary.txt`.
    pub fn write_dir(&self, dir: &Path, spec: &ExperimentSpec) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let names: Vec<&str> = self.methods.iter().map(|m| m.as_str()).collect();
        let trials = self.errors.first().map_or(0, Vec::len);

        let mut errs = format!("trial,{}\n", names.join(","));
        for t in 0..trials {
            let row: Vec<String> = self.errors.iter().map(|e| e[t].to_string()).collect();
            let _ = writeln!(errs, "{},{}", t, row.join(","));
        }
        std::fs::write(dir.join("errors.csv"), errs)?;

        let mut summary = String::from("method,mean,sd,trials\n");
        for (name, e) in names.iter().zip(&self.errors) {
            let _ = writeln!(summary, "{name},{},{},{}", mean(e), sd(e), e.len());
        }
        std::fs::write(dir.join("summary.csv"), summary)?;

        let mut tt = String::from("method_a,method_b,mean_diff,t,p,df\n");
        for t in &self.tests {
            let _ = writeln!(tt, "{},{},{},{},{},{}", t.a, t.b, t.mean_diff, t.t, t.p, t.df);
        }
        std::fs::write(dir.join("ttests.csv"), tt)?;

        let mut txt = format!("trials: {trials}\nseed: {}\n", spec.seed);
        for (name, e) in names.iter().zip(&self.errors) {
            let _ = writeln!(txt, "{name:>14}: mean error {:.6} (sd {:.6})", mean(e), sd(e));
        }
        if self.tests.is_empty() {
            txt.push_str("no paired tests (need two methods and two trials)\n");
        }
        for t in &self.tests {
            let better = match t.mean_diff.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Less) => t.a.as_str(),
                Some(std::cmp::Ordering::Greater) => t.b.as_str(),
                _ => "neither",
            };
            let _ = writeln!(
                txt,
                "{} vs {}: t = {:.4}, p = {:.4} (two-sided, df {}); lower mean error: {better}",
                t.a, t.b, t.t, t.p, t.df
            );
        }
        std::fs::write(dir.join("summary.txt"), txt)
    }
}
