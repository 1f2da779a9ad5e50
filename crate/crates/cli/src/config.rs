use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use clap::Args;
use wowarp::warp::{GraphKind, InitCorrespondence, WarpConfig};

use crate::CliError;

/// Warping hyperparameters shared by `align`, `bench` and `tree`.
#[derive(Debug, Clone, Default, Args)]
pub struct CfgFlags {
    /// key=value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// knn-heat, low-rank or chain
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// wavelet level fed to the alignment step (default: automatic)
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long)]
    pub chain_lag: Option<usize>,
    /// starting correspondence: linear or endpoints
    #[arg(long)]
    pub init: Option<String>,
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::new(
                "E_CONFIG",
                format!("{origin}:{}: expected key=value, got {line:?}", no + 1),
            )
            .into());
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn bad_value(key: &str, value: &str) -> anyhow::Error {
    CliError::new("E_CONFIG", format!("invalid value {value:?} for {key}")).into()
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad_value(key, value))
}

/// Applies one setting; returns false for keys that are not config keys.
pub fn apply(cfg: &mut WarpConfig, key: &str, value: &str) -> Result<bool> {
    match key {
        "d" => cfg.d = num(key, value)?,
        "mu" => cfg.mu = num(key, value)?,
        "tau" => cfg.tau = num(key, value)?,
        "epsilon" => cfg.epsilon = num(key, value)?,
        "k" => cfg.k = num(key, value)?,
        "graph" => cfg.graph_kind = value.parse::<GraphKind>().map_err(|_| bad_value(key, value))?,
        "max_iters" => cfg.max_iters = num(key, value)?,
        "tol" => cfg.tol = num(key, value)?,
        "level" => {
            cfg.level_override = match value {
                "auto" => None,
                v => Some(num(key, v)?),
            }
        }
        "max_levels" => cfg.max_levels = num(key, value)?,
        "chain_lag" => cfg.chain_lag = num(key, value)?,
        "init" => cfg.init = value.parse::<InitCorrespondence>().map_err(|_| bad_value(key, value))?,
        _ => return Ok(false),
    }
    Ok(true)
}

impl CfgFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, s: Option<String>| {
            if let Some(s) = s {
                v.push((k, s));
            }
        };
        push("d", self.d.map(|x| x.to_string()));
        push("mu", self.mu.map(|x| x.to_string()));
        push("tau", self.tau.map(|x| x.to_string()));
        push("epsilon", self.epsilon.map(|x| x.to_string()));
        push("k", self.k.map(|x| x.to_string()));
        push("graph", self.graph.clone());
        push("max_iters", self.max_iters.map(|x| x.to_string()));
        push("tol", self.tol.map(|x| x.to_string()));
        push("level", self.level.map(|x| x.to_string()));
        push("max_levels", self.max_levels.map(|x| x.to_string()));
        push("chain_lag", self.chain_lag.map(|x| x.to_string()));
        push("init", self.init.clone());
        v
    }

    /// Defaults, then `extra` (e.g. a bench spec), then the config file,
    /// then flags.
    pub fn resolve(&self, extra: &BTreeMap<String, String>) -> Result<WarpConfig> {
        let mut cfg = WarpConfig::default();
        for (k, v) in extra {
            apply(&mut cfg, k, v)?;
        }
        if let Some(path) = &self.config {
            let text = read_text(path)?;
            for (k, v) in parse_kv(&text, &path.display().to_string())? {
                if !apply(&mut cfg, &k, &v)? {
                    return Err(CliError::new("E_CONFIG", format!("unknown config key {k:?}")).into());
                }
            }
        }
        for (k, v) in self.pairs() {
            apply(&mut cfg, k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| {
        wowarp::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_flags() {
        let cfg = CfgFlags::default().resolve(&BTreeMap::new()).unwrap();
        assert_eq!(cfg, WarpConfig::default());
        assert_eq!((cfg.mu, cfg.tau, cfg.d, cfg.k), (0.5, 1.0, 2, 10));
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join(format!("wowarp-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("cfg.txt");
        std::fs::write(&file, "# run\nmu = 0.2\nk=7\ngraph=knn-heat\n").unwrap();
        let flags = CfgFlags {
            config: Some(file),
            mu: Some(0.9),
            ..CfgFlags::default()
        };
        let cfg = flags.resolve(&BTreeMap::new()).unwrap();
        assert_eq!((cfg.mu, cfg.k, cfg.graph_kind), (0.9, 7, GraphKind::KnnHeat));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn round_trips_own_echo() {
        let cfg = WarpConfig {
            level_override: Some(2),
            init: InitCorrespondence::Endpoints,
            ..WarpConfig::default()
        };
        let mut back = WarpConfig::default();
        for (k, v) in parse_kv(&cfg.to_kv(), "echo").unwrap() {
            assert!(apply(&mut back, &k, &v).unwrap(), "{k}");
        }
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_kv("mu 0.5", "x").is_err());
        let mut cfg = WarpConfig::default();
        assert!(apply(&mut cfg, "mu", "half").is_err());
        assert!(!apply(&mut cfg, "colour", "red").unwrap());
    }
}
