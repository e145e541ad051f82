//! Effective run configuration: config file, then `--set` overrides, then
//! dedicated flags, flattened into one [`KvConfig`] and validated here.

use std::path::{Path, PathBuf};

use bragg_core::comb::{Interval, VanHoveSpec};
use bragg_core::config::KvConfig;
use bragg_core::cps::SchemeSpec;
use bragg_core::spectrum::{DecomposeParams, ScanParams};
use bragg_core::verify::ScenarioParams;
use bragg_core::{Error, Result};
use sha2::{Digest, Sha256};

const SCHEME_KEYS: [&str; 9] =
    ["preset", "m", "basis.v1", "basis.v2", "window.lo", "window.hi", "weight.kind", "weight.halfwidth", "weight.height"];

const OTHER_KEYS: [&str; 19] = [
    "vanhove.base",
    "vanhove.sizes",
    "generate.lo",
    "generate.hi",
    "autocorr.n",
    "autocorr.radius",
    "spectrum.source",
    "spectrum.window.lo",
    "spectrum.window.hi",
    "spectrum.coeff_bound",
    "spectrum.grid_step",
    "spectrum.epsilon_factor",
    "spectrum.delta_rel",
    "decompose.theta",
    "decompose.r0",
    "decompose.radius",
    "verify.trials",
    "run.out_dir",
    "run.seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Dual,
    Grid,
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual" => Ok(Source::Dual),
            "grid" => Ok(Source::Grid),
            _ => Err(Error::Parse(format!("unknown candidate source {s:?} (dual, grid)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// `scheme.*` keys; `None` when no scheme key was given.
    pub scheme: Option<SchemeSpec>,
    pub vanhove: VanHoveSpec,
    pub generate_interval: Option<Interval>,
    pub autocorr_n: Option<u32>,
    pub autocorr_radius: Option<f64>,
    pub source: Source,
    pub freq_window: Interval,
    pub coeff_bound: u32,
    pub grid_step: Option<f64>,
    pub scan: ScanParams,
    pub decompose: DecomposeParams,
    pub decompose_radius: f64,
    pub trials: usize,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub hash: String,
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Validation(format!("{key} must be positive, got {v}")))
    }
}

fn positive_opt(cfg: &KvConfig, key: &str) -> Result<Option<f64>> {
    cfg.parse::<f64>(key)?.map(|v| positive(key, v)).transpose()
}

impl RunConfig {
    /// Validates `cfg` and hashes its canonical form together with the
    /// subcommand name.
    pub fn from_kv(cfg: &KvConfig, command: &str) -> Result<Self> {
        for (key, _) in cfg.iter() {
            let known = match key.strip_prefix("scheme.") {
                Some(rest) => SCHEME_KEYS.contains(&rest),
                None => OTHER_KEYS.contains(&key),
            };
            if !known {
                return Err(Error::Validation(format!("unknown config key {key:?}")));
            }
        }

        let scheme_kv = cfg.section("scheme");
        let scheme = match scheme_kv.iter().next() {
            Some(_) => Some(SchemeSpec::from_kv(&scheme_kv)?),
            None => None,
        };

        let base = positive("vanhove.base", cfg.parse_or("vanhove.base", 1.0)?)?;
        let sizes = cfg.list::<u32>("vanhove.sizes")?.unwrap_or_else(|| VanHoveSpec::default().sizes().to_vec());
        let vanhove = VanHoveSpec::new(base, sizes)?;

        let generate_interval = match (cfg.parse::<f64>("generate.lo")?, cfg.parse::<f64>("generate.hi")?) {
            (Some(lo), Some(hi)) => Some(Interval::new(lo, hi)?),
            (None, None) => None,
            _ => return Err(Error::Validation("generate.lo and generate.hi go together".into())),
        };

        let freq_window = Interval::new(cfg.parse_or("spectrum.window.lo", 0.0)?, cfg.parse_or("spectrum.window.hi", 10.0)?)?;
        if freq_window.is_empty() {
            return Err(Error::Validation("spectrum window is empty".into()));
        }
        let coeff_bound = cfg.parse_or("spectrum.coeff_bound", 8u32)?;
        if coeff_bound == 0 {
            return Err(Error::Validation("spectrum.coeff_bound must be positive".into()));
        }
        let defaults = ScanParams::default();
        let scan = ScanParams {
            epsilon_factor: positive("spectrum.epsilon_factor", cfg.parse_or("spectrum.epsilon_factor", defaults.epsilon_factor)?)?,
            delta_rel: positive("spectrum.delta_rel", cfg.parse_or("spectrum.delta_rel", defaults.delta_rel)?)?,
            freq_window: Some(freq_window),
        };

        let decompose = DecomposeParams {
            theta: positive("decompose.theta", cfg.parse_or("decompose.theta", DecomposeParams::default().theta)?)?,
            r0: positive_opt(cfg, "decompose.r0")?,
        };
        let decompose_radius = positive_opt(cfg, "decompose.radius")?.unwrap_or(100.0 * base);

        let trials = cfg.parse_or("verify.trials", 3usize)?;
        let autocorr_n = cfg.parse::<u32>("autocorr.n")?;
        if let Some(n) = autocorr_n {
            if !vanhove.sizes().contains(&n) {
                return Err(Error::Validation(format!("autocorr.n = {n} is not one of the van Hove sizes {:?}", vanhove.sizes())));
            }
        }

        Ok(RunConfig {
            scheme,
            vanhove,
            generate_interval,
            autocorr_n,
            autocorr_radius: positive_opt(cfg, "autocorr.radius")?,
            source: cfg.parse_or("spectrum.source", Source::Dual)?,
            freq_window,
            coeff_bound,
            grid_step: positive_opt(cfg, "spectrum.grid_step")?,
            scan,
            decompose,
            decompose_radius,
            trials,
            out_dir: cfg.get("run.out_dir").map(PathBuf::from),
            seed: cfg.parse_or("run.seed", 42u64)?,
            hash: config_hash(cfg, command),
        })
    }

    pub fn scenario_params(&self, timed: bool) -> ScenarioParams {
        ScenarioParams {
            vanhove: self.vanhove.clone(),
            radius: self.autocorr_radius.unwrap_or_else(|| bragg_core::autocorr::default_radius(&self.vanhove)),
            decompose_radius: self.decompose_radius,
            coeff_bound: self.coeff_bound,
            freq_window: self.freq_window,
            decompose: self.decompose,
            scan: self.scan,
            timed,
        }
    }

    /// `path` relative to `run.out_dir` when that is set and `path` is relative.
    pub fn output_path(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

/// SHA-256 of the canonical config text prefixed by the subcommand.
pub fn config_hash(cfg: &KvConfig, command: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("command = {command}\n"));
    hasher.update(cfg.to_canonical_string());
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(text: &str) -> KvConfig {
        text.parse().unwrap()
    }

    #[test]
    fn defaults_are_valid() {
        let rc = RunConfig::from_kv(&KvConfig::default(), "verify").unwrap();
        assert!(rc.scheme.is_none());
        assert_eq!(rc.vanhove, VanHoveSpec::default());
        assert_eq!(rc.seed, 42);
        assert_eq!(rc.source, Source::Dual);
        assert_eq!(rc.freq_window, Interval { lo: 0.0, hi: 10.0 });
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_kv(&kv("spectrum.colour = red"), "x").is_err());
        assert!(RunConfig::from_kv(&kv("vanhove.sizes = 100, 50, 200"), "x").is_err());
        assert!(RunConfig::from_kv(&kv("decompose.theta = -1"), "x").is_err());
        assert!(RunConfig::from_kv(&kv("autocorr.n = 7"), "x").is_err());
        assert!(RunConfig::from_kv(&kv("generate.lo = 0"), "x").is_err());
    }

    #[test]
    fn hash_tracks_config_and_command() {
        let a = config_hash(&kv("scheme.preset = zroot2"), "verify");
        assert_eq!(a, config_hash(&kv("scheme.preset=zroot2\n"), "verify"));
        assert_ne!(a, config_hash(&kv("scheme.preset = fibonacci"), "verify"));
        assert_ne!(a, config_hash(&kv("scheme.preset = zroot2"), "diffract"));
        assert_eq!(a.len(), 64);
    }
}
