//! Flat `key = value` configuration files.
//!
//! Every kinetic parameter and solver knob defaults to the reference
//! values; a config file overrides any subset. Unknown keys are rejected.
//! Blank lines and `#` comments are ignored.

use std::fs;
use std::path::{Path, PathBuf};

use dqssa_core::{RateConstants, SolverConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: unknown key '{key}'")]
    UnknownKey {
        path: PathBuf,
        line: usize,
        key: String,
    },
    #[error("{path}:{line}: invalid value for '{key}': {reason}")]
    InvalidValue {
        path: PathBuf,
        line: usize,
        key: String,
        reason: String,
    },
}

/// Parameters plus solver settings read from a file.
#[derive(Debug, Clone, Copy, Default)]
pub struct FileConfig {
    pub rates: RateConstants,
    pub solver: SolverConfig,
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = FileConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                path: path.to_path_buf(),
                line,
                reason: format!("expected 'key = value', got '{content}'"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut cfg, path, line, key, value)?;
    }
    Ok(cfg)
}

fn parse_f64(path: &Path, line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::InvalidValue {
        path: path.to_path_buf(),
        line,
        key: key.to_string(),
        reason: format!("'{value}' is not a number"),
    })
}

fn positive(path: &Path, line: usize, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::InvalidValue {
            path: path.to_path_buf(),
            line,
            key: key.to_string(),
            reason: format!("must be strictly positive, got {v}"),
        })
    }
}

fn apply_key(
    cfg: &mut FileConfig,
    path: &Path,
    line: usize,
    key: &str,
    value: &str,
) -> Result<(), ConfigError> {
    let rate_slot: Option<&mut f64> = match key {
        "alpha_A" => Some(&mut cfg.rates.alpha_a),
        "alpha_A_p" => Some(&mut cfg.rates.alpha_a_p),
        "alpha_R" => Some(&mut cfg.rates.alpha_r),
        "alpha_R_p" => Some(&mut cfg.rates.alpha_r_p),
        "beta_A" => Some(&mut cfg.rates.beta_a),
        "beta_R" => Some(&mut cfg.rates.beta_r),
        "gamma_A" => Some(&mut cfg.rates.gamma_a),
        "gamma_R" => Some(&mut cfg.rates.gamma_r),
        "gamma_C" => Some(&mut cfg.rates.gamma_c),
        "delta_A" => Some(&mut cfg.rates.delta_a),
        "delta_R" => Some(&mut cfg.rates.delta_r),
        "delta_MA" => Some(&mut cfg.rates.delta_ma),
        "delta_MR" => Some(&mut cfg.rates.delta_mr),
        "theta_A" => Some(&mut cfg.rates.theta_a),
        "theta_R" => Some(&mut cfg.rates.theta_r),
        _ => None,
    };
    if let Some(slot) = rate_slot {
        *slot = positive(path, line, key, parse_f64(path, line, key, value)?)?;
        return Ok(());
    }
    match key {
        "dt" => cfg.solver.dt = positive(path, line, key, parse_f64(path, line, key, value)?)?,
        "t_end" => {
            cfg.solver.t_end = positive(path, line, key, parse_f64(path, line, key, value)?)?
        }
        "newton_tol" => {
            cfg.solver.newton_tol = positive(path, line, key, parse_f64(path, line, key, value)?)?
        }
        "max_iters" => {
            let n = value
                .parse::<usize>()
                .map_err(|_| ConfigError::InvalidValue {
                    path: path.to_path_buf(),
                    line,
                    key: key.to_string(),
                    reason: format!("'{value}' is not a positive integer"),
                })?;
            if n == 0 {
                return Err(ConfigError::InvalidValue {
                    path: path.to_path_buf(),
                    line,
                    key: key.to_string(),
                    reason: "must be at least 1".to_string(),
                });
            }
            cfg.solver.max_iters = n;
        }
        other => {
            return Err(ConfigError::UnknownKey {
                path: path.to_path_buf(),
                line,
                key: other.to_string(),
            })
        }
    }
    Ok(())
}
