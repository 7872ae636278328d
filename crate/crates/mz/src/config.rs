//! Optional TOML settings file.
//!
//! Keys mirror the long flag names (`rho = 0.4`, `e-a = 1e-7`,
//! `spd-retraction = "additive"`). Values here override built-in defaults
//! and are themselves overridden by flags.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
    pub rho: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub lambda: Option<f64>,
    pub e_a: Option<f64>,
    pub e_r: Option<f64>,
    pub eps_fd: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub max_iter: Option<usize>,
    pub zeta1: Option<f64>,
    pub zeta2: Option<f64>,
    pub varsigma: Option<f64>,
    pub cg_max: Option<usize>,
    pub spd_retraction: Option<String>,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| Error::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kebab_case_keys() {
        let c = FileConfig::parse("rho = 0.4\ne-a = 1e-7\nmax-iter = 50\nspd-retraction = \"additive\"\n", Path::new("x.toml"))
            .unwrap();
        assert_eq!(c.rho, Some(0.4));
        assert_eq!(c.e_a, Some(1e-7));
        assert_eq!(c.max_iter, Some(50));
        assert_eq!(c.spd_retraction.as_deref(), Some("additive"));
        assert_eq!(c.t1, None);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(matches!(
            FileConfig::parse("rhoo = 0.4", Path::new("x.toml")),
            Err(Error::Config { .. })
        ));
    }
}
