//! `key = value` configuration file.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::extraction::EnrichmentParams;
use crate::ranking::Bm25;
use crate::search::SearchParams;

pub const CONFIG_FILE: &str = "cscope.conf";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub enrichment: EnrichmentParams,
    pub search: SearchParams,
    /// Default F-measure weighting.
    pub beta: f64,
    /// Remote source requests per second.
    pub rate_limit: f64,
    pub stem: bool,
    pub stopwords: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    /// Directory of fixture refs used by `fetch`.
    pub source_dir: Option<PathBuf>,
    /// External command turning a non-text upload into plain text on stdout;
    /// the file path is passed as its last argument.
    pub text_extract_command: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            enrichment: EnrichmentParams::default(),
            search: SearchParams::default(),
            beta: 1.0,
            rate_limit: 1.0,
            stem: false,
            stopwords: None,
            abbreviations: None,
            source_dir: None,
            text_extract_command: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl Config {
    /// Parses the file body; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Config::default();
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(CONFIG_FILE, i + 1, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "lambda" => cfg.enrichment.lambda = num(key, value)?,
                "theta" => cfg.enrichment.theta = num(key, value)?,
                "min_df" => cfg.enrichment.min_df = num(key, value)?,
                "delta" => cfg.search.decay = num(key, value)?,
                "hops" => cfg.search.hops = num(key, value)?,
                "k1" => cfg.search.bm25 = Bm25::new(num(key, value)?, cfg.search.bm25.b),
                "b" => cfg.search.bm25 = Bm25::new(cfg.search.bm25.k1, num(key, value)?),
                "beta" => cfg.beta = num(key, value)?,
                "rate_limit" => cfg.rate_limit = num(key, value)?,
                "stem" => cfg.stem = num(key, value)?,
                "stopwords" => cfg.stopwords = Some(path(value)),
                "abbreviations" => cfg.abbreviations = Some(path(value)),
                "source_dir" => cfg.source_dir = Some(path(value)),
                "text_extract_command" => cfg.text_extract_command = Some(value.to_string()),
                other => return Err(Error::parse(CONFIG_FILE, i + 1, format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Config::default());
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Hard errors for unusable values; soft issues are returned as warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let e = &self.enrichment;
        let s = &self.search;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(e.lambda) {
            return Err(Error::Config(format!("lambda {} outside [0, 1]", e.lambda)));
        }
        if !(unit(s.decay) && s.decay > 0.0) {
            return Err(Error::Config(format!("delta {} outside (0, 1]", s.decay)));
        }
        if !(s.bm25.k1 >= 0.0 && unit(s.bm25.b)) {
            return Err(Error::Config("k1 must be >= 0 and b within [0, 1]".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta {} must be finite and >= 0", self.beta)));
        }
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            return Err(Error::Config(format!(
                "rate_limit {} must be positive",
                self.rate_limit
            )));
        }
        let mut warnings = Vec::new();
        if self.beta > 1.0 {
            warnings.push(format!("beta {} is above the conventional [0, 1] range", self.beta));
        }
        Ok(warnings)
    }

    /// Default file contents written by `init`.
    pub fn template() -> &'static str {
        "# cscope configuration\n\
         lambda = 0.5\n\
         theta = 2\n\
         min_df = 2\n\
         delta = 0.5\n\
         hops = 1\n\
         k1 = 1.2\n\
         b = 0.75\n\
         beta = 1.0\n\
         rate_limit = 1.0\n\
         stem = false\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_parses_to_defaults() {
        assert_eq!(
            Config::parse(Config::template(), Path::new("/d")).unwrap(),
            Config::default()
        );
    }

    #[test]
    fn overrides_and_errors() {
        let cfg = Config::parse("min_df = 3\nk1=2\nsource_dir = src\nbeta = 2\n", Path::new("/d")).unwrap();
        assert_eq!(cfg.enrichment.min_df, 3);
        assert_eq!(cfg.search.bm25.k1, 2.0);
        assert_eq!(cfg.search.bm25.b, 0.75);
        assert_eq!(cfg.source_dir, Some(PathBuf::from("/d/src")));
        assert_eq!(cfg.validate().unwrap().len(), 1);
        assert!(Config::parse("nope = 1", Path::new("/d")).is_err());
        assert!(Config::parse("lambda = 2", Path::new("/d")).is_err());
        assert!(Config::parse("just text", Path::new("/d")).is_err());
    }
}
