//! Key-value configuration file.
//!
//! ```text
//! # comment
//! abstract_markers = Abstract | ABSTRACT
//! title_mode = relaxed
//! classifier_rule = k-of-5:3
//! ```
//!
//! Marker lists are `|`-separated. Keys left out keep their defaults.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifier::DecisionRule;
use crate::evaluator::DEFAULT_LONG_FIELD_THRESHOLD;
use crate::extractor::{ExtractorConfig, TitleMode};

/// Environment variable naming a config file when `--config` is not given.
pub const CONFIG_ENV: &str = "SCIMETA_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {reason}")]
    Invalid { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub extractor: ExtractorConfig,
    pub rule: DecisionRule,
    /// Minimum token Jaccard for long fields to count as correct.
    pub eval_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            extractor: ExtractorConfig::default(),
            rule: DecisionRule::Default,
            eval_threshold: DEFAULT_LONG_FIELD_THRESHOLD,
        }
    }
}

fn parse_list(value: &str) -> Vec<String> {
    value
        .split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

impl Config {
    pub fn parse(content: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            let invalid = |reason: String| ConfigError::Invalid { line, reason };
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (key, value) = text
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected `key = value`, found `{text}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| invalid(format!("`{key}` needs a whole number, found `{v}`")))
            };
            let m = &mut cfg.extractor.markers;
            match key {
                "abstract_markers" => m.abstract_markers = parse_list(value),
                "keywords_markers" => m.keywords_markers = parse_list(value),
                "intro_markers" => m.intro_markers = parse_list(value),
                "conclusion_markers" => m.conclusion_markers = parse_list(value),
                "reference_markers" => m.reference_markers = parse_list(value),
                "acknowledgment_markers" => m.acknowledgment_markers = parse_list(value),
                "title_mode" => {
                    cfg.extractor.title_mode = value
                        .parse::<TitleMode>()
                        .map_err(|e| invalid(format!("title_mode: {e}")))?
                }
                "short_doc_max_pages" => cfg.extractor.pages.short_doc_max_pages = number(value)?,
                "short_tail_pages" => cfg.extractor.pages.short_tail_pages = number(value)?,
                "long_tail_pages" => cfg.extractor.pages.long_tail_pages = number(value)?,
                "classifier_rule" => {
                    cfg.rule = value
                        .parse()
                        .map_err(|e| invalid(format!("classifier_rule: {e}")))?
                }
                "eval_threshold" => {
                    cfg.eval_threshold = value
                        .parse::<f64>()
                        .ok()
                        .filter(|t| (0.0..=1.0).contains(t))
                        .ok_or_else(|| {
                            invalid(format!(
                                "eval_threshold must be within 0..=1, found `{value}`"
                            ))
                        })?
                }
                other => return Err(invalid(format!("unknown key `{other}`"))),
            }
        }
        cfg.extractor
            .markers
            .validate()
            .map_err(|e| ConfigError::Invalid {
                line: 0,
                reason: e.to_string(),
            })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let content = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&content)
    }

    /// Loads `explicit`, else the file named by [`CONFIG_ENV`], else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Config, ConfigError> {
        match explicit {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Config::load(Path::new(&p)),
                _ => Ok(Config::default()),
            },
        }
    }

    /// The config as a file that [`Config::parse`] reads back unchanged.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, list) in self.extractor.markers.lists() {
            out.push_str(&format!("{name} = {}\n", list.join(" | ")));
        }
        let p = &self.extractor.pages;
        out.push_str(&format!("title_mode = {}\n", self.extractor.title_mode));
        out.push_str(&format!(
            "short_doc_max_pages = {}\n",
            p.short_doc_max_pages
        ));
        out.push_str(&format!("short_tail_pages = {}\n", p.short_tail_pages));
        out.push_str(&format!("long_tail_pages = {}\n", p.long_tail_pages));
        out.push_str(&format!("classifier_rule = {}\n", self.rule));
        out.push_str(&format!("eval_threshold = {}\n", self.eval_threshold));
        out
    }
}
