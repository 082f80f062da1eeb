// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` model configuration files.
//!
//! ```text
//! # comments start with '#'
//! alpha1 = 1
//! alpha2 = 1
//! f1.kind = sigmoid      # sigmoid | constant | table
//! f1.a = 4
//! f1.b = 2
//! f1.c = 1
//! f2.kind = constant
//! f2.a = 2
//! nu.kind = gaussian     # gaussian | rademacher | centered-uniform
//! nu.scale = 1
//! ```
//!
//! `fK.sup` overrides the declared bound (the amplitude for sigmoids, the
//! value for constants). A table rate is given as
//! `fK.table = x0:y0; x1:y1; ...` together with an explicit `fK.sup`.
//! Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use meanfield_core::model::{JumpKind, JumpLaw, ModelSpec, RateFunction};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },

    #[error("missing key `{0}`")]
    Missing(String),

    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
}

const KEYS: &[&str] = &[
    "alpha1", "alpha2", "f1.kind", "f1.a", "f1.b", "f1.c", "f1.sup", "f1.table", "f2.kind", "f2.a", "f2.b", "f2.c",
    "f2.sup", "f2.table", "nu.kind", "nu.scale",
];

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn text(&self, key: &str) -> Result<&str, ConfigError> {
        self.0.get(key).map(String::as_str).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    fn real(&self, key: &str) -> Result<f64, ConfigError> {
        parse_real(key, self.text(key)?)
    }

    fn optional_real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.0.get(key).map(|v| parse_real(key, v)).transpose()
    }

    /// Rejects keys that have no meaning for the selected kind.
    fn forbid(&self, prefix: &str, kind: &str, keys: &[&str]) -> Result<(), ConfigError> {
        for k in keys {
            let key = format!("{prefix}.{k}");
            if self.0.contains_key(&key) {
                return Err(ConfigError::Value { key, reason: format!("not used by kind `{kind}`") });
            }
        }
        Ok(())
    }
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|e| ConfigError::Value { key: key.to_string(), reason: format!("`{v}` is not a number ({e})") })
}

fn rate(e: &Entries, prefix: &str) -> Result<RateFunction, ConfigError> {
    let kind_key = format!("{prefix}.kind");
    let kind = e.text(&kind_key)?;
    let sup = e.optional_real(&format!("{prefix}.sup"))?;
    let f = match kind {
        "sigmoid" => {
            e.forbid(prefix, kind, &["table"])?;
            let a = e.real(&format!("{prefix}.a"))?;
            let b = e.real(&format!("{prefix}.b"))?;
            let c = e.real(&format!("{prefix}.c"))?;
            RateFunction::sigmoid(a, b, c)
        }
        "constant" => {
            e.forbid(prefix, kind, &["b", "c", "table"])?;
            RateFunction::constant(e.real(&format!("{prefix}.a"))?)
        }
        "table" => {
            e.forbid(prefix, kind, &["a", "b", "c"])?;
            let key = format!("{prefix}.table");
            let points = parse_table(&key, e.text(&key)?)?;
            let sup = sup.ok_or_else(|| ConfigError::Missing(format!("{prefix}.sup")))?;
            return Ok(RateFunction::table(&points, sup));
        }
        other => {
            return Err(ConfigError::Value {
                key: kind_key,
                reason: format!("unknown kind `{other}` (sigmoid, constant, table)"),
            })
        }
    };
    Ok(match sup {
        Some(s) => f.with_sup(s),
        None => f,
    })
}

fn parse_table(key: &str, v: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    let mut points = Vec::new();
    for item in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, y) = item.split_once(':').ok_or_else(|| ConfigError::Value {
            key: key.to_string(),
            reason: format!("`{item}` is not of the form x:y"),
        })?;
        points.push((parse_real(key, x.trim())?, parse_real(key, y.trim())?));
    }
    if points.is_empty() {
        return Err(ConfigError::Value { key: key.to_string(), reason: "empty table".into() });
    }
    if points.windows(2).any(|w| w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less)) {
        return Err(ConfigError::Value {
            key: key.to_string(),
            reason: "abscissae must be strictly increasing".into(),
        });
    }
    Ok(points)
}

fn jump_law(e: &Entries) -> Result<JumpLaw, ConfigError> {
    let kind = match e.text("nu.kind")? {
        "gaussian" => JumpKind::Gaussian,
        "rademacher" => JumpKind::Rademacher,
        "centered-uniform" | "uniform" => JumpKind::CenteredUniform,
        other => {
            return Err(ConfigError::Value {
                key: "nu.kind".into(),
                reason: format!("unknown kind `{other}` (gaussian, rademacher, centered-uniform)"),
            })
        }
    };
    Ok(JumpLaw::new(kind, e.real("nu.scale")?))
}

/// Parses configuration text. Values are only checked syntactically here;
/// range checks belong to model validation.
pub fn parse(text: &str) -> Result<ModelSpec, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { line, key: k.to_string() });
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate { line, key: k.to_string() });
        }
    }
    let e = Entries(map);
    Ok(ModelSpec {
        alpha1: e.real("alpha1")?,
        alpha2: e.real("alpha2")?,
        f1: rate(&e, "f1")?,
        f2: rate(&e, "f2")?,
        nu: jump_law(&e)?,
    })
}

pub fn load(path: &Path) -> Result<ModelSpec, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}
