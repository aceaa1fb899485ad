//! Line-oriented `key = value` run configuration.
//!
//! Values stay strings until a command reads them, but each key's type is
//! checked on load so a bad file fails before any work starts.

use std::collections::BTreeMap;
use std::path::Path;

use lowlying::exactpoly::parse_rational;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Command,
    Rational,
    RationalList,
    Uint,
    UintList,
    Bool,
    Sign,
    Parity,
    Path,
}

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "command" => Kind::Command,
        "sigma" => Kind::Rational,
        "sigmas" => Kind::RationalList,
        "n" | "a" | "m" | "samples" | "nmax" | "seed" | "r" | "qmax" | "tmax" | "shards" | "mc_samples" => Kind::Uint,
        "ns" => Kind::UintList,
        "kloosterman_sweep" | "quick" => Kind::Bool,
        "sign" => Kind::Sign,
        "parity" => Kind::Parity,
        "json" | "csv" => Kind::Path,
        _ => return None,
    })
}

pub const COMMANDS: [&str; 7] = ["moment", "rmt", "verify-combinat", "verify-arith", "verify-all", "vanish", "crosscheck"];

fn check_value(key: &str, value: &str) -> Result<(), CliError> {
    let kind = kind_of(key).ok_or_else(|| CliError::Usage(format!("unknown key '{key}'")))?;
    let bad = |what: &str| CliError::Usage(format!("'{key}' expects {what}, got '{value}'"));
    match kind {
        Kind::Command => {
            if !COMMANDS.contains(&value) {
                return Err(bad("one of moment, rmt, verify-combinat, verify-arith, verify-all, vanish, crosscheck"));
            }
        }
        Kind::Rational => {
            parse_rational(value).map_err(|e| CliError::Usage(format!("'{key}': {e}")))?;
        }
        Kind::RationalList => {
            for v in value.split(',') {
                parse_rational(v.trim())
                    .map_err(|e| CliError::Usage(format!("'{key}': {e}")))?;
            }
        }
        Kind::Uint => {
            value.parse::<u64>().map_err(|_| bad("a non-negative integer"))?;
        }
        Kind::UintList => {
            for v in value.split(',') {
                v.trim().parse::<u64>().map_err(|_| bad("a comma-separated list of integers"))?;
            }
        }
        Kind::Bool => {
            if !matches!(value, "true" | "false") {
                return Err(bad("true or false"));
            }
        }
        Kind::Sign => {
            value.parse::<lowlying::moments::Sign>().map_err(|_| bad("plus or minus"))?;
        }
        Kind::Parity => {
            if !matches!(value, "even" | "odd") {
                return Err(bad("even or odd"));
            }
        }
        Kind::Path => {
            if value.is_empty() {
                return Err(bad("a path"));
            }
        }
    }
    Ok(())
}

/// Resolved parameters of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub params: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn command(&self) -> Option<&str> {
        self.params.get("command").map(String::as_str)
    }

    /// Set a key after type-checking; later sets overwrite earlier ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        check_value(key, value)?;
        self.params.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.params.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Usage(format!("missing required parameter '{key}'")))
    }

    pub fn rational(&self, key: &str) -> Result<lowlying::Rational, CliError> {
        parse_rational(self.required(key)?).map_err(|e| CliError::Usage(format!("'{key}': {e}")))
    }

    pub fn rationals(&self, key: &str) -> Result<Vec<lowlying::Rational>, CliError> {
        self.required(key)?
            .split(',')
            .map(|v| parse_rational(v.trim()).map_err(|e| CliError::Usage(format!("'{key}': {e}"))))
            .collect()
    }

    pub fn uint(&self, key: &str) -> Result<u64, CliError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| CliError::Usage(format!("'{key}' expects an integer, got '{v}'")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        Ok(self.uint(key)? as usize)
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key).map(|_| self.usize(key)).transpose()
    }

    pub fn uints(&self, key: &str) -> Result<Vec<usize>, CliError> {
        self.required(key)?
            .split(',')
            .map(|v| v.trim().parse().map_err(|_| CliError::Usage(format!("'{key}': bad integer '{v}'"))))
            .collect()
    }

    pub fn flag(&self, key: &str) -> bool {
        self.get(key) == Some("true")
    }

    pub fn sign(&self, key: &str) -> Result<lowlying::moments::Sign, CliError> {
        self.required(key)?.parse().map_err(|e: lowlying::Error| CliError::Usage(e.to_string()))
    }

    /// Render as a config file that `parse_config` reads back to the same parameters.
    #[cfg(test)]
    pub fn to_text(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parse config text. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if cfg.params.contains_key(k) {
            return Err(CliError::Usage(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
        cfg.set(k, v).map_err(|e| CliError::Usage(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
