//! Flat `key=value` run configuration. Flags win over file entries, file
//! entries win over defaults; every resolved value is recorded for the manifest.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: Vec<String>,
    resolved: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key}", no + 1)));
        }
    }
    Ok(out)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Self { file, ..Self::default() })
    }

    fn lookup<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.used.push(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: cannot parse {s:?}: {e}"))),
        }
    }

    /// Resolves `key` from the flag, then the file, then `default`.
    pub fn get<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => {
                self.used.push(key.to_string());
                v
            }
            None => self.lookup(key)?.unwrap_or(default),
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn get_opt<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => {
                self.used.push(key.to_string());
                Some(v)
            }
            None => self.lookup(key)?,
        };
        if let Some(x) = &v {
            self.resolved.insert(key.to_string(), x.to_string());
        }
        Ok(v)
    }

    /// Comma-separated list of numbers.
    pub fn get_list(&mut self, key: &str, flag: Option<String>, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let fallback = default.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let text = self.get(key, flag, fallback)?;
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("{key}: cannot parse {s:?}: {e}"))))
            .collect()
    }

    /// Fails on file keys no subcommand option asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        for k in self.file.keys() {
            if !self.used.contains(k) {
                return Err(CliError::Usage(format!("unknown config key {k}")));
            }
        }
        Ok(())
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unknown_keys() {
        let mut s = Settings { file: parse_config("lambda = 3\n# note\nh=0.01\n").unwrap(), ..Settings::default() };
        assert_eq!(s.get("lambda", None, 1.0).unwrap(), 3.0);
        assert_eq!(s.get("h", Some(0.5), 0.1).unwrap(), 0.5);
        assert!(s.finish().is_ok());
        let mut t = Settings { file: parse_config("bogus=1").unwrap(), ..Settings::default() };
        let _ = t.get("lambda", None, 1.0);
        assert!(t.finish().is_err());
        assert!(parse_config("novalue").is_err());
    }
}
