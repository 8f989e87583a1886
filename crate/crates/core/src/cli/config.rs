//! Flat `key=value` experiment files.
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored. Flags given on the command line take
//! precedence over values read here.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

pub const KEYS: &[&str] = &[
    "mu",
    "sigma",
    "g1",
    "g2",
    "t1",
    "t2",
    "rule",
    "from",
    "to",
    "points",
    "steps",
    "seed",
    "mode",
    "objective",
    "replications",
    "csv",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {}: expected key=value, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Flag value if present, else the parsed config value, else `None`.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config value for `{key}`: {e}"))),
        }
    }

    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter --{key}")))
    }

    pub fn or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_precedence() {
        let cfg = ConfigFile::parse("# experiment\nmu = 0.5\n\nsigma=10\nrule=or\n").unwrap();
        assert_eq!(cfg.get::<f64>("mu", None).unwrap(), Some(0.5));
        assert_eq!(cfg.get("mu", Some(2.0)).unwrap(), Some(2.0));
        assert_eq!(cfg.require::<f64>("sigma", None).unwrap(), 10.0);
        assert_eq!(cfg.or::<u64>("points", None, 7).unwrap(), 7);
        assert!(matches!(
            cfg.require::<f64>("t1", None),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(ConfigFile::parse("mu 0"), Err(CliError::Usage(_))));
        assert!(matches!(
            ConfigFile::parse("alpha=1"),
            Err(CliError::Usage(_))
        ));
        let cfg = ConfigFile::parse("steps=many").unwrap();
        assert!(matches!(
            cfg.get::<u64>("steps", None),
            Err(CliError::Usage(_))
        ));
    }
}
