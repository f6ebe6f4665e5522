//! `key = value` configuration files.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config entry, else `default`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.lookup(flag, key)?.unwrap_or(default))
    }

    pub fn lookup<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key {key}: {e}")))
            .transpose()
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, String> {
        if flag {
            return Ok(true);
        }
        Ok(self.lookup::<bool>(None, key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let c = Config::parse("# comment\ngrid = 500\nmax_n=9\n\n").unwrap();
        assert_eq!(c.pick(Some(10u32), "grid", 1).unwrap(), 10);
        assert_eq!(c.pick(None, "grid", 1u32).unwrap(), 500);
        assert_eq!(c.pick(None, "max-n", 1u64).unwrap(), 9);
        assert_eq!(c.pick(None, "refine", 3u32).unwrap(), 3);
    }

    #[test]
    fn malformed() {
        assert!(Config::parse("grid 500").unwrap_err().contains("line 1"));
        let c = Config::parse("grid = abc").unwrap();
        assert!(c.pick(None, "grid", 1u32).is_err());
    }
}
