use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use mpmab_core::harness::config::load_flat_config;
use mpmab_core::{Error, Result};

pub const SEED_ENV: &str = "MPMAB_SEED";

/// Values from an optional config file, consulted when a flag is absent.
pub struct Layered {
    file: BTreeMap<String, String>,
}

impl Layered {
    /// Loads `path` (if any) and rejects keys that `allowed` does not list.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self> {
        let file = match path {
            Some(path) => load_flat_config(path)?,
            None => BTreeMap::new(),
        };
        if let Some(key) = file.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Argument(format!(
                "unknown config key {key:?}; expected one of {}",
                allowed.join(", ")
            )));
        }
        Ok(Layered { file })
    }

    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file.get(key).map(|raw| parse(key, raw)).transpose()
    }

    pub fn or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    /// Comma-separated list; an empty flag list defers to the file.
    pub fn list<T>(&self, key: &str, flag: Vec<T>, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw.split(',').map(|item| parse(key, item.trim())).collect(),
            None => Ok(default),
        }
    }

    /// Seed from the environment, else flag, else file, else 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        match std::env::var(SEED_ENV) {
            Ok(raw) => parse(SEED_ENV, raw.trim()),
            Err(std::env::VarError::NotPresent) => self.or("seed", flag, 0),
            Err(e) => Err(Error::Argument(format!("{SEED_ENV}: {e}"))),
        }
    }
}

fn parse<T>(key: &str, raw: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    raw.parse()
        .map_err(|e| Error::Argument(format!("invalid value {raw:?} for {key}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layered(pairs: &[(&str, &str)]) -> Layered {
        Layered {
            file: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    #[test]
    fn flags_override_file_values() {
        let cfg = layered(&[("horizon", "500"), ("subpar", "1, 2,3")]);
        assert_eq!(cfg.or("horizon", Some(9u64), 1).unwrap(), 9);
        assert_eq!(cfg.or("horizon", None::<u64>, 1).unwrap(), 500);
        assert_eq!(cfg.or("reps", None::<u64>, 1).unwrap(), 1);
        assert_eq!(cfg.list("subpar", vec![], vec![0usize]).unwrap(), vec![1, 2, 3]);
        assert_eq!(cfg.list("subpar", vec![7usize], vec![0]).unwrap(), vec![7]);
    }

    #[test]
    fn bad_file_values_are_argument_errors() {
        let cfg = layered(&[("horizon", "lots")]);
        let err = cfg.or("horizon", None::<u64>, 1).unwrap_err();
        assert!(matches!(err, Error::Argument(ref m) if m.contains("horizon")), "{err}");
    }
}
