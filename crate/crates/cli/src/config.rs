//! Optional `key=value` run configuration. Flags always win over file
//! values; file values win over built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Parsed config file: flat string pairs, comments and blank lines
/// skipped.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value, got {raw:?}", path.display(), lineno + 1);
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed lookup; a present-but-malformed value is an error, not a
    /// silent fallback to the default.
    pub fn get_parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key}={raw}: {e}"),
            },
        }
    }
}

/// `flag.or(file).unwrap_or(default)` —  the one precedence rule used for
/// every setting.
pub fn resolve<T>(flag: Option<T>, file: Result<Option<T>>, default: T) -> Result<T> {
    Ok(flag.or(file?).unwrap_or(default))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_pairs_and_skips_comments() {
        let (_dir, path) = write_config("# run settings\nn = 30\nalgorithm=cart\n\n");
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.get("n"), Some("30"));
        assert_eq!(cfg.get("algorithm"), Some("cart"));
        assert_eq!(cfg.get_parse::<usize>("n").unwrap(), Some(30));
    }

    #[test]
    fn malformed_lines_and_values_are_errors() {
        let (_dir, path) = write_config("just words\n");
        assert!(FileConfig::load(&path).is_err());

        let (_dir, path) = write_config("n=many\n");
        let cfg = FileConfig::load(&path).unwrap();
        assert!(cfg.get_parse::<usize>("n").is_err());
    }

    #[test]
    fn flags_beat_file_values_beat_defaults() {
        let (_dir, path) = write_config("n=30\n");
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(resolve(Some(5), cfg.get_parse("n"), 10).unwrap(), 5);
        assert_eq!(resolve(None, cfg.get_parse("n"), 10).unwrap(), 30);
        assert_eq!(resolve(None, cfg.get_parse("missing"), 10).unwrap(), 10);
    }
}
