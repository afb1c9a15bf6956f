//! Flat `key = value` run configs. Repeating a key makes a list; `#`
//! starts a comment line. The same format records every run's resolved
//! settings, so a resolved file can be fed back in to replay a benchmark.

use std::fmt::Display;
use std::str::FromStr;

use respclass::Error;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    entries: Vec<(usize, String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, Error> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse { line: i + 1, message: format!("expected key = value, found {line:?}") });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse { line: i + 1, message: "empty key".into() });
            }
            entries.push((i + 1, key.to_string(), value.trim().to_string()));
        }
        Ok(ConfigFile { entries })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), Error> {
        match self.entries.iter().find(|(_, k, _)| !allowed.contains(&k.as_str())) {
            Some((line, key, _)) => Err(Error::Parse { line: *line, message: format!("unknown key `{key}`") }),
            None => Ok(()),
        }
    }

    fn typed<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, Error>
    where
        T::Err: Display,
    {
        value.parse().map_err(|e: T::Err| Error::Parse { line, message: format!("{key}: {e}") })
    }

    /// The single value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: Display,
    {
        let mut found = self.entries.iter().filter(|(_, k, _)| k == key);
        let Some((line, _, value)) = found.next() else { return Ok(None) };
        if let Some((dup, _, _)) = found.next() {
            return Err(Error::Parse { line: *dup, message: format!("`{key}` given more than once") });
        }
        Self::typed(*line, key, value).map(Some)
    }

    /// Every value of `key`, in file order. A value may also hold a
    /// comma-separated list.
    pub fn get_all<T: FromStr>(&self, key: &str) -> Result<Vec<T>, Error>
    where
        T::Err: Display,
    {
        let mut out = Vec::new();
        for (line, _, value) in self.entries.iter().filter(|(_, k, _)| k == key) {
            for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                out.push(Self::typed(*line, key, part)?);
            }
        }
        Ok(out)
    }
}

/// Accumulates resolved settings in the config format.
#[derive(Clone, Debug, Default)]
pub struct ConfigWriter {
    text: String,
}

impl ConfigWriter {
    pub fn new(command: &str) -> ConfigWriter {
        ConfigWriter { text: format!("# resolved configuration: respclass {command}\n") }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.text.push_str(&format!("{key} = {value}\n"));
        self
    }

    pub fn set_all<V: Display>(&mut self, key: &str, values: impl IntoIterator<Item = V>) -> &mut Self {
        for v in values {
            self.set(key, v);
        }
        self
    }

    pub fn finish(&self) -> &str {
        &self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_comments() {
        let cfg = ConfigFile::parse("# c\nlearner = a\n\nlearner=b, c\nn = 10\n").unwrap();
        assert_eq!(cfg.get_all::<String>("learner").unwrap(), vec!["a", "b", "c"]);
        assert_eq!(cfg.get::<usize>("n").unwrap(), Some(10));
        assert_eq!(cfg.get::<usize>("d").unwrap(), None);
    }

    #[test]
    fn errors_carry_lines() {
        let err = ConfigFile::parse("a = 1\nnonsense\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let cfg = ConfigFile::parse("n = 1\nn = 2\nx = y\n").unwrap();
        assert!(matches!(cfg.get::<usize>("n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(cfg.check_keys(&["n"]), Err(Error::Parse { line: 3, .. })));
        let cfg = ConfigFile::parse("\nn = ten\n").unwrap();
        assert!(matches!(cfg.get::<usize>("n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn writer_output_parses_back() {
        let mut w = ConfigWriter::new("benchmark");
        w.set("seed", 7).set_all("n", [100, 200]);
        let cfg = ConfigFile::parse(w.finish()).unwrap();
        assert_eq!(cfg.get_all::<usize>("n").unwrap(), vec![100, 200]);
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(7));
    }
}
