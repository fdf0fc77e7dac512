//! Line-oriented run records.
//!
//! A manifest is a list of `key: value` lines. Keys are dotted paths
//! (`param.seed`, `output.P1.ops`, `check.fan.rays`, `time.lift_ms`). Checks
//! carry `pass` or `fail`; the final `ok` line is true only if every check
//! passed.

use std::fmt;
use std::time::Duration;

use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    lines: Vec<(String, String)>,
}

/// Hex SHA-256 of a text.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.set("command", command);
        m
    }

    /// Appends a line, or replaces the value if the key is present.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string().replace('\n', " ");
        match self.lines.iter_mut().find(|(k, _)| k == key) {
            Some(l) => l.1 = value,
            None => self.lines.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.set(&format!("param.{key}"), value);
    }

    pub fn input(&mut self, name: &str, text: &str) {
        self.set(&format!("input.{name}"), sha256_hex(text));
    }

    pub fn output(&mut self, name: &str, text: &str) {
        self.set(&format!("output.{name}"), sha256_hex(text));
    }

    pub fn time(&mut self, stage: &str, d: Duration) {
        self.set(&format!("time.{stage}_ms"), d.as_millis());
    }

    /// Records a check and returns its outcome.
    pub fn check(&mut self, name: &str, passed: bool) -> bool {
        self.set(&format!("check.{name}"), if passed { "pass" } else { "fail" });
        passed
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, bool)> {
        self.lines.iter().filter_map(|(k, v)| k.strip_prefix("check.").map(|n| (n, v == "pass")))
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks().filter(|c| !c.1).map(|c| c.0).collect()
    }

    pub fn ok(&self) -> bool {
        self.checks().all(|c| c.1)
    }

    /// The `output.*` lines, which are stable across reruns.
    pub fn output_hashes(&self) -> Vec<(&str, &str)> {
        self.lines.iter().filter(|(k, _)| k.starts_with("output.")).map(|(k, v)| (k.as_str(), v.as_str())).collect()
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut m = Self::default();
        for l in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = l.split_once(": ")?;
            if k != "ok" {
                m.lines.push((k.to_string(), v.to_string()));
            }
        }
        Some(m)
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k}: {v}")?;
        }
        writeln!(f, "ok: {}", self.ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_ok() {
        let mut m = Manifest::new("gb");
        m.param("order", "deglex");
        m.output("P1.ops", "L1 - 1\n");
        assert!(m.check("rank", true));
        assert!(m.ok());
        m.check("fan", false);
        assert!(!m.ok());
        let text = m.to_string();
        assert!(text.ends_with("ok: false\n"));
        assert_eq!(Manifest::parse(&text).unwrap(), m);
        assert_eq!(m.failed_checks(), vec!["fan"]);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
