//! Registry of printed memories and its on-disk form.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su11::{theta_from_beta, Code, MemoryState, ModeList, ModeParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub id: String,
    pub code: Code,
    pub printed_at: f64,
}

/// How a new memory's code is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum CodeSource {
    Thetas(Vec<f64>),
    /// Bose-distributed condensates at inverse temperature `β` for every mode.
    Beta(f64),
}

impl CodeSource {
    pub fn resolve(&self, modes: &ModeList) -> Result<Code> {
        match self {
            CodeSource::Thetas(t) => {
                let code = Code::new(t.clone())?;
                if code.len() != modes.len() {
                    return Err(Error::CodeLength {
                        expected: modes.len(),
                        found: code.len(),
                    });
                }
                Ok(code)
            }
            CodeSource::Beta(beta) => Code::new(
                modes
                    .params()
                    .iter()
                    .map(|p| theta_from_beta(*beta, p.energy()))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// Immutable collection of coded memories over one shared mode list.
///
/// Printing returns a new registry; existing entries are never touched.
#[derive(Clone, Debug, PartialEq)]
pub struct Registry {
    modes: Arc<ModeList>,
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    schema_version: u32,
    modes: Vec<ModeParams>,
    entries: Vec<Entry>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

impl Registry {
    pub fn new(modes: Arc<ModeList>) -> Self {
        Registry {
            modes,
            entries: Vec::new(),
        }
    }

    pub fn modes(&self) -> &Arc<ModeList> {
        &self.modes
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Result<&Entry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    /// A new registry with one more memory appended.
    pub fn print(&self, id: &str, source: &CodeSource, printed_at: f64) -> Result<Registry> {
        if id.is_empty() {
            return Err(Error::domain("memory id must be non-empty"));
        }
        if self.entries.iter().any(|e| e.id == id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        if !(printed_at.is_finite() && printed_at >= 0.0) {
            return Err(Error::domain(format!("printing time must be finite and >= 0, got {printed_at}")));
        }
        let code = source.resolve(&self.modes)?;
        let mut entries = self.entries.clone();
        entries.push(Entry {
            id: id.to_string(),
            code,
            printed_at,
        });
        Ok(Registry {
            modes: self.modes.clone(),
            entries,
        })
    }

    /// State of an entry at absolute time `t`, evolved for `t − printed_at`.
    pub fn state_since_printing(&self, entry: &Entry, t: f64) -> Result<MemoryState> {
        let elapsed = t - entry.printed_at;
        if elapsed < 0.0 {
            return Err(Error::domain(format!(
                "memory {:?} is printed at {} and does not exist at time {t}",
                entry.id, entry.printed_at
            )));
        }
        MemoryState::at_time(self.modes.clone(), entry.code.clone(), elapsed)
    }

    /// State of an entry evolved for `t` from its own printing, ignoring `printed_at`.
    pub fn state_at(&self, entry: &Entry, t: f64) -> Result<MemoryState> {
        MemoryState::at_time(self.modes.clone(), entry.code.clone(), t)
    }

    /// Canonical text form: pretty JSON with fixed field order and a trailing newline.
    pub fn to_json(&self) -> String {
        let file = RegistryFile {
            schema_version: SCHEMA_VERSION,
            modes: self.modes.params().to_vec(),
            entries: self.entries.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("registry serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Malformed {
            what: "registry",
            message: e.to_string(),
        })?;
        match probe.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(found) => {
                return Err(Error::SchemaVersion {
                    found,
                    expected: SCHEMA_VERSION,
                })
            }
            None => {
                return Err(Error::Malformed {
                    what: "registry",
                    message: "missing schema_version".into(),
                })
            }
        }
        let file: RegistryFile = serde_json::from_str(text).map_err(|e| Error::Malformed {
            what: "registry",
            message: e.to_string(),
        })?;
        let modes = Arc::new(ModeList::from_params(file.modes)?);
        let mut seen = HashSet::new();
        for e in &file.entries {
            if e.code.len() != modes.len() {
                return Err(Error::CodeLength {
                    expected: modes.len(),
                    found: e.code.len(),
                });
            }
            Code::new(e.code.thetas().to_vec())?;
            if !(e.printed_at.is_finite() && e.printed_at >= 0.0) {
                return Err(Error::Malformed {
                    what: "registry",
                    message: format!("entry {:?} has invalid printed_at {}", e.id, e.printed_at),
                });
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        Ok(Registry {
            modes,
            entries: file.entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Writes via a `.partial` sibling and renames, so a failed write never
    /// leaves a truncated registry behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        crate::capacity::output::write_atomic(path, self.to_json().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Registry {
        let modes = Arc::new(ModeList::new(&[1.0, 2.0], &[0.5, 0.25]).unwrap());
        Registry::new(modes)
            .print("a", &CodeSource::Thetas(vec![0.1, 0.2]), 0.0)
            .unwrap()
            .print("b", &CodeSource::Beta(0.7), 1.5)
            .unwrap()
    }

    #[test]
    fn printing_is_non_destructive() {
        let r1 = reg();
        let r2 = r1.print("c", &CodeSource::Thetas(vec![1.0, 0.0]), 2.0).unwrap();
        assert_eq!(&r2.entries()[..2], r1.entries());
        assert_eq!(r1.len(), 2);
        assert!(matches!(r2.print("a", &CodeSource::Beta(1.0), 0.0), Err(Error::DuplicateId(_))));
        assert!(matches!(
            r2.print("d", &CodeSource::Thetas(vec![1.0]), 0.0),
            Err(Error::CodeLength { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn beta_source_uses_bose_factor() {
        let modes = ModeList::new(&[std::f64::consts::LN_2, std::f64::consts::LN_2], &[1.0, 1.0]).unwrap();
        let code = CodeSource::Beta(1.0).resolve(&modes).unwrap();
        for t in code.thetas() {
            assert!((t - 1f64.asinh()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let r = reg();
        let text = r.to_json();
        let back = Registry::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        let keys: Vec<usize> = ["schema_version", "modes", "entries"].iter().map(|k| text.find(k).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn load_errors_are_distinct() {
        let text = reg().to_json();
        let legacy = text.replace("\"schema_version\": 1", "\"schema_version\": 0");
        assert!(matches!(Registry::from_json(&legacy), Err(Error::SchemaVersion { found: 0, expected: 1 })));
        assert!(matches!(Registry::from_json("{ not json"), Err(Error::Malformed { .. })));
        let short = text.replacen("0.1,\n        0.2", "0.1", 1);
        assert_ne!(short, text);
        assert!(matches!(Registry::from_json(&short), Err(Error::CodeLength { .. })));
        let dup = text.replace("\"id\": \"b\"", "\"id\": \"a\"");
        assert!(matches!(Registry::from_json(&dup), Err(Error::DuplicateId(_))));
        let extra = text.replacen("\"schema_version\": 1", "\"schema_version\": 1,\n  \"colour\": 3", 1);
        assert!(matches!(Registry::from_json(&extra), Err(Error::Malformed { .. })));
    }

    #[test]
    fn staggered_state_rejects_future() {
        let r = reg();
        let b = r.get("b").unwrap();
        assert!(r.state_since_printing(b, 1.0).is_err());
        assert_eq!(r.state_since_printing(b, 2.0).unwrap().time(), 0.5);
        assert!(matches!(r.get("zz"), Err(Error::UnknownId(_))));
    }
}
