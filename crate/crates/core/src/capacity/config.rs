//! Experiment configuration files (TOML).
//!
//! ```toml
//! kind = "capacity-sweep"
//! epsilon = 0.05
//! seed = 42
//!
//! [modes]
//! count = 16
//! omega = 1.0            # scalar or one value per mode
//! gamma = 0.5
//!
//! [codes]
//! source = "sampled"     # "explicit" | "sampled" | "bose"
//! count = 8
//! range = [0.0, 2.0]
//!
//! [time]
//! start = 0.0
//! stop = 4.0
//! steps = 400
//!
//! [sweep]
//! mode_counts = [1, 2, 4, 8, 16]
//! candidate_count = 500
//! range = [0.0, 2.0]
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::registry::{CodeSource, Registry};
use super::{check_epsilon, sample_code, Clock, ThetaRange, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::su11::{Code, ModeList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FidelityMatrix,
    CapacitySweep,
    ForgettingCurve,
    AssociationGraph,
    ThermoTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode {
    Scalar(f64),
    List(Vec<f64>),
}

impl PerMode {
    fn expand(&self, count: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            PerMode::Scalar(x) => Ok(vec![*x; count]),
            PerMode::List(v) if v.len() == count => Ok(v.clone()),
            PerMode::List(v) => Err(Error::Config(format!(
                "modes.{what} has {} values for {count} modes",
                v.len()
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub count: usize,
    pub omega: PerMode,
    pub gamma: PerMode,
}

impl ModeSpec {
    pub fn build(&self) -> Result<ModeList> {
        if self.count == 0 {
            return Err(Error::Config("modes.count must be >= 1".into()));
        }
        ModeList::new(
            &self.omega.expand(self.count, "omega")?,
            &self.gamma.expand(self.count, "gamma")?,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CodeSpec {
    /// One θ vector per memory.
    Explicit {
        thetas: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ids: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        printed_at: Option<Vec<f64>>,
    },
    /// `count` codes drawn uniformly from `range` with the experiment seed.
    Sampled { count: usize, range: [f64; 2] },
    /// One Bose-distributed code per inverse temperature.
    Bose { betas: Vec<f64> },
}

/// Named codes with printing times, resolved against a mode list.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedCodes {
    pub ids: Vec<String>,
    pub codes: Vec<Code>,
    pub printed_at: Vec<f64>,
}

impl CodeSpec {
    pub fn resolve(&self, modes: &ModeList, seed: u64) -> Result<ResolvedCodes> {
        let numbered = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        match self {
            CodeSpec::Explicit { thetas, ids, printed_at } => {
                let n = thetas.len();
                let ids = ids.clone().unwrap_or_else(|| numbered("m", n));
                let printed_at = printed_at.clone().unwrap_or_else(|| vec![0.0; n]);
                if ids.len() != n || printed_at.len() != n {
                    return Err(Error::Config(format!(
                        "codes: {n} theta vectors but {} ids and {} printing times",
                        ids.len(),
                        printed_at.len()
                    )));
                }
                let codes = thetas
                    .iter()
                    .map(|t| CodeSource::Thetas(t.clone()).resolve(modes))
                    .collect::<Result<_>>()?;
                Ok(ResolvedCodes { ids, codes, printed_at })
            }
            CodeSpec::Sampled { count, range } => {
                let range = ThetaRange::new(range[0], range[1])?;
                let codes = (0..*count)
                    .map(|i| sample_code(seed, i as u64, modes.len(), range))
                    .collect();
                Ok(ResolvedCodes {
                    ids: numbered("s", *count),
                    codes,
                    printed_at: vec![0.0; *count],
                })
            }
            CodeSpec::Bose { betas } => {
                let codes = betas
                    .iter()
                    .map(|&b| CodeSource::Beta(b).resolve(modes))
                    .collect::<Result<_>>()?;
                Ok(ResolvedCodes {
                    ids: numbered("b", betas.len()),
                    codes,
                    printed_at: vec![0.0; betas.len()],
                })
            }
        }
    }
}

/// Either `start`/`stop`/`steps` (`steps` intervals, so `steps + 1` points
/// including both ends) or an explicit list of `points`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
}

impl TimeSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let g = match (self.start, self.stop, self.steps, &self.points) {
            (Some(start), Some(stop), Some(steps), None) => {
                if steps == 0 || !(stop > start) {
                    return Err(Error::Config("time range needs steps >= 1 and stop > start".into()));
                }
                let h = (stop - start) / steps as f64;
                (0..=steps).map(|i| start + h * i as f64).collect()
            }
            (None, None, None, Some(points)) => points.clone(),
            _ => {
                return Err(Error::Config(
                    "[time] needs either start, stop and steps, or points".into(),
                ))
            }
        };
        crate::thermo::check_grid(&g)?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode_counts: Vec<usize>,
    pub candidate_count: usize,
    pub range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSpec {
    /// Evaluation time for fidelity matrices and association graphs.
    #[serde(default)]
    pub time: f64,
    #[serde(default)]
    pub staggered: bool,
    /// Association threshold; defaults to the experiment `epsilon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl Default for EvaluationSpec {
    fn default() -> Self {
        EvaluationSpec {
            time: 0.0,
            staggered: false,
            threshold: None,
        }
    }
}

impl EvaluationSpec {
    pub fn clock(&self) -> Clock {
        if self.staggered {
            Clock::Staggered
        } else {
            Clock::Common
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Prepended to every artifact file name.
    #[serde(default)]
    pub prefix: String,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    pub modes: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codes: Option<CodeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub evaluation: EvaluationSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon).map_err(|_| Error::Config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)))?;
        self.modes.build()?;
        if let Some(t) = &self.time {
            t.grid()?;
        }
        if let Some(c) = &self.codes {
            c.resolve(&self.modes.build()?, self.seed)?;
        }
        if let Some(t) = self.evaluation.threshold {
            check_epsilon(t).map_err(|_| Error::Config(format!("evaluation.threshold must lie in (0, 1), got {t}")))?;
        }
        if !(self.evaluation.time.is_finite() && self.evaluation.time >= 0.0) {
            return Err(Error::Config("evaluation.time must be finite and >= 0".into()));
        }
        let need = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("{:?} experiments need a [{section}] section", self.kind)))
            }
        };
        match self.kind {
            ExperimentKind::CapacitySweep => need(self.sweep.is_some(), "sweep"),
            ExperimentKind::FidelityMatrix | ExperimentKind::AssociationGraph => need(self.codes.is_some(), "codes"),
            ExperimentKind::ForgettingCurve | ExperimentKind::ThermoTrace => {
                need(self.codes.is_some(), "codes")?;
                need(self.time.is_some(), "time")
            }
        }
    }

    pub fn mode_list(&self) -> Result<Arc<ModeList>> {
        Ok(Arc::new(self.modes.build()?))
    }

    pub fn resolved_codes(&self) -> Result<ResolvedCodes> {
        let modes = self.modes.build()?;
        match &self.codes {
            Some(spec) => spec.resolve(&modes, self.seed),
            None => Err(Error::Config("config has no [codes] section".into())),
        }
    }

    pub fn time_grid(&self) -> Result<Vec<f64>> {
        match &self.time {
            Some(t) => t.grid(),
            None => Err(Error::Config("config has no [time] section".into())),
        }
    }

    /// Registry holding the configured codes.
    pub fn registry(&self) -> Result<Registry> {
        let rc = self.resolved_codes()?;
        let mut reg = Registry::new(self.mode_list()?);
        for ((id, code), at) in rc.ids.iter().zip(&rc.codes).zip(&rc.printed_at) {
            reg = reg.print(id, &CodeSource::Thetas(code.thetas().to_vec()), *at)?;
        }
        Ok(reg)
    }

    pub fn association_threshold(&self) -> f64 {
        self.evaluation.threshold.unwrap_or(self.epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
kind = "capacity-sweep"
seed = 42
[modes]
count = 4
omega = 1.0
gamma = [0.5, 0.5, 1.0, 1.0]
[sweep]
mode_counts = [1, 2, 4]
candidate_count = 100
range = [0.0, 2.0]
"#;

    #[test]
    fn parses_sweep_with_defaults() {
        let c = ExperimentConfig::from_toml(SWEEP).unwrap();
        assert_eq!(c.kind, ExperimentKind::CapacitySweep);
        assert_eq!(c.epsilon, DEFAULT_EPSILON);
        assert_eq!(c.mode_list().unwrap().params()[2].gamma, 1.0);
        assert_eq!(c.evaluation.clock(), Clock::Common);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SWEEP.replace("seed = 42", "seed = 42\ncolour = 1");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(Error::Config(_))));
        let bad = SWEEP.replace("candidate_count", "candidates");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn missing_sections_and_bad_values_rejected() {
        let no_sweep = SWEEP.split("[sweep]").next().unwrap();
        assert!(ExperimentConfig::from_toml(no_sweep).is_err());
        assert!(ExperimentConfig::from_toml(&SWEEP.replace("seed = 42", "seed = 42\nepsilon = 1.5")).is_err());
        assert!(ExperimentConfig::from_toml(&SWEEP.replace("gamma = [0.5, 0.5, 1.0, 1.0]", "gamma = [0.5]")).is_err());
    }

    #[test]
    fn code_sources_resolve() {
        let text = r#"
kind = "forgetting-curve"
[modes]
count = 2
omega = 1.0
gamma = 1.0
[codes]
source = "explicit"
thetas = [[0.5, 1.0], [0.0, 0.2]]
ids = ["x", "y"]
[time]
start = 0.0
stop = 2.0
steps = 4
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let rc = c.resolved_codes().unwrap();
        assert_eq!(rc.ids, ["x", "y"]);
        assert_eq!(c.time_grid().unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(c.registry().unwrap().len(), 2);

        let sampled = text.replace(
            "source = \"explicit\"\nthetas = [[0.5, 1.0], [0.0, 0.2]]\nids = [\"x\", \"y\"]",
            "source = \"sampled\"\ncount = 3\nrange = [0.0, 1.0]",
        );
        let c = ExperimentConfig::from_toml(&sampled).unwrap();
        let a = c.resolved_codes().unwrap();
        assert_eq!(a.codes.len(), 3);
        assert_eq!(a, c.resolved_codes().unwrap());

        let bose = text.replace(
            "source = \"explicit\"\nthetas = [[0.5, 1.0], [0.0, 0.2]]\nids = [\"x\", \"y\"]",
            "source = \"bose\"\nbetas = [0.6931471805599453]",
        );
        let c = ExperimentConfig::from_toml(&bose).unwrap();
        let rc = c.resolved_codes().unwrap();
        assert!((rc.codes[0].thetas()[0] - 1f64.asinh()).abs() < 1e-12);

        let points = text.replace("start = 0.0\nstop = 2.0\nsteps = 4", "points = [0.0, 3.0]");
        assert_eq!(ExperimentConfig::from_toml(&points).unwrap().time_grid().unwrap(), vec![0.0, 3.0]);
    }
}
