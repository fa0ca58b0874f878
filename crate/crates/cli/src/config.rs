use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use endoro_core::reformulate::Formulation;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::RunError;

/// What a run does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// One of the six benchmark experiments, numbered 1 to 6.
    Bench(u8),
    Figure1,
    Single,
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "figure1" => Ok(Experiment::Figure1),
            "single" => Ok(Experiment::Single),
            _ => match s.parse::<u8>() {
                Ok(k) if (1..=6).contains(&k) => Ok(Experiment::Bench(k)),
                _ => Err(format!("unknown experiment '{s}' (expected 1-6, figure1 or single)")),
            },
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Experiment::Bench(k) => write!(f, "{k}"),
            Experiment::Figure1 => f.write_str("figure1"),
            Experiment::Single => f.write_str("single"),
        }
    }
}

impl Serialize for Experiment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Experiment::Bench(k) => s.serialize_u8(*k),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Experiment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(k) => k.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A single formulation or all three side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationChoice {
    One(Formulation),
    All,
}

impl FormulationChoice {
    pub fn formulations(self) -> Vec<Formulation> {
        match self {
            FormulationChoice::One(f) => vec![f],
            FormulationChoice::All => Formulation::ALL.to_vec(),
        }
    }
}

impl FromStr for FormulationChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(FormulationChoice::All);
        }
        Formulation::parse(s)
            .map(FormulationChoice::One)
            .ok_or_else(|| format!("unknown formulation '{s}' (expected pibar, bigm, modbigm or all)"))
    }
}

impl fmt::Display for FormulationChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulationChoice::One(x) => write!(f, "{x}"),
            FormulationChoice::All => f.write_str("all"),
        }
    }
}

impl Serialize for FormulationChoice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FormulationChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything a run needs. Unset options take per-experiment defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Graph size; unset means the experiment's own grid or size.
    pub nodes: Option<usize>,
    pub instances: usize,
    pub seed: u64,
    pub gamma: f64,
    /// Reduction cost per arc; unset means 1, or a sweep where `c` varies.
    pub cost: Option<f64>,
    /// Uncertainty budget; unset means 2, or 12 for experiment 4.
    pub budget: Option<f64>,
    /// Unset means all three for experiment 1 and pibar otherwise.
    pub formulation: Option<FormulationChoice>,
    /// Monte Carlo samples per solution in experiment 6.
    pub samples: usize,
    pub out_dir: PathBuf,
    pub node_limit: usize,
    /// Problem file for `single`.
    pub problem: Option<PathBuf>,
    /// Worker threads; unset lets rayon decide.
    pub threads: Option<usize>,
    /// Write `wall_time_s` as an empty field so reruns are byte-identical.
    pub omit_timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Figure1,
            nodes: None,
            instances: 20,
            seed: 0,
            gamma: 0.2,
            cost: None,
            budget: None,
            formulation: None,
            samples: 10_000,
            out_dir: PathBuf::from("results"),
            node_limit: 1_000_000,
            problem: None,
            threads: None,
            omit_timing: false,
        }
    }
}

pub const MAX_NODES: usize = 1000;

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, RunError> {
        serde_json::from_str(text).map_err(|e| RunError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn formulations(&self) -> Vec<Formulation> {
        let default = match self.experiment {
            Experiment::Bench(1) => FormulationChoice::All,
            _ => FormulationChoice::One(Formulation::PiBar),
        };
        self.formulation.unwrap_or(default).formulations()
    }

    /// Range checks. Output directories are checked separately by
    /// [`RunConfig::prepare_out_dir`] since only benchmark runs write files.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if let Some(n) = self.nodes {
            if !(2..=MAX_NODES).contains(&n) {
                return bad(format!("nodes must lie in 2..={MAX_NODES}, got {n}"));
            }
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if let Some(c) = self.cost {
            if !(c >= 0.0 && c.is_finite()) {
                return bad(format!("cost must be finite and nonnegative, got {c}"));
            }
        }
        if let Some(b) = self.budget {
            if !(b >= 0.0 && b.is_finite()) {
                return bad(format!("budget must be finite and nonnegative, got {b}"));
            }
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.node_limit == 0 {
            return bad("node-limit must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if self.experiment == Experiment::Single && self.problem.is_none() {
            return bad("experiment single needs --problem <json>".into());
        }
        Ok(())
    }

    /// Creates `out_dir` and checks that a file can be written there.
    pub fn prepare_out_dir(&self) -> Result<(), RunError> {
        let fail = |e: std::io::Error| RunError::Config(format!("out-dir {}: {e}", self.out_dir.display()));
        fs::create_dir_all(&self.out_dir).map_err(fail)?;
        let probe = self.out_dir.join(".endoro-write-probe");
        fs::write(&probe, b"").map_err(fail)?;
        fs::remove_file(&probe).map_err(fail)?;
        Ok(())
    }
}
