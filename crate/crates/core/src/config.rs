//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "spne_all_treatments"
//! seed = 20240501
//! replications = 1
//!
//! [defaults]          # optional; lab values shown
//! prize = 240.0
//! endowment = 240.0
//! rounds = 25
//! integer_rounding = false
//!
//! [[session]]
//! treatment = "1,2"
//! groups = 10
//! policies = [{ kind = "spne" }]                  # one per player slot, or one for all
//! # stage_policies = [{ kind = "optimizing_leader", joy_of_winning = 119.73 },
//! #                   { kind = "empirical_responder" }]   # one per stage
//! ```
//!
//! Policy kinds: `spne`, `jow_spne { joy_of_winning }`,
//! `empirical_responder { model?, noise_sd? }`, `imitator { fallback? }`,
//! `optimizing_leader { joy_of_winning, models? }`, `fixed { investment }`.
//! Omitted response models come from the bundled presets (or the file named by
//! `presets`) for the session's treatment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{BehaviorPolicy, ResponseModel, ResponsePresets, ResponseSet};
use crate::contest::{ContestSpec, MoveSequence, LAB_ENDOWMENT, LAB_PRIZE};
use crate::simulate::{derive_seed, SessionConfig, DEFAULT_ROUNDS};

pub const BUNDLED_CONFIGS: [(&str, &str); 3] = [
    (
        "spne_all_treatments",
        include_str!("../configs/spne_all_treatments.toml"),
    ),
    (
        "preemption_2_1",
        include_str!("../configs/preemption_2_1.toml"),
    ),
    (
        "behavioral_all_treatments",
        include_str!("../configs/behavioral_all_treatments.toml"),
    ),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    /// Response presets file; relative paths resolve against the config file.
    #[serde(default)]
    pub presets: Option<PathBuf>,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(rename = "session")]
    pub sessions: Vec<SessionEntry>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "lab_prize")]
    pub prize: f64,
    #[serde(default = "lab_endowment")]
    pub endowment: f64,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub integer_rounding: bool,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            prize: LAB_PRIZE,
            endowment: LAB_ENDOWMENT,
            rounds: DEFAULT_ROUNDS,
            integer_rounding: false,
        }
    }
}

fn lab_prize() -> f64 {
    LAB_PRIZE
}
fn lab_endowment() -> f64 {
    LAB_ENDOWMENT
}
fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionEntry {
    /// Move sequence, e.g. `"1,2"`.
    pub treatment: String,
    pub groups: usize,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub prize: Option<f64>,
    #[serde(default)]
    pub endowment: Option<f64>,
    #[serde(default)]
    pub integer_rounding: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub stage_policies: Vec<PolicyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    Spne,
    JowSpne {
        joy_of_winning: f64,
    },
    EmpiricalResponder {
        #[serde(default)]
        model: Option<ResponseModel>,
        #[serde(default)]
        noise_sd: Option<f64>,
    },
    Imitator {
        #[serde(default)]
        fallback: Option<f64>,
    },
    OptimizingLeader {
        #[serde(default)]
        joy_of_winning: f64,
        #[serde(default)]
        models: Option<ResponseSet>,
    },
    Fixed {
        investment: f64,
    },
}

impl PolicyConfig {
    fn resolve(
        &self,
        treatment: &MoveSequence,
        stage: usize,
        presets: &ResponsePresets,
    ) -> Result<BehaviorPolicy, ConfigError> {
        let preset = || {
            presets
                .for_treatment(treatment)
                .ok_or_else(|| invalid(format!("no response preset for treatment {treatment}")))
        };
        Ok(match self {
            PolicyConfig::Spne => BehaviorPolicy::Spne,
            PolicyConfig::JowSpne { joy_of_winning } => BehaviorPolicy::JowSpne {
                joy_of_winning: *joy_of_winning,
            },
            PolicyConfig::EmpiricalResponder { model, noise_sd } => {
                let mut model = match model {
                    Some(m) => m.clone(),
                    None => preset()?
                        .for_stage(stage)
                        .cloned()
                        .ok_or_else(|| invalid(format!("no preset responder for stage {stage} of {treatment}")))?,
                };
                if let Some(sd) = noise_sd {
                    model.noise_sd = *sd;
                }
                BehaviorPolicy::EmpiricalResponder { model }
            }
            PolicyConfig::Imitator { fallback } => BehaviorPolicy::Imitator {
                fallback: match fallback {
                    Some(f) => *f,
                    None => preset()?.r2.beta0,
                },
            },
            PolicyConfig::OptimizingLeader {
                joy_of_winning,
                models,
            } => BehaviorPolicy::OptimizingLeader {
                models: match models {
                    Some(m) => m.clone(),
                    None => preset()?.clone(),
                },
                joy_of_winning: *joy_of_winning,
            },
            PolicyConfig::Fixed { investment } => BehaviorPolicy::Fixed {
                investment: *investment,
            },
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| invalid(e.to_string()))
    }

    /// Resolves into session configs. `base_dir` anchors a relative presets
    /// path; `seed` overrides the file's master seed.
    pub fn sessions(
        &self,
        base_dir: Option<&Path>,
        seed: Option<u64>,
    ) -> Result<Vec<SessionConfig>, ConfigError> {
        if self.sessions.is_empty() {
            return Err(invalid("no [[session]] entries"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        let presets = match &self.presets {
            None => ResponsePresets::bundled(),
            Some(p) => {
                let path = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                    path: path.display().to_string(),
                    source,
                })?;
                ResponsePresets::from_toml_str(&text).map_err(|e| invalid(e.to_string()))?
            }
        };
        let master = seed.unwrap_or(self.seed);
        self.sessions
            .iter()
            .enumerate()
            .map(|(i, entry)| self.session(entry, i, master, &presets))
            .collect()
    }

    fn session(
        &self,
        entry: &SessionEntry,
        index: usize,
        master: u64,
        presets: &ResponsePresets,
    ) -> Result<SessionConfig, ConfigError> {
        let treatment: MoveSequence = entry
            .treatment
            .parse()
            .map_err(|e| invalid(format!("session {}: {e}", index + 1)))?;
        let spec = ContestSpec::new(
            treatment.clone(),
            entry.prize.unwrap_or(self.defaults.prize),
            entry.endowment.unwrap_or(self.defaults.endowment),
            0.0,
        )
        .map_err(|e| invalid(format!("session {}: {e}", index + 1)))?;
        let policies = match (entry.policies.is_empty(), entry.stage_policies.is_empty()) {
            (false, true) => {
                if entry.policies.len() != 1 && entry.policies.len() != treatment.players() {
                    return Err(invalid(format!(
                        "session {}: {} policies for {} player slots",
                        index + 1,
                        entry.policies.len(),
                        treatment.players()
                    )));
                }
                (0..treatment.players())
                    .map(|slot| {
                        let p = entry.policies.get(slot).unwrap_or(&entry.policies[0]);
                        p.resolve(&treatment, treatment.stage_of_player(slot), presets)
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            (true, false) => {
                if entry.stage_policies.len() != treatment.len() {
                    return Err(invalid(format!(
                        "session {}: {} stage policies for {} stages",
                        index + 1,
                        entry.stage_policies.len(),
                        treatment.len()
                    )));
                }
                (0..treatment.players())
                    .map(|slot| {
                        let stage = treatment.stage_of_player(slot);
                        entry.stage_policies[stage - 1].resolve(&treatment, stage, presets)
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            _ => {
                return Err(invalid(format!(
                    "session {}: give exactly one of `policies` or `stage_policies`",
                    index + 1
                )))
            }
        };
        if entry.groups == 0 {
            return Err(invalid(format!("session {}: groups must be positive", index + 1)));
        }
        let rounds = entry.rounds.unwrap_or(self.defaults.rounds);
        if rounds == 0 {
            return Err(invalid(format!("session {}: rounds must be positive", index + 1)));
        }
        Ok(SessionConfig {
            spec,
            groups: entry.groups,
            rounds,
            policies,
            integer_rounding: entry
                .integer_rounding
                .unwrap_or(self.defaults.integer_rounding),
            seed: entry.seed.unwrap_or_else(|| derive_seed(master, index as u64)),
            label: Some(entry.label.clone().unwrap_or_else(|| default_label(&treatment))),
        })
    }
}

/// `seq_1-2` for (1,2).
pub fn default_label(treatment: &MoveSequence) -> String {
    let parts: Vec<String> = treatment.stages().iter().map(|n| n.to_string()).collect();
    format!("seq_{}", parts.join("-"))
}

pub fn bundled_config(name: &str) -> Option<&'static str> {
    BUNDLED_CONFIGS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Loads a config from a path, or a bundled config by name when no such file
/// exists. Returns the config and the directory relative paths resolve against.
pub fn load_config(path_or_name: &str) -> Result<(ExperimentConfig, Option<PathBuf>), ConfigError> {
    let path = Path::new(path_or_name);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let dir = path.parent().map(Path::to_path_buf);
        return Ok((ExperimentConfig::from_toml_str(&text)?, dir));
    }
    match bundled_config(path_or_name) {
        Some(text) => Ok((ExperimentConfig::from_toml_str(text)?, None)),
        None => Err(ConfigError::Read {
            path: path_or_name.to_string(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no such file or bundled config",
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_resolve() {
        for (name, text) in BUNDLED_CONFIGS {
            let cfg = ExperimentConfig::from_toml_str(text).unwrap();
            let sessions = cfg.sessions(None, None).unwrap();
            assert!(!sessions.is_empty(), "{name}");
        }
        let (cfg, _) = load_config("spne_all_treatments").unwrap();
        let sessions = cfg.sessions(None, None).unwrap();
        let layout: Vec<(String, usize)> = sessions
            .iter()
            .map(|s| (s.treatment().to_string(), s.groups))
            .collect();
        assert_eq!(
            layout,
            [("(3)", 9), ("(1,2)", 10), ("(2,1)", 9), ("(1,1,1)", 9)]
                .map(|(t, g)| (t.to_string(), g))
        );
    }

    #[test]
    fn stage_policies_expand_per_slot() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            seed = 1
            [[session]]
            treatment = "2,1"
            groups = 1
            stage_policies = [
                { kind = "optimizing_leader", joy_of_winning = 119.73 },
                { kind = "empirical_responder", noise_sd = 5.0 },
            ]
            "#,
        )
        .unwrap();
        let s = &cfg.sessions(None, None).unwrap()[0];
        assert_eq!(s.policies.len(), 3);
        assert!(matches!(s.policies[1], BehaviorPolicy::OptimizingLeader { .. }));
        match &s.policies[2] {
            BehaviorPolicy::EmpiricalResponder { model } => {
                assert_eq!(model.beta0, 67.60);
                assert_eq!(model.noise_sd, 5.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_override_changes_sessions() {
        let (cfg, _) = load_config("spne_all_treatments").unwrap();
        let a = cfg.sessions(None, None).unwrap();
        let b = cfg.sessions(None, Some(99)).unwrap();
        assert_ne!(a[0].seed, b[0].seed);
        assert_eq!(a, cfg.sessions(None, None).unwrap());
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            "[[session]]\ntreatment = \"1,0\"\ngroups = 1\npolicies = [{ kind = \"spne\" }]",
            "[[session]]\ntreatment = \"3\"\ngroups = 0\npolicies = [{ kind = \"spne\" }]",
            "[[session]]\ntreatment = \"3\"\ngroups = 1",
            "[[session]]\ntreatment = \"3\"\ngroups = 1\npolicies = [{ kind = \"empirical_responder\" }]",
            "[[session]]\ntreatment = \"1,2\"\ngroups = 1\nstage_policies = [{ kind = \"spne\" }]",
            "replications = 0\n[[session]]\ntreatment = \"3\"\ngroups = 1\npolicies = [{ kind = \"spne\" }]",
        ];
        for text in bad {
            let result = ExperimentConfig::from_toml_str(text).and_then(|c| c.sessions(None, None));
            assert!(result.is_err(), "{text}");
        }
        assert!(ExperimentConfig::from_toml_str("bogus = 1\nsession = []").is_err());
        assert!(load_config("no_such_config").is_err());
    }
}
