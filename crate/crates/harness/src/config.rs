//! Experiment configuration: strict TOML with one table per scenario module.
//!
//! Omitted keys take their defaults; the fully resolved configuration is
//! written back next to the run artifacts so every value in effect is visible.

use std::path::{Path, PathBuf};

use schemanet::cause_effect::CauseEffectConfig;
use schemanet_scenarios::detour::DetourConfig;
use schemanet_scenarios::snap::{LesionProtocol, SnapConfig};
use schemanet_scenarios::synthetic::SyntheticConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Detour,
    Snap,
    SyntheticCauseEffect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    /// Learning trials (detour), recovery trials (snap) or independent
    /// streams (synthetic). Filled with the scenario default on resolve.
    #[serde(default)]
    pub trials: Option<usize>,
    /// Artifact directory. Not part of the resolved config or its hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub detour: DetourConfig,
    #[serde(default)]
    pub snap: SnapConfig,
    #[serde(default)]
    pub lesion: LesionProtocol,
    #[serde(default)]
    pub synthetic: SyntheticConfig,
    #[serde(default)]
    pub cause_effect: CauseEffectConfig,
}

pub const DEFAULT_DETOUR_TRIALS: usize = 5;
pub const DEFAULT_SYNTHETIC_TRIALS: usize = 1;

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            seed: 0,
            trials: None,
            out: None,
            detour: DetourConfig::default(),
            snap: SnapConfig::default(),
            lesion: LesionProtocol::default(),
            synthetic: SyntheticConfig::default(),
            cause_effect: CauseEffectConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| config_error(text, &e))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            key: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Fill scenario defaults so the resolved form names every value used.
    pub fn resolve(mut self) -> Self {
        let trials = self.trials.unwrap_or(match self.scenario {
            Scenario::Detour => DEFAULT_DETOUR_TRIALS,
            Scenario::Snap => self.lesion.recovery_trials,
            Scenario::SyntheticCauseEffect => DEFAULT_SYNTHETIC_TRIALS,
        });
        if self.scenario == Scenario::Snap {
            self.lesion.recovery_trials = trials;
        }
        self.trials = Some(trials);
        self
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(0)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved TOML text.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn config_error(text: &str, e: &toml::de::Error) -> HarnessError {
    let message = e.message().to_string();
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let key = quoted_after(&message, "unknown field")
        .or_else(|| quoted_after(&message, "missing field"))
        .or_else(|| e.span().map(|s| key_at(text, s.start)).filter(|k| !k.is_empty()));
    HarnessError::Config { key, line, message }
}

/// First backquoted word following `marker` in a serde message.
fn quoted_after(message: &str, marker: &str) -> Option<String> {
    let rest = &message[message.find(marker)? + marker.len()..];
    let start = rest.find('`')? + 1;
    let len = rest[start..].find('`')?;
    Some(rest[start..start + len].to_string())
}

/// Bare key text of the `key = value` line containing byte offset `at`.
fn key_at(text: &str, at: usize) -> String {
    let at = at.min(text.len());
    let begin = text[..at].rfind('\n').map_or(0, |i| i + 1);
    let line = text[begin..].lines().next().unwrap_or("");
    line.split('=').next().unwrap_or("").trim().trim_matches(['[', ']']).to_string()
}
