//! Run configuration: a `knighter.toml` file with every knob optional, then
//! `KF_*` environment overrides on top. Unknown keys in the file are errors —
//! a misspelled knob must not silently run with its default.

use super::WorkspaceError;
use crate::engine::EngineBudget;
use crate::gateway::{
    Gateway, GatewayError, LiveProvider, LlmProvider, ReplayProvider, ScriptedProvider,
};
use crate::pipeline::SynthesisLimits;
use crate::scanner::ScanConfig;
use crate::triage::PlausibilityThresholds;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Scripted,
    Replay,
    Live,
}

impl std::str::FromStr for ProviderKind {
    type Err = String;
    fn from_str(s: &str) -> Result<ProviderKind, String> {
        match s {
            "scripted" => Ok(ProviderKind::Scripted),
            "replay" => Ok(ProviderKind::Replay),
            "live" => Ok(ProviderKind::Live),
            other => Err(format!("unknown provider `{other}` (scripted, replay, live)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub provider: ProviderKind,
    /// Cassette path for the replay provider, and the record target when
    /// `record` is on. Relative paths resolve against the config file's
    /// directory.
    pub cassette: Option<PathBuf>,
    /// Append every exchange to the cassette.
    pub record: bool,

    pub max_iterations: u32,
    pub max_repair_attempts: u32,
    pub t_valid: usize,

    pub t_plausible: usize,
    pub sample_size: usize,
    pub max_sample_fp: usize,
    pub seed: u64,
    pub max_refine_iterations: u32,

    /// Worker threads for corpus scans.
    pub jobs: usize,
    pub scan_max_reports: Option<usize>,
    pub scan_time_limit_secs: Option<u64>,
    /// Refinement re-scans run capped so a degenerate refined checker
    /// cannot stall the run.
    pub refine_scan_max_reports: usize,
    pub refine_scan_time_limit_secs: u64,

    pub max_nodes: usize,
    pub loop_unroll: u32,

    pub live_endpoint: Option<String>,
    pub live_model: Option<String>,
    /// Name of the environment variable holding the live API key.
    pub live_api_key_env: Option<String>,

    /// Directory relative paths resolve against; set when loaded from a
    /// file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            provider: ProviderKind::Scripted,
            cassette: None,
            record: false,
            max_iterations: 10,
            max_repair_attempts: 5,
            t_valid: 50,
            t_plausible: 20,
            sample_size: 5,
            max_sample_fp: 1,
            seed: 0,
            max_refine_iterations: 3,
            jobs: 32,
            scan_max_reports: None,
            scan_time_limit_secs: None,
            refine_scan_max_reports: 100,
            refine_scan_time_limit_secs: 3600,
            max_nodes: 10_000,
            loop_unroll: 2,
            live_endpoint: None,
            live_model: None,
            live_api_key_env: None,
            base_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, WorkspaceError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorkspaceError::Config {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| WorkspaceError::Config {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Loads the config file if present, otherwise starts from defaults;
    /// either way `KF_*` variables from the process environment apply on
    /// top.
    pub fn load_with_env(path: Option<&Path>) -> Result<RunConfig, WorkspaceError> {
        let mut config = match path {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply_overrides(std::env::vars())?;
        Ok(config)
    }

    /// Applies `KF_*` overrides from any (name, value) source. Unknown
    /// `KF_` names are errors for the same reason unknown file keys are.
    pub fn apply_overrides(
        &mut self,
        vars: impl Iterator<Item = (String, String)>,
    ) -> Result<(), WorkspaceError> {
        for (name, value) in vars {
            let Some(key) = name.strip_prefix("KF_") else {
                continue;
            };
            let bad = |reason: &str| WorkspaceError::BadOverride {
                var: name.clone(),
                reason: reason.to_string(),
            };
            macro_rules! parse {
                () => {
                    value.parse().map_err(|_| bad("unparseable value"))?
                };
            }
            match key {
                "PROVIDER" => self.provider = value.parse().map_err(|e: String| bad(&e))?,
                "CASSETTE" => self.cassette = Some(PathBuf::from(value)),
                "RECORD" => self.record = value.parse().map_err(|_| bad("expected true/false"))?,
                "MAX_ITERATIONS" => self.max_iterations = parse!(),
                "MAX_REPAIR_ATTEMPTS" => self.max_repair_attempts = parse!(),
                "T_VALID" => self.t_valid = parse!(),
                "T_PLAUSIBLE" => self.t_plausible = parse!(),
                "SAMPLE_SIZE" => self.sample_size = parse!(),
                "MAX_SAMPLE_FP" => self.max_sample_fp = parse!(),
                "SEED" => self.seed = parse!(),
                "MAX_REFINE_ITERATIONS" => self.max_refine_iterations = parse!(),
                "JOBS" => self.jobs = parse!(),
                "SCAN_MAX_REPORTS" => self.scan_max_reports = Some(parse!()),
                "SCAN_TIME_LIMIT_SECS" => self.scan_time_limit_secs = Some(parse!()),
                "REFINE_SCAN_MAX_REPORTS" => self.refine_scan_max_reports = parse!(),
                "REFINE_SCAN_TIME_LIMIT_SECS" => self.refine_scan_time_limit_secs = parse!(),
                "MAX_NODES" => self.max_nodes = parse!(),
                "LOOP_UNROLL" => self.loop_unroll = parse!(),
                "LIVE_ENDPOINT" => self.live_endpoint = Some(value),
                "LIVE_MODEL" => self.live_model = Some(value),
                "LIVE_API_KEY_ENV" => self.live_api_key_env = Some(value),
                _ => return Err(bad("unknown setting")),
            }
        }
        Ok(())
    }

    /// Resolves the cassette path against the config file's directory.
    pub fn cassette_path(&self) -> Option<PathBuf> {
        let cassette = self.cassette.as_ref()?;
        if cassette.is_absolute() {
            return Some(cassette.clone());
        }
        Some(match &self.base_dir {
            Some(base) => base.join(cassette),
            None => cassette.clone(),
        })
    }

    pub fn synthesis_limits(&self) -> SynthesisLimits {
        SynthesisLimits {
            max_iterations: self.max_iterations,
            max_repair_attempts: self.max_repair_attempts,
            t_valid: self.t_valid,
        }
    }

    pub fn plausibility_thresholds(&self) -> PlausibilityThresholds {
        PlausibilityThresholds {
            t_plausible: self.t_plausible,
            sample_size: self.sample_size,
            max_sample_fp: self.max_sample_fp,
            seed: self.seed,
        }
    }

    pub fn engine_budget(&self) -> EngineBudget {
        EngineBudget { max_nodes: self.max_nodes, loop_unroll: self.loop_unroll }
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            jobs: self.jobs,
            max_reports: self.scan_max_reports,
            time_limit: self.scan_time_limit_secs.map(Duration::from_secs),
            budget: self.engine_budget(),
        }
    }

    pub fn refine_scan_config(&self) -> ScanConfig {
        ScanConfig {
            jobs: self.jobs,
            max_reports: Some(self.refine_scan_max_reports),
            time_limit: Some(Duration::from_secs(self.refine_scan_time_limit_secs)),
            budget: self.engine_budget(),
        }
    }

    /// Builds the gateway this config describes. Replay needs a cassette,
    /// live needs an endpoint and model, and `record = true` needs a
    /// cassette to append to.
    pub fn build_gateway(&self) -> Result<Gateway, WorkspaceError> {
        let unusable = |reason: &str| {
            WorkspaceError::Gateway(GatewayError::ProviderUnavailable { reason: reason.into() })
        };
        let provider: Box<dyn LlmProvider> = match self.provider {
            ProviderKind::Scripted => Box::new(ScriptedProvider::new()),
            ProviderKind::Replay => {
                let path = self
                    .cassette_path()
                    .ok_or_else(|| unusable("the replay provider needs `cassette`"))?;
                Box::new(ReplayProvider::from_cassette(&path)?)
            }
            ProviderKind::Live => {
                let endpoint = self
                    .live_endpoint
                    .clone()
                    .ok_or_else(|| unusable("the live provider needs `live_endpoint`"))?;
                let model = self
                    .live_model
                    .clone()
                    .ok_or_else(|| unusable("the live provider needs `live_model`"))?;
                let api_key = match &self.live_api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        unusable(&format!("environment variable `{var}` is not set"))
                    })?),
                    None => None,
                };
                Box::new(LiveProvider::new(endpoint, model, api_key))
            }
        };
        let gateway = Gateway::new(provider);
        if self.record {
            let path = self
                .cassette_path()
                .ok_or_else(|| unusable("recording needs `cassette`"))?;
            Ok(gateway.recording_to(path))
        } else {
            Ok(gateway)
        }
    }
}
