//! Strict JSON run configuration.
//!
//! Every key is optional; omitted keys take the two-UAV, four-user default
//! scenario and the standard algorithm parameters. Powers are given in dBm
//! and gains in dB, and are converted to linear units exactly once, here.

use std::fmt;
use std::path::{Path, PathBuf};

use ledma_core::llm::LlmConfig;
use ledma_core::model::{db_to_linear, dbm_to_mw, PhysicalConstants, ScenarioSpec};
use ledma_core::moead::AlgoParams;
use ledma_core::operators::{DeParams, GaParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PLACEMENT_SEED: u64 = 2024;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("{0}")]
    MissingApiKey(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AlgoId {
    /// Decomposition loop with the LLM operator.
    Ledma,
    MoeadGa,
    MoeadDe,
    Random,
}

impl fmt::Display for AlgoId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgoId::Ledma => "ledma",
            AlgoId::MoeadGa => "moead-ga",
            AlgoId::MoeadDe => "moead-de",
            AlgoId::Random => "random",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Mock,
    Http,
}

/// The configuration file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub num_uavs: usize,
    pub num_users: usize,
    pub area_min_m: f64,
    pub area_max_m: f64,
    pub altitude_m: f64,
    pub p_min_dbm: f64,
    pub p_max_dbm: f64,
    pub noise_dbm: f64,
    pub ref_gain_db: f64,
    pub bandwidth_hz: f64,
    pub rcs_min: f64,
    pub rcs_max: f64,
    pub placement_seed: u64,
    /// Explicit user positions in meters; overrides seeded placement.
    pub user_positions: Option<Vec<[f64; 2]>>,

    pub algo: AlgoId,
    pub backend: BackendKind,
    pub population: usize,
    pub neighbor_size: usize,
    pub parents: usize,
    pub offspring: usize,
    pub iterations: usize,
    pub neighbor_prob: f64,
    pub seed: u64,

    pub llm: LlmConfig,
    pub ga: GaParams,
    pub de: DeParams,
    pub output_dir: PathBuf,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let algo = AlgoParams::default();
        Self {
            num_uavs: 2,
            num_users: 4,
            area_min_m: 0.0,
            area_max_m: 2000.0,
            altitude_m: 100.0,
            p_min_dbm: 0.0,
            p_max_dbm: 20.0,
            noise_dbm: -110.0,
            ref_gain_db: -60.0,
            bandwidth_hz: 51.2e6,
            rcs_min: 0.8,
            rcs_max: 1.0,
            placement_seed: DEFAULT_PLACEMENT_SEED,
            user_positions: None,
            algo: AlgoId::Ledma,
            backend: BackendKind::Mock,
            population: algo.population,
            neighbor_size: algo.neighbor_size,
            parents: algo.parents,
            offspring: algo.offspring,
            iterations: algo.iterations,
            neighbor_prob: algo.neighbor_prob,
            seed: algo.seed,
            llm: LlmConfig::default(),
            ga: GaParams::default(),
            de: DeParams::default(),
            output_dir: PathBuf::from("runs"),
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub algo: Option<AlgoId>,
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub output_dir: Option<PathBuf>,
}

/// A validated configuration with linear-unit physics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Inputs as given (dBm / dB), after overrides.
    pub file: ConfigFile,
    /// Linear-unit scenario description.
    pub scenario: ScenarioSpec,
    pub params: AlgoParams,
}

impl RunConfig {
    pub fn algo(&self) -> AlgoId {
        self.file.algo
    }

    pub fn backend(&self) -> BackendKind {
        self.file.backend
    }

    pub fn output_dir(&self) -> &Path {
        &self.file.output_dir
    }

    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let f = &file;
        if f.num_uavs == 0 {
            return Err(invalid("num_uavs", "must be >= 1"));
        }
        if f.num_users == 0 && f.user_positions.is_none() {
            return Err(invalid("num_users", "must be >= 1"));
        }
        if let Some(users) = &f.user_positions {
            if users.is_empty() {
                return Err(invalid("user_positions", "must not be empty"));
            }
            if users.len() != f.num_users {
                return Err(invalid(
                    "user_positions",
                    format!("has {} entries but num_users is {}", users.len(), f.num_users),
                ));
            }
            if let Some(w) = users
                .iter()
                .find(|w| w.iter().any(|c| !(f.area_min_m..=f.area_max_m).contains(c)))
            {
                return Err(invalid("user_positions", format!("{w:?} lies outside the area")));
            }
        }
        if !(f.area_min_m < f.area_max_m) {
            return Err(invalid("area_max_m", "must exceed area_min_m"));
        }
        if !(f.altitude_m >= 0.0 && f.altitude_m.is_finite()) {
            return Err(invalid("altitude_m", "must be >= 0"));
        }
        if !(f.p_min_dbm <= f.p_max_dbm) || !f.p_max_dbm.is_finite() || !f.p_min_dbm.is_finite() {
            return Err(invalid("p_max_dbm", "must be finite and >= p_min_dbm"));
        }
        if !(f.bandwidth_hz > 0.0 && f.bandwidth_hz.is_finite()) {
            return Err(invalid("bandwidth_hz", "must be positive"));
        }
        if !f.noise_dbm.is_finite() {
            return Err(invalid("noise_dbm", "must be finite"));
        }
        if !f.ref_gain_db.is_finite() {
            return Err(invalid("ref_gain_db", "must be finite"));
        }
        if !(f.rcs_min > 0.0) {
            return Err(invalid("rcs_min", "must be positive"));
        }
        if !(f.rcs_max >= f.rcs_min && f.rcs_max.is_finite()) {
            return Err(invalid("rcs_max", "must be finite and >= rcs_min"));
        }
        let params = AlgoParams {
            population: f.population,
            neighbor_size: f.neighbor_size,
            parents: f.parents,
            offspring: f.offspring,
            iterations: f.iterations,
            neighbor_prob: f.neighbor_prob,
            seed: f.seed,
        };
        if f.population < 2 {
            return Err(invalid("population", "must be >= 2"));
        }
        if !(1..=f.population).contains(&f.neighbor_size) {
            return Err(invalid("neighbor_size", format!("must be in 1..={}", f.population)));
        }
        if !(1..=f.population).contains(&f.parents) {
            return Err(invalid("parents", format!("must be in 1..={}", f.population)));
        }
        if f.offspring == 0 {
            return Err(invalid("offspring", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&f.neighbor_prob) {
            return Err(invalid("neighbor_prob", "must be in [0, 1]"));
        }
        f.llm.validate().map_err(|r| invalid("llm", r))?;
        f.ga.validate().map_err(|r| invalid("ga", r))?;
        f.de.validate().map_err(|r| invalid("de", r))?;
        if f.algo == AlgoId::Ledma && f.backend == BackendKind::Http {
            f.llm.api_key().map_err(|e| ConfigError::MissingApiKey(e.to_string()))?;
        }

        let constants = PhysicalConstants::new(dbm_to_mw(f.noise_dbm), db_to_linear(f.ref_gain_db), f.bandwidth_hz)
            .map_err(|e| invalid("noise_dbm", e.to_string()))?;
        let scenario = ScenarioSpec {
            num_uavs: f.num_uavs,
            num_users: f.user_positions.as_ref().map_or(f.num_users, Vec::len),
            altitude_m: f.altitude_m,
            area_min: f.area_min_m,
            area_max: f.area_max_m,
            p_min_mw: dbm_to_mw(f.p_min_dbm),
            p_max_mw: dbm_to_mw(f.p_max_dbm),
            rcs_min: f.rcs_min,
            rcs_max: f.rcs_max,
            constants,
            user_positions: f.user_positions.clone(),
        };
        Ok(Self { file, scenario, params })
    }
}

/// Parses a config string and applies overrides.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut file: ConfigFile = serde_json::from_str(text)?;
    if let Some(a) = overrides.algo {
        file.algo = a;
    }
    if let Some(s) = overrides.seed {
        file.seed = s;
    }
    if let Some(b) = overrides.backend {
        file.backend = b;
    }
    if let Some(o) = &overrides.output_dir {
        file.output_dir = o.clone();
    }
    RunConfig::from_file(file)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, &Overrides::default())
    }

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = parse("{}").unwrap();
        assert_eq!(cfg.params, AlgoParams::default());
        assert_eq!(cfg.params.population, 50);
        assert_eq!(cfg.scenario.num_uavs, 2);
        assert_eq!(cfg.scenario.num_users, 4);
        assert_eq!(cfg.scenario.altitude_m, 100.0);
        assert!((cfg.scenario.p_max_mw - 100.0).abs() < 1e-12);
        assert!((cfg.scenario.p_min_mw - 1.0).abs() < 1e-12);
        assert!((cfg.scenario.constants.ref_channel_gain - 1e-6).abs() < 1e-18);
        assert_eq!(cfg.scenario.constants.bandwidth_hz, 51.2e6);
        assert_eq!(cfg.algo(), AlgoId::Ledma);
        assert_eq!(cfg.backend(), BackendKind::Mock);
    }

    #[test]
    fn noise_dbm_is_converted() {
        let cfg = parse(r#"{"noise_dbm": -110}"#).unwrap();
        let n = cfg.scenario.constants.noise_power_mw;
        assert!((n / 1e-11 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse(r#"{"noise_dBm": -110}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        assert!(err.to_string().contains("noise_dBm"));
        assert!(parse(r#"{"llm": {"modle": "x"}}"#).is_err());
    }

    #[test]
    fn invalid_range_names_field() {
        for (text, field) in [
            (r#"{"num_uavs": 0}"#, "num_uavs"),
            (r#"{"parents": 60}"#, "parents"),
            (r#"{"neighbor_prob": 1.2}"#, "neighbor_prob"),
            (r#"{"p_min_dbm": 30}"#, "p_max_dbm"),
            (r#"{"rcs_min": 0}"#, "rcs_min"),
            (r#"{"altitude_m": -1}"#, "altitude_m"),
            (r#"{"ga": {"sbx_eta": -1}}"#, "ga"),
        ] {
            match parse(text) {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: expected invalid {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn http_backend_requires_key() {
        let text = r#"{"algo": "ledma", "backend": "http", "llm": {"api_key_env": "LEDMA_TEST_KEY_THAT_IS_NOT_SET"}}"#;
        assert!(matches!(parse(text), Err(ConfigError::MissingApiKey(_))));
        // Other algorithms never touch the backend.
        let text = r#"{"algo": "random", "backend": "http", "llm": {"api_key_env": "LEDMA_TEST_KEY_THAT_IS_NOT_SET"}}"#;
        assert!(parse(text).is_ok());
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides {
            algo: Some(AlgoId::MoeadDe),
            seed: Some(9),
            backend: None,
            output_dir: Some("elsewhere".into()),
        };
        let cfg = parse_config(r#"{"algo": "random", "seed": 3}"#, &o).unwrap();
        assert_eq!(cfg.algo(), AlgoId::MoeadDe);
        assert_eq!(cfg.params.seed, 9);
        assert_eq!(cfg.output_dir(), Path::new("elsewhere"));
    }

    #[test]
    fn explicit_users() {
        let cfg = parse(r#"{"num_users": 2, "user_positions": [[10, 20], [1500, 300]]}"#).unwrap();
        assert_eq!(cfg.scenario.user_positions.as_ref().unwrap().len(), 2);
        assert!(parse(r#"{"num_users": 2, "user_positions": [[10, 20]]}"#).is_err());
        assert!(parse(r#"{"num_users": 1, "user_positions": [[10, 2500]]}"#).is_err());
    }

    #[test]
    fn algo_names_round_trip() {
        for (name, id) in [
            ("ledma", AlgoId::Ledma),
            ("moead-ga", AlgoId::MoeadGa),
            ("moead-de", AlgoId::MoeadDe),
            ("random", AlgoId::Random),
        ] {
            assert_eq!(parse(&format!(r#"{{"algo": "{name}"}}"#)).unwrap().algo(), id);
            assert_eq!(id.to_string(), name);
        }
    }
}
