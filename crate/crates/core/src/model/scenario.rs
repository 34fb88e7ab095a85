use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::rng;

/// Speed of light used for the delay-resolution factor, m/s.
pub const LIGHT_SPEED_MPS: f64 = 2.998e8;

/// Converts dBm (or dB relative to 1 mW) to linear milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts a dB gain to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Radio constants in linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub noise_power_mw: f64,
    /// Channel power gain at the 1 m reference distance.
    pub ref_channel_gain: f64,
    pub bandwidth_hz: f64,
    pub light_speed_mps: f64,
    /// `8 pi^2 B^2 / (sigma_w^2 c^2)`.
    pub xi: f64,
}

impl PhysicalConstants {
    pub fn new(noise_power_mw: f64, ref_channel_gain: f64, bandwidth_hz: f64) -> Result<Self, ModelError> {
        for (name, v) in [
            ("noise_power_mw", noise_power_mw),
            ("ref_channel_gain", ref_channel_gain),
            ("bandwidth_hz", bandwidth_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidScenario(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let c = LIGHT_SPEED_MPS;
        let xi = 8.0 * std::f64::consts::PI.powi(2) * bandwidth_hz.powi(2) / (noise_power_mw * c * c);
        Ok(Self {
            noise_power_mw,
            ref_channel_gain,
            bandwidth_hz,
            light_speed_mps: c,
            xi,
        })
    }
}

/// The immutable physical world of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub num_uavs: usize,
    pub num_users: usize,
    pub altitude_m: f64,
    pub user_positions: Vec<[f64; 2]>,
    pub area_min: f64,
    pub area_max: f64,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    /// `|l_{k,m,j}|` flattened in `(k, m, j)` row-major order.
    rcs_mag: Vec<f64>,
    pub constants: PhysicalConstants,
}

/// Inputs for sampling a [`Scenario`]; users and RCS magnitudes are drawn from a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub num_uavs: usize,
    pub num_users: usize,
    pub altitude_m: f64,
    pub area_min: f64,
    pub area_max: f64,
    pub p_min_mw: f64,
    pub p_max_mw: f64,
    pub rcs_min: f64,
    pub rcs_max: f64,
    pub constants: PhysicalConstants,
    /// Explicit user positions; drawn uniformly over the area when `None`.
    pub user_positions: Option<Vec<[f64; 2]>>,
}

impl Default for ScenarioSpec {
    /// Two UAVs, four users, 2 km square, H = 100 m, 0..20 dBm,
    /// -110 dBm noise, -60 dB reference gain, 51.2 MHz, RCS in U[0.8, 1].
    fn default() -> Self {
        Self {
            num_uavs: 2,
            num_users: 4,
            altitude_m: 100.0,
            area_min: 0.0,
            area_max: 2000.0,
            p_min_mw: dbm_to_mw(0.0),
            p_max_mw: dbm_to_mw(20.0),
            rcs_min: 0.8,
            rcs_max: 1.0,
            constants: PhysicalConstants::new(dbm_to_mw(-110.0), db_to_linear(-60.0), 51.2e6)
                .expect("default constants are valid"),
            user_positions: None,
        }
    }
}

impl ScenarioSpec {
    /// Draws user positions (if not given) and then all RCS magnitudes from one seeded stream.
    pub fn sample(&self, seed: u64) -> Result<Scenario, ModelError> {
        if !(self.rcs_min > 0.0 && self.rcs_min <= self.rcs_max && self.rcs_max.is_finite()) {
            return Err(ModelError::InvalidScenario(format!(
                "RCS bounds must satisfy 0 < min <= max, got [{}, {}]",
                self.rcs_min, self.rcs_max
            )));
        }
        if !(self.area_min < self.area_max) {
            return Err(ModelError::InvalidScenario(format!(
                "area_min {} must be below area_max {}",
                self.area_min, self.area_max
            )));
        }
        let mut rng = rng::from_seed(seed);
        let users = match &self.user_positions {
            Some(p) => p.clone(),
            None => (0..self.num_users)
                .map(|_| {
                    [
                        rng.random_range(self.area_min..=self.area_max),
                        rng.random_range(self.area_min..=self.area_max),
                    ]
                })
                .collect(),
        };
        let n = self.num_uavs * self.num_users * self.num_uavs;
        let rcs = (0..n)
            .map(|_| {
                if self.rcs_min == self.rcs_max {
                    self.rcs_min
                } else {
                    rng.random_range(self.rcs_min..=self.rcs_max)
                }
            })
            .collect();
        Scenario::new(
            self.num_uavs,
            self.altitude_m,
            users,
            (self.area_min, self.area_max),
            (self.p_min_mw, self.p_max_mw),
            rcs,
            self.constants.clone(),
        )
    }
}

impl Scenario {
    pub fn new(
        num_uavs: usize,
        altitude_m: f64,
        user_positions: Vec<[f64; 2]>,
        area: (f64, f64),
        power_mw: (f64, f64),
        rcs_mag: Vec<f64>,
        constants: PhysicalConstants,
    ) -> Result<Self, ModelError> {
        let invalid = |msg: String| Err(ModelError::InvalidScenario(msg));
        let num_users = user_positions.len();
        if num_uavs == 0 || num_users == 0 {
            return invalid(format!(
                "need at least one UAV and one user, got K={num_uavs} M={num_users}"
            ));
        }
        if !(altitude_m >= 0.0 && altitude_m.is_finite()) {
            return invalid(format!("altitude must be >= 0, got {altitude_m}"));
        }
        let (area_min, area_max) = area;
        if !(area_min < area_max) {
            return invalid(format!("area_min {area_min} must be below area_max {area_max}"));
        }
        if let Some(w) = user_positions
            .iter()
            .find(|w| w.iter().any(|c| !(area_min..=area_max).contains(c)))
        {
            return invalid(format!("user position {w:?} outside area [{area_min}, {area_max}]"));
        }
        let (p_min_mw, p_max_mw) = power_mw;
        if !(p_min_mw > 0.0 && p_min_mw <= p_max_mw && p_max_mw.is_finite()) {
            return invalid(format!(
                "power bounds must satisfy 0 < p_min <= p_max, got [{p_min_mw}, {p_max_mw}]"
            ));
        }
        if rcs_mag.len() != num_uavs * num_users * num_uavs {
            return invalid(format!(
                "rcs_mag must hold K*M*K = {} values, got {}",
                num_uavs * num_users * num_uavs,
                rcs_mag.len()
            ));
        }
        if rcs_mag.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return invalid("all RCS magnitudes must be positive and finite".into());
        }
        Ok(Self {
            num_uavs,
            num_users,
            altitude_m,
            user_positions,
            area_min,
            area_max,
            p_min_mw,
            p_max_mw,
            rcs_mag,
            constants,
        })
    }

    /// `|l_{k,m,j}|`: transmitter `k`, user `m`, receiver `j`.
    pub fn rcs(&self, k: usize, m: usize, j: usize) -> f64 {
        self.rcs_mag[(k * self.num_users + m) * self.num_uavs + j]
    }

    pub fn rcs_flat(&self) -> &[f64] {
        &self.rcs_mag
    }

    /// Genome length: four genes per UAV.
    pub fn dim(&self) -> usize {
        4 * self.num_uavs
    }
}
