//! ISAC physics and the bi-objective map.
//!
//! Powers are linear milliwatts throughout; dBm conversion happens once when a
//! scenario is built. Evaluation is pure: a [`Scenario`] is immutable and every
//! function here can be called from many threads at once.

mod comm;
mod deployment;
mod scenario;
mod sensing;

use thiserror::Error;

pub use comm::{
    channel_gains_sq, channel_power_gain_sq, network_utility, sinr_from_gains, sinr_matrix, utility_from_sinr,
};
pub use deployment::{clamp_unit, decode, distance, Deployment};
pub use scenario::{db_to_linear, dbm_to_mw, PhysicalConstants, Scenario, ScenarioSpec, LIGHT_SPEED_MPS};
pub use sensing::{crb_trace, fim_components, user_crbs, FimComponents, CRB_PENALTY, DET_REL_THRESHOLD};

use crate::moead::Problem;
use crate::ObjectiveVector;

/// Value of the negated utility when some user gets zero total rate.
pub const UTILITY_PENALTY: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("distance between UAV and user is zero")]
    ZeroDistance,
    #[error("decision vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Objectives of a deployment: `(-F1, ln sum_m tr(C_m))`.
pub fn deployment_objectives(dep: &Deployment, scn: &Scenario) -> ObjectiveVector {
    let f1 = network_utility(dep, scn).map_or(UTILITY_PENALTY, |u| -u);
    let f2 = user_crbs(dep, scn).iter().sum::<f64>().ln();
    ObjectiveVector::new(f1, f2)
}

/// Decodes a normalized genome and evaluates both objectives.
pub fn objectives(x: &[f64], scn: &Scenario) -> Result<ObjectiveVector, ModelError> {
    Ok(deployment_objectives(&decode(x, scn)?, scn))
}

/// True when either objective carries a degeneracy penalty.
///
/// A single penalized user already lifts `f2` above `ln(CRB_PENALTY)`, far
/// beyond any physical CRB.
pub fn is_penalized(f: &ObjectiveVector) -> bool {
    f.f1 >= UTILITY_PENALTY || f.f2 >= CRB_PENALTY.ln()
}

impl Problem for Scenario {
    fn dim(&self) -> usize {
        Scenario::dim(self)
    }

    fn evaluate(&self, x: &[f64]) -> ObjectiveVector {
        objectives(x, self).expect("framework always passes vectors of length dim()")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_scenario() -> Scenario {
        ScenarioSpec::default().sample(2024).unwrap()
    }

    #[test]
    fn midpoint_genome_is_finite_and_stable() {
        let scn = default_scenario();
        let a = objectives(&[0.5; 8], &scn).unwrap();
        let b = objectives(&[0.5; 8], &scn).unwrap();
        assert_eq!(a.f1.to_bits(), b.f1.to_bits());
        assert_eq!(a.f2.to_bits(), b.f2.to_bits());
        assert!(a.f1.is_finite() && a.f2.is_finite());
        // Both UAVs stacked at the center: rank-deficient FIM for every user.
        assert!(is_penalized(&a));
    }

    #[test]
    fn all_communication_power_zero() {
        let scn = default_scenario();
        let x = [0.2, 0.7, 0.5, 0.0, 0.9, 0.1, 0.8, 0.0];
        let f = objectives(&x, &scn).unwrap();
        assert_eq!(f.f1, UTILITY_PENALTY);
        assert!(f.f2.is_finite() && f.f2 < CRB_PENALTY.ln());
    }

    #[test]
    fn swapping_uavs_with_symmetric_rcs() {
        let spec = ScenarioSpec {
            rcs_min: 0.85,
            rcs_max: 0.85,
            ..ScenarioSpec::default()
        };
        let scn = spec.sample(11).unwrap();
        let x = [0.1, 0.3, 0.6, 0.4, 0.8, 0.7, 0.2, 0.9];
        let swapped = [0.8, 0.7, 0.2, 0.9, 0.1, 0.3, 0.6, 0.4];
        let a = objectives(&x, &scn).unwrap();
        let b = objectives(&swapped, &scn).unwrap();
        assert!((a.f1 - b.f1).abs() < 1e-12 * a.f1.abs());
        assert!((a.f2 - b.f2).abs() < 1e-12 * a.f2.abs().max(1.0));
    }

    #[test]
    fn single_uav_always_penalized_in_f2() {
        let scn = ScenarioSpec {
            num_uavs: 1,
            ..ScenarioSpec::default()
        }
        .sample(5)
        .unwrap();
        for x in [[0.1, 0.2, 0.3, 0.4], [0.9, 0.5, 1.0, 0.0], [0.33, 0.77, 0.0, 0.5]] {
            let f = objectives(&x, &scn).unwrap();
            let expected = (scn.num_users as f64 * CRB_PENALTY).ln();
            assert_eq!(f.f2, expected);
        }
    }

    #[test]
    fn wrong_length_is_an_error() {
        assert!(objectives(&[0.5; 7], &default_scenario()).is_err());
    }
}
