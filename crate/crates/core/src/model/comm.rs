use super::{Deployment, ModelError, PhysicalConstants, Scenario};

/// Squared free-space channel gain `rho0 / R^2`.
pub fn channel_power_gain_sq(distance_m: f64, consts: &PhysicalConstants) -> Result<f64, ModelError> {
    if !(distance_m > 0.0) {
        return Err(ModelError::ZeroDistance);
    }
    Ok(consts.ref_channel_gain / (distance_m * distance_m))
}

/// Squared gains `h^2_{k,m}`, row per UAV.
pub fn channel_gains_sq(dep: &Deployment, scn: &Scenario) -> Result<Vec<Vec<f64>>, ModelError> {
    dep.distances(scn)
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|r| channel_power_gain_sq(r, &scn.constants))
                .collect()
        })
        .collect()
}

/// SINR of every UAV-to-user link given squared gains and communication powers.
///
/// Interference at user `m` is the communication power of all other UAVs;
/// radar waveforms are orthogonal and do not interfere.
pub fn sinr_from_gains(gains_sq: &[Vec<f64>], p_com_mw: &[f64], noise_mw: f64) -> Vec<Vec<f64>> {
    let m_count = gains_sq.first().map_or(0, Vec::len);
    (0..gains_sq.len())
        .map(|k| {
            (0..m_count)
                .map(|m| {
                    let interference: f64 = (0..gains_sq.len())
                        .filter(|&other| other != k)
                        .map(|other| p_com_mw[other] * gains_sq[other][m])
                        .sum();
                    p_com_mw[k] * gains_sq[k][m] / (interference + noise_mw)
                })
                .collect()
        })
        .collect()
}

/// K x M SINR matrix for a deployment.
pub fn sinr_matrix(dep: &Deployment, scn: &Scenario) -> Result<Vec<Vec<f64>>, ModelError> {
    let gains = channel_gains_sq(dep, scn)?;
    Ok(sinr_from_gains(&gains, &dep.p_com_mw, scn.constants.noise_power_mw))
}

/// Proportional-fair utility from an SINR matrix: `sum_m ln(sum_k (B/M) log2(1 + gamma))`.
///
/// `None` when some user receives zero total rate.
pub fn utility_from_sinr(sinr: &[Vec<f64>], bandwidth_hz: f64) -> Option<f64> {
    let m_count = sinr.first().map_or(0, Vec::len);
    let share = bandwidth_hz / m_count as f64;
    let mut total = 0.0;
    for m in 0..m_count {
        let rate: f64 = sinr
            .iter()
            .map(|row| share * row[m].ln_1p() / std::f64::consts::LN_2)
            .sum();
        if !(rate > 0.0 && rate.is_finite()) {
            return None;
        }
        total += rate.ln();
    }
    Some(total)
}

/// Network utility `F1` of a deployment; `None` flags a degenerate point
/// (a user with zero total rate, or a UAV co-located with a user at zero altitude).
pub fn network_utility(dep: &Deployment, scn: &Scenario) -> Option<f64> {
    let sinr = sinr_matrix(dep, scn).ok()?;
    utility_from_sinr(&sinr, scn.constants.bandwidth_hz)
}
