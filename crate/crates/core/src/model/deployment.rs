use serde::{Deserialize, Serialize};

use super::{ModelError, Scenario};

/// 3-D distance between a UAV at `altitude` above `uav_xy` and a ground user.
pub fn distance(uav_xy: [f64; 2], altitude: f64, user_xy: [f64; 2]) -> f64 {
    let dx = uav_xy[0] - user_xy[0];
    let dy = uav_xy[1] - user_xy[1];
    (dx * dx + dy * dy + altitude * altitude).sqrt()
}

/// Decoded UAV positions and power split, powers in linear mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub uav_xy: Vec<[f64; 2]>,
    pub p_rad_mw: Vec<f64>,
    pub p_com_mw: Vec<f64>,
}

impl Deployment {
    pub fn num_uavs(&self) -> usize {
        self.uav_xy.len()
    }

    /// Checks the power and location constraints against `scn`, with a small
    /// relative slack on the power sum for rounding.
    pub fn is_feasible(&self, scn: &Scenario) -> bool {
        let tol = 1e-12 * scn.p_max_mw;
        self.num_uavs() == scn.num_uavs
            && self
                .uav_xy
                .iter()
                .all(|q| q.iter().all(|c| (scn.area_min..=scn.area_max).contains(c)))
            && self
                .p_rad_mw
                .iter()
                .zip(&self.p_com_mw)
                .all(|(&r, &c)| r >= 0.0 && c >= 0.0 && r + c >= scn.p_min_mw - tol && r + c <= scn.p_max_mw + tol)
    }

    /// `R_{k,m}` for every UAV `k` and user `m`, row per UAV.
    pub fn distances(&self, scn: &Scenario) -> Vec<Vec<f64>> {
        self.uav_xy
            .iter()
            .map(|&q| {
                scn.user_positions
                    .iter()
                    .map(|&w| distance(q, scn.altitude_m, w))
                    .collect()
            })
            .collect()
    }
}

/// Maps a normalized genome onto a feasible deployment.
///
/// Per UAV the genes are `(x, y, p_tx, beta)`: positions scale linearly over
/// the area, `p_tx` linearly in mW over `[p_min, p_max]`, and `beta` is the
/// fraction of `p_tx` spent on communication. Genes are clamped to `[0, 1]`.
pub fn decode(x: &[f64], scn: &Scenario) -> Result<Deployment, ModelError> {
    if x.len() != scn.dim() {
        return Err(ModelError::WrongLength {
            expected: scn.dim(),
            got: x.len(),
        });
    }
    let span = scn.area_max - scn.area_min;
    let k = scn.num_uavs;
    let mut dep = Deployment {
        uav_xy: Vec::with_capacity(k),
        p_rad_mw: Vec::with_capacity(k),
        p_com_mw: Vec::with_capacity(k),
    };
    for genes in x.chunks_exact(4) {
        let g: [f64; 4] = std::array::from_fn(|i| clamp_unit(genes[i]));
        dep.uav_xy
            .push([scn.area_min + g[0] * span, scn.area_min + g[1] * span]);
        let p_tx = scn.p_min_mw + g[2] * (scn.p_max_mw - scn.p_min_mw);
        let p_com = g[3] * p_tx;
        dep.p_com_mw.push(p_com);
        dep.p_rad_mw.push(p_tx - p_com);
    }
    Ok(dep)
}

/// Clamps into `[0, 1]`; NaN maps to 0.
pub fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}
