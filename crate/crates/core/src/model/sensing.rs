use serde::{Deserialize, Serialize};

use super::{Deployment, Scenario};

/// CRB trace assigned to a user whose Fisher information is singular.
pub const CRB_PENALTY: f64 = 1e12;

/// Relative determinant threshold below which the 2x2 FIM counts as singular.
pub const DET_REL_THRESHOLD: f64 = 1e-12;

/// Per-transmitter Fisher information coefficients for one user.
///
/// For a radar power vector `p` the FIM of the user position is
/// `[[b_a.p, b_c.p], [b_c.p, b_b.p]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FimComponents {
    pub b_a: Vec<f64>,
    pub b_b: Vec<f64>,
    pub b_c: Vec<f64>,
}

impl FimComponents {
    /// `(b_a.p, b_b.p, b_c.p)`.
    pub fn project(&self, p: &[f64]) -> (f64, f64, f64) {
        (dot(&self.b_a, p), dot(&self.b_b, p), dot(&self.b_c, p))
    }

    /// `p^T Q p = (b_a.p)(b_b.p) - (b_c.p)^2`, the FIM determinant.
    pub fn determinant(&self, p: &[f64]) -> f64 {
        let (a, b, c) = self.project(p);
        a * b - c * c
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// FIM coefficients of user `m`, summing over every receiver `j` including `j = k`.
///
/// Path-loss weight `alpha_{k,m,j} = 1 / (R_{k,m}^2 R_{j,m}^2)`.
/// Requires all UAV-user distances to be positive.
pub fn fim_components(dep: &Deployment, scn: &Scenario, m: usize) -> FimComponents {
    let w = scn.user_positions[m];
    let k_count = dep.num_uavs();
    // Per UAV: squared range and direction cosines toward the user.
    let geo: Vec<(f64, f64, f64)> = dep
        .uav_xy
        .iter()
        .map(|q| {
            let dx = q[0] - w[0];
            let dy = q[1] - w[1];
            let r2 = dx * dx + dy * dy + scn.altitude_m * scn.altitude_m;
            let r = r2.sqrt();
            (r2, dx / r, dy / r)
        })
        .collect();

    let xi = scn.constants.xi;
    let mut out = FimComponents {
        b_a: vec![0.0; k_count],
        b_b: vec![0.0; k_count],
        b_c: vec![0.0; k_count],
    };
    for (k, &(rk2, cxk, cyk)) in geo.iter().enumerate() {
        let (mut sa, mut sb, mut sc) = (0.0, 0.0, 0.0);
        for (j, &(rj2, cxj, cyj)) in geo.iter().enumerate() {
            let l = scn.rcs(k, m, j);
            let weight = l * l / (rk2 * rj2);
            let ex = cxk + cxj;
            let ey = cyk + cyj;
            sa += weight * ex * ex;
            sb += weight * ey * ey;
            sc += weight * ex * ey;
        }
        out.b_a[k] = xi * sa;
        out.b_b[k] = xi * sb;
        out.b_c[k] = xi * sc;
    }
    out
}

/// Trace of the position CRB, `(a.p) / (p^T Q p)`.
///
/// Returns [`CRB_PENALTY`] when the power vector is all zero or the FIM is
/// singular to within [`DET_REL_THRESHOLD`].
pub fn crb_trace(fim: &FimComponents, p_rad: &[f64]) -> f64 {
    if p_rad.iter().all(|&p| p == 0.0) {
        return CRB_PENALTY;
    }
    let (a, b, c) = fim.project(p_rad);
    let diag = a * b;
    let det = diag - c * c;
    if !(diag > 0.0) || det <= DET_REL_THRESHOLD * diag {
        return CRB_PENALTY;
    }
    let trace = (a + b) / det;
    if trace.is_finite() {
        trace
    } else {
        CRB_PENALTY
    }
}

/// CRB traces of all users for a deployment.
pub fn user_crbs(dep: &Deployment, scn: &Scenario) -> Vec<f64> {
    let dists = dep.distances(scn);
    (0..scn.num_users)
        .map(|m| {
            if dists.iter().any(|row| !(row[m] > 0.0)) {
                CRB_PENALTY
            } else {
                crb_trace(&fim_components(dep, scn, m), &dep.p_rad_mw)
            }
        })
        .collect()
}
