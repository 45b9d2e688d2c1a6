//! Polar chart atlas for the round 2-sphere.
//!
//! Chart `Polar` is colatitude/azimuth about the +z axis, chart `Rotated` the
//! same about the +x axis. sin^2(theta_A) + sin^2(theta_B) >= 1, so every
//! point is safely covered by one of the two. Covectors are carried as their
//! ambient tangential representatives (index-raised under the round metric),
//! which is what the closed-form great-circle flow acts on.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Colatitude about +z, azimuth from +x toward +y.
    Polar,
    /// Colatitude about +x, azimuth from +y toward +z.
    Rotated,
}

/// Ambient rotation mapping the Polar frame onto the chart's own frame:
/// columns are the images of (e_x, e_y, e_z).
fn chart_rotation(chart: Chart) -> Matrix3<f64> {
    match chart {
        Chart::Polar => Matrix3::identity(),
        // (x, y, z) -> (y, z, x): +z axis of the polar formulas becomes +x.
        Chart::Rotated => Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0),
    }
}

/// Phase point in ambient form: position on the sphere and tangential covector.
#[derive(Debug, Clone, Copy)]
pub struct AmbientPhase {
    pub pos: Vector3<f64>,
    pub cov: Vector3<f64>,
}

fn polar_basis(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let xhat = Vector3::new(st * cp, st * sp, ct);
    let e_theta = Vector3::new(ct * cp, ct * sp, -st);
    let e_phi = Vector3::new(-sp, cp, 0.0);
    (xhat, e_theta, e_phi)
}

/// Chart coordinates (theta, phi, xi_theta, xi_phi) -> ambient phase.
pub fn to_ambient(radius: f64, chart: Chart, q: [f64; 2], xi: [f64; 2]) -> AmbientPhase {
    let (theta, phi) = (q[0], q[1]);
    let (xhat, e_theta, e_phi) = polar_basis(theta, phi);
    let st = theta.sin();
    let pos = radius * xhat;
    // Covector with <cov, R e_theta> = xi_theta, <cov, R sin(theta) e_phi> = xi_phi.
    let cov = (xi[0] / radius) * e_theta + (xi[1] / (radius * st)) * e_phi;
    let rot = chart_rotation(chart);
    AmbientPhase {
        pos: rot * pos,
        cov: rot * cov,
    }
}

/// Ambient phase -> chart coordinates. Errors at the chart's poles.
pub fn from_ambient(
    radius: f64,
    chart: Chart,
    phase: &AmbientPhase,
) -> Result<([f64; 2], [f64; 2])> {
    let rot = chart_rotation(chart);
    let pos = rot.transpose() * phase.pos;
    let cov = rot.transpose() * phase.cov;
    let theta = (pos.z / radius).clamp(-1.0, 1.0).acos();
    let st = theta.sin();
    if st < 1e-12 {
        return Err(Error::unsupported(
            "sphere chart: point at a pole of the requested chart",
        ));
    }
    let phi = pos.y.atan2(pos.x).rem_euclid(2.0 * std::f64::consts::PI);
    let (_, e_theta, e_phi) = polar_basis(theta, phi);
    let xi_theta = radius * cov.dot(&e_theta);
    let xi_phi = radius * st * cov.dot(&e_phi);
    Ok(([theta, phi], [xi_theta, xi_phi]))
}

/// How far from this chart's poles a point sits: sin(theta) in the chart.
pub fn pole_distance(radius: f64, chart: Chart, pos: &Vector3<f64>) -> f64 {
    let rot = chart_rotation(chart);
    let p = rot.transpose() * pos;
    let ct = (p.z / radius).clamp(-1.0, 1.0);
    (1.0 - ct * ct).max(0.0).sqrt()
}

/// Pick the chart with the larger pole distance for a point.
pub fn safest_chart(radius: f64, pos: &Vector3<f64>) -> Chart {
    if pole_distance(radius, Chart::Polar, pos) >= pole_distance(radius, Chart::Rotated, pos) {
        Chart::Polar
    } else {
        Chart::Rotated
    }
}

/// 6x4 Jacobian of `to_ambient` at (q, xi).
pub fn d_to_ambient(radius: f64, chart: Chart, q: [f64; 2], xi: [f64; 2]) -> DMatrix<f64> {
    let (theta, phi) = (q[0], q[1]);
    let (st, ct) = theta.sin_cos();
    let (xhat, e_theta, e_phi) = polar_basis(theta, phi);
    // Frame derivatives.
    let de_theta_dtheta = -xhat;
    let de_theta_dphi = ct * e_phi;
    let de_phi_dphi = -(st * xhat + ct * e_theta);

    let dpos_dtheta = radius * e_theta;
    let dpos_dphi = radius * st * e_phi;

    let a = xi[0] / radius;
    let b = xi[1] / (radius * st);
    let dcov_dtheta = a * de_theta_dtheta - xi[1] * ct / (radius * st * st) * e_phi;
    let dcov_dphi = a * de_theta_dphi + b * de_phi_dphi;
    let dcov_dxit = e_theta / radius;
    let dcov_dxip = e_phi / (radius * st);

    let rot = chart_rotation(chart);
    let mut j = DMatrix::zeros(6, 4);
    let cols: [(usize, Vector3<f64>, Vector3<f64>); 4] = [
        (0, dpos_dtheta, dcov_dtheta),
        (1, dpos_dphi, dcov_dphi),
        (2, Vector3::zeros(), dcov_dxit),
        (3, Vector3::zeros(), dcov_dxip),
    ];
    for (c, dp, dc) in cols {
        let rp = rot * dp;
        let rc = rot * dc;
        for r in 0..3 {
            j[(r, c)] = rp[r];
            j[(r + 3, c)] = rc[r];
        }
    }
    j
}

/// 4x6 Jacobian of `from_ambient` at the given ambient phase.
pub fn d_from_ambient(radius: f64, chart: Chart, phase: &AmbientPhase) -> Result<DMatrix<f64>> {
    let rot = chart_rotation(chart);
    let pos = rot.transpose() * phase.pos;
    let cov = rot.transpose() * phase.cov;
    let theta = (pos.z / radius).clamp(-1.0, 1.0).acos();
    let st = theta.sin();
    if st < 1e-12 {
        return Err(Error::unsupported(
            "sphere chart: differential requested at a chart pole",
        ));
    }
    let ct = theta.cos();
    let phi = pos.y.atan2(pos.x);
    let (xhat, e_theta, e_phi) = polar_basis(theta, phi);
    let rho2 = pos.x * pos.x + pos.y * pos.y;

    // theta = acos(z/R), phi = atan2(y, x)
    let dtheta_dpos = Vector3::new(0.0, 0.0, -1.0 / (radius * st));
    let dphi_dpos = Vector3::new(-pos.y / rho2, pos.x / rho2, 0.0);

    let de_theta_dtheta = -xhat;
    let de_theta_dphi = ct * e_phi;
    let de_phi_dphi = -(st * xhat + ct * e_theta);

    // xi_theta = R <cov, e_theta(theta, phi)>
    let dxit_dpos =
        radius * (cov.dot(&de_theta_dtheta) * dtheta_dpos + cov.dot(&de_theta_dphi) * dphi_dpos);
    let dxit_dcov = radius * e_theta;
    // xi_phi = R sin(theta) <cov, e_phi(phi)>
    let ce = cov.dot(&e_phi);
    let dxip_dpos = radius * (ct * ce * dtheta_dpos + st * cov.dot(&de_phi_dphi) * dphi_dpos);
    let dxip_dcov = radius * st * e_phi;

    let mut j = DMatrix::zeros(4, 6);
    let rows: [(usize, Vector3<f64>, Vector3<f64>); 4] = [
        (0, dtheta_dpos, Vector3::zeros()),
        (1, dphi_dpos, Vector3::zeros()),
        (2, dxit_dpos, dxit_dcov),
        (3, dxip_dpos, dxip_dcov),
    ];
    for (r, dp, dc) in rows {
        // Derivatives w.r.t. the rotated ambient coordinates; undo the rotation.
        let gp = rot * dp;
        let gc = rot * dc;
        for c in 0..3 {
            j[(r, c)] = gp[c];
            j[(r, c + 3)] = gc[c];
        }
    }
    Ok(j)
}

/// Closed-form great-circle flow for time t on the sphere of the given radius.
///
/// Valid on the constraint set |pos| = R, pos . cov = 0; the analyst's flow
/// moves the base point at unit speed for any covector magnitude.
pub fn ambient_flow(radius: f64, phase: &AmbientPhase, t: f64) -> AmbientPhase {
    let p = phase.cov.norm();
    let alpha = t / radius;
    let (sa, ca) = alpha.sin_cos();
    let uhat = phase.cov / p;
    AmbientPhase {
        pos: ca * phase.pos + sa * radius * uhat,
        cov: ca * phase.cov - sa * (p / radius) * phase.pos,
    }
}

/// 6x6 Jacobian of `ambient_flow` in the free ambient variables.
pub fn d_ambient_flow(radius: f64, phase: &AmbientPhase, t: f64) -> DMatrix<f64> {
    let p = phase.cov.norm();
    let alpha = t / radius;
    let (sa, ca) = alpha.sin_cos();
    let uhat = phase.cov / p;
    // d uhat = (I - uhat uhat^T)/p dcov ; d p = uhat^T dcov
    let mut j = DMatrix::zeros(6, 6);
    for r in 0..3 {
        // dpos_t/dpos = ca I
        j[(r, r)] = ca;
        // dcov_t/dcov = ca I
        j[(r + 3, r + 3)] = ca;
        for c in 0..3 {
            let delta = if r == c { 1.0 } else { 0.0 };
            // dpos_t/dcov = sa R (I - uhat uhat^T)/p
            j[(r, c + 3)] = sa * radius * (delta - uhat[r] * uhat[c]) / p;
            // dcov_t/dpos = -sa (p/R) I
            if r == c {
                j[(r + 3, c)] = -sa * p / radius;
            }
            // dcov_t/dcov += -sa/R pos (uhat^T dcov)
            j[(r + 3, c + 3)] += -sa / radius * phase.pos[r] * uhat[c];
        }
    }
    j
}

/// Exact transition Jacobian between charts at a phase point.
pub fn transition_jacobian(
    radius: f64,
    from: Chart,
    to: Chart,
    q: [f64; 2],
    xi: [f64; 2],
) -> Result<DMatrix<f64>> {
    let amb = to_ambient(radius, from, q, xi);
    let d_in = d_to_ambient(radius, from, q, xi);
    let d_out = d_from_ambient(radius, to, &amb)?;
    Ok(d_out * d_in)
}

/// Convenience wrapper returning DVector forms for the dynamics layer.
pub fn ambient_from_state(radius: f64, chart: Chart, state: &DVector<f64>) -> AmbientPhase {
    to_ambient(radius, chart, [state[0], state[1]], [state[2], state[3]])
}

pub fn state_from_ambient(radius: f64, chart: Chart, phase: &AmbientPhase) -> Result<DVector<f64>> {
    let (q, xi) = from_ambient(radius, chart, phase)?;
    Ok(DVector::from_vec(vec![q[0], q[1], xi[0], xi[1]]))
}
