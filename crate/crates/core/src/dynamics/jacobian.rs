//! Transversality of conormal returns and the density Jacobian J_t.
//!
//! T(N*H) is parametrized by arclength along H and by the coefficients on the
//! unit conormal frame. In these parametrizations the natural density's
//! |g_H|^{1/2} factors are exactly one at both ends, so J_t is the absolute
//! determinant of dG^t written between the two bases.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::sphere_chart::{self, Chart};
use crate::geometry::{CotangentPoint, ModelManifold, Submanifold};

use super::flow::TangentFlowMatrix;

/// Singular values of the off-T(N*H) residual below this make a return
/// transversal (the tangent image lies in T(N*H)).
pub const TRANSVERSAL_TOL: f64 = 1e-6;

/// Result of pushing T(N*H) through dG^t.
#[derive(Debug, Clone)]
pub struct ConormalTransport {
    pub transversal: bool,
    /// Largest singular value of the component of the image outside T(N*H).
    pub residual: f64,
    /// n x n matrix of the induced map when transversal.
    pub map: Option<DMatrix<f64>>,
    /// |det map| with the (unit) density factors applied.
    pub jacobian: Option<f64>,
}

/// Columns spanning T_z(N*H) at the point with H parameter `s` and conormal
/// coefficients `rho`, expressed in the chart `chart` (2n x n matrix).
pub fn conormal_tangent_basis(
    model: &ModelManifold,
    h: &Submanifold,
    s: f64,
    rho: &[f64],
    chart: Chart,
) -> Result<DMatrix<f64>> {
    let n = model.dim();
    let d = h.dim();
    let mut basis = DMatrix::zeros(2 * n, n);
    let frame = h.conormal_frame(s);
    let dframe = h.dconormal_frame(s);
    let mut col = 0;
    if d == 1 {
        let speed = h.speed(model, s)?;
        let dx = h.dposition(s) / speed;
        let mut dxi = nalgebra::DVector::zeros(n);
        for (a, df) in dframe.iter().enumerate() {
            dxi += df * (rho[a] / speed);
        }
        for i in 0..n {
            basis[(i, col)] = dx[i];
            basis[(n + i, col)] = dxi[i];
        }
        col += 1;
    }
    for nu in frame.iter() {
        for i in 0..n {
            basis[(n + i, col)] = nu[i];
        }
        col += 1;
    }
    debug_assert_eq!(col, n);
    if chart != Chart::Polar {
        // Re-express in the chart the tangent-flow matrix actually uses.
        let sphere = model.as_sphere()?;
        let pos = h.position(s);
        let mut xi = nalgebra::DVector::zeros(n);
        for (a, nu) in frame.iter().enumerate() {
            xi += nu * rho[a];
        }
        let trans = sphere_chart::transition_jacobian(
            sphere.radius,
            Chart::Polar,
            chart,
            [pos[0], pos[1]],
            [xi[0], xi[1]],
        )?;
        basis = trans * basis;
    }
    Ok(basis)
}

/// Conormal coefficients of a covector at H parameter `s`.
pub fn conormal_coefficients(
    model: &ModelManifold,
    h: &Submanifold,
    s: f64,
    z: &CotangentPoint,
) -> Result<Vec<f64>> {
    let ginv = model.inverse_metric_at(&z.x)?;
    Ok(h.conormal_frame(s)
        .iter()
        .map(|nu| (ginv.clone() * nu).dot(&z.xi))
        .collect())
}

/// Push T(N*H) at (s0, rho0) through `tf` and express it on T(N*H) at
/// (s1, rho1); decides transversality and computes J_t.
pub fn conormal_transport(
    model: &ModelManifold,
    h: &Submanifold,
    s0: f64,
    rho0: &[f64],
    s1: f64,
    rho1: &[f64],
    tf: &TangentFlowMatrix,
) -> Result<ConormalTransport> {
    let b0 = conormal_tangent_basis(model, h, s0, rho0, tf.start_chart)?;
    let b1 = conormal_tangent_basis(model, h, s1, rho1, tf.arrival_chart)?;
    let image = &tf.matrix * b0;

    // Least-squares coefficients of the image on the arrival basis.
    let gram = b1.transpose() * &b1;
    let rhs = b1.transpose() * &image;
    let map = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numerical("conormal basis is degenerate"))?;
    let resid = &image - &b1 * &map;
    let residual = resid
        .svd(false, false)
        .singular_values
        .as_slice()
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let transversal = residual <= TRANSVERSAL_TOL;
    if transversal {
        let jac = map.determinant().abs();
        if !(jac > 0.0) {
            return Err(Error::invariant(
                "transversal return with vanishing Jacobian",
            ));
        }
        Ok(ConormalTransport {
            transversal,
            residual,
            map: Some(map),
            jacobian: Some(jac),
        })
    } else {
        Ok(ConormalTransport {
            transversal,
            residual,
            map: None,
            jacobian: None,
        })
    }
}
