//! Maslov index as a signed focal-point count.
//!
//! The index of a return at time t is the number of zeros, with multiplicity,
//! of the determinant of the normal Jacobi-field block along the geodesic
//! strictly between 0 and t, taken with the sign of t and reduced mod 4. The
//! time-reversal sign is forced by q(-t) = conj(q(t)) together with the
//! cocycle law. Zeros are enumerated in closed form: Jacobi fields are affine
//! in the flat torus and trigonometric on the round sphere.

use crate::error::{Error, Result};
use crate::geometry::{CotangentPoint, ModelManifold, Submanifold};

const ENDPOINT_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct MaslovData {
    /// Signed focal count reduced to {0, 1, 2, 3}.
    pub index_mod4: i32,
    /// Unsigned focal count along the path.
    pub focal_count: u32,
}

/// Focal zeros of the H-Jacobi determinant in (0, span) for a unit-speed
/// normal geodesic leaving H at parameter s with conormal orientation `eps`.
fn focal_times(model: &ModelManifold, h: &Submanifold, s: f64, eps: f64, span: f64) -> Vec<f64> {
    let _ = s;
    match h {
        Submanifold::EmbeddedCircle { radius, .. } => {
            // j(tau) = 1 + eps tau / r: a single zero at tau = r for the
            // inward orientation, none outward.
            if eps < 0.0 && *radius < span {
                vec![*radius]
            } else {
                Vec::new()
            }
        }
        // Flat geodesic H: j(tau) = 1, no focal points.
        Submanifold::AffineSubtorus { .. } => Vec::new(),
        // Point on the flat torus: the normal block is tau^{n-1}, nonzero on
        // (0, span).
        Submanifold::Point { .. } => Vec::new(),
        Submanifold::LatitudeCircle { theta0, radius } => {
            // j(tau) = sin(theta0 -+ tau/R)/sin(theta0): zeros where the
            // meridian hits a pole, every pi R thereafter.
            let _ = model;
            let first = if eps < 0.0 {
                // Northward (decreasing colatitude): pole at tau = R theta0.
                radius * theta0
            } else {
                radius * (std::f64::consts::PI - theta0)
            };
            let mut zeros = Vec::new();
            let mut tau = first;
            while tau < span {
                zeros.push(tau);
                tau += radius * std::f64::consts::PI;
            }
            zeros
        }
    }
}

/// Maslov index of the return (start, t); start must lie on SN*H.
pub fn maslov_index(
    model: &ModelManifold,
    h: &Submanifold,
    start: &CotangentPoint,
    t: f64,
) -> Result<MaslovData> {
    if t == 0.0 {
        return Ok(MaslovData {
            index_mod4: 0,
            focal_count: 0,
        });
    }
    let s = h.param_of_position(model, &start.x)?;
    let eps = orientation(model, h, s, start)?;
    let span = t.abs();
    let zeros = focal_times(
        model,
        h,
        s,
        if t > 0.0 { eps } else { -eps },
        span + ENDPOINT_GUARD,
    );
    if let Some(z) = zeros.last() {
        if (z - span).abs() < ENDPOINT_GUARD {
            return Err(Error::numerical(format!(
                "focal point within {ENDPOINT_GUARD:e} of the return time {t}"
            )));
        }
    }
    let count = zeros.iter().filter(|&&z| z < span).count() as i64;
    let signed = if t > 0.0 { count } else { -count };
    Ok(MaslovData {
        index_mod4: (signed.rem_euclid(4)) as i32,
        focal_count: count as u32,
    })
}

/// Sign of the covector on the outward conormal direction.
fn orientation(
    model: &ModelManifold,
    h: &Submanifold,
    s: f64,
    start: &CotangentPoint,
) -> Result<f64> {
    let coeffs = super::jacobian::conormal_coefficients(model, h, s, start)?;
    if coeffs.len() == 1 {
        Ok(coeffs[0].signum())
    } else {
        // Codimension > 1 kinds here have no focal points; sign is unused.
        Ok(1.0)
    }
}
