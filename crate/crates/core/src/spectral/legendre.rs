//! Legendre polynomials P_l on [-1, 1] via the three-term recurrence.

use crate::error::{Error, Result};

const L_MAX: u32 = 10_000;

/// P_l(x) by (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}.
///
/// Forward recurrence is stable on [-1, 1] (P_l is the dominant solution).
pub fn legendre_p(l: u32, x: f64) -> Result<f64> {
    if !(x.is_finite() && (-1.0..=1.0).contains(&x)) {
        return Err(Error::config(format!(
            "legendre_p: x = {x} outside [-1, 1]"
        )));
    }
    if l > L_MAX {
        return Err(Error::config(format!(
            "legendre_p: degree {l} above {L_MAX}"
        )));
    }
    if l == 0 {
        return Ok(1.0);
    }
    if l == 1 {
        return Ok(x);
    }
    let mut p_prev = 1.0;
    let mut p_curr = x;
    for k in 1..l {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p_curr - kf * p_prev) / (kf + 1.0);
        p_prev = p_curr;
        p_curr = p_next;
    }
    Ok(p_curr)
}

/// Spherical harmonic Y_l^0 evaluated at colatitude theta:
/// Y_l^0(theta) = sqrt((2l+1)/(4 pi)) P_l(cos theta).
pub fn spherical_y_l0(l: u32, theta: f64) -> Result<f64> {
    let pl = legendre_p(l, theta.cos().clamp(-1.0, 1.0))?;
    Ok(((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI)).sqrt() * pl)
}
