//! Shared numerical kernels: compensated summation, double-double arithmetic,
//! bracketing root/minimum search, and fixed quadrature rules.

pub mod dd;
pub mod quad;
pub mod roots;
pub mod sum;

pub use dd::Dd;
pub use sum::KahanSum;

/// Round `x` to `sig` significant decimal digits.
///
/// Used when an output format pins a digit count (loop-table times).
pub fn round_sig(x: f64, sig: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(sig as i32 - 1 - mag);
    (x * factor).round() / factor
}

/// Reduce `x` into the half-open interval `[-period/2, period/2)`.
pub fn wrap_centered(x: f64, period: f64) -> f64 {
    let y = x - (x / period).round() * period;
    // `round` ties can land exactly on +period/2.
    if y >= period / 2.0 {
        y - period
    } else if y < -period / 2.0 {
        y + period
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sig_basics() {
        assert_eq!(round_sig(2.0000000000004, 12), 2.0);
        assert_eq!(round_sig(123.456789, 4), 123.5);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert_eq!(round_sig(-2.0 * std::f64::consts::PI, 12), -6.28318530718e0);
    }

    #[test]
    fn wrap_centered_basics() {
        assert!(
            (wrap_centered(7.0, 2.0 * std::f64::consts::PI) - 0.7168146928204138).abs() < 1e-12
        );
        assert_eq!(wrap_centered(0.0, 1.0), 0.0);
        assert!((wrap_centered(-0.6, 1.0) - 0.4).abs() < 1e-15);
    }
}
