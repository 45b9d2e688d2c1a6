//! Tauberian smoothing kernel with exactly compact Fourier support.
//!
//! rho(x) = c_a sinc^4(a x / 4) with c_a = 3a/(8 pi), so rho >= 0 by
//! construction, int rho = 1, and rho-hat is the cubic B-spline supported in
//! [-a, a] (the self-convolution of a triangle on [-a/2, a/2]).

use crate::error::{Error, Result};
use crate::num::quad::gauss20;
use crate::num::KahanSum;

#[derive(Debug, Clone)]
pub struct SmoothingKernel {
    pub a: f64,
    c_a: f64,
    /// Cumulative integral of rho from 0 to k * panel_width.
    cumulative: Vec<f64>,
    panel_width: f64,
    /// Beyond this |x|, rho <= 1e-14 and the primitive is clamped.
    pub tail_cutoff: f64,
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

impl SmoothingKernel {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::config(format!(
                "kernel support radius a = {a} must be positive"
            )));
        }
        let c_a = 3.0 * a / (8.0 * std::f64::consts::PI);
        // rho envelope: c_a (4/(a x))^4 = 192/(pi a^3 x^4); cutoff at 1e-14.
        let tail_cutoff = (192.0 / (std::f64::consts::PI * a.powi(3) * 1e-14)).powf(0.25);
        let panel_width = (tail_cutoff / 20_000.0).max(1.0).min(2.0 / a);
        let panels = (tail_cutoff / panel_width).ceil() as usize;
        let mut kernel = SmoothingKernel {
            a,
            c_a,
            cumulative: Vec::new(),
            panel_width,
            tail_cutoff,
        };
        let mut cum = Vec::with_capacity(panels + 1);
        let mut acc = KahanSum::new();
        cum.push(0.0);
        let rho = |x: f64| kernel.rho_raw(x);
        for k in 0..panels {
            let lo = k as f64 * panel_width;
            acc.add(gauss20(&rho, lo, lo + panel_width));
            cum.push(acc.value());
        }
        kernel.cumulative = cum;
        Ok(kernel)
    }

    fn rho_raw(&self, x: f64) -> f64 {
        let s = sinc(self.a * x / 4.0);
        self.c_a * s * s * s * s
    }

    /// rho(x) >= 0, integrating to one.
    pub fn rho(&self, x: f64) -> f64 {
        self.rho_raw(x)
    }

    /// Fourier transform of rho: even, nonnegative, supported in [-a, a],
    /// rho_hat(0) = 1.
    pub fn rho_hat(&self, t: f64) -> f64 {
        let u = 2.0 * t.abs() / self.a;
        if u <= 1.0 {
            1.0 - 1.5 * u * u + 0.75 * u * u * u
        } else if u <= 2.0 {
            0.25 * (2.0 - u).powi(3)
        } else {
            0.0
        }
    }

    /// Primitive R(x) = int_{-inf}^x rho, from the cached panel quadratures.
    pub fn primitive(&self, x: f64) -> f64 {
        let mag = x.abs();
        let half = if mag >= self.tail_cutoff {
            0.5
        } else {
            let k = (mag / self.panel_width).floor() as usize;
            let base = self.cumulative[k.min(self.cumulative.len() - 1)];
            let lo = k as f64 * self.panel_width;
            let rho = |y: f64| self.rho_raw(y);
            base + gauss20(&rho, lo, mag)
        };
        if x >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::quad::simpson;

    #[test]
    fn normalization_for_several_radii() {
        for &a in &[0.5, 1.0, 1.9] {
            let k = SmoothingKernel::new(a).unwrap();
            // Direct quadrature of rho; the window keeps the 1/x^3 tail
            // below 1e-13 even for a = 0.5.
            let body = simpson(&|x: f64| k.rho(x), -40_000.0, 40_000.0, 4_000_000);
            assert!((body - 1.0).abs() < 1e-10, "a={a}: int rho = {body}");
            assert_eq!(k.rho_hat(0.0), 1.0);
        }
    }

    #[test]
    fn peak_is_positive_and_kernel_nonnegative() {
        let k = SmoothingKernel::new(1.0).unwrap();
        assert!(k.rho(0.0) > 0.0);
        for i in 0..10_000 {
            let x = -200.0 + 0.04 * i as f64;
            assert!(k.rho(x) >= 0.0);
        }
    }

    #[test]
    fn fourier_support_is_exactly_compact() {
        let k = SmoothingKernel::new(1.0).unwrap();
        assert_eq!(k.rho_hat(1.0), 0.0);
        assert_eq!(k.rho_hat(-1.0), 0.0);
        assert_eq!(k.rho_hat(1.2), 0.0);
        // Direct quadrature Fourier transform of rho at |t| = 1.1 a.
        let t = 1.1;
        let ft = simpson(&|x: f64| k.rho(x) * (t * x).cos(), -4000.0, 4000.0, 800_000);
        assert!(ft.abs() < 1e-8, "leakage {ft}");
        // And the analytic rho_hat matches quadrature inside the support.
        let t = 0.4;
        let ft = simpson(&|x: f64| k.rho(x) * (t * x).cos(), -4000.0, 4000.0, 800_000);
        assert!((ft - k.rho_hat(t)).abs() < 1e-8);
    }

    #[test]
    fn primitive_limits_and_symmetry() {
        let k = SmoothingKernel::new(0.5).unwrap();
        assert!((k.primitive(1e9) - 1.0).abs() < 1e-10);
        assert!(k.primitive(-1e9).abs() < 1e-10);
        assert!((k.primitive(0.0) - 0.5).abs() < 1e-14);
        assert!((k.primitive(3.0) + k.primitive(-3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn primitive_derivative_is_rho() {
        let k = SmoothingKernel::new(1.0).unwrap();
        let h = 1e-4;
        for &x in &[-7.3, -0.4, 0.9, 12.5] {
            let d = (k.primitive(x + h) - k.primitive(x - h)) / (2.0 * h);
            assert!((d - k.rho(x)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn rejects_nonpositive_radius() {
        assert!(SmoothingKernel::new(0.0).is_err());
        assert!(SmoothingKernel::new(-1.0).is_err());
    }
}
