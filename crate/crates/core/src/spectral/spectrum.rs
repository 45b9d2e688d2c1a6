//! Exact eigendata enumeration and period integrals for the model pairs.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, Submanifold};
use crate::spectral::{bessel_j0, legendre_p};

pub const DEFAULT_ITEM_CAP: usize = 10_000_000;

/// Which eigenfunction a table row refers to.
#[derive(Debug, Clone, PartialEq)]
pub enum EigenLabel {
    /// Dual-lattice label m (the eigenfunction is vol^{-1/2} e^{i<x, mu(m)>}).
    TorusMode(Vec<i64>),
    /// Spherical harmonic degree l with m = 0; the only rotation-invariant
    /// contributor when H is a latitude circle.
    SphereMode(u32),
}

impl EigenLabel {
    pub fn display(&self) -> String {
        match self {
            EigenLabel::TorusMode(m) => {
                let parts: Vec<String> = m.iter().map(|v| v.to_string()).collect();
                format!("({})", parts.join(","))
            }
            EigenLabel::SphereMode(l) => format!("l={l},m=0"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenItem {
    pub lambda: f64,
    pub label: EigenLabel,
    pub period: Complex64,
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    /// Sorted by eigenfrequency, then label.
    pub items: Vec<EigenItem>,
    pub lambda_max: f64,
    /// Sphere modes with m != 0 are not listed: their periods vanish exactly
    /// for rotation-invariant H. This records how many were folded away.
    pub zero_period_count: u64,
}

/// All eigendata with lambda_j <= lambda_max (torus) or l <= floor(lambda_max * R)
/// (sphere; a superset of completeness below lambda_max).
pub fn enumerate_spectrum(
    model: &ModelManifold,
    h: &Submanifold,
    lambda_max: f64,
    cap: usize,
) -> Result<SpectrumTable> {
    if !(lambda_max >= 0.0) {
        return Err(Error::config(format!(
            "lambda_max = {lambda_max} must be >= 0"
        )));
    }
    match model {
        ModelManifold::FlatTorus(t) => {
            let dual_inv = t
                .dual
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::numerical("dual lattice not invertible"))?;
            // |m| <= |dual^{-1}| |mu| bounds the search box.
            let op_norm = dual_inv.norm();
            let bound = (lambda_max * op_norm).ceil() as i64 + 1;
            let n = t.n;
            let mut items = Vec::new();
            let mut idx = vec![-bound; n];
            loop {
                let mf: Vec<f64> = idx.iter().map(|&v| v as f64).collect();
                let mu = &t.dual * DVector::from_vec(mf);
                let lambda = mu.norm();
                if lambda <= lambda_max {
                    if items.len() >= cap {
                        return Err(Error::config(format!(
                            "spectrum enumeration exceeds the item cap {cap}"
                        )));
                    }
                    let period = torus_period(t, h, &mu)?;
                    items.push(EigenItem {
                        lambda,
                        label: EigenLabel::TorusMode(idx.clone()),
                        period,
                    });
                }
                // Odometer over the box.
                let mut i = 0;
                loop {
                    if i == n {
                        sort_items(&mut items);
                        return Ok(SpectrumTable {
                            items,
                            lambda_max,
                            zero_period_count: 0,
                        });
                    }
                    idx[i] += 1;
                    if idx[i] <= bound {
                        break;
                    }
                    idx[i] = -bound;
                    i += 1;
                }
            }
        }
        ModelManifold::RoundSphere(s) => {
            let theta0 = match h {
                Submanifold::LatitudeCircle { theta0, .. } => *theta0,
                _ => {
                    return Err(Error::unsupported(
                        "sphere spectrum needs a rotation-invariant H (latitude circle)",
                    ))
                }
            };
            let l_max = (lambda_max * s.radius).floor() as u32;
            if l_max as usize + 1 > cap {
                return Err(Error::config(format!(
                    "spectrum enumeration exceeds the item cap {cap}"
                )));
            }
            let mut items = Vec::with_capacity(l_max as usize + 1);
            let mut zero_count = 0u64;
            for l in 0..=l_max {
                let lambda = (l as f64 * (l as f64 + 1.0)).sqrt() / s.radius;
                let period = latitude_period(l, theta0)?;
                items.push(EigenItem {
                    lambda,
                    label: EigenLabel::SphereMode(l),
                    period: Complex64::new(period, 0.0),
                });
                zero_count += 2 * l as u64;
            }
            sort_items(&mut items);
            Ok(SpectrumTable {
                items,
                lambda_max,
                zero_period_count: zero_count,
            })
        }
    }
}

fn sort_items(items: &mut [EigenItem]) {
    items.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then_with(|| label_key(&a.label).cmp(&label_key(&b.label)))
    });
}

fn label_key(label: &EigenLabel) -> Vec<i64> {
    match label {
        EigenLabel::TorusMode(m) => m.clone(),
        EigenLabel::SphereMode(l) => vec![*l as i64],
    }
}

/// Period integral for a single labeled eigenfunction.
pub fn period_integral(
    model: &ModelManifold,
    h: &Submanifold,
    label: &EigenLabel,
) -> Result<Complex64> {
    match (model, label) {
        (ModelManifold::FlatTorus(t), EigenLabel::TorusMode(m)) => {
            if m.len() != t.n {
                return Err(Error::config("label dimension mismatch"));
            }
            let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
            let mu = &t.dual * DVector::from_vec(mf);
            torus_period(t, h, &mu)
        }
        (ModelManifold::RoundSphere(_), EigenLabel::SphereMode(l)) => {
            let theta0 = match h {
                Submanifold::LatitudeCircle { theta0, .. } => *theta0,
                _ => return Err(Error::unsupported("sphere period needs a latitude circle")),
            };
            Ok(Complex64::new(latitude_period(*l, theta0)?, 0.0))
        }
        _ => Err(Error::config("label does not match the model")),
    }
}

fn torus_period(
    t: &crate::geometry::TorusModel,
    h: &Submanifold,
    mu: &DVector<f64>,
) -> Result<Complex64> {
    let vol = t.basis.determinant().abs();
    let norm = vol.sqrt().recip();
    match h {
        Submanifold::EmbeddedCircle { center, radius } => {
            // vol^{-1/2} e^{i<c, mu>} 2 pi r J0(r |mu|); on the standard torus
            // the prefactor collapses to e^{i<c, m>} r J0(r |m|).
            let phase = Complex64::from_polar(1.0, center.dot(mu));
            let j = bessel_j0(radius * mu.norm())?;
            Ok(phase * (norm * 2.0 * std::f64::consts::PI * radius * j))
        }
        Submanifold::Point { anchor } => Ok(Complex64::from_polar(norm, anchor.dot(mu))),
        Submanifold::AffineSubtorus {
            anchor,
            direction,
            length,
            ..
        } => {
            // Full-period exponential integral: nonzero only when mu is
            // lattice-orthogonal to H.
            let along = direction.dot(mu);
            if along.abs() < 1e-9 {
                let phase = Complex64::from_polar(1.0, anchor.dot(mu));
                Ok(phase * (norm * length))
            } else {
                Ok(Complex64::new(0.0, 0.0))
            }
        }
        Submanifold::LatitudeCircle { .. } => {
            Err(Error::config("latitude circle is not a torus H"))
        }
    }
}

/// 2 pi sin(theta0) Y_l^0(theta0); independent of the sphere radius.
fn latitude_period(l: u32, theta0: f64) -> Result<f64> {
    let pl = legendre_p(l, theta0.cos().clamp(-1.0, 1.0))?;
    let y = ((2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI)).sqrt() * pl;
    Ok(2.0 * std::f64::consts::PI * theta0.sin() * y)
}
