//! Adapted orthonormal frames along H.
//!
//! All density and Jacobian computations happen in these frames, where the
//! |g_H|^{1/2} factors are exactly one.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, Submanifold};

/// Orthonormal tangent/normal frame of H at a parameter point.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub point: DVector<f64>,
    /// d tangent vectors, orthonormal w.r.t. the model metric.
    pub tangent: Vec<DVector<f64>>,
    /// n - d normal vectors spanning the g-orthogonal complement of T_xH.
    pub normal: Vec<DVector<f64>>,
}

/// Tangent and normal orthonormal frames of H at parameter s.
pub fn adapted_frame(model: &ModelManifold, h: &Submanifold, s: f64) -> Result<AdaptedFrame> {
    let point = h.position(s);
    let (tangent, normal) = match h {
        Submanifold::EmbeddedCircle { .. } => {
            let t = DVector::from_vec(vec![-s.sin(), s.cos()]);
            let nrm = DVector::from_vec(vec![s.cos(), s.sin()]);
            (vec![t], vec![nrm])
        }
        Submanifold::AffineSubtorus {
            direction, normal, ..
        } => (vec![direction.clone()], vec![normal.clone()]),
        Submanifold::Point { anchor } => {
            let n = anchor.len();
            let frame = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = 1.0;
                    v
                })
                .collect();
            (Vec::new(), frame)
        }
        Submanifold::LatitudeCircle { theta0, radius } => {
            let st = theta0.sin();
            if st <= 0.0 {
                return Err(Error::numerical("degenerate latitude parametrization"));
            }
            let t = DVector::from_vec(vec![0.0, 1.0 / (radius * st)]);
            let nrm = DVector::from_vec(vec![1.0 / radius, 0.0]);
            (vec![t], vec![nrm])
        }
    };
    let frame = AdaptedFrame {
        point,
        tangent,
        normal,
    };
    frame.check_orthonormal(model)?;
    Ok(frame)
}

impl AdaptedFrame {
    /// Gram-matrix orthonormality check against the model metric.
    fn check_orthonormal(&self, model: &ModelManifold) -> Result<()> {
        let g = model.metric_at(&self.point)?;
        let all: Vec<&DVector<f64>> = self.tangent.iter().chain(self.normal.iter()).collect();
        for (i, vi) in all.iter().enumerate() {
            for (j, vj) in all.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = vi.dot(&(&g * *vj));
                if (got - want).abs() > 1e-12 {
                    return Err(Error::invariant(format!(
                        "adapted frame Gram defect {} at entry ({i},{j})",
                        (got - want).abs()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{HKindTag, ModelDescriptor, ModelKindTag, SubmanifoldDescriptor};

    #[test]
    fn torus_circle_frame_matches_geometry() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap();
        let h = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::EmbeddedCircle,
                center: Some(vec![std::f64::consts::PI, std::f64::consts::PI]),
                r: Some(1.0),
                theta0: None,
                anchor: None,
            },
        )
        .unwrap();
        let f = adapted_frame(&m, &h, 0.0).unwrap();
        assert!((f.point[0] - (std::f64::consts::PI + 1.0)).abs() < 1e-15);
        assert!((f.point[1] - std::f64::consts::PI).abs() < 1e-15);
        assert!((f.tangent[0][0]).abs() < 1e-15 && (f.tangent[0][1] - 1.0).abs() < 1e-15);
        assert!((f.normal[0][0] - 1.0).abs() < 1e-15 && (f.normal[0][1]).abs() < 1e-15);
    }

    #[test]
    fn point_h_frame_is_ambient_basis() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap();
        let h = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::Point,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(vec![0.5, 1.5]),
            },
        )
        .unwrap();
        let f = adapted_frame(&m, &h, 0.0).unwrap();
        assert!(f.tangent.is_empty());
        assert_eq!(f.normal.len(), 2);
    }

    #[test]
    fn sphere_equator_frame() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::RoundSphere,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap();
        let h = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::LatitudeCircle,
                center: None,
                r: None,
                theta0: Some(std::f64::consts::FRAC_PI_2),
                anchor: None,
            },
        )
        .unwrap();
        let f = adapted_frame(&m, &h, 0.7).unwrap();
        // Tangent along the equator (phi direction), normal along the meridian.
        assert!(f.tangent[0][0].abs() < 1e-15 && (f.tangent[0][1] - 1.0).abs() < 1e-12);
        assert!((f.normal[0][0] - 1.0).abs() < 1e-12 && f.normal[0][1].abs() < 1e-15);
    }
}
