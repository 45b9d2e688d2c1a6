//! Deterministic product quadrature on the unit conormal bundle SN*H.
//!
//! Trapezoid nodes on the periodic H parameter (offset by half a step, which
//! keeps measure-zero rational directions out of the node set) times the
//! uniform rule on the normal sphere S^{n-d-1}. Weights carry the arclength
//! element |g_H|^{1/2} ds and the angular element d omega.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{CotangentPoint, ModelManifold, Submanifold};
use crate::num::KahanSum;

pub const MIN_NODES_PER_DIM: usize = 8;

/// One quadrature node on SN*H.
#[derive(Debug, Clone)]
pub struct SnhNode {
    pub point: CotangentPoint,
    pub weight: f64,
    /// Parameter of the foot point on H (d = 1 kinds; 0.0 for a point H).
    pub h_param: f64,
    /// Coefficients of the covector on the unit conormal frame.
    pub normal: Vec<f64>,
}

/// Quadrature over SN*H with its total measure.
#[derive(Debug, Clone)]
pub struct SNHQuadrature {
    pub nodes: Vec<SnhNode>,
    pub total_measure: f64,
    pub resolution: usize,
}

/// Volume of the unit sphere S^k (normal spheres here have k <= 1).
pub fn vol_sphere(k: usize) -> Result<f64> {
    match k {
        0 => Ok(2.0),
        1 => Ok(2.0 * std::f64::consts::PI),
        _ => Err(Error::unsupported(format!(
            "normal sphere S^{k} not modeled (codimension too large)"
        ))),
    }
}

/// Volume of the unit ball B^k.
pub fn vol_ball(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / k as f64 * vol_ball(k - 2),
    }
}

/// Build the SN*H quadrature with `resolution` nodes per periodic dimension.
pub fn snh_quadrature(
    model: &ModelManifold,
    h: &Submanifold,
    resolution: usize,
) -> Result<SNHQuadrature> {
    if resolution < MIN_NODES_PER_DIM {
        return Err(Error::config(format!(
            "resolution {resolution} below minimum {MIN_NODES_PER_DIM} nodes per periodic dimension"
        )));
    }
    let n = model.dim();
    let d = h.dim();
    let codim = n - d;
    let mut nodes = Vec::new();

    match d {
        1 => {
            if codim != 1 {
                return Err(Error::unsupported("d = 1 quadrature needs codimension 1"));
            }
            let period = h.param_period();
            let step = period / resolution as f64;
            for j in 0..resolution {
                let s = step * (j as f64 + 0.5);
                let pos = h.position(s);
                let speed = h.speed(model, s)?;
                let frame = h.conormal_frame(s);
                for sign in [1.0f64, -1.0] {
                    let xi = &frame[0] * sign;
                    let point = CotangentPoint::new(pos.clone(), xi);
                    nodes.push(SnhNode {
                        point,
                        weight: speed * step,
                        h_param: s,
                        normal: vec![sign],
                    });
                }
            }
        }
        0 => {
            if codim != 2 {
                return Err(Error::unsupported(
                    "point-H quadrature implemented for 2-dimensional models",
                ));
            }
            let pos = h.position(0.0);
            let step = 2.0 * std::f64::consts::PI / resolution as f64;
            for j in 0..resolution {
                let alpha = step * (j as f64 + 0.5);
                let xi = DVector::from_vec(vec![alpha.cos(), alpha.sin()]);
                nodes.push(SnhNode {
                    point: CotangentPoint::new(pos.clone(), xi),
                    weight: step,
                    h_param: 0.0,
                    normal: vec![alpha.cos(), alpha.sin()],
                });
            }
        }
        _ => return Err(Error::unsupported("quadrature for dim H > 1")),
    }

    let mut total = KahanSum::new();
    for node in &nodes {
        if node.weight <= 0.0 {
            return Err(Error::invariant("non-positive quadrature weight"));
        }
        let p = node.point.p(model)?;
        if (p - 1.0).abs() > 1e-12 {
            return Err(Error::invariant(format!(
                "node off p = 1 by {}",
                (p - 1.0).abs()
            )));
        }
        let defect = h.conormality_defect(model, node.h_param, &node.point.xi)?;
        if defect > 1e-12 {
            return Err(Error::invariant(format!(
                "node conormality defect {defect}"
            )));
        }
        total.add(node.weight);
    }
    let total_measure = total.value();
    let independent = h.vol() * vol_sphere(codim - 1)?;
    if (total_measure - independent).abs() > 1e-8 * independent {
        return Err(Error::invariant(format!(
            "quadrature measure {total_measure} disagrees with vol(H) vol(S^{}) = {independent}",
            codim - 1
        )));
    }
    Ok(SNHQuadrature {
        nodes,
        total_measure,
        resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{HKindTag, ModelDescriptor, ModelKindTag, SubmanifoldDescriptor};

    fn torus() -> ModelManifold {
        ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap()
    }

    fn torus_unit_circle(m: &ModelManifold) -> Submanifold {
        Submanifold::new(
            m,
            &SubmanifoldDescriptor {
                kind: HKindTag::EmbeddedCircle,
                center: Some(vec![std::f64::consts::PI, std::f64::consts::PI]),
                r: Some(1.0),
                theta0: None,
                anchor: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn circle_total_measure() {
        let m = torus();
        let h = torus_unit_circle(&m);
        let q = snh_quadrature(&m, &h, 256).unwrap();
        assert_eq!(q.nodes.len(), 512);
        assert!((q.total_measure - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn point_total_measure_is_covector_circle() {
        let m = torus();
        let h = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::Point,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(vec![1.1, 0.4]),
            },
        )
        .unwrap();
        let q = snh_quadrature(&m, &h, 64).unwrap();
        assert!((q.total_measure - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn sphere_equator_total_measure() {
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
        let q = snh_quadrature(&m, &h, 128).unwrap();
        assert!((q.total_measure - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn doubling_resolution_keeps_measure() {
        let m = torus();
        let h = torus_unit_circle(&m);
        let q1 = snh_quadrature(&m, &h, 64).unwrap();
        let q2 = snh_quadrature(&m, &h, 128).unwrap();
        assert!((q1.total_measure - q2.total_measure).abs() < 1e-10);
    }

    #[test]
    fn resolution_floor_enforced() {
        let m = torus();
        let h = torus_unit_circle(&m);
        assert!(snh_quadrature(&m, &h, 4).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(vol_ball(1), 2.0);
        assert_eq!(vol_ball(2), std::f64::consts::PI);
        assert!((vol_ball(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }
}
