//! Embedded submanifolds H of the model manifolds.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::num::wrap_centered;

pub const SPHERE_POLE_MARGIN: f64 = 1e-3;
/// Circle radii are capped at this fraction of the shortest lattice vector so
/// the embedding stays injective.
pub const CIRCLE_RADIUS_FRACTION: f64 = 0.49;

#[derive(Debug, Clone, PartialEq)]
pub struct SubmanifoldDescriptor {
    pub kind: HKindTag,
    pub center: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub theta0: Option<f64>,
    pub anchor: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HKindTag {
    EmbeddedCircle,
    AffineSubtorus,
    Point,
    LatitudeCircle,
}

impl HKindTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            HKindTag::EmbeddedCircle => "embedded-circle",
            HKindTag::AffineSubtorus => "affine-subtorus",
            HKindTag::Point => "point",
            HKindTag::LatitudeCircle => "latitude-circle",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "embedded-circle" => Ok(HKindTag::EmbeddedCircle),
            "affine-subtorus" => Ok(HKindTag::AffineSubtorus),
            "point" => Ok(HKindTag::Point),
            "latitude-circle" => Ok(HKindTag::LatitudeCircle),
            other => Err(Error::config(format!("unknown submanifold kind '{other}'"))),
        }
    }
}

/// Validated submanifold.
#[derive(Debug, Clone)]
pub enum Submanifold {
    /// Round circle of radius r about `center` in a flat 2-torus.
    EmbeddedCircle { center: DVector<f64>, radius: f64 },
    /// anchor + span of the first lattice generator (a closed geodesic).
    AffineSubtorus {
        anchor: DVector<f64>,
        direction: DVector<f64>,
        length: f64,
        normal: DVector<f64>,
        normal_spacing: f64,
    },
    /// Single point of a flat torus.
    Point { anchor: DVector<f64> },
    /// Latitude circle at colatitude theta0 on the sphere.
    LatitudeCircle { theta0: f64, radius: f64 },
}

impl Submanifold {
    pub fn new(model: &ModelManifold, desc: &SubmanifoldDescriptor) -> Result<Self> {
        let h = Self::build(model, desc)?;
        h.check_embedding(model)?;
        h.check_volume(model)?;
        Ok(h)
    }

    fn build(model: &ModelManifold, desc: &SubmanifoldDescriptor) -> Result<Self> {
        match desc.kind {
            HKindTag::EmbeddedCircle => {
                let t = model
                    .as_torus()
                    .map_err(|_| Error::unsupported("embedded-circle lives on the flat torus"))?;
                if t.n != 2 {
                    return Err(Error::unsupported("embedded-circle needs n = 2"));
                }
                let center = desc
                    .center
                    .as_ref()
                    .ok_or_else(|| Error::config("embedded-circle needs h.center"))?;
                let radius = desc
                    .r
                    .ok_or_else(|| Error::config("embedded-circle needs h.r"))?;
                if center.len() != 2 {
                    return Err(Error::config("h.center needs 2 entries"));
                }
                let max_r = CIRCLE_RADIUS_FRACTION * t.shortest;
                if !(radius > 0.0 && radius < max_r) {
                    return Err(Error::config(format!(
                        "circle radius {radius} outside (0, {max_r}) for this lattice"
                    )));
                }
                Ok(Submanifold::EmbeddedCircle {
                    center: DVector::from_row_slice(center),
                    radius,
                })
            }
            HKindTag::AffineSubtorus => {
                let t = model
                    .as_torus()
                    .map_err(|_| Error::unsupported("affine-subtorus lives on the flat torus"))?;
                if t.n != 2 {
                    return Err(Error::unsupported("affine-subtorus needs n = 2"));
                }
                let anchor = desc
                    .anchor
                    .as_ref()
                    .ok_or_else(|| Error::config("affine-subtorus needs h.anchor"))?;
                if anchor.len() != 2 {
                    return Err(Error::config("h.anchor needs 2 entries"));
                }
                let a1 = t.basis.column(0).into_owned();
                let length = a1.norm();
                let direction = &a1 / length;
                let normal = DVector::from_vec(vec![-direction[1], direction[0]]);
                let spacing = (t.basis.column(1).dot(&normal)).abs();
                if spacing < 1e-12 {
                    return Err(Error::config("degenerate lattice for affine-subtorus"));
                }
                Ok(Submanifold::AffineSubtorus {
                    anchor: DVector::from_row_slice(anchor),
                    direction,
                    length,
                    normal,
                    normal_spacing: spacing,
                })
            }
            HKindTag::Point => {
                let t = model
                    .as_torus()
                    .map_err(|_| Error::unsupported("point H lives on the flat torus here"))?;
                let anchor = desc
                    .anchor
                    .as_ref()
                    .ok_or_else(|| Error::config("point needs h.anchor"))?;
                if anchor.len() != t.n {
                    return Err(Error::config("h.anchor dimension mismatch"));
                }
                Ok(Submanifold::Point {
                    anchor: DVector::from_row_slice(anchor),
                })
            }
            HKindTag::LatitudeCircle => {
                let s = model
                    .as_sphere()
                    .map_err(|_| Error::unsupported("latitude-circle lives on the sphere"))?;
                let theta0 = desc
                    .theta0
                    .ok_or_else(|| Error::config("latitude-circle needs h.theta0"))?;
                if !(theta0 >= SPHERE_POLE_MARGIN
                    && theta0 <= std::f64::consts::PI - SPHERE_POLE_MARGIN)
                {
                    return Err(Error::config(format!(
                        "theta0 = {theta0} violates the pole-exclusion margin {SPHERE_POLE_MARGIN}"
                    )));
                }
                Ok(Submanifold::LatitudeCircle {
                    theta0,
                    radius: s.radius,
                })
            }
        }
    }

    pub fn descriptor(&self) -> SubmanifoldDescriptor {
        match self {
            Submanifold::EmbeddedCircle { center, radius } => SubmanifoldDescriptor {
                kind: HKindTag::EmbeddedCircle,
                center: Some(center.as_slice().to_vec()),
                r: Some(*radius),
                theta0: None,
                anchor: None,
            },
            Submanifold::AffineSubtorus { anchor, .. } => SubmanifoldDescriptor {
                kind: HKindTag::AffineSubtorus,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(anchor.as_slice().to_vec()),
            },
            Submanifold::Point { anchor } => SubmanifoldDescriptor {
                kind: HKindTag::Point,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(anchor.as_slice().to_vec()),
            },
            Submanifold::LatitudeCircle { theta0, .. } => SubmanifoldDescriptor {
                kind: HKindTag::LatitudeCircle,
                center: None,
                r: None,
                theta0: Some(*theta0),
                anchor: None,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Submanifold::Point { .. } => 0,
            _ => 1,
        }
    }

    /// Period of the single H parameter (d = 1 kinds only).
    pub fn param_period(&self) -> f64 {
        match self {
            Submanifold::EmbeddedCircle { .. } | Submanifold::LatitudeCircle { .. } => {
                2.0 * std::f64::consts::PI
            }
            Submanifold::AffineSubtorus { length, .. } => *length,
            Submanifold::Point { .. } => 0.0,
        }
    }

    /// Chart position of the parameter point s.
    pub fn position(&self, s: f64) -> DVector<f64> {
        match self {
            Submanifold::EmbeddedCircle { center, radius } => DVector::from_vec(vec![
                center[0] + radius * s.cos(),
                center[1] + radius * s.sin(),
            ]),
            Submanifold::AffineSubtorus {
                anchor, direction, ..
            } => anchor + direction * s,
            Submanifold::Point { anchor } => anchor.clone(),
            Submanifold::LatitudeCircle { theta0, .. } => DVector::from_vec(vec![*theta0, s]),
        }
    }

    /// d(position)/ds.
    pub fn dposition(&self, s: f64) -> DVector<f64> {
        match self {
            Submanifold::EmbeddedCircle { radius, .. } => {
                DVector::from_vec(vec![-radius * s.sin(), radius * s.cos()])
            }
            Submanifold::AffineSubtorus { direction, .. } => direction.clone(),
            Submanifold::Point { anchor } => DVector::zeros(anchor.len()),
            Submanifold::LatitudeCircle { .. } => DVector::from_vec(vec![0.0, 1.0]),
        }
    }

    /// |d(position)/ds|_g: the induced 1-d volume element.
    pub fn speed(&self, model: &ModelManifold, s: f64) -> Result<f64> {
        let dp = self.dposition(s);
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let g = model.metric_at(&self.position(s))?;
        Ok((dp.dot(&(&g * &dp))).sqrt())
    }

    /// Closed-form volume of H.
    pub fn vol(&self) -> f64 {
        match self {
            Submanifold::EmbeddedCircle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Submanifold::AffineSubtorus { length, .. } => *length,
            Submanifold::Point { .. } => 1.0,
            Submanifold::LatitudeCircle { theta0, radius } => {
                2.0 * std::f64::consts::PI * radius * theta0.sin()
            }
        }
    }

    /// Unit conormal covector frame at parameter s (n - d covectors).
    pub fn conormal_frame(&self, s: f64) -> Vec<DVector<f64>> {
        match self {
            Submanifold::EmbeddedCircle { .. } => {
                vec![DVector::from_vec(vec![s.cos(), s.sin()])]
            }
            Submanifold::AffineSubtorus { normal, .. } => vec![normal.clone()],
            Submanifold::Point { anchor } => {
                let n = anchor.len();
                (0..n)
                    .map(|i| {
                        let mut v = DVector::zeros(n);
                        v[i] = 1.0;
                        v
                    })
                    .collect()
            }
            Submanifold::LatitudeCircle { radius, .. } => {
                vec![DVector::from_vec(vec![*radius, 0.0])]
            }
        }
    }

    /// s-derivative of the conormal frame covectors.
    pub fn dconormal_frame(&self, s: f64) -> Vec<DVector<f64>> {
        match self {
            Submanifold::EmbeddedCircle { .. } => {
                vec![DVector::from_vec(vec![-s.sin(), s.cos()])]
            }
            Submanifold::AffineSubtorus { normal, .. } => vec![DVector::zeros(normal.len())],
            Submanifold::Point { anchor } => {
                vec![DVector::zeros(anchor.len()); anchor.len()]
            }
            Submanifold::LatitudeCircle { .. } => vec![DVector::from_vec(vec![0.0, 0.0])],
        }
    }

    /// Signed (where orientable in the ambient chart) distance from a chart
    /// position to H, together with whether the value carries a sign.
    pub fn distance(&self, model: &ModelManifold, pos: &DVector<f64>) -> Result<(f64, bool)> {
        match self {
            Submanifold::EmbeddedCircle { center, radius } => {
                let t = model.as_torus()?;
                let d = t.lattice_distance(pos, center);
                Ok((d - radius, true))
            }
            Submanifold::AffineSubtorus {
                anchor,
                normal,
                normal_spacing,
                ..
            } => {
                let w = (pos - anchor).dot(normal);
                Ok((wrap_centered(w, *normal_spacing), true))
            }
            Submanifold::Point { anchor } => {
                let t = model.as_torus()?;
                Ok((t.lattice_distance(pos, anchor), false))
            }
            Submanifold::LatitudeCircle { theta0, radius } => {
                Ok((radius * (pos[0] - theta0), true))
            }
        }
    }

    /// Parameter of the nearest H point for a chart position at distance ~0.
    pub fn param_of_position(&self, model: &ModelManifold, pos: &DVector<f64>) -> Result<f64> {
        match self {
            Submanifold::EmbeddedCircle { center, .. } => {
                let t = model.as_torus()?;
                // Reduce pos - center into the centered fundamental domain.
                let offset = t.reduce(&(pos - center));
                Ok(offset[1]
                    .atan2(offset[0])
                    .rem_euclid(2.0 * std::f64::consts::PI))
            }
            Submanifold::AffineSubtorus {
                anchor,
                direction,
                length,
                ..
            } => {
                let w = (pos - anchor).dot(direction);
                Ok(w.rem_euclid(*length))
            }
            Submanifold::Point { .. } => Ok(0.0),
            Submanifold::LatitudeCircle { .. } => Ok(pos[1].rem_euclid(2.0 * std::f64::consts::PI)),
        }
    }

    /// Max pairing of a covector against the unit tangent frame of H at s.
    pub fn conormality_defect(
        &self,
        model: &ModelManifold,
        s: f64,
        xi: &DVector<f64>,
    ) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let speed = self.speed(model, s)?;
        let tangent = self.dposition(s) / speed;
        Ok(xi.dot(&tangent).abs())
    }

    /// Length scale limiting how fast the distance function can oscillate.
    pub fn injectivity_scale(&self, model: &ModelManifold) -> f64 {
        match self {
            Submanifold::EmbeddedCircle { radius, .. } => *radius,
            Submanifold::AffineSubtorus { normal_spacing, .. } => normal_spacing / 2.0,
            Submanifold::Point { .. } => match model {
                ModelManifold::FlatTorus(t) => t.shortest / 2.0,
                _ => 1.0,
            },
            Submanifold::LatitudeCircle { theta0, radius } => {
                radius * theta0.min(std::f64::consts::PI - theta0)
            }
        }
    }

    fn check_embedding(&self, model: &ModelManifold) -> Result<()> {
        if self.dim() == 0 {
            return Ok(());
        }
        let period = self.param_period();
        for j in 0..64 {
            let s = period * (j as f64 + 0.5) / 64.0;
            let sp = self.speed(model, s)?;
            if !(sp * sp > 1e-12) {
                return Err(Error::invariant(format!(
                    "induced metric degenerate at parameter {s}"
                )));
            }
        }
        Ok(())
    }

    fn check_volume(&self, model: &ModelManifold) -> Result<()> {
        if self.dim() == 0 {
            return Ok(());
        }
        // Trapezoid on the periodic parameter; spectrally accurate here.
        let period = self.param_period();
        let n = 256;
        let mut acc = crate::num::KahanSum::new();
        for j in 0..n {
            let s = period * j as f64 / n as f64;
            acc.add(self.speed(model, s)?);
        }
        let vol = acc.value() * period / n as f64;
        if (vol - self.vol()).abs() > 1e-10 * (1.0 + self.vol()) {
            return Err(Error::invariant(format!(
                "induced volume {vol} disagrees with closed form {}",
                self.vol()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ModelDescriptor, ModelKindTag};

    fn torus() -> ModelManifold {
        ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap()
    }

    fn sphere() -> ModelManifold {
        ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::RoundSphere,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap()
    }

    pub fn unit_circle(model: &ModelManifold) -> Submanifold {
        Submanifold::new(
            model,
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
    fn circle_volume_and_bounds() {
        let m = torus();
        let h = unit_circle(&m);
        assert!((h.vol() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        // Radius above 0.49 * shortest lattice vector is rejected.
        let err = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::EmbeddedCircle,
                center: Some(vec![0.0, 0.0]),
                r: Some(3.2),
                theta0: None,
                anchor: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn latitude_volume_and_margin() {
        let m = sphere();
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
        assert!((h.vol() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::LatitudeCircle,
                center: None,
                r: None,
                theta0: Some(1e-4),
                anchor: None,
            },
        )
        .is_err());
    }

    #[test]
    fn circle_signed_distance_wraps_lattice() {
        let m = torus();
        let h = unit_circle(&m);
        // A point straight out from the circle along +x, wrapped once.
        let pos = DVector::from_vec(vec![
            std::f64::consts::PI + 1.5 + 2.0 * std::f64::consts::PI,
            std::f64::consts::PI,
        ]);
        let (d, signed) = h.distance(&m, &pos).unwrap();
        assert!(signed);
        assert!((d - 0.5).abs() < 1e-12);
        let inside = DVector::from_vec(vec![std::f64::consts::PI + 0.25, std::f64::consts::PI]);
        assert!(h.distance(&m, &inside).unwrap().0 < 0.0);
    }

    #[test]
    fn subtorus_and_point() {
        let m = torus();
        let sub = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::AffineSubtorus,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(vec![0.3, 0.4]),
            },
        )
        .unwrap();
        assert!((sub.vol() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let (d, signed) = sub
            .distance(
                &m,
                &DVector::from_vec(vec![5.0, 0.4 + 2.0 * std::f64::consts::PI - 0.2]),
            )
            .unwrap();
        assert!(signed && (d + 0.2).abs() < 1e-12);

        let pt = Submanifold::new(
            &m,
            &SubmanifoldDescriptor {
                kind: HKindTag::Point,
                center: None,
                r: None,
                theta0: None,
                anchor: Some(vec![1.0, 2.0]),
            },
        )
        .unwrap();
        assert_eq!(pt.dim(), 0);
        let (d, signed) = pt.distance(&m, &DVector::from_vec(vec![1.0, 2.3])).unwrap();
        assert!(!signed && (d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn param_of_position_inverts_chart() {
        let m = torus();
        let h = unit_circle(&m);
        for j in 0..16 {
            let s = 2.0 * std::f64::consts::PI * (j as f64 + 0.3) / 16.0;
            let pos = h.position(s);
            let s2 = h.param_of_position(&m, &pos).unwrap();
            assert!((s - s2).abs() < 1e-12);
        }
    }
}
