//! Model manifolds: flat tori R^n / (lattice) and the round 2-sphere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Validated descriptor, as read from config files.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDescriptor {
    pub kind: ModelKindTag,
    pub n: usize,
    /// Row-major n*n matrix whose rows are the lattice generators (torus only).
    pub lattice: Option<Vec<f64>>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKindTag {
    FlatTorus,
    RoundSphere,
}

impl ModelKindTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKindTag::FlatTorus => "flat-torus",
            ModelKindTag::RoundSphere => "round-sphere",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "flat-torus" => Ok(ModelKindTag::FlatTorus),
            "round-sphere" => Ok(ModelKindTag::RoundSphere),
            other => Err(Error::config(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Flat torus R^n / B Z^n with the Euclidean metric.
///
/// Coordinates are global lattice-orthonormal coordinates: the metric is the
/// identity and lattice reduction happens only in display and return
/// detection, never inside the flow.
#[derive(Debug, Clone)]
pub struct TorusModel {
    pub n: usize,
    /// Columns are the lattice generators.
    pub basis: DMatrix<f64>,
    pub basis_inv: DMatrix<f64>,
    /// Columns are the dual-lattice generators 2 pi B^{-T}.
    pub dual: DMatrix<f64>,
    /// Length of the shortest nonzero lattice vector.
    pub shortest: f64,
}

#[derive(Debug, Clone)]
pub struct SphereModel {
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub enum ModelManifold {
    FlatTorus(TorusModel),
    RoundSphere(SphereModel),
}

impl ModelManifold {
    /// Build and validate a model from its descriptor.
    pub fn new(desc: &ModelDescriptor) -> Result<Self> {
        match desc.kind {
            ModelKindTag::FlatTorus => {
                let n = desc.n;
                if n < 2 {
                    return Err(Error::config(format!("torus dimension {n} < 2")));
                }
                let basis = match &desc.lattice {
                    None => DMatrix::identity(n, n) * (2.0 * std::f64::consts::PI),
                    Some(rows) => {
                        if rows.len() != n * n {
                            return Err(Error::config(format!(
                                "lattice needs {} entries, got {}",
                                n * n,
                                rows.len()
                            )));
                        }
                        // Row-major rows-as-generators -> columns-as-generators.
                        DMatrix::from_row_slice(n, n, rows).transpose()
                    }
                };
                let scale = basis.norm();
                let det = basis.determinant();
                if det.abs() <= 1e-12 * scale.powi(n as i32).max(1e-300) {
                    return Err(Error::config("singular lattice"));
                }
                let basis_inv = basis
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::config("singular lattice"))?;
                let dual = basis_inv.transpose() * (2.0 * std::f64::consts::PI);
                let shortest = shortest_lattice_vector(&basis);
                Ok(ModelManifold::FlatTorus(TorusModel {
                    n,
                    basis,
                    basis_inv,
                    dual,
                    shortest,
                }))
            }
            ModelKindTag::RoundSphere => {
                if desc.n != 2 {
                    return Err(Error::unsupported(format!(
                        "(round-sphere, n={}) is not modeled; the sphere is n = 2 here",
                        desc.n
                    )));
                }
                let radius = desc.radius.unwrap_or(1.0);
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::config(format!(
                        "sphere radius {radius} must be positive"
                    )));
                }
                Ok(ModelManifold::RoundSphere(SphereModel { radius }))
            }
        }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match self {
            ModelManifold::FlatTorus(t) => ModelDescriptor {
                kind: ModelKindTag::FlatTorus,
                n: t.n,
                lattice: Some(t.basis.transpose().as_slice().to_vec()),
                radius: None,
            },
            ModelManifold::RoundSphere(s) => ModelDescriptor {
                kind: ModelKindTag::RoundSphere,
                n: 2,
                lattice: None,
                radius: Some(s.radius),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelManifold::FlatTorus(t) => t.n,
            ModelManifold::RoundSphere(_) => 2,
        }
    }

    /// Metric tensor at a chart point.
    pub fn metric_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match self {
            ModelManifold::FlatTorus(t) => Ok(DMatrix::identity(t.n, t.n)),
            ModelManifold::RoundSphere(s) => {
                let theta = x[0];
                let st = theta.sin();
                if st.abs() < 1e-12 {
                    return Err(Error::unsupported(
                        "sphere metric requested at a pole of the latitude chart",
                    ));
                }
                let r2 = s.radius * s.radius;
                Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![
                    r2,
                    r2 * st * st,
                ])))
            }
        }
    }

    pub fn inverse_metric_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        g.try_inverse()
            .ok_or_else(|| Error::numerical("metric not invertible"))
    }

    /// Principal symbol p(x, xi) = |xi|_{g(x)}.
    pub fn p_norm(&self, x: &DVector<f64>, xi: &DVector<f64>) -> Result<f64> {
        match self {
            ModelManifold::FlatTorus(_) => Ok(xi.norm()),
            ModelManifold::RoundSphere(s) => {
                let st = x[0].sin();
                if st.abs() < 1e-12 {
                    return Err(Error::unsupported("p(x, xi) requested at a pole"));
                }
                Ok((xi[0] * xi[0] + xi[1] * xi[1] / (st * st)).sqrt() / s.radius)
            }
        }
    }

    pub fn as_torus(&self) -> Result<&TorusModel> {
        match self {
            ModelManifold::FlatTorus(t) => Ok(t),
            _ => Err(Error::unsupported("operation requires a flat torus")),
        }
    }

    pub fn as_sphere(&self) -> Result<&SphereModel> {
        match self {
            ModelManifold::RoundSphere(s) => Ok(s),
            _ => Err(Error::unsupported("operation requires the round sphere")),
        }
    }
}

impl TorusModel {
    /// Reduce a chart point into the centered fundamental domain.
    pub fn reduce(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut u = &self.basis_inv * x;
        for v in u.iter_mut() {
            *v -= v.round();
        }
        &self.basis * u
    }

    /// Distance between chart points modulo the lattice.
    pub fn lattice_distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        if self.n == 2 {
            // Scalar fast path: return detection samples this in a tight loop.
            let dx = a[0] - b[0];
            let dy = a[1] - b[1];
            let u0 = self.basis_inv[(0, 0)] * dx + self.basis_inv[(0, 1)] * dy;
            let u1 = self.basis_inv[(1, 0)] * dx + self.basis_inv[(1, 1)] * dy;
            let f0 = u0 - u0.round();
            let f1 = u1 - u1.round();
            let rx = self.basis[(0, 0)] * f0 + self.basis[(0, 1)] * f1;
            let ry = self.basis[(1, 0)] * f0 + self.basis[(1, 1)] * f1;
            let mut best = f64::INFINITY;
            for sx in -1i32..=1 {
                for sy in -1i32..=1 {
                    let cx = rx + self.basis[(0, 0)] * sx as f64 + self.basis[(0, 1)] * sy as f64;
                    let cy = ry + self.basis[(1, 0)] * sx as f64 + self.basis[(1, 1)] * sy as f64;
                    best = best.min((cx * cx + cy * cy).sqrt());
                }
            }
            return best;
        }
        let diff = a - b;
        let mut u = &self.basis_inv * &diff;
        for v in u.iter_mut() {
            *v -= v.round();
        }
        let reduced = &self.basis * u;
        // Rounding the lattice coordinates is exact for orthogonal-ish bases;
        // scan the unit neighbor shells to be safe for skew lattices.
        let mut best = reduced.norm();
        let n = self.n;
        let mut shift = vec![0i64; n];
        loop {
            let mut cand = reduced.clone();
            for (i, s) in shift.iter().enumerate() {
                if *s != 0 {
                    cand += self.basis.column(i) * (*s as f64);
                }
            }
            best = best.min(cand.norm());
            // Odometer over {-1, 0, 1}^n.
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                shift[i] += 1;
                if shift[i] <= 1 {
                    break;
                }
                shift[i] = -1;
                i += 1;
            }
        }
    }
}

fn shortest_lattice_vector(basis: &DMatrix<f64>) -> f64 {
    let n = basis.ncols();
    let mut best = f64::INFINITY;
    let mut idx = vec![-3i64; n];
    loop {
        if idx.iter().any(|&v| v != 0) {
            let mut v = DVector::zeros(n);
            for (i, &m) in idx.iter().enumerate() {
                v += basis.column(i) * m as f64;
            }
            best = best.min(v.norm());
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            idx[i] += 1;
            if idx[i] <= 3 {
                break;
            }
            idx[i] = -3;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_torus() -> ModelManifold {
        ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap()
    }

    #[test]
    fn standard_torus_of_the_examples() {
        let m = standard_torus();
        let t = m.as_torus().unwrap();
        assert_eq!(t.n, 2);
        assert!((t.shortest - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        // Dual of 2 pi I is the integer lattice.
        assert!((t.dual[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((t.dual[(1, 1)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_sphere_default() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::RoundSphere,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap();
        assert_eq!(m.as_sphere().unwrap().radius, 1.0);
    }

    #[test]
    fn singular_lattice_rejected() {
        let err = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: Some(vec![1.0, 2.0, 2.0, 4.0]),
            radius: None,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn unsupported_sphere_dimension() {
        let err = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::RoundSphere,
            n: 3,
            lattice: None,
            radius: None,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn torus_metric_is_identity() {
        let m = standard_torus();
        let g = m.metric_at(&DVector::from_vec(vec![0.3, 0.7])).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
    }

    #[test]
    fn sphere_metric_raw_chart() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::RoundSphere,
            n: 2,
            lattice: None,
            radius: Some(1.0),
        })
        .unwrap();
        let g = m
            .metric_at(&DVector::from_vec(vec![std::f64::consts::FRAC_PI_3, 0.0]))
            .unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((g[(1, 1)] - 0.75).abs() < 1e-14);
        // Cross-check g_{phi phi} against finite-difference arclength along phi.
        let r = m.as_sphere().unwrap().radius;
        let h = 1e-5;
        let th = std::f64::consts::FRAC_PI_3;
        let amb = |phi: f64| {
            nalgebra::Vector3::new(th.sin() * phi.cos(), th.sin() * phi.sin(), th.cos()) * r
        };
        let speed = ((amb(h) - amb(-h)) / (2.0 * h)).norm();
        assert!((speed * speed - g[(1, 1)]).abs() < 1e-8);
        assert!(m.metric_at(&DVector::from_vec(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn lattice_distance_wraps() {
        let m = standard_torus();
        let t = m.as_torus().unwrap();
        let a = DVector::from_vec(vec![0.1, 0.0]);
        let b = DVector::from_vec(vec![2.0 * std::f64::consts::PI - 0.1, 0.0]);
        assert!((t.lattice_distance(&a, &b) - 0.2).abs() < 1e-12);
    }
}
