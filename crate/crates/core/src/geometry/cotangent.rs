//! Points of the cotangent bundle in chart coordinates.

use nalgebra::DVector;

use crate::error::Result;
use crate::geometry::ModelManifold;

/// A chart-coordinate phase point (x, xi).
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
}

impl CotangentPoint {
    pub fn new(x: DVector<f64>, xi: DVector<f64>) -> Self {
        assert_eq!(x.len(), xi.len(), "position/covector dimension mismatch");
        CotangentPoint { x, xi }
    }

    pub fn from_slices(x: &[f64], xi: &[f64]) -> Self {
        Self::new(DVector::from_row_slice(x), DVector::from_row_slice(xi))
    }

    /// p(x, xi) = |xi|_{g(x)} under the model metric.
    pub fn p(&self, model: &ModelManifold) -> Result<f64> {
        model.p_norm(&self.x, &self.xi)
    }

    /// Packed (x, xi) state vector used by the integrators.
    pub fn to_state(&self) -> DVector<f64> {
        let n = self.x.len();
        let mut s = DVector::zeros(2 * n);
        s.rows_mut(0, n).copy_from(&self.x);
        s.rows_mut(n, n).copy_from(&self.xi);
        s
    }

    pub fn from_state(state: &DVector<f64>) -> Self {
        let n = state.len() / 2;
        CotangentPoint {
            x: state.rows(0, n).into_owned(),
            xi: state.rows(n, n).into_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ModelDescriptor, ModelKindTag};

    #[test]
    fn p_on_torus_is_euclidean_norm() {
        let m = ModelManifold::new(&ModelDescriptor {
            kind: ModelKindTag::FlatTorus,
            n: 2,
            lattice: None,
            radius: None,
        })
        .unwrap();
        let z = CotangentPoint::from_slices(&[0.3, 0.7], &[3.0, 4.0]);
        assert!((z.p(&m).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn state_roundtrip() {
        let z = CotangentPoint::from_slices(&[1.0, 2.0], &[-0.5, 0.25]);
        assert_eq!(CotangentPoint::from_state(&z.to_state()), z);
    }
}
