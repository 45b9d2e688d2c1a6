//! The homogeneous geodesic flow G^t and its linearization dG^t.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::sphere_chart::{self, Chart};
use crate::geometry::{CotangentPoint, ModelManifold};

use super::integrator::{default_step, MidpointIntegrator, PhaseState};

/// Which flow realization to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowBackend {
    /// Straight lines on the torus, great circles on the sphere.
    ClosedForm,
    /// Generic symplectic integrator (implicit midpoint, fixed step).
    ImplicitMidpoint { step: f64 },
}

impl FlowBackend {
    pub fn numeric(model: &ModelManifold) -> Self {
        FlowBackend::ImplicitMidpoint {
            step: default_step(model),
        }
    }
}

/// Matrix of dG^t in canonical coordinates. On the sphere the start and
/// arrival charts are chosen away from their poles and recorded here; chart
/// transitions are cotangent lifts, so the matrix is symplectic either way.
#[derive(Debug, Clone)]
pub struct TangentFlowMatrix {
    pub matrix: DMatrix<f64>,
    pub start_chart: Chart,
    pub arrival_chart: Chart,
}

/// Frobenius norm of M^T J M - J against the standard symplectic form.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let dim = m.nrows();
    let n = dim / 2;
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    (m.transpose() * &j * m - j).norm()
}

/// G^t(z) in chart coordinates.
///
/// Closed forms: torus translation x + t xi/|xi|, sphere great circles. The
/// numeric backend must agree with these (an acceptance invariant).
pub fn flow(
    model: &ModelManifold,
    z: &CotangentPoint,
    t: f64,
    backend: FlowBackend,
) -> Result<CotangentPoint> {
    let p = z.p(model)?;
    if !(p > 0.0) {
        return Err(Error::config("flow of a zero covector"));
    }
    match backend {
        FlowBackend::ClosedForm => match model {
            ModelManifold::FlatTorus(_) => {
                let norm = z.xi.norm();
                Ok(CotangentPoint::new(&z.x + &z.xi * (t / norm), z.xi.clone()))
            }
            ModelManifold::RoundSphere(s) => {
                let amb = sphere_chart::to_ambient(
                    s.radius,
                    Chart::Polar,
                    [z.x[0], z.x[1]],
                    [z.xi[0], z.xi[1]],
                );
                let out = sphere_chart::ambient_flow(s.radius, &amb, t);
                let (q, xi) = sphere_chart::from_ambient(s.radius, Chart::Polar, &out)?;
                Ok(CotangentPoint::from_slices(&q, &xi))
            }
        },
        FlowBackend::ImplicitMidpoint { step } => {
            let integ = MidpointIntegrator::new(model, step)?;
            let mut state = PhaseState::from_point(model, z)?;
            integ.evolve(&mut state, t, None)?;
            state.to_point(model)
        }
    }
}

/// dG^t(z) as a 2n x 2n matrix.
pub fn tangent_flow(
    model: &ModelManifold,
    z: &CotangentPoint,
    t: f64,
    backend: FlowBackend,
) -> Result<TangentFlowMatrix> {
    let tf = tangent_flow_unchecked(model, z, t, backend)?;
    let defect = symplectic_defect(&tf.matrix);
    if defect > 1e-8 * (1.0 + t.abs()) {
        return Err(Error::invariant(format!(
            "tangent flow symplectic defect {defect} at t = {t}"
        )));
    }
    Ok(tf)
}

fn tangent_flow_unchecked(
    model: &ModelManifold,
    z: &CotangentPoint,
    t: f64,
    backend: FlowBackend,
) -> Result<TangentFlowMatrix> {
    let p = z.p(model)?;
    if !(p > 0.0) {
        return Err(Error::config("tangent flow of a zero covector"));
    }
    match backend {
        FlowBackend::ClosedForm => match model {
            ModelManifold::FlatTorus(tm) => {
                let n = tm.n;
                let norm = z.xi.norm();
                let mut m = DMatrix::identity(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        m[(i, n + j)] =
                            t * (delta / norm - z.xi[i] * z.xi[j] / (norm * norm * norm));
                    }
                }
                Ok(TangentFlowMatrix {
                    matrix: m,
                    start_chart: Chart::Polar,
                    arrival_chart: Chart::Polar,
                })
            }
            ModelManifold::RoundSphere(s) => {
                let amb0 = sphere_chart::to_ambient(
                    s.radius,
                    Chart::Polar,
                    [z.x[0], z.x[1]],
                    [z.xi[0], z.xi[1]],
                );
                let start_chart = sphere_chart::safest_chart(s.radius, &amb0.pos);
                let (q0, xi0) = sphere_chart::from_ambient(s.radius, start_chart, &amb0)?;
                let d_in = sphere_chart::d_to_ambient(s.radius, start_chart, q0, xi0);
                let d_flow = sphere_chart::d_ambient_flow(s.radius, &amb0, t);
                let amb1 = sphere_chart::ambient_flow(s.radius, &amb0, t);
                let arrival_chart = sphere_chart::safest_chart(s.radius, &amb1.pos);
                let d_out = sphere_chart::d_from_ambient(s.radius, arrival_chart, &amb1)?;
                Ok(TangentFlowMatrix {
                    matrix: d_out * d_flow * d_in,
                    start_chart,
                    arrival_chart,
                })
            }
        },
        FlowBackend::ImplicitMidpoint { step } => {
            let integ = MidpointIntegrator::new(model, step)?;
            let mut state = PhaseState::from_point(model, z)?;
            let start_chart = state.chart;
            let dim = 2 * model.dim();
            let mut m = DMatrix::identity(dim, dim);
            integ.evolve(&mut state, t, Some(&mut m))?;
            Ok(TangentFlowMatrix {
                matrix: m,
                start_chart,
                arrival_chart: state.chart,
            })
        }
    }
}

/// Sampled access to one orbit, shared by return detection and diagnostics.
///
/// `position` is pole-safe on the sphere (detection only needs colatitude
/// there); `point` gives the full chart phase point.
pub enum Orbit<'m> {
    Closed {
        model: &'m ModelManifold,
        z0: CotangentPoint,
    },
    Numeric {
        model: &'m ModelManifold,
        step: f64,
        snap_dt: f64,
        /// Snapshots at k * snap_dt, k = 0.. (forward) and k = 0.. (backward).
        forward: Vec<PhaseState>,
        backward: Vec<PhaseState>,
    },
}

impl<'m> Orbit<'m> {
    pub fn new(
        model: &'m ModelManifold,
        z0: &CotangentPoint,
        backend: FlowBackend,
        t_max: f64,
        snap_dt: f64,
    ) -> Result<Self> {
        match backend {
            FlowBackend::ClosedForm => Ok(Orbit::Closed {
                model,
                z0: z0.clone(),
            }),
            FlowBackend::ImplicitMidpoint { step } => {
                let integ = MidpointIntegrator::new(model, step)?;
                let nsnap = (t_max / snap_dt).ceil() as usize + 1;
                let mut forward = Vec::with_capacity(nsnap + 1);
                let mut backward = Vec::with_capacity(nsnap + 1);
                let mut state = PhaseState::from_point(model, z0)?;
                forward.push(state.clone());
                for _ in 0..nsnap {
                    integ.evolve(&mut state, snap_dt, None)?;
                    forward.push(state.clone());
                }
                let mut state = PhaseState::from_point(model, z0)?;
                backward.push(state.clone());
                for _ in 0..nsnap {
                    integ.evolve(&mut state, -snap_dt, None)?;
                    backward.push(state.clone());
                }
                Ok(Orbit::Numeric {
                    model,
                    step,
                    snap_dt,
                    forward,
                    backward,
                })
            }
        }
    }

    fn numeric_state(&self, t: f64) -> Result<PhaseState> {
        match self {
            Orbit::Closed { .. } => unreachable!(),
            Orbit::Numeric {
                model,
                step,
                snap_dt,
                forward,
                backward,
            } => {
                let (list, mag) = if t >= 0.0 {
                    (forward, t)
                } else {
                    (backward, -t)
                };
                let k = ((mag / snap_dt).floor() as usize).min(list.len() - 1);
                let mut state = list[k].clone();
                let rest = mag - k as f64 * snap_dt;
                if rest != 0.0 {
                    let integ = MidpointIntegrator::new(model, *step)?;
                    integ.evolve(&mut state, rest.copysign(t), None)?;
                }
                Ok(state)
            }
        }
    }

    pub fn position(&self, t: f64) -> Result<DVector<f64>> {
        match self {
            Orbit::Closed { model, z0 } => match model {
                ModelManifold::FlatTorus(_) => {
                    let norm = z0.xi.norm();
                    Ok(&z0.x + &z0.xi * (t / norm))
                }
                ModelManifold::RoundSphere(s) => {
                    let amb = sphere_chart::to_ambient(
                        s.radius,
                        Chart::Polar,
                        [z0.x[0], z0.x[1]],
                        [z0.xi[0], z0.xi[1]],
                    );
                    let out = sphere_chart::ambient_flow(s.radius, &amb, t);
                    let theta = (out.pos[2] / s.radius).clamp(-1.0, 1.0).acos();
                    let phi = out.pos[1]
                        .atan2(out.pos[0])
                        .rem_euclid(2.0 * std::f64::consts::PI);
                    Ok(DVector::from_vec(vec![theta, phi]))
                }
            },
            Orbit::Numeric { model, .. } => Ok(self.numeric_state(t)?.position(model)),
        }
    }

    pub fn point(&self, t: f64) -> Result<CotangentPoint> {
        match self {
            Orbit::Closed { model, z0 } => flow(model, z0, t, FlowBackend::ClosedForm),
            Orbit::Numeric { model, .. } => self.numeric_state(t)?.to_point(model),
        }
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

    #[test]
    fn torus_straight_line() {
        let m = torus();
        let z = CotangentPoint::from_slices(&[0.3, 0.7], &[1.0, 0.0]);
        let out = flow(&m, &z, 2.5, FlowBackend::ClosedForm).unwrap();
        assert!((out.x[0] - 2.8).abs() < 1e-14 && (out.x[1] - 0.7).abs() < 1e-14);
        assert_eq!(out.xi, z.xi);
        // Zero covectors are outside the homogeneous flow's domain.
        let zero = CotangentPoint::from_slices(&[0.0, 0.0], &[0.0, 0.0]);
        assert!(flow(&m, &zero, 1.0, FlowBackend::ClosedForm).is_err());
        assert!(tangent_flow(&m, &zero, 1.0, FlowBackend::ClosedForm).is_err());
    }

    #[test]
    fn torus_group_law_and_reversal() {
        let m = torus();
        let z = CotangentPoint::from_slices(&[1.0, 2.0], &[0.3, -0.9]);
        let fwd = flow(&m, &z, 1.7, FlowBackend::ClosedForm).unwrap();
        let back = flow(&m, &fwd, -1.7, FlowBackend::ClosedForm).unwrap();
        assert!((&back.x - &z.x).norm() < 1e-12);
        let a = flow(
            &m,
            &flow(&m, &z, 0.8, FlowBackend::ClosedForm).unwrap(),
            0.9,
            FlowBackend::ClosedForm,
        )
        .unwrap();
        let b = flow(&m, &z, 1.7, FlowBackend::ClosedForm).unwrap();
        assert!((&a.x - &b.x).norm() < 1e-10);
    }

    #[test]
    fn sphere_antipodal_meridian() {
        let m = sphere();
        // Equator point phi = 0, heading north (xi_theta < 0 decreases theta).
        let z = CotangentPoint::from_slices(&[std::f64::consts::FRAC_PI_2, 0.0], &[-1.0, 0.0]);
        let out = flow(&m, &z, std::f64::consts::PI, FlowBackend::ClosedForm).unwrap();
        assert!((out.x[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((out.x[1] - std::f64::consts::PI).abs() < 1e-12);
        // Heading south now.
        assert!(out.xi[0] > 0.999);
    }

    #[test]
    fn torus_tangent_flow_closed_form() {
        let m = torus();
        let z = CotangentPoint::from_slices(&[0.0, 0.0], &[1.0, 0.0]);
        let tf = tangent_flow(&m, &z, 2.0, FlowBackend::ClosedForm).unwrap();
        // dx/dxi block is [[0, 0], [0, 2]].
        assert!((tf.matrix[(0, 2)]).abs() < 1e-14);
        assert!((tf.matrix[(1, 3)] - 2.0).abs() < 1e-14);
        assert!(symplectic_defect(&tf.matrix) < 1e-12);
    }

    #[test]
    fn t_zero_is_identity() {
        let m = sphere();
        let z = CotangentPoint::from_slices(&[1.2, 0.4], &[0.7, 0.2]);
        let tf = tangent_flow(&m, &z, 0.0, FlowBackend::ClosedForm).unwrap();
        assert!((tf.matrix.clone() - DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn sphere_tangent_flow_vs_finite_differences() {
        let m = sphere();
        let z = CotangentPoint::from_slices(&[1.0, 0.6], &[0.4, 0.7]);
        let t = 0.9;
        let tf = tangent_flow(&m, &z, t, FlowBackend::ClosedForm).unwrap();
        assert_eq!(tf.start_chart, tf.arrival_chart);
        let h = 1e-6;
        for c in 0..4 {
            let mut zp = z.clone();
            let mut zm = z.clone();
            match c {
                0 => {
                    zp.x[0] += h;
                    zm.x[0] -= h;
                }
                1 => {
                    zp.x[1] += h;
                    zm.x[1] -= h;
                }
                2 => {
                    zp.xi[0] += h;
                    zm.xi[0] -= h;
                }
                _ => {
                    zp.xi[1] += h;
                    zm.xi[1] -= h;
                }
            }
            let fp = flow(&m, &zp, t, FlowBackend::ClosedForm).unwrap();
            let fm = flow(&m, &zm, t, FlowBackend::ClosedForm).unwrap();
            let fd = [
                (fp.x[0] - fm.x[0]) / (2.0 * h),
                (fp.x[1] - fm.x[1]) / (2.0 * h),
                (fp.xi[0] - fm.xi[0]) / (2.0 * h),
                (fp.xi[1] - fm.xi[1]) / (2.0 * h),
            ];
            for r in 0..4 {
                assert!(
                    (tf.matrix[(r, c)] - fd[r]).abs() < 1e-5,
                    "entry ({r},{c}): {} vs fd {}",
                    tf.matrix[(r, c)],
                    fd[r]
                );
            }
        }
        assert!(symplectic_defect(&tf.matrix) < 1e-12);
    }

    #[test]
    fn sphere_focal_point_shows_singular_jacobi_block() {
        let m = sphere();
        // Normal to the equator; at t = pi/2 the meridian family focuses at
        // the pole: the dx/dxi block develops a zero singular value.
        let z = CotangentPoint::from_slices(&[std::f64::consts::FRAC_PI_2, 0.3], &[-1.0, 0.0]);
        let tf =
            tangent_flow(&m, &z, std::f64::consts::FRAC_PI_2, FlowBackend::ClosedForm).unwrap();
        let block = tf.matrix.view((0, 2), (2, 2)).into_owned();
        let svals = block.svd(false, false).singular_values;
        let min_sv = svals
            .as_slice()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_sv < 1e-10,
            "expected focal degeneracy, min sv = {min_sv}"
        );
        // Confirm against central finite differences through ambient space.
        let h = 1e-6;
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp.xi[1] += h;
        zm.xi[1] -= h;
        let fp = flow(
            &m,
            &zp,
            std::f64::consts::FRAC_PI_2,
            FlowBackend::ClosedForm,
        )
        .unwrap();
        let fm = flow(
            &m,
            &zm,
            std::f64::consts::FRAC_PI_2,
            FlowBackend::ClosedForm,
        )
        .unwrap();
        // Position stays at the pole to first order: theta variation vanishes.
        assert!((fp.x[0] - fm.x[0]).abs() / (2.0 * h) < 1e-4);
    }

    #[test]
    fn numeric_matches_closed_form_on_sphere() {
        let m = sphere();
        let z = CotangentPoint::from_slices(&[1.3, 0.2], &[0.5, 0.6]);
        let backend = FlowBackend::ImplicitMidpoint { step: 1e-4 };
        for &t in &[0.5, 2.0, -3.0] {
            let a = flow(&m, &z, t, backend).unwrap();
            let b = flow(&m, &z, t, FlowBackend::ClosedForm).unwrap();
            let d = (&a.x - &b.x).norm() + (&a.xi - &b.xi).norm();
            assert!(d < 1e-7, "deviation {d} at t={t}");
        }
    }
}
