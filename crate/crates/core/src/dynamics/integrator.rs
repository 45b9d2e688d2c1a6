//! Implicit-midpoint integrator for the homogeneous geodesic flow.
//!
//! Implicit midpoint is symplectic for any Hamiltonian; the variational
//! matrix advances by the exact linearization of the scheme (a Cayley
//! transform of the Hamiltonian Jacobian at the step midpoint), so the
//! propagated dG^t stays symplectic to solver tolerance.
//!
//! On the sphere the state lives in whichever polar chart keeps the orbit
//! away from that chart's poles; transitions are exact symplectomorphisms and
//! their Jacobians multiply into the variational matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::sphere_chart::{self, Chart};
use crate::geometry::{CotangentPoint, ModelManifold};

/// Default fixed steps. The torus stepper is exact at any step; the sphere
/// budget (criterion-level 1e-9 energy, 1e-7 trajectory deviation over
/// |t| <= 10) needs the smaller step.
pub const TORUS_DEFAULT_STEP: f64 = 1e-3;
pub const SPHERE_DEFAULT_STEP: f64 = 1e-4;

pub fn default_step(model: &ModelManifold) -> f64 {
    match model {
        ModelManifold::FlatTorus(_) => TORUS_DEFAULT_STEP,
        ModelManifold::RoundSphere(_) => SPHERE_DEFAULT_STEP,
    }
}

/// Integrator state: packed (x, xi), plus the active chart on the sphere.
#[derive(Debug, Clone)]
pub struct PhaseState {
    pub chart: Chart,
    pub y: DVector<f64>,
}

impl PhaseState {
    pub fn from_point(model: &ModelManifold, z: &CotangentPoint) -> Result<Self> {
        match model {
            ModelManifold::FlatTorus(_) => Ok(PhaseState {
                chart: Chart::Polar,
                y: z.to_state(),
            }),
            ModelManifold::RoundSphere(s) => {
                let amb = sphere_chart::to_ambient(
                    s.radius,
                    Chart::Polar,
                    [z.x[0], z.x[1]],
                    [z.xi[0], z.xi[1]],
                );
                let chart = sphere_chart::safest_chart(s.radius, &amb.pos);
                let y = sphere_chart::state_from_ambient(s.radius, chart, &amb)?;
                Ok(PhaseState { chart, y })
            }
        }
    }

    /// Read the state back as a chart point (polar chart on the sphere).
    pub fn to_point(&self, model: &ModelManifold) -> Result<CotangentPoint> {
        match model {
            ModelManifold::FlatTorus(_) => Ok(CotangentPoint::from_state(&self.y)),
            ModelManifold::RoundSphere(s) => {
                let amb = sphere_chart::ambient_from_state(s.radius, self.chart, &self.y);
                let (q, xi) = sphere_chart::from_ambient(s.radius, Chart::Polar, &amb)?;
                Ok(CotangentPoint::from_slices(&q, &xi))
            }
        }
    }

    /// Chart-A position; safe at the poles (azimuth defaults to 0 there).
    pub fn position(&self, model: &ModelManifold) -> DVector<f64> {
        match model {
            ModelManifold::FlatTorus(_) => {
                let n = self.y.len() / 2;
                self.y.rows(0, n).into_owned()
            }
            ModelManifold::RoundSphere(s) => {
                let amb = sphere_chart::ambient_from_state(s.radius, self.chart, &self.y);
                let theta = (amb.pos[2] / s.radius).clamp(-1.0, 1.0).acos();
                let phi = amb.pos[1]
                    .atan2(amb.pos[0])
                    .rem_euclid(2.0 * std::f64::consts::PI);
                DVector::from_vec(vec![theta, phi])
            }
        }
    }
}

/// Hamiltonian vector field of p(x, xi) in the state's chart.
fn hamilton_rhs(model: &ModelManifold, chart: Chart, y: &DVector<f64>) -> Result<DVector<f64>> {
    let _ = chart;
    match model {
        ModelManifold::FlatTorus(t) => {
            let n = t.n;
            let xi = y.rows(n, n);
            let norm = xi.norm();
            if norm < 1e-300 {
                return Err(Error::config("flow of a zero covector"));
            }
            let mut f = DVector::zeros(2 * n);
            for i in 0..n {
                f[i] = xi[i] / norm;
            }
            Ok(f)
        }
        ModelManifold::RoundSphere(s) => {
            let r2 = s.radius * s.radius;
            let (theta, xit, xip) = (y[0], y[2], y[3]);
            let (st, ct) = theta.sin_cos();
            if st.abs() < 1e-9 {
                return Err(Error::numerical(
                    "integrator state too close to a chart pole",
                ));
            }
            let w = xit * xit + xip * xip / (st * st);
            if w < 1e-300 {
                return Err(Error::config("flow of a zero covector"));
            }
            let p = w.sqrt() / s.radius;
            let p_theta = -xip * xip * ct / (r2 * p * st * st * st);
            let p_xit = xit / (r2 * p);
            let p_xip = xip / (r2 * p * st * st);
            Ok(DVector::from_vec(vec![p_xit, p_xip, -p_theta, 0.0]))
        }
    }
}

/// Jacobian of the Hamiltonian vector field: A = J_sympl * Hess(p).
fn hamilton_jacobian(
    model: &ModelManifold,
    chart: Chart,
    y: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let _ = chart;
    match model {
        ModelManifold::FlatTorus(t) => {
            let n = t.n;
            let xi = y.rows(n, n).into_owned();
            let norm = xi.norm();
            let mut a = DMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    a[(i, n + j)] = (delta - xi[i] * xi[j] / (norm * norm)) / norm;
                }
            }
            Ok(a)
        }
        ModelManifold::RoundSphere(s) => {
            let r2 = s.radius * s.radius;
            let (theta, xit, xip) = (y[0], y[2], y[3]);
            let (st, ct) = theta.sin_cos();
            let w = xit * xit + xip * xip / (st * st);
            let p = w.sqrt() / s.radius;
            // First derivatives of p (phi cyclic).
            let p_th = -xip * xip * ct / (r2 * p * st.powi(3));
            let p_xt = xit / (r2 * p);
            let p_xp = xip / (r2 * p * st * st);
            // w second derivatives, then p_ab = w_ab/(2 R^2 p) - p_a p_b / p.
            let w_thth = 2.0 * xip * xip * (1.0 / (st * st) + 3.0 * ct * ct / st.powi(4));
            let w_thxp = -4.0 * xip * ct / st.powi(3);
            let w_xtxt = 2.0;
            let w_xpxp = 2.0 / (st * st);
            let grad = [p_th, 0.0, p_xt, p_xp];
            let wmat = [
                [w_thth, 0.0, 0.0, w_thxp],
                [0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, w_xtxt, 0.0],
                [w_thxp, 0.0, 0.0, w_xpxp],
            ];
            let mut hess = DMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    hess[(i, j)] = wmat[i][j] / (2.0 * r2 * p) - grad[i] * grad[j] / p;
                }
            }
            // A = [[H_xi_x, H_xi_xi], [-H_x_x, -H_x_xi]]
            let mut a = DMatrix::zeros(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    a[(i, j)] = hess[(i + 2, j)];
                    a[(i, j + 2)] = hess[(i + 2, j + 2)];
                    a[(i + 2, j)] = -hess[(i, j)];
                    a[(i + 2, j + 2)] = -hess[(i, j + 2)];
                }
            }
            Ok(a)
        }
    }
}

pub struct MidpointIntegrator<'m> {
    pub model: &'m ModelManifold,
    pub step: f64,
}

impl<'m> MidpointIntegrator<'m> {
    pub fn new(model: &'m ModelManifold, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1e-3) {
            return Err(Error::config(format!(
                "implicit midpoint step {step} outside (0, 1e-3]"
            )));
        }
        Ok(MidpointIntegrator { model, step })
    }

    /// Advance by dt (any sign), using n = ceil(|dt|/step) equal substeps.
    pub fn evolve(
        &self,
        state: &mut PhaseState,
        dt: f64,
        mut matrix: Option<&mut DMatrix<f64>>,
    ) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        let nsteps = (dt.abs() / self.step).ceil().max(1.0) as usize;
        let h = dt / nsteps as f64;
        for _ in 0..nsteps {
            self.single_step(state, h, matrix.as_deref_mut())?;
            self.maybe_switch_chart(state, matrix.as_deref_mut())?;
        }
        Ok(())
    }

    fn single_step(
        &self,
        state: &mut PhaseState,
        h: f64,
        matrix: Option<&mut DMatrix<f64>>,
    ) -> Result<()> {
        let y0 = state.y.clone();
        // Fixed-point iteration on y1 = y0 + h F((y0 + y1)/2).
        let mut y1 = &y0 + hamilton_rhs(self.model, state.chart, &y0)? * h;
        let scale = 1.0 + y0.amax();
        let mut converged = false;
        for _ in 0..100 {
            let mid = (&y0 + &y1) * 0.5;
            let next = &y0 + hamilton_rhs(self.model, state.chart, &mid)? * h;
            let delta = (&next - &y1).amax();
            y1 = next;
            if delta <= 1e-15 * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(
                "implicit midpoint fixed-point iteration did not converge",
            ));
        }
        if let Some(m) = matrix {
            let mid = (&y0 + &y1) * 0.5;
            let a = hamilton_jacobian(self.model, state.chart, &mid)? * (h / 2.0);
            let dim = a.nrows();
            let lhs = DMatrix::identity(dim, dim) - &a;
            let rhs = (DMatrix::identity(dim, dim) + &a) * m.clone();
            let solved = lhs
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::numerical("variational step solve failed"))?;
            m.copy_from(&solved);
        }
        state.y = y1;
        Ok(())
    }

    fn maybe_switch_chart(
        &self,
        state: &mut PhaseState,
        matrix: Option<&mut DMatrix<f64>>,
    ) -> Result<()> {
        let s = match self.model {
            ModelManifold::RoundSphere(s) => s,
            ModelManifold::FlatTorus(_) => return Ok(()),
        };
        let amb = sphere_chart::ambient_from_state(s.radius, state.chart, &state.y);
        if sphere_chart::pole_distance(s.radius, state.chart, &amb.pos) >= 0.35 {
            return Ok(());
        }
        let other = match state.chart {
            Chart::Polar => Chart::Rotated,
            Chart::Rotated => Chart::Polar,
        };
        let q = [state.y[0], state.y[1]];
        let xi = [state.y[2], state.y[3]];
        if let Some(m) = matrix {
            let trans = sphere_chart::transition_jacobian(s.radius, state.chart, other, q, xi)?;
            let updated = trans * m.clone();
            m.copy_from(&updated);
        }
        state.y = sphere_chart::state_from_ambient(s.radius, other, &amb)?;
        state.chart = other;
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

    #[test]
    fn torus_stepper_is_exact() {
        let m = torus();
        let integ = MidpointIntegrator::new(&m, 1e-3).unwrap();
        let z = CotangentPoint::from_slices(&[0.3, 0.7], &[0.6, 0.8]);
        let mut state = PhaseState::from_point(&m, &z).unwrap();
        integ.evolve(&mut state, 2.5, None).unwrap();
        let out = state.to_point(&m).unwrap();
        assert!((out.x[0] - (0.3 + 2.5 * 0.6)).abs() < 1e-12);
        assert!((out.x[1] - (0.7 + 2.5 * 0.8)).abs() < 1e-12);
    }

    #[test]
    fn sphere_meridian_crosses_pole_with_chart_switch() {
        let m = sphere();
        let integ = MidpointIntegrator::new(&m, 1e-4).unwrap();
        // Equator point heading north; after pi it must reach the antipodal
        // equator point heading south.
        let z = CotangentPoint::from_slices(&[std::f64::consts::FRAC_PI_2, 0.7], &[-1.0, 0.0]);
        let mut state = PhaseState::from_point(&m, &z).unwrap();
        integ
            .evolve(&mut state, std::f64::consts::PI, None)
            .unwrap();
        let out = state.to_point(&m).unwrap();
        assert!((out.x[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        let dphi = crate::num::wrap_centered(
            out.x[1] - (0.7 + std::f64::consts::PI),
            2.0 * std::f64::consts::PI,
        );
        assert!(dphi.abs() < 1e-7, "dphi = {dphi}");
        assert!((out.xi[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn sphere_energy_conservation() {
        let m = sphere();
        let integ = MidpointIntegrator::new(&m, 1e-4).unwrap();
        let z = CotangentPoint::from_slices(&[1.1, 0.2], &[0.6, 0.53]);
        let p0 = z.p(&m).unwrap();
        let mut state = PhaseState::from_point(&m, &z).unwrap();
        for k in 1..=10 {
            integ.evolve(&mut state, 1.0, None).unwrap();
            let p = state.to_point(&m).unwrap().p(&m).unwrap();
            assert!(
                (p - p0).abs() <= 1e-9 * (1.0 + k as f64),
                "energy drift {} at t={k}",
                (p - p0).abs()
            );
        }
    }

    #[test]
    fn variational_matrix_is_symplectic() {
        let m = sphere();
        let integ = MidpointIntegrator::new(&m, 1e-4).unwrap();
        let z = CotangentPoint::from_slices(&[1.2, 0.4], &[0.3, 0.8]);
        let mut state = PhaseState::from_point(&m, &z).unwrap();
        let mut mat = DMatrix::identity(4, 4);
        integ.evolve(&mut state, 3.0, Some(&mut mat)).unwrap();
        let defect = crate::dynamics::symplectic_defect(&mat);
        assert!(defect < 1e-8 * 4.0, "symplectic defect {defect}");
    }
}
