//! First-return dynamics on the quadrature: the return operator iterates, the
//! mean-ergodic diagnostic, and the recurrence fraction.

use crate::error::{Error, Result};
use crate::geometry::sphere_chart::{self, Chart};
use crate::geometry::{CotangentPoint, ModelManifold, SNHQuadrature, Submanifold};
use crate::num::{wrap_centered, KahanSum};
use crate::par::Threads;

use super::flow::FlowBackend;
use super::returns::{detect_returns, first_return};

/// First-return data for one quadrature node.
#[derive(Debug, Clone)]
pub enum NodeReturn {
    /// Returns onto (close to) another quadrature node.
    Node {
        target: usize,
        time: f64,
        sqrt_j: f64,
    },
    /// Returns, but not onto a resolved node (chain is dropped).
    Unresolved { time: f64 },
    /// No transversal return before the horizon.
    None,
}

#[derive(Debug, Clone)]
pub struct FirstReturnMap {
    pub targets: Vec<NodeReturn>,
    /// Quadrature mass whose chains leave the resolved node set.
    pub unresolved_mass: f64,
    pub t_max: f64,
}

/// Iterates of the first-return operator U f = f o G^T sqrt(J_T) paired
/// against the indicator of the returning set.
#[derive(Debug, Clone)]
pub struct ErgodicAverages {
    /// <U^k 1, 1> for k = 1..=K.
    pub pairings: Vec<f64>,
    /// Running averages (1/k) sum_{j<=k} of the pairings.
    pub running: Vec<f64>,
    pub unresolved_mass: f64,
}

/// Build the node-to-node first-return map.
pub fn first_return_map(
    model: &ModelManifold,
    h: &Submanifold,
    quad: &SNHQuadrature,
    t_max: f64,
    tol: f64,
    backend: FlowBackend,
    threads: &Threads,
) -> Result<FirstReturnMap> {
    let returns = threads.map(&quad.nodes, |node| {
        first_return(model, h, &node.point, t_max, tol, backend)
    });
    let mut targets = Vec::with_capacity(quad.nodes.len());
    let mut unresolved = KahanSum::new();
    for (i, fr) in returns.into_iter().enumerate() {
        let fr = fr?;
        match fr.event {
            None => targets.push(NodeReturn::None),
            Some(event) => {
                let sqrt_j = event
                    .jacobian
                    .ok_or_else(|| Error::invariant("first return without Jacobian"))?
                    .sqrt();
                match match_node(model, h, quad, &event.arrival)? {
                    Some(j) => targets.push(NodeReturn::Node {
                        target: j,
                        time: event.t,
                        sqrt_j,
                    }),
                    None => {
                        unresolved.add(quad.nodes[i].weight);
                        targets.push(NodeReturn::Unresolved { time: event.t });
                    }
                }
            }
        }
    }
    Ok(FirstReturnMap {
        targets,
        unresolved_mass: unresolved.value(),
        t_max,
    })
}

/// Locate the quadrature node matching an arrival phase point, if any.
fn match_node(
    model: &ModelManifold,
    h: &Submanifold,
    quad: &SNHQuadrature,
    arrival: &CotangentPoint,
) -> Result<Option<usize>> {
    const MATCH_TOL: f64 = 1e-6;
    let res = quad.resolution as f64;
    match h.dim() {
        1 => {
            let period = h.param_period();
            let step = period / res;
            let s = h.param_of_position(model, &arrival.x)?;
            let jf = (s / step - 0.5).round();
            let j = (jf as i64).rem_euclid(quad.resolution as i64) as usize;
            let s_node = step * (j as f64 + 0.5);
            if wrap_centered(s - s_node, period).abs() > MATCH_TOL {
                return Ok(None);
            }
            let rho = super::jacobian::conormal_coefficients(model, h, s_node, arrival)?;
            // Nodes are interleaved (+, -) per position.
            let idx = 2 * j + if rho[0] >= 0.0 { 0 } else { 1 };
            let node = &quad.nodes[idx];
            if (node.normal[0] - rho[0]).abs() > MATCH_TOL {
                return Ok(None);
            }
            Ok(Some(idx))
        }
        0 => {
            let alpha = arrival.xi[1]
                .atan2(arrival.xi[0])
                .rem_euclid(2.0 * std::f64::consts::PI);
            let step = 2.0 * std::f64::consts::PI / res;
            let jf = (alpha / step - 0.5).round();
            let j = (jf as i64).rem_euclid(quad.resolution as i64) as usize;
            let a_node = step * (j as f64 + 0.5);
            if wrap_centered(alpha - a_node, 2.0 * std::f64::consts::PI).abs() > MATCH_TOL {
                return Ok(None);
            }
            // Positions of all point-H nodes coincide; check lattice closeness.
            let t = model.as_torus()?;
            if t.lattice_distance(&arrival.x, &quad.nodes[j].point.x) > MATCH_TOL {
                return Ok(None);
            }
            Ok(Some(j))
        }
        _ => Err(Error::unsupported("first-return map for dim H > 1")),
    }
}

/// <U^k 1, 1> for k = 1..=K over the quadrature.
///
/// Here 1 is the constant one function on the returning set, so the k-th
/// pairing weighs directions whose whole k-step chain keeps returning.
/// Chains that land off the resolved node set are dropped and their mass
/// reported.
pub fn ergodic_average(
    model: &ModelManifold,
    h: &Submanifold,
    quad: &SNHQuadrature,
    iterations: usize,
    t_max: f64,
    tol: f64,
    backend: FlowBackend,
    threads: &Threads,
) -> Result<ErgodicAverages> {
    if iterations == 0 {
        return Err(Error::config("ergodic_average needs K >= 1"));
    }
    let map = first_return_map(model, h, quad, t_max, tol, backend, threads)?;
    let indicator: Vec<f64> = map
        .targets
        .iter()
        .map(|t| match t {
            NodeReturn::None => 0.0,
            _ => 1.0,
        })
        .collect();
    let mut u = indicator.clone();
    let mut pairings = Vec::with_capacity(iterations);
    let mut running = Vec::with_capacity(iterations);
    let mut run_acc = KahanSum::new();
    for k in 1..=iterations {
        let mut next = vec![0.0; u.len()];
        for (i, target) in map.targets.iter().enumerate() {
            if let NodeReturn::Node { target, sqrt_j, .. } = target {
                next[i] = u[*target] * sqrt_j;
            }
        }
        u = next;
        let mut acc = KahanSum::new();
        for ((value, f0), node) in u.iter().zip(&indicator).zip(&quad.nodes) {
            acc.add(node.weight * value * f0);
        }
        let pairing = acc.value();
        pairings.push(pairing);
        run_acc.add(pairing);
        running.push(run_acc.value() / k as f64);
    }
    Ok(ErgodicAverages {
        pairings,
        running,
        unresolved_mass: map.unresolved_mass,
    })
}

/// Phase-space distance comparable to the chart Euclidean metric.
pub fn phase_distance(
    model: &ModelManifold,
    a: &CotangentPoint,
    b: &CotangentPoint,
) -> Result<f64> {
    match model {
        ModelManifold::FlatTorus(t) => {
            let dpos = t.lattice_distance(&a.x, &b.x);
            let dcov = (&a.xi - &b.xi).norm();
            Ok((dpos * dpos + dcov * dcov).sqrt())
        }
        ModelManifold::RoundSphere(s) => {
            let pa = sphere_chart::to_ambient(
                s.radius,
                Chart::Polar,
                [a.x[0], a.x[1]],
                [a.xi[0], a.xi[1]],
            );
            let pb = sphere_chart::to_ambient(
                s.radius,
                Chart::Polar,
                [b.x[0], b.x[1]],
                [b.xi[0], b.xi[1]],
            );
            let dpos = (pa.pos - pb.pos).norm();
            let dcov = (pa.cov - pb.cov).norm();
            Ok((dpos * dpos + dcov * dcov).sqrt())
        }
    }
}

/// Fraction of SN*H quadrature mass whose conormal returns re-enter the
/// delta-ball about the start.
pub fn recurrence_fraction(
    model: &ModelManifold,
    h: &Submanifold,
    quad: &SNHQuadrature,
    delta: f64,
    t_max: f64,
    tol: f64,
    backend: FlowBackend,
    threads: &Threads,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::config("recurrence delta must be positive"));
    }
    let flags = threads.map(&quad.nodes, |node| -> Result<bool> {
        let scan = detect_returns(model, h, &node.point, t_max, tol, backend)?;
        for event in &scan.events {
            if phase_distance(model, &node.point, &event.arrival)? < delta {
                return Ok(true);
            }
        }
        Ok(false)
    });
    let mut recurrent = KahanSum::new();
    for (node, flag) in quad.nodes.iter().zip(flags) {
        if flag? {
            recurrent.add(node.weight);
        }
    }
    Ok(recurrent.value() / quad.total_measure)
}
