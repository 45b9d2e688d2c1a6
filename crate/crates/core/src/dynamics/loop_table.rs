//! The loop-time set, the loop invariants q(t), and the oscillating term
//! Q(lambda).

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::config::{h_desc_to_json, model_desc_to_json};
use crate::error::{Error, Result};
use crate::geometry::{ModelManifold, SNHQuadrature, Submanifold};
use crate::num::{round_sig, KahanSum};
use crate::par::Threads;

use super::flow::FlowBackend;
use super::returns::detect_returns;

/// One loop-time cluster with its invariant q(t).
#[derive(Debug, Clone)]
pub struct LoopCluster {
    pub t: f64,
    pub q: Complex64,
    /// Measure of the transversal looping set feeding this cluster.
    pub support_measure: f64,
}

#[derive(Debug, Clone)]
pub struct LoopTable {
    /// Sorted by t; every positive-t cluster is paired with its conjugate.
    pub clusters: Vec<LoopCluster>,
    pub t_max: f64,
    pub snh_measure: f64,
    pub descriptor_hash: String,
}

#[derive(Debug, Clone)]
pub struct LoopTableParams {
    pub t_max: f64,
    pub tol: f64,
    pub cluster_delta: f64,
    /// Fraction of |SN*H| below which a cluster is treated as measure zero.
    pub measure_floor: f64,
    pub backend: FlowBackend,
}

#[derive(Debug, Clone)]
pub struct LoopTableBuild {
    pub table: LoopTable,
    pub warnings: Vec<String>,
}

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Run return detection from every quadrature node, cluster the event times,
/// and sum the weighted i^sigma sqrt(J) contributions into q(t).
pub fn build_loop_table(
    model: &ModelManifold,
    h: &Submanifold,
    quad: &SNHQuadrature,
    params: &LoopTableParams,
    threads: &Threads,
) -> Result<LoopTableBuild> {
    if !(1e-8..=1e-2).contains(&params.cluster_delta) {
        return Err(Error::config(format!(
            "cluster_delta = {} outside [1e-8, 1e-2]",
            params.cluster_delta
        )));
    }
    if !(params.measure_floor >= 0.0) {
        return Err(Error::config("measure_floor must be >= 0"));
    }

    let scans = threads.map(&quad.nodes, |node| {
        detect_returns(
            model,
            h,
            &node.point,
            params.t_max,
            params.tol,
            params.backend,
        )
    });

    // (t, weight, maslov, sqrt J), in node order; stable sort keeps ties
    // deterministic afterwards.
    let mut raw: Vec<(f64, f64, i32, f64)> = Vec::new();
    let mut warnings = Vec::new();
    for (node, scan) in quad.nodes.iter().zip(scans) {
        let scan = scan?;
        warnings.extend(scan.warnings);
        for event in scan.events {
            if !event.transversal {
                continue;
            }
            let j = event
                .jacobian
                .ok_or_else(|| Error::invariant("transversal event without Jacobian"))?;
            raw.push((event.t, node.weight, event.maslov, j.sqrt()));
        }
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let prefactor = (2.0 * std::f64::consts::PI).powi(h.dim() as i32 - model.dim() as i32);
    let mut clusters: Vec<LoopCluster> = Vec::new();
    let mut idx = 0;
    while idx < raw.len() {
        let mut end = idx + 1;
        while end < raw.len() && raw[end].0 - raw[end - 1].0 <= params.cluster_delta {
            end += 1;
        }
        let members = &raw[idx..end];
        let mut t_acc = KahanSum::new();
        let mut w_acc = KahanSum::new();
        let mut q_re = KahanSum::new();
        let mut q_im = KahanSum::new();
        for &(t, w, sigma, sqrt_j) in members {
            t_acc.add(w * t);
            w_acc.add(w);
            let phase = I_POWERS[sigma.rem_euclid(4) as usize];
            q_re.add(w * sqrt_j * phase.re);
            q_im.add(w * sqrt_j * phase.im);
        }
        let support = w_acc.value();
        clusters.push(LoopCluster {
            t: t_acc.value() / support,
            q: Complex64::new(q_re.value(), q_im.value()) * prefactor,
            support_measure: support,
        });
        idx = end;
    }

    // Ambiguity: clusters closer than 2 delta cannot be told apart reliably.
    for pair in clusters.windows(2) {
        let gap = pair[1].t - pair[0].t;
        if gap < 2.0 * params.cluster_delta {
            return Err(Error::numerical(format!(
                "cluster ambiguity: centers at {} and {} are closer than 2 cluster_delta",
                pair[0].t, pair[1].t
            )));
        }
    }

    let floor = params.measure_floor * quad.total_measure;
    clusters.retain(|c| c.support_measure >= floor);

    for c in &clusters {
        if !(c.support_measure <= quad.total_measure * (1.0 + 1e-9)) {
            return Err(Error::invariant(format!(
                "cluster support {} exceeds |SN*H| = {}",
                c.support_measure, quad.total_measure
            )));
        }
    }

    let table = LoopTable {
        clusters,
        t_max: params.t_max,
        snh_measure: quad.total_measure,
        descriptor_hash: descriptor_hash(model, h),
    };
    table.check_pairing()?;
    Ok(LoopTableBuild { table, warnings })
}

fn descriptor_hash(model: &ModelManifold, h: &Submanifold) -> String {
    let text = format!(
        "{}|{}",
        model_desc_to_json(&model.descriptor()),
        h_desc_to_json(&h.descriptor())
    );
    crate::config::fnv1a64(text.as_bytes())
}

impl LoopTable {
    /// q(-t) = conj q(t) on every cluster pair, to 1e-8.
    pub fn check_pairing(&self) -> Result<()> {
        for c in self.clusters.iter().filter(|c| c.t > 0.0) {
            let partner = self
                .clusters
                .iter()
                .find(|other| (other.t + c.t).abs() <= 1e-6)
                .ok_or_else(|| {
                    Error::invariant(format!("cluster at t = {} has no conjugate partner", c.t))
                })?;
            let defect = (partner.q - c.q.conj()).norm();
            if defect > 1e-8 * (1.0 + c.q.norm()) {
                return Err(Error::invariant(format!(
                    "conjugation defect {defect} at t = {}",
                    c.t
                )));
            }
        }
        Ok(())
    }

    pub fn positive_clusters(&self) -> impl Iterator<Item = &LoopCluster> {
        self.clusters.iter().filter(|c| c.t > 0.0)
    }
}

/// Q(lambda) = sum over loop times of e^{-it lambda} q(t)/(-it), evaluated by
/// the conjugate pairing as 2 Re over positive times, ascending |t|.
pub fn eval_q(table: &LoopTable, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::config(format!(
            "eval_q needs lambda > 0, got {lambda}"
        )));
    }
    let mut acc = KahanSum::new();
    for c in table.positive_clusters() {
        let phase = Complex64::from_polar(1.0, -c.t * lambda);
        let term = phase * c.q / Complex64::new(0.0, -c.t);
        acc.add(2.0 * term.re);
    }
    Ok(acc.value())
}

/// A(T) = (1/T) sum over loop times in [-T, T] of |q(t)|.
pub fn averaging_diagnostic(table: &LoopTable, t_window: f64) -> Result<f64> {
    if !(t_window > 0.0) {
        return Err(Error::config("averaging window must be positive"));
    }
    if t_window > table.t_max * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "averaging window {t_window} exceeds the table horizon {}",
            table.t_max
        )));
    }
    let mut acc = KahanSum::new();
    for c in &table.clusters {
        if c.t.abs() <= t_window {
            acc.add(c.q.norm());
        }
    }
    Ok(acc.value() / t_window)
}

/// Serialize per the wire format; times carry 12 significant digits.
pub fn loop_table_to_json(
    table: &LoopTable,
    model: &ModelManifold,
    h: &Submanifold,
    averaging: &[(f64, f64)],
    config_hash: &str,
    version: &str,
) -> String {
    let clusters: Vec<Value> = table
        .clusters
        .iter()
        .map(|c| {
            json!({
                "t": round_sig(c.t, 12),
                "q_re": c.q.re,
                "q_im": c.q.im,
                "support_measure": c.support_measure,
            })
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("model".into(), model_desc_to_json(&model.descriptor()));
    obj.insert("h".into(), h_desc_to_json(&h.descriptor()));
    obj.insert("t_max".into(), json!(table.t_max));
    obj.insert("clusters".into(), Value::Array(clusters));
    obj.insert(
        "averaging".into(),
        Value::Array(
            averaging
                .iter()
                .map(|(t, a)| json!({"T": t, "A": a}))
                .collect(),
        ),
    );
    obj.insert("snh_measure".into(), json!(table.snh_measure));
    obj.insert("config_hash".into(), json!(config_hash));
    obj.insert("version".into(), json!(version));
    serde_json::to_string_pretty(&Value::Object(obj)).expect("loop table serializes")
}

/// Parse a loop table back from its JSON form.
pub fn loop_table_from_json(text: &str) -> Result<LoopTable> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::config(format!("invalid loop-table JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::config("loop table must be a JSON object"))?;
    let t_max = obj
        .get("t_max")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::config("loop table missing t_max"))?;
    let snh_measure = obj
        .get("snh_measure")
        .and_then(Value::as_f64)
        .unwrap_or(0.0);
    let clusters = obj
        .get("clusters")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config("loop table missing clusters"))?
        .iter()
        .map(|c| {
            let get = |k: &str| {
                c.get(k)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::config(format!("cluster missing {k}")))
            };
            Ok(LoopCluster {
                t: get("t")?,
                q: Complex64::new(get("q_re")?, get("q_im")?),
                support_measure: get("support_measure")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoopTable {
        clusters,
        t_max,
        snh_measure,
        descriptor_hash: String::new(),
    })
}
