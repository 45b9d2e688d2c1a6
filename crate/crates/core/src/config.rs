//! Experiment configuration: plain key=value text or a single JSON object.
//! Both forms round-trip.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{HKindTag, ModelDescriptor, ModelKindTag, SubmanifoldDescriptor};

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Jump midpoints of the staircase restricted to [lo, hi].
    Midpoints {
        lo: f64,
        hi: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowChoice {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelDescriptor,
    pub h: SubmanifoldDescriptor,
    pub lambda_max: f64,
    pub t_max: f64,
    pub nodes: usize,
    pub kernel_a: f64,
    pub grid: GridSpec,
    pub out_dir: String,
    pub threads: usize,
    pub tol_return: f64,
    pub cluster_delta: Option<f64>,
    pub measure_floor: f64,
    pub flow: FlowChoice,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelDescriptor {
                kind: ModelKindTag::FlatTorus,
                n: 2,
                lattice: None,
                radius: None,
            },
            h: SubmanifoldDescriptor {
                kind: HKindTag::EmbeddedCircle,
                center: Some(vec![std::f64::consts::PI, std::f64::consts::PI]),
                r: Some(1.0),
                theta0: None,
                anchor: None,
            },
            lambda_max: 100.0,
            t_max: 8.0 * std::f64::consts::PI,
            nodes: 256,
            kernel_a: 0.5,
            grid: GridSpec::Midpoints {
                lo: 20.0,
                hi: 100.0,
            },
            out_dir: "out".to_string(),
            threads: 1,
            tol_return: 1e-9,
            cluster_delta: None,
            measure_floor: 0.02,
            flow: FlowChoice::ClosedForm,
        }
    }
}

impl ExperimentConfig {
    /// Cluster width: spec defaults per flow backend unless overridden.
    pub fn cluster_delta_value(&self) -> f64 {
        self.cluster_delta.unwrap_or(match self.flow {
            FlowChoice::ClosedForm => 1e-6,
            FlowChoice::Numeric => 1e-4,
        })
    }

    /// Validate every module-level precondition before any computation.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max >= 0.0) {
            return Err(Error::config("lambda_max must be >= 0"));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::config("t_max must be positive"));
        }
        if self.nodes < crate::geometry::MIN_NODES_PER_DIM {
            return Err(Error::config("nodes below the quadrature minimum (8)"));
        }
        if !(self.kernel_a > 0.0) {
            return Err(Error::config("kernel_a must be positive"));
        }
        if self.threads == 0 {
            return Err(Error::config("threads must be >= 1"));
        }
        if !(1e-12..=1e-6).contains(&self.tol_return) {
            return Err(Error::config("tol_return outside [1e-12, 1e-6]"));
        }
        if let Some(d) = self.cluster_delta {
            if !(1e-8..=1e-2).contains(&d) {
                return Err(Error::config("cluster_delta outside [1e-8, 1e-2]"));
            }
        }
        if !(self.measure_floor >= 0.0) {
            return Err(Error::config("measure_floor must be >= 0"));
        }
        match self.grid {
            GridSpec::Midpoints { lo, hi } => {
                if !(lo >= 0.0 && hi > lo) {
                    return Err(Error::config("grid bounds must satisfy 0 <= lo < hi"));
                }
            }
            GridSpec::Uniform { lo, hi, step } => {
                if !(lo >= 0.0 && hi > lo && step > 0.0) {
                    return Err(Error::config(
                        "uniform grid needs 0 <= lo < hi and step > 0",
                    ));
                }
            }
        }
        // Descriptor-level checks run in the constructors; trigger them here.
        let model = crate::geometry::ModelManifold::new(&self.model)?;
        crate::geometry::Submanifold::new(&model, &self.h)?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_key_values(text)
        }
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut saw_model_kind = false;
        // Two passes: kinds first so field ownership is unambiguous.
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key=value", lineno + 1)))?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        for (key, value) in &entries {
            match key.as_str() {
                "model.kind" => {
                    cfg.model.kind = ModelKindTag::parse(value)?;
                    saw_model_kind = true;
                }
                "h.kind" => cfg.h.kind = HKindTag::parse(value)?,
                _ => {}
            }
        }
        if !saw_model_kind {
            return Err(Error::config("missing model.kind"));
        }
        cfg.model.lattice = None;
        cfg.model.radius = None;
        cfg.h.center = None;
        cfg.h.r = None;
        cfg.h.theta0 = None;
        cfg.h.anchor = None;
        for (key, value) in &entries {
            match key.as_str() {
                "model.kind" | "h.kind" => {}
                "model.n" => cfg.model.n = parse_usize(key, value)?,
                "model.lattice" => cfg.model.lattice = Some(parse_reals(key, value)?),
                "model.radius" => cfg.model.radius = Some(parse_real(key, value)?),
                "h.center" => cfg.h.center = Some(parse_reals(key, value)?),
                "h.r" => cfg.h.r = Some(parse_real(key, value)?),
                "h.theta0" => cfg.h.theta0 = Some(parse_real(key, value)?),
                "h.anchor" => cfg.h.anchor = Some(parse_reals(key, value)?),
                "lambda_max" => cfg.lambda_max = parse_real(key, value)?,
                "t_max" => cfg.t_max = parse_real(key, value)?,
                "nodes" => cfg.nodes = parse_usize(key, value)?,
                "kernel_a" => cfg.kernel_a = parse_real(key, value)?,
                "grid" => cfg.grid = parse_grid(value)?,
                "out_dir" => cfg.out_dir = value.to_string(),
                "threads" => cfg.threads = parse_usize(key, value)?,
                "tol_return" => cfg.tol_return = parse_real(key, value)?,
                "cluster_delta" => cfg.cluster_delta = Some(parse_real(key, value)?),
                "measure_floor" => cfg.measure_floor = parse_real(key, value)?,
                "flow" => {
                    cfg.flow = match value.as_str() {
                        "closed-form" => FlowChoice::ClosedForm,
                        "numeric" => FlowChoice::Numeric,
                        other => return Err(Error::config(format!("unknown flow '{other}'"))),
                    }
                }
                other => return Err(Error::config(format!("unknown key '{other}'"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Error::config(format!("invalid JSON config: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::config("JSON config must be a single object"))?;
        let mut cfg = ExperimentConfig::default();
        let model = obj
            .get("model")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::config("missing model object"))?;
        cfg.model = model_desc_from_json(model)?;
        let h = obj
            .get("h")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::config("missing h object"))?;
        cfg.h = h_desc_from_json(h)?;
        if let Some(x) = obj.get("lambda_max") {
            cfg.lambda_max = json_f64(x, "lambda_max")?;
        }
        if let Some(x) = obj.get("t_max") {
            cfg.t_max = json_f64(x, "t_max")?;
        }
        if let Some(x) = obj.get("nodes") {
            cfg.nodes = json_f64(x, "nodes")? as usize;
        }
        if let Some(x) = obj.get("kernel_a") {
            cfg.kernel_a = json_f64(x, "kernel_a")?;
        }
        if let Some(x) = obj.get("grid") {
            cfg.grid = parse_grid(
                x.as_str()
                    .ok_or_else(|| Error::config("grid must be a string"))?,
            )?;
        }
        if let Some(x) = obj.get("out_dir") {
            cfg.out_dir = x
                .as_str()
                .ok_or_else(|| Error::config("out_dir must be a string"))?
                .to_string();
        }
        if let Some(x) = obj.get("threads") {
            cfg.threads = json_f64(x, "threads")? as usize;
        }
        if let Some(x) = obj.get("tol_return") {
            cfg.tol_return = json_f64(x, "tol_return")?;
        }
        if let Some(x) = obj.get("cluster_delta") {
            cfg.cluster_delta = Some(json_f64(x, "cluster_delta")?);
        }
        if let Some(x) = obj.get("measure_floor") {
            cfg.measure_floor = json_f64(x, "measure_floor")?;
        }
        if let Some(x) = obj.get("flow") {
            cfg.flow = match x.as_str() {
                Some("closed-form") => FlowChoice::ClosedForm,
                Some("numeric") => FlowChoice::Numeric,
                _ => return Err(Error::config("flow must be 'closed-form' or 'numeric'")),
            };
        }
        Ok(cfg)
    }

    /// Experiment-defining keys only: excludes `threads` and `out_dir`, which
    /// are execution parameters. This is what the config hash covers, so
    /// outputs stay byte-identical across thread counts.
    pub fn canonical_key_values(&self) -> String {
        self.to_key_values()
            .lines()
            .filter(|l| !l.starts_with("threads=") && !l.starts_with("out_dir="))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    /// Canonical JSON echo of the experiment-defining keys.
    pub fn canonical_json(&self) -> Value {
        let mut v = self.to_json();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("threads");
            obj.remove("out_dir");
        }
        v
    }

    /// Canonical key=value form (fixed key order).
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        push("model.kind", self.model.kind.as_str().to_string());
        push("model.n", self.model.n.to_string());
        if let Some(l) = &self.model.lattice {
            push("model.lattice", join_reals(l));
        }
        if let Some(r) = self.model.radius {
            push("model.radius", fmt_f64(r));
        }
        push("h.kind", self.h.kind.as_str().to_string());
        if let Some(c) = &self.h.center {
            push("h.center", join_reals(c));
        }
        if let Some(r) = self.h.r {
            push("h.r", fmt_f64(r));
        }
        if let Some(t) = self.h.theta0 {
            push("h.theta0", fmt_f64(t));
        }
        if let Some(a) = &self.h.anchor {
            push("h.anchor", join_reals(a));
        }
        push("lambda_max", fmt_f64(self.lambda_max));
        push("t_max", fmt_f64(self.t_max));
        push("nodes", self.nodes.to_string());
        push("kernel_a", fmt_f64(self.kernel_a));
        push("grid", grid_to_string(&self.grid));
        push("out_dir", self.out_dir.clone());
        push("threads", self.threads.to_string());
        push("tol_return", fmt_f64(self.tol_return));
        if let Some(d) = self.cluster_delta {
            push("cluster_delta", fmt_f64(d));
        }
        push("measure_floor", fmt_f64(self.measure_floor));
        push(
            "flow",
            match self.flow {
                FlowChoice::ClosedForm => "closed-form".to_string(),
                FlowChoice::Numeric => "numeric".to_string(),
            },
        );
        out
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("model".into(), model_desc_to_json(&self.model));
        obj.insert("h".into(), h_desc_to_json(&self.h));
        obj.insert("lambda_max".into(), json!(self.lambda_max));
        obj.insert("t_max".into(), json!(self.t_max));
        obj.insert("nodes".into(), json!(self.nodes));
        obj.insert("kernel_a".into(), json!(self.kernel_a));
        obj.insert("grid".into(), json!(grid_to_string(&self.grid)));
        obj.insert("out_dir".into(), json!(self.out_dir));
        obj.insert("threads".into(), json!(self.threads));
        obj.insert("tol_return".into(), json!(self.tol_return));
        if let Some(d) = self.cluster_delta {
            obj.insert("cluster_delta".into(), json!(d));
        }
        obj.insert("measure_floor".into(), json!(self.measure_floor));
        obj.insert(
            "flow".into(),
            json!(match self.flow {
                FlowChoice::ClosedForm => "closed-form",
                FlowChoice::Numeric => "numeric",
            }),
        );
        Value::Object(obj)
    }

    /// FNV-1a hash of the canonical (experiment-defining) key=value text.
    pub fn hash(&self) -> String {
        fnv1a64(self.canonical_key_values().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn model_desc_to_json(d: &ModelDescriptor) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(d.kind.as_str()));
    obj.insert("n".into(), json!(d.n));
    if let Some(l) = &d.lattice {
        obj.insert("lattice".into(), json!(l));
    }
    if let Some(r) = d.radius {
        obj.insert("radius".into(), json!(r));
    }
    Value::Object(obj)
}

pub fn h_desc_to_json(d: &SubmanifoldDescriptor) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(d.kind.as_str()));
    if let Some(c) = &d.center {
        obj.insert("center".into(), json!(c));
    }
    if let Some(r) = d.r {
        obj.insert("r".into(), json!(r));
    }
    if let Some(t) = d.theta0 {
        obj.insert("theta0".into(), json!(t));
    }
    if let Some(a) = &d.anchor {
        obj.insert("anchor".into(), json!(a));
    }
    Value::Object(obj)
}

pub fn model_desc_from_json(obj: &Map<String, Value>) -> Result<ModelDescriptor> {
    let kind = ModelKindTag::parse(
        obj.get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("model.kind missing"))?,
    )?;
    let n = obj
        .get("n")
        .map(|v| json_f64(v, "model.n"))
        .transpose()?
        .unwrap_or(2.0) as usize;
    let lattice = obj
        .get("lattice")
        .map(|v| json_f64_array(v, "model.lattice"))
        .transpose()?;
    let radius = obj
        .get("radius")
        .map(|v| json_f64(v, "model.radius"))
        .transpose()?;
    Ok(ModelDescriptor {
        kind,
        n,
        lattice,
        radius,
    })
}

pub fn h_desc_from_json(obj: &Map<String, Value>) -> Result<SubmanifoldDescriptor> {
    let kind = HKindTag::parse(
        obj.get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config("h.kind missing"))?,
    )?;
    Ok(SubmanifoldDescriptor {
        kind,
        center: obj
            .get("center")
            .map(|v| json_f64_array(v, "h.center"))
            .transpose()?,
        r: obj.get("r").map(|v| json_f64(v, "h.r")).transpose()?,
        theta0: obj
            .get("theta0")
            .map(|v| json_f64(v, "h.theta0"))
            .transpose()?,
        anchor: obj
            .get("anchor")
            .map(|v| json_f64_array(v, "h.anchor"))
            .transpose()?,
    })
}

fn json_f64(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::config(format!("{key} must be a number")))
}

fn json_f64_array(v: &Value, key: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::config(format!("{key} must be an array")))?
        .iter()
        .map(|x| json_f64(x, key))
        .collect()
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse '{value}' as a real")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse '{value}' as an integer")))
}

fn parse_reals(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_real(key, part.trim()))
        .collect()
}

fn parse_grid(value: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        ["midpoints", lo, hi] => Ok(GridSpec::Midpoints {
            lo: parse_real("grid", lo)?,
            hi: parse_real("grid", hi)?,
        }),
        ["uniform", lo, hi, step] => Ok(GridSpec::Uniform {
            lo: parse_real("grid", lo)?,
            hi: parse_real("grid", hi)?,
            step: parse_real("grid", step)?,
        }),
        _ => Err(Error::config(format!(
            "grid '{value}' is not 'midpoints:lo:hi' or 'uniform:lo:hi:step'"
        ))),
    }
}

fn grid_to_string(grid: &GridSpec) -> String {
    match grid {
        GridSpec::Midpoints { lo, hi } => format!("midpoints:{}:{}", fmt_f64(*lo), fmt_f64(*hi)),
        GridSpec::Uniform { lo, hi, step } => {
            format!(
                "uniform:{}:{}:{}",
                fmt_f64(*lo),
                fmt_f64(*hi),
                fmt_f64(*step)
            )
        }
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn join_reals(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_both_formats() {
        let cfg = ExperimentConfig::default();
        let kv = cfg.to_key_values();
        let from_kv = ExperimentConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg, from_kv);
        let js = serde_json::to_string_pretty(&cfg.to_json()).unwrap();
        let from_js = ExperimentConfig::from_json_str(&js).unwrap();
        assert_eq!(cfg, from_js);
        assert_eq!(cfg.hash(), from_js.hash());
    }

    #[test]
    fn parse_sniffs_format() {
        let kv = "model.kind=round-sphere\nmodel.n=2\nmodel.radius=1\nh.kind=latitude-circle\nh.theta0=1.5707963267948966\n";
        let a = ExperimentConfig::parse(kv).unwrap();
        assert_eq!(a.model.kind, ModelKindTag::RoundSphere);
        let js = r#"{"model":{"kind":"round-sphere","n":2,"radius":1},"h":{"kind":"latitude-circle","theta0":1.5707963267948966}}"#;
        let b = ExperimentConfig::parse(js).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = ExperimentConfig::default();
        cfg.model.lattice = Some(vec![1.0, 2.0, 2.0, 4.0]);
        let err = cfg.validate().unwrap_err();
        assert!(format!("{err}").contains("singular lattice"));

        let mut cfg = ExperimentConfig::default();
        cfg.nodes = 4;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let kv = "model.kind=flat-torus\nbogus=1\n";
        assert!(ExperimentConfig::from_key_values(kv).is_err());
    }
}
