//! Experiment drivers wiring geometry, dynamics, spectra, and counting into
//! reproducible file outputs.

use std::fs;
use std::path::{Path, PathBuf};

use klab_core::config::{ExperimentConfig, FlowChoice, GridSpec};
use klab_core::counting::{main_constant, two_term_report, CountingFunction};
use klab_core::dynamics::{
    averaging_diagnostic, build_loop_table, eval_q, loop_table_to_json, FlowBackend, LoopTable,
    LoopTableParams,
};
use klab_core::error::Result;
use klab_core::geometry::{snh_quadrature, ModelManifold, Submanifold};
use klab_core::spectral::{enumerate_spectrum, SpectrumTable, DEFAULT_ITEM_CAP};
use klab_core::Threads;

use crate::output;

pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: ModelManifold,
    pub h: Submanifold,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let model = ModelManifold::new(&config.model)?;
        let h = Submanifold::new(&model, &config.h)?;
        Ok(Experiment { config, model, h })
    }

    pub fn threads(&self) -> Threads {
        Threads(self.config.threads)
    }

    pub fn backend(&self) -> FlowBackend {
        match self.config.flow {
            FlowChoice::ClosedForm => FlowBackend::ClosedForm,
            FlowChoice::Numeric => FlowBackend::numeric(&self.model),
        }
    }

    pub fn spectrum(&self) -> Result<SpectrumTable> {
        enumerate_spectrum(
            &self.model,
            &self.h,
            self.config.lambda_max,
            DEFAULT_ITEM_CAP,
        )
    }

    pub fn loop_table(&self) -> Result<(LoopTable, Vec<String>)> {
        let quad = snh_quadrature(&self.model, &self.h, self.config.nodes)?;
        let params = LoopTableParams {
            t_max: self.config.t_max,
            tol: self.config.tol_return,
            cluster_delta: self.config.cluster_delta_value(),
            measure_floor: self.config.measure_floor,
            backend: self.backend(),
        };
        let build = build_loop_table(&self.model, &self.h, &quad, &params, &self.threads())?;
        Ok((build.table, build.warnings))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let dir = Path::new(&self.config.out_dir);
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }
}

/// spectrum.csv: eigendata with period integrals.
pub fn cmd_spectrum(config: ExperimentConfig) -> Result<CommandOutput> {
    let exp = Experiment::new(config)?;
    let table = exp.spectrum()?;
    let path = exp.write("spectrum.csv", &output::spectrum_csv(&exp.config, &table))?;
    let mut messages = vec![format!("spectrum: {} items", table.items.len())];
    if table.zero_period_count > 0 {
        messages.push(format!(
            "spectrum: {} zero-period modes folded away",
            table.zero_period_count
        ));
    }
    Ok(CommandOutput {
        files: vec![path],
        messages,
    })
}

/// qtable.json: loop times, q(t), support measures, averaging diagnostic.
pub fn cmd_qtable(config: ExperimentConfig) -> Result<CommandOutput> {
    let exp = Experiment::new(config)?;
    let (table, warnings) = exp.loop_table()?;
    let t_max = exp.config.t_max;
    let mut averaging = Vec::new();
    for frac in [0.25, 0.5, 1.0] {
        let window = t_max * frac;
        averaging.push((window, averaging_diagnostic(&table, window)?));
    }
    let json = loop_table_to_json(
        &table,
        &exp.model,
        &exp.h,
        &averaging,
        &exp.config.hash(),
        output::VERSION,
    );
    // Echo the canonical config alongside the wire-format keys.
    let mut value: serde_json::Value = serde_json::from_str(&json)
        .map_err(|e| klab_core::Error::Invariant(format!("qtable serialization: {e}")))?;
    value
        .as_object_mut()
        .expect("qtable is an object")
        .insert("config".into(), exp.config.canonical_json());
    let json = serde_json::to_string_pretty(&value).expect("qtable re-serializes");
    let path = exp.write("qtable.json", &json)?;
    let mut messages = vec![format!("qtable: {} clusters", table.clusters.len())];
    messages.extend(warnings);
    Ok(CommandOutput {
        files: vec![path],
        messages,
    })
}

/// counting.csv + report.json + figure1.gp.
pub fn cmd_report(config: ExperimentConfig) -> Result<CommandOutput> {
    let exp = Experiment::new(config)?;
    let spectrum = exp.spectrum()?;
    let ncf = CountingFunction::from_spectrum(&spectrum);
    let c_main = main_constant(&exp.model, &exp.h);
    let (table, mut messages) = exp.loop_table()?;
    let grid = match exp.config.grid {
        GridSpec::Midpoints { lo, hi } => ncf.midpoint_grid(lo, hi),
        GridSpec::Uniform { lo, hi, step } => {
            let n = ((hi - lo) / step).round() as usize;
            (0..=n).map(|i| lo + i as f64 * step).collect()
        }
    };
    let codim = exp.model.dim() - exp.h.dim();
    let report = two_term_report(
        &ncf,
        codim,
        c_main,
        |lam| eval_q(&table, lam),
        &grid,
        true,
        &exp.threads(),
    )?;
    messages.extend(report.warnings.iter().cloned());
    let counting = exp.write("counting.csv", &output::counting_csv(&exp.config, &report))?;
    let report_path = exp.write("report.json", &output::report_json(&exp.config, &report))?;
    let figure = exp.write("figure1.gp", &output::figure_gnuplot(&exp.config))?;
    Ok(CommandOutput {
        files: vec![counting, report_path, figure],
        messages,
    })
}
