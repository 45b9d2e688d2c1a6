//! The acceptance suite: every criterion is pinned here with its stated
//! tolerance and prints one pass/fail line.
//!
//! Criteria carry their own horizons and grids (they are part of the
//! criterion statement); the config chooses the scenario, the node count and
//! the flow backend. When the config's horizon cannot reach the scenario's
//! first loop, the loop-table criteria report skipped instead of failing.

use std::time::Instant;

use klab_core::config::{ExperimentConfig, FlowChoice, GridSpec};
use klab_core::counting::{
    convolve_counting, main_constant, quasimode_jump, ConvMode, CountingFunction, SmoothingKernel,
};
use klab_core::dynamics::{
    averaging_diagnostic, detect_returns, ergodic_average, eval_q, flow, jacobian_j, maslov_index,
    recurrence_fraction, symplectic_defect, tangent_flow, FlowBackend, LoopTable,
    MidpointIntegrator, PhaseState,
};
use klab_core::error::{Error, Result};
use klab_core::geometry::{snh_quadrature, CotangentPoint, ModelManifold, Submanifold};
use klab_core::geometry::{HKindTag, ModelKindTag};
use klab_core::num::quad::simpson;
use klab_core::num::roots::brent_root;
use klab_core::spectral::{bessel_j0, enumerate_spectrum, DEFAULT_ITEM_CAP};
use klab_core::Threads;

use crate::commands::{cmd_report, Experiment};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub outcome: Outcome,
    pub measured: String,
    pub threshold: String,
    pub millis: u128,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = match &self.outcome {
            Outcome::Pass => "PASS".to_string(),
            Outcome::Fail => "FAIL".to_string(),
            Outcome::Skipped(reason) => format!("SKIP ({reason})"),
        };
        format!(
            "criterion {:>2} {:<4} {:<28} measured: {} | threshold: {} | {} ms",
            self.id, status, self.name, self.measured, self.threshold, self.millis
        )
    }

    pub fn passed_or_skipped(&self) -> bool {
        !matches!(self.outcome, Outcome::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    TorusCircle,
    SphereEquator,
    TorusPoint,
    Other,
}

impl ScenarioKind {
    pub fn of(cfg: &ExperimentConfig) -> ScenarioKind {
        let standard_torus = cfg.model.kind == ModelKindTag::FlatTorus
            && cfg.model.n == 2
            && match &cfg.model.lattice {
                None => true,
                Some(l) => {
                    let tp = 2.0 * PI;
                    l.len() == 4
                        && (l[0] - tp).abs() < 1e-12
                        && l[1].abs() < 1e-12
                        && l[2].abs() < 1e-12
                        && (l[3] - tp).abs() < 1e-12
                }
            };
        match cfg.h.kind {
            HKindTag::EmbeddedCircle
                if standard_torus && (cfg.h.r.unwrap_or(0.0) - 1.0).abs() < 1e-12 =>
            {
                ScenarioKind::TorusCircle
            }
            HKindTag::Point if standard_torus => ScenarioKind::TorusPoint,
            HKindTag::LatitudeCircle
                if cfg.model.kind == ModelKindTag::RoundSphere
                    && (cfg.model.radius.unwrap_or(1.0) - 1.0).abs() < 1e-12
                    && (cfg.h.theta0.unwrap_or(0.0) - PI / 2.0).abs() < 1e-12 =>
            {
                ScenarioKind::SphereEquator
            }
            _ => ScenarioKind::Other,
        }
    }
}

struct Ctx {
    exp: Experiment,
    kind: ScenarioKind,
}

impl Ctx {
    fn new(config: ExperimentConfig) -> Result<Self> {
        let kind = ScenarioKind::of(&config);
        Ok(Ctx {
            exp: Experiment::new(config)?,
            kind,
        })
    }

    fn model(&self) -> &ModelManifold {
        &self.exp.model
    }

    fn h(&self) -> &Submanifold {
        &self.exp.h
    }

    fn threads(&self) -> Threads {
        self.exp.threads()
    }

    fn backend(&self) -> FlowBackend {
        self.exp.backend()
    }

    fn detection_tol(&self) -> f64 {
        match self.exp.config.flow {
            FlowChoice::ClosedForm => self.exp.config.tol_return,
            FlowChoice::Numeric => 1e-6,
        }
    }

    fn first_loop_time(&self) -> f64 {
        match self.kind {
            ScenarioKind::TorusCircle => 2.0,
            ScenarioKind::SphereEquator => PI,
            _ => f64::INFINITY,
        }
    }

    /// Build the loop table at the criterion's own horizon; None when the
    /// config's horizon cannot even reach the first loop.
    fn loop_table_at(&self, t_max: f64, backend: FlowBackend) -> Result<Option<LoopTable>> {
        if self.exp.config.t_max < self.first_loop_time() {
            return Ok(None);
        }
        let quad = snh_quadrature(self.model(), self.h(), self.exp.config.nodes)?;
        let params = klab_core::dynamics::LoopTableParams {
            t_max,
            tol: match backend {
                FlowBackend::ClosedForm => self.exp.config.tol_return,
                FlowBackend::ImplicitMidpoint { .. } => 1e-6,
            },
            cluster_delta: match backend {
                FlowBackend::ClosedForm => 1e-6,
                FlowBackend::ImplicitMidpoint { .. } => 1e-4,
            },
            measure_floor: self.exp.config.measure_floor,
            backend,
        };
        let build = klab_core::dynamics::build_loop_table(
            self.model(),
            self.h(),
            &quad,
            &params,
            &self.threads(),
        )?;
        Ok(Some(build.table))
    }
}

fn finish(
    id: u32,
    name: &'static str,
    start: Instant,
    pass: bool,
    measured: String,
    threshold: String,
) -> CriterionResult {
    CriterionResult {
        id,
        name,
        outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        measured,
        threshold,
        millis: start.elapsed().as_millis(),
    }
}

fn skipped(id: u32, name: &'static str, reason: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        outcome: Outcome::Skipped(reason),
        measured: "-".into(),
        threshold: "-".into(),
        millis: 0,
    }
}

/// 1. Figure-1 reproduction: residual against 2 lambda - cos(2 lambda).
fn criterion_1(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let table = enumerate_spectrum(ctx.model(), ctx.h(), 100.0, DEFAULT_ITEM_CAP)?;
    let ncf = CountingFunction::from_spectrum(&table);
    let grid = ncf.midpoint_grid(20.0, 100.0);
    let resid: Vec<(f64, f64)> = grid
        .iter()
        .map(|&lam| (lam, ncf.eval(lam) - (2.0 * lam - (2.0 * lam).cos())))
        .collect();
    let window_mean = |lo: f64, hi: f64| {
        let vals: Vec<f64> = resid
            .iter()
            .filter(|(l, _)| *l >= lo && *l <= hi)
            .map(|(_, r)| r.abs())
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let early = window_mean(20.0, 40.0);
    let late = window_mean(80.0, 100.0);
    let max_mid = resid
        .iter()
        .filter(|(l, _)| *l >= 50.0 && *l <= 100.0)
        .map(|(_, r)| r.abs())
        .fold(0.0f64, f64::max);
    let pass = late < early && max_mid <= 0.5;
    Ok(finish(
        1,
        "figure-1 reproduction",
        start,
        pass,
        format!("mean|r|[80,100]={late:.4} vs [20,40]={early:.4}; max|r|[50,100]={max_mid:.4}"),
        "late mean < early mean; max <= 0.5".into(),
    ))
}

/// 2. Dynamical q matches the spectral oscillation on the torus.
fn criterion_2(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let runs: Vec<(FlowBackend, f64, &str)> = vec![
        (FlowBackend::ClosedForm, 1e-6, "closed"),
        (FlowBackend::numeric(ctx.model()), 1e-4, "numeric"),
    ];
    for (backend, tol, label) in runs {
        let Some(table) = ctx.loop_table_at(10.0, backend)? else {
            return Ok(skipped(
                2,
                "dynamical q vs oscillation",
                "horizon below first return".into(),
            ));
        };
        let times: Vec<f64> = table.clusters.iter().map(|c| c.t).collect();
        let set_ok =
            times.len() == 2 && (times[0] + 2.0).abs() < 1e-6 && (times[1] - 2.0).abs() < 1e-6;
        let q2 = table
            .clusters
            .iter()
            .find(|c| (c.t - 2.0).abs() < 1e-3)
            .map(|c| c.q)
            .unwrap_or_default();
        let mod_err = (q2.norm() - 1.0).abs();
        let arg_err = (q2.arg() - PI / 2.0).abs();
        let mut q_err = 0.0f64;
        for &lam in &[1.0, 10.5, 33.0] {
            q_err = q_err.max((eval_q(&table, lam)? + (2.0 * lam).cos()).abs());
        }
        pass &= set_ok && mod_err <= tol && arg_err <= tol && q_err <= tol;
        lines.push(format!(
            "{label}: T={times:?}, | |q|-1 |={mod_err:.2e}, |arg-pi/2|={arg_err:.2e}, |Q+cos2l|={q_err:.2e}"
        ));
    }
    Ok(finish(
        2,
        "dynamical q vs oscillation",
        start,
        pass,
        lines.join("; "),
        "T={-2,2}; tol 1e-6 closed / 1e-4 numeric".into(),
    ))
}

/// 3. Smoothed main term: N' * rho constant 2 on the torus.
fn criterion_3(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let table = enumerate_spectrum(ctx.model(), ctx.h(), 150.0, DEFAULT_ITEM_CAP)?;
    let ncf = CountingFunction::from_spectrum(&table);
    let kernel = SmoothingKernel::new(0.5)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..=5 {
        let lam = 50.0 + 10.0 * k as f64;
        let v = convolve_counting(&ncf, &kernel, lam, ConvMode::Density);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let pass = lo >= 1.98 && hi <= 2.02;
    Ok(finish(
        3,
        "smoothed main term",
        start,
        pass,
        format!("N'*rho range [{lo:.5}, {hi:.5}] on lambda=50..100"),
        "[1.98, 2.02]".into(),
    ))
}

/// 4. Point-H local Weyl count.
fn criterion_4(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let table = enumerate_spectrum(ctx.model(), ctx.h(), 200.0, DEFAULT_ITEM_CAP)?;
    let ncf = CountingFunction::from_spectrum(&table);
    let ratio = ncf.eval(200.0) * 4.0 * PI * PI / (PI * 200.0 * 200.0);
    let mc = main_constant(ctx.model(), ctx.h());
    let formula = 1.0 / (4.0 * PI);
    let mc_ok = (mc - formula).abs() <= 1e-15 * formula;
    let pass = (0.99..=1.01).contains(&ratio) && mc_ok;
    Ok(finish(
        4,
        "point-H local Weyl",
        start,
        pass,
        format!("N(200) 4pi^2/(pi 200^2) = {ratio:.6}; C = {mc:.12e}"),
        "[0.99, 1.01]; C = 1/(4 pi)".into(),
    ))
}

/// 5. Special functions against the quadrature oracle.
fn criterion_5(_ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let oracle = |x: f64| simpson(&|t: f64| (x * t.sin()).cos(), 0.0, PI, 10_000) / PI;
    let mut max_err = 0.0f64;
    for i in 1..=1000 {
        let x = 0.2 * i as f64;
        max_err = max_err.max((bessel_j0(x)? - oracle(x)).abs());
    }
    let zero = brent_root(oracle, 2.0, 3.0, 1e-13, 200)?;
    let zero_err = (zero - 2.404825557695773).abs();
    let pass = max_err <= 1e-10 && zero_err <= 1e-9;
    Ok(finish(
        5,
        "special functions",
        start,
        pass,
        format!("max |J0 - oracle| = {max_err:.2e} on (0,200]; first zero off by {zero_err:.2e}"),
        "1e-10; zero within 1e-9".into(),
    ))
}

/// 6. Flow invariants: energy, symplecticity, numeric-vs-closed deviation.
fn criterion_6(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let model = ctx.model();
    let starts: Vec<CotangentPoint> = match model {
        ModelManifold::FlatTorus(_) => vec![
            CotangentPoint::from_slices(&[0.2, 1.4], &[0.8, 0.6]),
            CotangentPoint::from_slices(&[3.0, 0.1], &[-0.28, 0.96]),
        ],
        ModelManifold::RoundSphere(_) => vec![
            // Meridian through both poles (exercises chart switching).
            CotangentPoint::from_slices(&[PI / 2.0, 0.4], &[-1.0, 0.0]),
            CotangentPoint::from_slices(&[1.1, 0.3], &[0.6, 0.53]),
        ],
    };
    let step = klab_core::dynamics::default_step(model);
    let integ = MidpointIntegrator::new(model, step)?;
    let mut max_energy = 0.0f64;
    let mut max_sympl_numeric = 0.0f64;
    let mut max_sympl_exact = 0.0f64;
    let mut max_dev = 0.0f64;
    for z in &starts {
        let p0 = z.p(model)?;
        let mut state = PhaseState::from_point(model, z)?;
        let mut mat = klab_core::nalgebra::DMatrix::identity(4, 4);
        for k in 1..=10 {
            let t = k as f64;
            integ.evolve(&mut state, 1.0, Some(&mut mat))?;
            let numeric = state.to_point(model)?;
            max_energy = max_energy.max((numeric.p(model)? - p0).abs() / (1.0 + t));
            max_sympl_numeric = max_sympl_numeric.max(symplectic_defect(&mat) / (1.0 + t));
            let closed = flow(model, z, t, FlowBackend::ClosedForm)?;
            max_dev = max_dev.max(klab_core::dynamics::phase_distance(
                model, &numeric, &closed,
            )?);
            let tf = tangent_flow(model, z, t, FlowBackend::ClosedForm)?;
            max_sympl_exact = max_sympl_exact.max(symplectic_defect(&tf.matrix));
        }
    }
    let pass = max_energy <= 1e-9
        && max_sympl_numeric <= 1e-8
        && max_sympl_exact <= 1e-12
        && max_dev <= 1e-7;
    Ok(finish(
        6,
        "flow invariants",
        start,
        pass,
        format!(
            "energy/(1+t) {max_energy:.2e}; sympl numeric {max_sympl_numeric:.2e}, exact {max_sympl_exact:.2e}; deviation {max_dev:.2e}"
        ),
        "1e-9; 1e-8; 1e-12; 1e-7".into(),
    ))
}

/// 7. Structure of q: conjugation and the cocycle law.
fn criterion_7(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let horizon = match ctx.kind {
        ScenarioKind::TorusCircle => 10.0,
        _ => 4.0 * PI + 0.5,
    };
    let Some(table) = ctx.loop_table_at(horizon, ctx.backend())? else {
        return Ok(skipped(
            7,
            "structure of q",
            "horizon below first return".into(),
        ));
    };
    let mut conj_defect = 0.0f64;
    for c in table.positive_clusters() {
        let partner = table
            .clusters
            .iter()
            .find(|o| (o.t + c.t).abs() < 1e-6)
            .ok_or_else(|| Error::invariant("missing conjugate cluster"))?;
        conj_defect = conj_defect.max((partner.q - c.q.conj()).norm());
    }

    let (j_defect, sigma_ok, chain_label) = match ctx.kind {
        ScenarioKind::TorusCircle => {
            // Reversal chain 2 then -2 carries the J-cocycle (the wrap legs
            // are non-transversal, so no J exists there); the Maslov cocycle
            // is checked on the literal 2 then 2pi-2 chain via focal counts.
            let z = CotangentPoint::from_slices(&[PI + 1.0, PI], &[-1.0, 0.0]);
            let scan = detect_returns(
                ctx.model(),
                ctx.h(),
                &z,
                7.0,
                ctx.detection_tol(),
                ctx.backend(),
            )?;
            let diam = scan
                .events
                .iter()
                .find(|e| (e.t - 2.0).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("diameter event not found"))?;
            let back = detect_returns(
                ctx.model(),
                ctx.h(),
                &diam.arrival,
                7.0,
                ctx.detection_tol(),
                ctx.backend(),
            )?;
            let rev = back
                .events
                .iter()
                .find(|e| (e.t + 2.0).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("reversal event not found"))?;
            let j_defect = (jacobian_j(ctx.model(), ctx.h(), diam)?
                * jacobian_j(ctx.model(), ctx.h(), rev)?
                - 1.0)
                .abs();
            let leg2 = back
                .events
                .iter()
                .find(|e| (e.t - (2.0 * PI - 2.0)).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("wrap leg not found"))?;
            let wrap_sigma = maslov_index(ctx.model(), ctx.h(), &z, 2.0 * PI)?.index_mod4;
            let sigma_ok = (diam.maslov + leg2.maslov).rem_euclid(4) == wrap_sigma
                && (diam.maslov + rev.maslov).rem_euclid(4) == 0;
            (j_defect, sigma_ok, "torus 2,-2 and 2,(2pi-2)")
        }
        _ => {
            let z = CotangentPoint::from_slices(&[PI / 2.0, 0.3], &[-1.0, 0.0]);
            let scan = detect_returns(
                ctx.model(),
                ctx.h(),
                &z,
                7.0,
                ctx.detection_tol(),
                ctx.backend(),
            )?;
            let leg_a = scan
                .events
                .iter()
                .find(|e| (e.t - PI).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("meridian event not found"))?;
            let chain = detect_returns(
                ctx.model(),
                ctx.h(),
                &leg_a.arrival,
                7.0,
                ctx.detection_tol(),
                ctx.backend(),
            )?;
            let leg_b = chain
                .events
                .iter()
                .find(|e| (e.t - PI).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("second meridian event not found"))?;
            let full = scan
                .events
                .iter()
                .find(|e| (e.t - 2.0 * PI).abs() < 1e-4)
                .ok_or_else(|| Error::numerical("full loop event not found"))?;
            let j_defect = (jacobian_j(ctx.model(), ctx.h(), full)?
                - jacobian_j(ctx.model(), ctx.h(), leg_a)?
                    * jacobian_j(ctx.model(), ctx.h(), leg_b)?)
            .abs();
            let sigma_ok = full.maslov == (leg_a.maslov + leg_b.maslov).rem_euclid(4);
            (j_defect, sigma_ok, "sphere pi,pi -> 2pi")
        }
    };
    let pass = conj_defect <= 1e-8 && j_defect <= 1e-6 && sigma_ok;
    Ok(finish(
        7,
        "structure of q",
        start,
        pass,
        format!("conj defect {conj_defect:.2e}; J-cocycle defect {j_defect:.2e} ({chain_label}); sigma additive: {sigma_ok}"),
        "1e-8; 1e-6; additive mod 4".into(),
    ))
}

/// 8. Monotonicity of 2 lambda + Q(lambda) on the torus.
fn criterion_8(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let Some(table) = ctx.loop_table_at(10.0, ctx.backend())? else {
        return Ok(skipped(
            8,
            "monotone combination",
            "horizon below first return".into(),
        ));
    };
    let step = 1e-3;
    let mut min_slope = f64::INFINITY;
    let mut prev = 2.0 * step + eval_q(&table, step)?;
    let n = (50.0 / step) as usize;
    for i in 2..=n {
        let lam = i as f64 * step;
        let val = 2.0 * lam + eval_q(&table, lam)?;
        min_slope = min_slope.min((val - prev) / step);
        prev = val;
    }
    let pass = min_slope >= -1e-6;
    Ok(finish(
        8,
        "monotone combination",
        start,
        pass,
        format!("min discrete slope of 2l + Q(l) on [0,50]: {min_slope:.3e}"),
        ">= -1e-6".into(),
    ))
}

/// 9. Averaging dichotomy: A(T) -> 0 on the torus, bounded away on the sphere.
fn criterion_9(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    match ctx.kind {
        ScenarioKind::TorusCircle => {
            let Some(table) = ctx.loop_table_at(100.5, ctx.backend())? else {
                return Ok(skipped(
                    9,
                    "averaging dichotomy",
                    "horizon below first return".into(),
                ));
            };
            let mut max_err = 0.0f64;
            for &t in &[10.0, 50.0, 100.0] {
                max_err = max_err.max((averaging_diagnostic(&table, t)? - 2.0 / t).abs());
            }
            Ok(finish(
                9,
                "averaging dichotomy",
                start,
                max_err <= 1e-8,
                format!("max |A(T) - 2/T| = {max_err:.2e} for T in {{10,50,100}}"),
                "1e-8 (condition holds)".into(),
            ))
        }
        _ => {
            let Some(table) = ctx.loop_table_at(30.0 * PI + 0.5, ctx.backend())? else {
                return Ok(skipped(
                    9,
                    "averaging dichotomy",
                    "horizon below first return".into(),
                ));
            };
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in [10.0, 20.0, 30.0] {
                let a = averaging_diagnostic(&table, k * PI)?;
                lo = lo.min(a);
                hi = hi.max(a);
            }
            Ok(finish(
                9,
                "averaging dichotomy",
                start,
                lo >= 1.0 && hi <= 1.6,
                format!("A(T) range [{lo:.4}, {hi:.4}] for T in {{10pi,20pi,30pi}}"),
                "[1.0, 1.6] (condition fails)".into(),
            ))
        }
    }
}

/// 10. Jump persistence: sphere jumps stay near 4; torus quasimode windows.
fn criterion_10(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    match ctx.kind {
        ScenarioKind::SphereEquator => {
            let table = enumerate_spectrum(ctx.model(), ctx.h(), 61.0, DEFAULT_ITEM_CAP)?;
            let ncf = CountingFunction::from_spectrum(&table);
            let mut worst = 0.0f64;
            for l in (20u32..=60).step_by(2) {
                let lam = (l as f64 * (l as f64 + 1.0)).sqrt();
                let jump = ncf
                    .jumps()
                    .iter()
                    .find(|(loc, _)| (loc - lam).abs() < 1e-9)
                    .map(|(_, m)| *m)
                    .unwrap_or(0.0);
                worst = worst.max((jump - 4.0).abs() / 4.0);
            }
            Ok(finish(
                10,
                "jump persistence",
                start,
                worst <= 0.10,
                format!("max relative deviation of even-l jumps from 4: {worst:.4}"),
                "within 10% of 4".into(),
            ))
        }
        _ => {
            // Fixed-width quasimode windows on the torus. See the decisions
            // ledger: lattice degeneracy clustering pushes some windows well
            // above this threshold, so the check is expected to fail; the
            // measured maximum is reported honestly.
            let table = enumerate_spectrum(ctx.model(), ctx.h(), 101.0, DEFAULT_ITEM_CAP)?;
            let ncf = CountingFunction::from_spectrum(&table);
            let mut worst = 0.0f64;
            let mut at = 0.0f64;
            for i in 0..=100 {
                let lam = 50.0 + 0.5 * i as f64;
                let mass = quasimode_jump(&ncf, lam, 0.2)?;
                if mass > worst {
                    worst = mass;
                    at = lam;
                }
            }
            Ok(finish(
                10,
                "jump persistence",
                start,
                worst <= 0.6,
                format!("max quasimode window mass {worst:.4} at lambda = {at}"),
                "<= 0.6 (eps = 0.2, lambda in [50,100])".into(),
            ))
        }
    }
}

/// 11. Ergodic/first-return dichotomy.
fn criterion_11(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let quad = snh_quadrature(ctx.model(), ctx.h(), ctx.exp.config.nodes)?;
    match ctx.kind {
        ScenarioKind::TorusCircle => {
            let erg = ergodic_average(
                ctx.model(),
                ctx.h(),
                &quad,
                10,
                20.0,
                ctx.detection_tol(),
                ctx.backend(),
                &ctx.threads(),
            )?;
            let bound = 1e-3 * quad.total_measure;
            let running = erg.running[9];
            Ok(finish(
                11,
                "ergodic dichotomy",
                start,
                running.abs() <= bound,
                format!(
                    "running average at k=10: {running:.3e} (|SN*H| = {:.4})",
                    quad.total_measure
                ),
                "<= 1e-3 |SN*H|".into(),
            ))
        }
        _ => {
            let erg = ergodic_average(
                ctx.model(),
                ctx.h(),
                &quad,
                5,
                4.0,
                ctx.detection_tol(),
                ctx.backend(),
                &ctx.threads(),
            )?;
            let target = quad.total_measure;
            let worst = erg
                .pairings
                .iter()
                .map(|p| (p - target).abs() / target)
                .fold(0.0f64, f64::max);
            Ok(finish(
                11,
                "ergodic dichotomy",
                start,
                worst <= 0.01,
                format!("max relative deviation of <U^k 1,1> from |SN*H|: {worst:.2e}"),
                "within 1% for k <= 5".into(),
            ))
        }
    }
}

/// 12. Recurrence fractions.
fn criterion_12(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let quad = snh_quadrature(ctx.model(), ctx.h(), ctx.exp.config.nodes)?;
    let (t_max, lo_ok): (f64, Box<dyn Fn(f64) -> bool>) = match ctx.kind {
        ScenarioKind::TorusCircle => (20.0, Box::new(|f| f <= 0.02)),
        _ => (7.0, Box::new(|f| f >= 0.98)),
    };
    let frac = recurrence_fraction(
        ctx.model(),
        ctx.h(),
        &quad,
        0.1,
        t_max,
        ctx.detection_tol(),
        ctx.backend(),
        &ctx.threads(),
    )?;
    let threshold = match ctx.kind {
        ScenarioKind::TorusCircle => "<= 0.02",
        _ => ">= 0.98",
    };
    Ok(finish(
        12,
        "recurrence fraction",
        start,
        lo_ok(frac),
        format!("fraction = {frac:.4} (delta = 0.1, t_max = {t_max})"),
        threshold.into(),
    ))
}

/// 13. Maslov convention lock against a sampled Jacobi-determinant oracle.
fn criterion_13(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    // Independent oracle: count sign changes of the sampled normal
    // Jacobi-field determinant (1 - tau inward on the flat circle,
    // cos(tau) from the equator).
    // Half-offset samples so a zero landing exactly on a grid point cannot
    // hide the sign change.
    let sampled_zeros = |f: &dyn Fn(f64) -> f64, span: f64| -> i32 {
        let n = (span / 1e-3) as usize;
        let mut count = 0;
        let mut prev = f(0.5e-3);
        for k in 1..n {
            let val = f((k as f64 + 0.5) * 1e-3);
            if prev * val < 0.0 {
                count += 1;
            }
            prev = val;
        }
        count
    };
    match ctx.kind {
        ScenarioKind::TorusCircle => {
            let z = CotangentPoint::from_slices(&[PI + 1.0, PI], &[-1.0, 0.0]);
            let sigma = maslov_index(ctx.model(), ctx.h(), &z, 2.0)?.index_mod4;
            let oracle = sampled_zeros(&|tau| 1.0 - tau, 2.0).rem_euclid(4);
            let pass = sigma == 1 && sigma == oracle;
            Ok(finish(
                13,
                "maslov convention",
                start,
                pass,
                format!("sigma_2 = {sigma}; sampled-Jacobi oracle = {oracle}"),
                "sigma_2 = 1".into(),
            ))
        }
        _ => {
            let z = CotangentPoint::from_slices(&[PI / 2.0, 0.3], &[-1.0, 0.0]);
            let mut pass = true;
            let mut got = Vec::new();
            for k in 1..=4i32 {
                let span = k as f64 * PI;
                let sigma = maslov_index(ctx.model(), ctx.h(), &z, span)?.index_mod4;
                let oracle = sampled_zeros(&|tau| tau.cos(), span).rem_euclid(4);
                pass &= sigma == k.rem_euclid(4) && sigma == oracle;
                got.push(sigma);
            }
            Ok(finish(
                13,
                "maslov convention",
                start,
                pass,
                format!("sigma_(k pi) = {got:?} for k = 1..4"),
                "k mod 4, matching the Jacobi oracle".into(),
            ))
        }
    }
}

/// 14. Byte-identical report outputs across thread counts.
fn criterion_14(ctx: &Ctx) -> Result<CriterionResult> {
    let start = Instant::now();
    let mut outputs = Vec::new();
    for threads in [1usize, 8] {
        let mut cfg = ctx.exp.config.clone();
        cfg.threads = threads;
        cfg.out_dir = format!("{}/determinism_t{threads}", ctx.exp.config.out_dir);
        cmd_report(cfg.clone())?;
        let dir = std::path::Path::new(&cfg.out_dir);
        let mut blob = Vec::new();
        for name in ["counting.csv", "report.json", "figure1.gp"] {
            blob.extend(std::fs::read(dir.join(name))?);
        }
        outputs.push(blob);
    }
    let pass = outputs[0] == outputs[1];
    Ok(finish(
        14,
        "deterministic outputs",
        start,
        pass,
        format!(
            "{} bytes vs {} bytes, identical: {pass}",
            outputs[0].len(),
            outputs[1].len()
        ),
        "byte-identical across --threads 1 and 8".into(),
    ))
}

/// Run every criterion applicable to the configured scenario.
pub fn run_criteria(config: ExperimentConfig) -> Result<Vec<CriterionResult>> {
    let ctx = Ctx::new(config)?;
    let mut results = Vec::new();
    let ids: Vec<u32> = match ctx.kind {
        ScenarioKind::TorusCircle => vec![1, 2, 3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14],
        ScenarioKind::SphereEquator => vec![5, 6, 7, 9, 10, 11, 12, 13],
        ScenarioKind::TorusPoint => vec![4, 5, 6],
        ScenarioKind::Other => vec![5, 6],
    };
    for id in ids {
        let result = match id {
            1 => criterion_1(&ctx)?,
            2 => criterion_2(&ctx)?,
            3 => criterion_3(&ctx)?,
            4 => criterion_4(&ctx)?,
            5 => criterion_5(&ctx)?,
            6 => criterion_6(&ctx)?,
            7 => criterion_7(&ctx)?,
            8 => criterion_8(&ctx)?,
            9 => criterion_9(&ctx)?,
            10 => criterion_10(&ctx)?,
            11 => criterion_11(&ctx)?,
            12 => criterion_12(&ctx)?,
            13 => criterion_13(&ctx)?,
            14 => criterion_14(&ctx)?,
            _ => unreachable!(),
        };
        results.push(result);
    }
    Ok(results)
}

/// Canonical scenario configs used by the acceptance suite.
pub fn torus_circle_config() -> ExperimentConfig {
    ExperimentConfig::default()
}

pub fn sphere_equator_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.model.kind = ModelKindTag::RoundSphere;
    cfg.model.lattice = None;
    cfg.model.radius = Some(1.0);
    cfg.h.kind = HKindTag::LatitudeCircle;
    cfg.h.center = None;
    cfg.h.r = None;
    cfg.h.theta0 = Some(PI / 2.0);
    cfg.lambda_max = 61.0;
    cfg.grid = GridSpec::Midpoints { lo: 5.0, hi: 61.0 };
    cfg
}

pub fn torus_point_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.h.kind = HKindTag::Point;
    cfg.h.center = None;
    cfg.h.r = None;
    cfg.h.anchor = Some(vec![1.0, 2.0]);
    cfg.lambda_max = 200.0;
    cfg.grid = GridSpec::Midpoints {
        lo: 20.0,
        hi: 200.0,
    };
    cfg
}
