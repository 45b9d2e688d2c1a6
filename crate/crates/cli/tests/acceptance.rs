//! Acceptance suite: runs every criterion on its canonical scenario at the
//! stated tolerance and prints one line per criterion.
//!
//! Criterion 10 carries a known-red torus half: fixed-width quasimode windows
//! over [50, 100] exceed the stated 0.6 bound at lattice-degeneracy clusters
//! (worst observed 1.16 at lambda = 92, cross-checked against an independent
//! oracle). The check is implemented as stated and asserted in
//! `torus_criterion_10_quasimode_windows`, which documents the measured value
//! rather than weakening the threshold.

use klab_cli::verify::{
    run_criteria, sphere_equator_config, torus_circle_config, torus_point_config, Outcome,
};
use klab_core::config::ExperimentConfig;

fn run_scenario(label: &str, mut config: ExperimentConfig, expect_red: &[u32]) {
    let dir = tempfile::tempdir().unwrap();
    config.out_dir = dir.path().to_string_lossy().into_owned();
    let results = run_criteria(config).unwrap();
    assert!(!results.is_empty());
    let mut unexpected = Vec::new();
    for r in &results {
        println!("[{label}] {}", r.line());
        let expected_red = expect_red.contains(&r.id);
        match (&r.outcome, expected_red) {
            (Outcome::Fail, false) => unexpected.push(r.id),
            (Outcome::Pass, true) => unexpected.push(r.id),
            _ => {}
        }
        assert!(
            !matches!(r.outcome, Outcome::Skipped(_)),
            "criterion {} unexpectedly skipped on the canonical config",
            r.id
        );
    }
    assert!(
        unexpected.is_empty(),
        "criteria with unexpected outcome: {unexpected:?}"
    );
}

#[test]
fn torus_circle_criteria() {
    // Criterion 10's torus half is the documented spec-defect red; its
    // faithful assertion lives in torus_criterion_10_quasimode_windows.
    run_scenario("torus", torus_circle_config(), &[10]);
}

#[test]
fn sphere_equator_criteria() {
    run_scenario("sphere", sphere_equator_config(), &[]);
}

#[test]
fn torus_point_criteria() {
    run_scenario("point", torus_point_config(), &[]);
}

/// Criterion 10, torus half, implemented faithfully as stated.
///
/// Expected RED: the quasimode corollary controls shrinking windows, not
/// fixed eps = 0.2 ones; window masses at lambda in [50, 100] reach ~1.16.
#[test]
fn torus_criterion_10_quasimode_windows() {
    use klab_core::counting::{quasimode_jump, CountingFunction};
    use klab_core::geometry::{ModelManifold, Submanifold};
    use klab_core::spectral::{enumerate_spectrum, DEFAULT_ITEM_CAP};

    let cfg = torus_circle_config();
    let model = ModelManifold::new(&cfg.model).unwrap();
    let h = Submanifold::new(&model, &cfg.h).unwrap();
    let table = enumerate_spectrum(&model, &h, 101.0, DEFAULT_ITEM_CAP).unwrap();
    let ncf = CountingFunction::from_spectrum(&table);
    let mut worst = 0.0f64;
    let mut at = 0.0f64;
    for i in 0..=100 {
        let lam = 50.0 + 0.5 * i as f64;
        let mass = quasimode_jump(&ncf, lam, 0.2).unwrap();
        if mass > worst {
            worst = mass;
            at = lam;
        }
    }
    println!("criterion 10 (torus half): max window mass {worst:.4} at lambda = {at}");
    assert!(
        worst <= 0.6,
        "criterion 10 torus half fails as documented: max quasimode window mass {worst:.4} at \
         lambda = {at} exceeds 0.6 (see the known-defect note; the reference point 60.5 \
         measures only {:.4})",
        quasimode_jump(&ncf, 60.5, 0.2).unwrap()
    );
}

/// Skip behavior: a horizon below the first loop reports skipped criteria.
#[test]
fn short_horizon_skips_loop_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = torus_circle_config();
    cfg.t_max = 1.0;
    cfg.out_dir = dir.path().to_string_lossy().into_owned();
    let results = run_criteria(cfg).unwrap();
    let skipped: Vec<u32> = results
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Skipped(_)))
        .map(|r| r.id)
        .collect();
    for id in [2u32, 7, 8, 9] {
        assert!(
            skipped.contains(&id),
            "criterion {id} should be skipped, got {skipped:?}"
        );
    }
    // Spectral criteria still run.
    assert!(results
        .iter()
        .any(|r| r.id == 1 && matches!(r.outcome, Outcome::Pass)));
}
