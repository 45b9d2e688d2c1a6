//! Two-term residual behavior on the worked models.

use klab_core::counting::{quasimode_jump, two_term_report, CountingFunction};
use klab_core::geometry::{
    HKindTag, ModelDescriptor, ModelKindTag, ModelManifold, Submanifold, SubmanifoldDescriptor,
};
use klab_core::spectral::{enumerate_spectrum, DEFAULT_ITEM_CAP};
use klab_core::Threads;

fn torus_circle() -> (ModelManifold, Submanifold) {
    let m = ModelManifold::new(&ModelDescriptor {
        kind: ModelKindTag::FlatTorus,
        n: 2,
        lattice: None,
        radius: None,
    })
    .unwrap();
    let h = Submanifold::new(
        &m,
        &SubmanifoldDescriptor {
            kind: HKindTag::EmbeddedCircle,
            center: Some(vec![std::f64::consts::PI, std::f64::consts::PI]),
            r: Some(1.0),
            theta0: None,
            anchor: None,
        },
    )
    .unwrap();
    (m, h)
}

fn sphere_equator() -> (ModelManifold, Submanifold) {
    let m = ModelManifold::new(&ModelDescriptor {
        kind: ModelKindTag::RoundSphere,
        n: 2,
        lattice: None,
        radius: None,
    })
    .unwrap();
    let h = Submanifold::new(
        &m,
        &SubmanifoldDescriptor {
            kind: HKindTag::LatitudeCircle,
            center: None,
            r: None,
            theta0: Some(std::f64::consts::FRAC_PI_2),
            anchor: None,
        },
    )
    .unwrap();
    (m, h)
}

#[test]
fn torus_residuals_shrink_and_fitted_constant_is_small() {
    let (m, h) = torus_circle();
    let table = enumerate_spectrum(&m, &h, 100.0, DEFAULT_ITEM_CAP).unwrap();
    let ncf = CountingFunction::from_spectrum(&table);
    let grid = ncf.midpoint_grid(20.0, 100.0);
    let rep = two_term_report(
        &ncf,
        1,
        2.0,
        |lam| Ok(-(2.0 * lam).cos()),
        &grid,
        true,
        &Threads(2),
    )
    .unwrap();
    // The additive constant fitted from the last window is close to zero
    // (measured ~0.006 against the brute-force sum).
    assert!(rep.fitted_c.abs() <= 0.05, "fitted C = {}", rep.fitted_c);
    assert_eq!(rep.windows.len(), 4);
    let early = &rep.windows[0];
    let late = &rep.windows[3];
    assert!(late.mean_abs < early.mean_abs);
    assert!(rep.warnings.is_empty());
}

#[test]
fn sphere_residuals_do_not_decay() {
    let (m, h) = sphere_equator();
    let table = enumerate_spectrum(&m, &h, 61.0, DEFAULT_ITEM_CAP).unwrap();
    let ncf = CountingFunction::from_spectrum(&table);
    let grid = ncf.midpoint_grid(5.0, 61.0);
    // Compare against the bare main term: jumps of size ~4 persist, so
    // max residuals stay O(1) in every window.
    let rep = two_term_report(&ncf, 1, 2.0, |_| Ok(0.0), &grid, false, &Threads(2)).unwrap();
    for w in &rep.windows {
        assert!(
            w.max_abs >= 1.0,
            "window [{}, {}] max {}",
            w.lo,
            w.hi,
            w.max_abs
        );
    }

    // A window straddling an even-l eigenvalue carries mass close to 4.
    let l = 40u32;
    let lam = (l as f64 * (l as f64 + 1.0)).sqrt();
    let mass = quasimode_jump(&ncf, lam - 0.1, 0.2).unwrap();
    assert!((mass - 4.0).abs() < 0.05, "even-l window mass {mass}");
    // Odd-l windows are empty.
    let lam_odd = (41.0f64 * 42.0).sqrt();
    let empty = quasimode_jump(&ncf, lam_odd - 0.05, 0.1).unwrap();
    assert!(empty.abs() < 1e-12);
}
