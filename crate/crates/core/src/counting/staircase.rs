//! The counting function N(lambda) as a sorted jump representation.

use crate::error::{Error, Result};
use crate::num::KahanSum;
use crate::spectral::SpectrumTable;

/// Coincidence tolerance when aggregating jumps at one eigenfrequency.
const COINCIDENCE_TOL: f64 = 1e-12;

/// Right-continuous staircase: N(lambda) = sum of |P_j|^2 over lambda_j <= lambda.
#[derive(Debug, Clone)]
pub struct CountingFunction {
    /// (jump location, aggregated jump mass), strictly increasing locations.
    jumps: Vec<(f64, f64)>,
    /// cumulative[i] = N at and beyond jumps[i].0 (up to the next jump).
    cumulative: Vec<f64>,
}

impl CountingFunction {
    pub fn from_spectrum(table: &SpectrumTable) -> Self {
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for item in &table.items {
            let mass = item.period.norm_sqr();
            match jumps.last_mut() {
                Some((loc, acc)) if (item.lambda - *loc).abs() <= COINCIDENCE_TOL => {
                    *acc += mass;
                }
                _ => jumps.push((item.lambda, mass)),
            }
        }
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut acc = KahanSum::new();
        for (_, mass) in &jumps {
            acc.add(*mass);
            cumulative.push(acc.value());
        }
        CountingFunction { jumps, cumulative }
    }

    pub fn from_jumps(mut raw: Vec<(f64, f64)>) -> Result<Self> {
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, m) in &raw {
            if *m < 0.0 {
                return Err(Error::invariant("negative jump mass"));
            }
        }
        let mut jumps: Vec<(f64, f64)> = Vec::new();
        for (loc, mass) in raw {
            match jumps.last_mut() {
                Some((l, acc)) if (loc - *l).abs() <= COINCIDENCE_TOL => *acc += mass,
                _ => jumps.push((loc, mass)),
            }
        }
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut acc = KahanSum::new();
        for (_, mass) in &jumps {
            acc.add(*mass);
            cumulative.push(acc.value());
        }
        Ok(CountingFunction { jumps, cumulative })
    }

    /// N(lambda), right-continuous.
    pub fn eval(&self, lambda: f64) -> f64 {
        let idx = self.jumps.partition_point(|(loc, _)| *loc <= lambda);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn total_mass(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Midpoints between consecutive distinct jump locations inside [lo, hi].
    pub fn midpoint_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.jumps
            .windows(2)
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .filter(|m| *m >= lo && *m <= hi)
            .collect()
    }

    /// Mean gap between distinct jump locations.
    pub fn mean_gap(&self) -> f64 {
        if self.jumps.len() < 2 {
            return f64::INFINITY;
        }
        let span = self.jumps.last().unwrap().0 - self.jumps.first().unwrap().0;
        span / (self.jumps.len() - 1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        HKindTag, ModelDescriptor, ModelKindTag, ModelManifold, Submanifold, SubmanifoldDescriptor,
    };
    use crate::spectral::{enumerate_spectrum, DEFAULT_ITEM_CAP};

    fn torus_circle_counting(lambda_max: f64) -> CountingFunction {
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
        let table = enumerate_spectrum(&m, &h, lambda_max, DEFAULT_ITEM_CAP).unwrap();
        CountingFunction::from_spectrum(&table)
    }

    #[test]
    fn n_at_zero_is_the_constant_mode() {
        let ncf = torus_circle_counting(5.0);
        assert!((ncf.eval(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(ncf.eval(-1.0), 0.0);
    }

    #[test]
    fn n_matches_brute_force_sum() {
        let ncf = torus_circle_counting(5.0);
        // Independent summation oracle over the 81 lattice points.
        let mut oracle = 0.0;
        for mx in -5i64..=5 {
            for my in -5i64..=5 {
                let r = ((mx * mx + my * my) as f64).sqrt();
                if r <= 5.0 {
                    oracle += crate::spectral::bessel_j0(r).unwrap().powi(2);
                }
            }
        }
        assert!((ncf.eval(5.0) - oracle).abs() < 1e-12);
        // Frozen high-precision value of the same sum.
        assert!((ncf.eval(5.0) - 10.889_624_000_530_731).abs() < 1e-11);
        // Brute-force match and monotonicity at 100 sample points.
        let brute = |lam: f64| {
            let mut acc = 0.0;
            for mx in -5i64..=5 {
                for my in -5i64..=5 {
                    let r = ((mx * mx + my * my) as f64).sqrt();
                    if r <= lam {
                        acc += crate::spectral::bessel_j0(r).unwrap().powi(2);
                    }
                }
            }
            acc
        };
        let mut prev = -1.0;
        for i in 0..=100 {
            let lam = 0.04987 * i as f64;
            let v = ncf.eval(lam);
            assert!((v - brute(lam)).abs() < 1e-12, "mismatch at {lam}");
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn empty_table_is_zero() {
        let ncf = CountingFunction::from_jumps(vec![]).unwrap();
        assert_eq!(ncf.eval(10.0), 0.0);
        assert_eq!(ncf.total_mass(), 0.0);
    }

    #[test]
    fn scaling_linearity() {
        let ncf = torus_circle_counting(5.0);
        let doubled =
            CountingFunction::from_jumps(ncf.jumps().iter().map(|(l, m)| (*l, 2.0 * m)).collect())
                .unwrap();
        for i in 0..=50 {
            let lam = 0.1 * i as f64;
            assert!((doubled.eval(lam) - 2.0 * ncf.eval(lam)).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_eigenvalues_aggregate() {
        let ncf = torus_circle_counting(5.0);
        // |m| = 5 occurs for 12 lattice points: (+-5,0),(0,+-5),(+-3,+-4),(+-4,+-3).
        let jump5 = ncf
            .jumps()
            .iter()
            .find(|(l, _)| (l - 5.0).abs() < 1e-12)
            .unwrap();
        let j0_5 = crate::spectral::bessel_j0(5.0).unwrap();
        assert!((jump5.1 - 12.0 * j0_5 * j0_5).abs() < 1e-12);
    }
}
