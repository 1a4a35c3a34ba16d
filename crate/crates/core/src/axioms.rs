//! Seeded property suite for quasi-states on the sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{self, Vec3};
use crate::reeb_median::QuasiStateOracle;
use crate::sphere_field::{cap_mask, Polynomial, ScalarField, SphereMesh};

/// Largest cap area used for the vanishing check.
pub const VANISHING_CAP_AREA: f64 = 0.4;

/// Outcome of [`run_axiom_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub oracle: String,
    pub trials: usize,
    /// max over c of |ζ(c) − c| for constants.
    pub normalization_error: f64,
    /// Pairs H ≤ K with ζ(H) > ζ(K).
    pub monotonicity_violations: usize,
    /// max |ζ(g∘F + h∘F) − ζ(g∘F) − ζ(h∘F)|.
    pub quasi_linearity_max: f64,
    /// The same residual divided by the largest gap between adjacent sorted
    /// values of the three fields, maximized over trials.
    pub quasi_linearity_gap_ratio: f64,
    /// Largest adjacent-value gap seen in the quasi-linearity trials.
    pub max_level_gap: f64,
    /// Pairs with |ζ(H) − ζ(K)| > ‖H − K‖.
    pub lipschitz_violations: usize,
    /// max |ζ(H)| over fields supported in a cap of area ≤ 0.4.
    pub vanishing_max: f64,
}

/// Random cubic polynomial field rescaled to sup norm 1.
pub fn random_field(mesh: &Arc<SphereMesh>, seed: u64) -> Result<ScalarField> {
    let f = Polynomial::random(3, seed).sample(mesh)?;
    let s = f.sup_norm();
    Ok(if s > 0.0 { f.scale(1.0 / s) } else { f })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let a: f64 = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * a.cos(), s * a.sin(), z]
}

/// Nonnegative bump of height `amp` and angular radius `width` about `c`.
fn bump(mesh: &Arc<SphereMesh>, c: Vec3, width: f64, amp: f64) -> Result<ScalarField> {
    ScalarField::from_fn(mesh, |p| amp * (1.0 - geom::angle(p, c) / width).max(0.0).powi(2))
}

fn max_adjacent_gap(fields: &[&ScalarField]) -> f64 {
    fields
        .iter()
        .map(|f| {
            let mut v = f.values().to_vec();
            v.sort_by(f64::total_cmp);
            v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Runs normalization, monotonicity, quasi-linearity, Lipschitz and
/// vanishing checks with `trials` seeded random fields.
///
/// Quasi-linearity uses the 1-Lipschitz functions g(s) = s²/2 and
/// h(s) = sin(πs)/π applied to a field with sup norm 1.
pub fn run_axiom_suite(
    zeta: &dyn QuasiStateOracle,
    mesh: &Arc<SphereMesh>,
    trials: usize,
    seed: u64,
) -> Result<AxiomReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AxiomReport {
        oracle: zeta.name().to_string(),
        trials,
        normalization_error: 0.0,
        monotonicity_violations: 0,
        quasi_linearity_max: 0.0,
        quasi_linearity_gap_ratio: 0.0,
        max_level_gap: 0.0,
        lipschitz_violations: 0,
        vanishing_max: 0.0,
    };
    for c in [1.0, 0.0, -2.5] {
        let err = (zeta.evaluate(&ScalarField::constant(mesh, c))? - c).abs();
        report.normalization_error = report.normalization_error.max(err);
    }
    for _ in 0..trials {
        let f = random_field(mesh, rng.random())?;
        let zf = zeta.evaluate(&f)?;

        let up = f.add(&bump(mesh, random_unit(&mut rng), rng.random_range(0.3..1.5), rng.random_range(0.0..1.0))?)?;
        if zeta.evaluate(&up)? < zf {
            report.monotonicity_violations += 1;
        }

        let g = f.map(|s| 0.5 * s * s)?;
        let h = f.map(|s| (PI * s).sin() / PI)?;
        let gh = g.add(&h)?;
        let resid = (zeta.evaluate(&gh)? - zeta.evaluate(&g)? - zeta.evaluate(&h)?).abs();
        let gap = max_adjacent_gap(&[&g, &h, &gh]);
        report.quasi_linearity_max = report.quasi_linearity_max.max(resid);
        report.max_level_gap = report.max_level_gap.max(gap);
        if gap > 0.0 {
            report.quasi_linearity_gap_ratio = report.quasi_linearity_gap_ratio.max(resid / gap);
        }

        let other = random_field(mesh, rng.random())?.scale(rng.random_range(0.0..0.5));
        let moved = f.add(&other)?;
        if (zeta.evaluate(&moved)? - zf).abs() > other.sup_norm() + 1e-12 {
            report.lipschitz_violations += 1;
        }

        let center = random_unit(&mut rng);
        let area = rng.random_range(0.05..=VANISHING_CAP_AREA);
        let mask = cap_mask(mesh, center, area);
        let inside = random_field(mesh, rng.random())?;
        let supported = ScalarField::new(
            mesh,
            inside
                .values()
                .iter()
                .zip(&mask)
                .map(|(&v, &m)| if m { v } else { 0.0 })
                .collect(),
        )?;
        report.vanishing_max = report.vanishing_max.max(zeta.evaluate(&supported)?.abs());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reeb_median::MedianQuasiState;
    use crate::sphere_field::make_mesh;

    struct Mean;

    impl QuasiStateOracle for Mean {
        fn name(&self) -> &str {
            "mean"
        }
        fn evaluate(&self, h: &ScalarField) -> Result<f64> {
            Ok(h.integrate())
        }
    }

    #[test]
    fn median_passes_at_level_three() {
        let mesh = make_mesh(3);
        let rep = run_axiom_suite(&MedianQuasiState, &mesh, 20, 1).unwrap();
        assert_eq!(rep.normalization_error, 0.0);
        assert_eq!(rep.monotonicity_violations, 0);
        assert_eq!(rep.lipschitz_violations, 0);
        assert_eq!(rep.vanishing_max, 0.0);
        assert!(rep.quasi_linearity_gap_ratio <= 2.0, "{rep:?}");
    }

    #[test]
    fn the_mean_fails_vanishing() {
        let mesh = make_mesh(2);
        let rep = run_axiom_suite(&Mean, &mesh, 10, 2).unwrap();
        assert!(rep.vanishing_max > 1e-3);
        assert_eq!(rep.monotonicity_violations, 0);
    }
}
