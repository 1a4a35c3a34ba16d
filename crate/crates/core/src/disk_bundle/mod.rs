//! The standard symplectic disk bundle E → S² of degree one.
//!
//! E is covered by two stereographic charts. Each point carries base
//! coordinates (u, v) and a fiber coordinate, either polar (r, φ) or
//! Cartesian (p, q). The symplectic form is ω = π*σ + d(r²α), where
//! α = dφ/2π + A and dA = −σ, so every fiber has area one.

mod chart;
mod checks;
mod field;
mod flow;
mod omega;
mod profile;

pub use chart::{connection, sigma_density, Chart, ChartPoint};
pub use checks::{
    bracket_identity_residual, fiber_integral_residual, liouville_integral, north_weight, radial_factor, sample_points,
    sgrad_pushforward_residual, FiberReport, PoissonReport, SgradReport, CHART_BOX,
};
pub use field::{
    bracket_at, bracket_bundle, lift, projected_sgrad, BaseFunction, BundleField, FdSteps, SampledField,
    BOUNDARY_GUARD,
};
pub use flow::{
    failure_term, flow_commutation_residual, seed_ring, CommuteReport, LiftedFlow, R_DRIFT_TOLERANCE,
};
pub use omega::{curvature_residual, omega_cartesian, omega_polar, omega_polar_exterior, Omega4};
pub use profile::{Radial, ThetaProfile};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::composite_gauss;
use crate::sphere_field::SphereMesh;

/// Grid counts in u, v, r and φ.
///
/// Finite-difference steps are 2·CHART_BOX/u in the base, 1/r radially and
/// 2π/φ in angle; the fiber quadrature uses the same counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub u: usize,
    pub v: usize,
    pub r: usize,
    pub phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { u: 64, v: 64, r: 32, phi: 32 }
    }
}

impl GridSpec {
    pub fn new(u: usize, v: usize, r: usize, phi: usize) -> Result<Self> {
        if [u, v, r, phi].iter().any(|&n| n < 8) {
            return Err(Error::Config(format!("grid counts must be at least 8, got {u},{v},{r},{phi}")));
        }
        Ok(GridSpec { u, v, r, phi })
    }

    pub fn doubled(&self) -> Self {
        GridSpec {
            u: 2 * self.u,
            v: 2 * self.v,
            r: 2 * self.r,
            phi: 2 * self.phi,
        }
    }

    pub fn steps(&self) -> FdSteps {
        FdSteps {
            uv: 2.0 * CHART_BOX / self.u.max(self.v) as f64,
            r: 1.0 / self.r as f64,
            phi: 2.0 * PI / self.phi as f64,
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Parses "u,v,r,phi"; a three-count form "u,v,r" reuses r for φ.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad grid count `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        match counts[..] {
            [u, v, r, phi] => GridSpec::new(u, v, r, phi),
            [u, v, r] => GridSpec::new(u, v, r, r),
            _ => Err(Error::Parse(format!("grid needs 3 or 4 counts, got `{s}`"))),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.u, self.v, self.r, self.phi)
    }
}

/// A disk bundle over a base mesh with a grid for differences and quadrature.
#[derive(Debug, Clone)]
pub struct Bundle {
    mesh: Arc<SphereMesh>,
    grid: GridSpec,
}

pub fn make_bundle(mesh: &Arc<SphereMesh>, grid: GridSpec) -> Result<Bundle> {
    let grid = GridSpec::new(grid.u, grid.v, grid.r, grid.phi)?;
    Ok(Bundle {
        mesh: Arc::clone(mesh),
        grid,
    })
}

impl Bundle {
    pub fn mesh(&self) -> &Arc<SphereMesh> {
        &self.mesh
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn steps(&self) -> FdSteps {
        self.grid.steps()
    }

    /// Largest |dA + σ| over `samples` seeded chart points with ρ ≤ 1.5.
    pub fn curvature_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let u = rng.random_range(-1.5..1.5);
                let v = rng.random_range(-1.5..1.5);
                curvature_residual(u, v, 1e-3)
            })
            .fold(0.0, f64::max)
    }

    /// ∫ ω over one fiber disk, where ω restricts to (r/π) dr∧dφ.
    pub fn fiber_area(&self, u: f64, v: f64) -> f64 {
        let h = 2.0 * PI / self.grid.phi as f64;
        composite_gauss(&[0.0, 1.0], (self.grid.r / 8).max(1), 4)
            .into_iter()
            .map(|(r, w)| {
                let dens = omega_polar(u, v, r).m[2][3];
                w * (0..self.grid.phi).map(|_| dens * h).sum::<f64>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_field::make_mesh;

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "64,64,32,16".parse().unwrap();
        assert_eq!(g, GridSpec::new(64, 64, 32, 16).unwrap());
        assert_eq!("64,64,32".parse::<GridSpec>().unwrap().phi, 32);
        assert!("4,64,32,32".parse::<GridSpec>().is_err());
        assert!("a,b".parse::<GridSpec>().is_err());
        assert_eq!(g.to_string(), "64,64,32,16");
    }

    #[test]
    fn bundle_checks() {
        let b = make_bundle(&make_mesh(2), GridSpec::default()).unwrap();
        assert!(b.curvature_residual(1000, 1) < 1e-8);
        assert!((b.fiber_area(0.3, -0.2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chart_independent_quantities_agree_on_the_overlap() {
        let theta = ThetaProfile::new(0.1).unwrap();
        let f = BundleField::lift_smooth(|p| p[0] * p[1] - p[2], theta);
        let e = ChartPoint::new(Chart::North, 0.8, 0.7, 0.6, 2.0);
        let t = e.transition();
        assert!((e.r() - t.r()).abs() < 1e-15);
        assert!((f.value(&e).unwrap() - f.value(&t).unwrap()).abs() < 1e-15);
    }
}
