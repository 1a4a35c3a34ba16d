use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{self, Vec3};
use crate::quadrature::{composite_gauss, integrate_1d, smooth_step};
use crate::sphere_field::{poisson_bracket, HamiltonianPath, ScalarField, SphereMesh, VectorField};

use super::chart::{Chart, ChartPoint};
use super::field::{bracket_at, projected_sgrad, BaseFunction, BundleField, FdSteps};
use super::omega::omega_polar;
use super::profile::{Radial, ThetaProfile};
use super::GridSpec;

/// Seeded points of E with uniformly distributed base point, r ∈ [0, r_max]
/// and φ ∈ [0, 2π).
pub fn sample_points(count: usize, r_max: f64, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let a: f64 = rng.random_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            let r = rng.random_range(0.0..=r_max);
            let phi = rng.random_range(0.0..2.0 * PI);
            ChartPoint::over([s * a.cos(), s * a.sin(), z], r, phi)
        })
        .collect()
}

/// Residuals of the two bracket identities for lifted functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    /// max |{Θ(H),Θ(K)} − θ/(1−r²)·Θ({H,K}_σ)|, base bracket from the mesh.
    pub max_abs_first: f64,
    /// The same divided by max |θ/(1−r²)·Θ({H,K}_σ)|.
    pub max_rel_first: f64,
    /// max |{Θ(H),Θ(K)} − θ²{π*H,π*K}| divided by max |θ²{π*H,π*K}|.
    pub max_rel_second: f64,
    pub points: usize,
}

fn relative(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

/// Compares the ω-matrix bracket of Θ(H), Θ(K) on E with the base bracket
/// computed on `mesh` and interpolated.
pub fn bracket_identity_residual(
    h: &BaseFunction,
    k: &BaseFunction,
    theta: ThetaProfile,
    mesh: &Arc<SphereMesh>,
    points: &[ChartPoint],
    steps: FdSteps,
) -> Result<PoissonReport> {
    let lh = BundleField::structured(theta, h.clone());
    let lk = BundleField::structured(theta, k.clone());
    let ph = BundleField::pullback(h.clone());
    let pk = BundleField::pullback(k.clone());
    let base = poisson_bracket(&h.sample(mesh)?, &k.sample(mesh)?)?;
    let (mut e1, mut s1, mut e2, mut s2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for e in points {
        let r = e.r();
        let th = theta.value(r);
        let lhs = bracket_at(&lh, &lk, e, steps)?;
        let rhs1 = th / (1.0 - r * r) * th * base.interpolate(e.base())?;
        let rhs2 = th * th * bracket_at(&ph, &pk, e, steps)?;
        e1 = e1.max((lhs - rhs1).abs());
        s1 = s1.max(rhs1.abs());
        e2 = e2.max((lhs - rhs2).abs());
        s2 = s2.max(rhs2.abs());
    }
    Ok(PoissonReport {
        max_abs_first: e1,
        max_rel_first: relative(e1, s1),
        max_rel_second: relative(e2, s2),
        points: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgradReport {
    /// max ‖π_*(sgrad Θ(H)) − θ/(1−r²)·sgrad H‖.
    pub max_abs: f64,
    /// The same divided by max ‖θ/(1−r²)·sgrad H‖.
    pub max_rel: f64,
    pub points: usize,
}

/// Compares the projected symplectic gradient of Θ(H) with the scaled base
/// symplectic gradient from the sphere's interpolated vector field.
pub fn sgrad_pushforward_residual(
    h: &BaseFunction,
    theta: ThetaProfile,
    mesh: &Arc<SphereMesh>,
    points: &[ChartPoint],
    steps: FdSteps,
) -> Result<SgradReport> {
    let lifted = BundleField::structured(theta, h.clone());
    let path = HamiltonianPath::autonomous(&h.sample(mesh)?);
    let field = VectorField::new(&path)?;
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    let mut hint = 0;
    for e in points {
        let r = e.r();
        let lhs = projected_sgrad(&lifted, e, steps)?;
        let rhs = geom::scale(field.velocity(e.base(), 0.0, &mut hint)?, theta.value(r) / (1.0 - r * r));
        err = err.max(geom::norm(geom::sub(lhs, rhs)));
        scale = scale.max(geom::norm(rhs));
    }
    Ok(SgradReport {
        max_abs: err,
        max_rel: relative(err, scale),
        points: points.len(),
    })
}

/// −∫₀¹ θ′(r)(1 − r²)² dr.
pub fn radial_factor(theta: ThetaProfile) -> f64 {
    -integrate_1d(|r| theta.derivative(r) * (1.0 - r * r).powi(2), &radial_breaks(theta), 8)
}

fn radial_breaks(theta: ThetaProfile) -> Vec<f64> {
    if theta.is_limit() {
        vec![0.0, 1.0]
    } else {
        let (a, b) = theta.knots();
        vec![0.0, a, b, 1.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Half-width of the square of chart coordinates covered by quadrature.
pub const CHART_BOX: f64 = 1.8;

/// Weight of the north chart in the partition of unity; 1 for z ≥ 1/2 and 0
/// for z ≤ −1/2, so its support lies in the disk ρ ≤ √3 of the chart.
pub fn north_weight(p: Vec3) -> f64 {
    smooth_step(p[2] + 0.5)
}

/// ∫ ρ(r)·π*H ω²/2 over {r ≤ r_max} by quadrature over both charts:
/// midpoint rule in (u, v) on the chart box with a smooth partition of unity,
/// Gauss–Legendre in r split at the profile knots, trapezoid in φ. The
/// density is the Pfaffian of the assembled form matrix.
pub fn liouville_integral(radial: &Radial, h: &ScalarField, r_max: f64, grid: GridSpec) -> Result<f64> {
    let mut breaks = vec![0.0];
    if let Some(t) = radial.theta().filter(|t| !t.is_limit()) {
        let (a, b) = t.knots();
        breaks.extend([a, b].into_iter().filter(|&k| k < r_max));
    }
    breaks.push(r_max);
    let nodes: Vec<(f64, f64)> = composite_gauss(&breaks, (grid.r / 8).max(1), 4);
    let hu = 2.0 * CHART_BOX / grid.u as f64;
    let hv = 2.0 * CHART_BOX / grid.v as f64;
    let hphi = 2.0 * PI / grid.phi as f64;
    let mut total = 0.0;
    for chart in [Chart::North, Chart::South] {
        let mut hint = 0;
        for i in 0..grid.u {
            let u = -CHART_BOX + (i as f64 + 0.5) * hu;
            for j in 0..grid.v {
                let v = -CHART_BOX + (j as f64 + 0.5) * hv;
                let p = chart.to_sphere(u, v);
                let w = match chart {
                    Chart::North => north_weight(p),
                    Chart::South => 1.0 - north_weight(p),
                };
                if w == 0.0 {
                    continue;
                }
                let loc = h.mesh().locate(p, hint)?;
                hint = loc.triangle;
                let base = h.mesh().blend(&loc, h.values());
                let mut cell = 0.0;
                for &(r, wr) in &nodes {
                    let pf = omega_polar(u, v, r).pfaffian();
                    let f = radial.value(r) * base;
                    let mut ring = 0.0;
                    for _ in 0..grid.phi {
                        ring += f * pf;
                    }
                    cell += wr * hphi * ring;
                }
                total += w * hu * hv * cell;
            }
        }
    }
    Ok(total)
}

/// lhs = −∫θ′(1−r²)² dr · ∫H σ with the mesh integral; rhs = ∫_E Θ(H) ω²/2
/// from [`liouville_integral`].
pub fn fiber_integral_residual(h: &ScalarField, theta: ThetaProfile, grid: GridSpec) -> Result<FiberReport> {
    let lhs = radial_factor(theta) * h.integrate();
    let rhs = liouville_integral(&Radial::from(theta), h, 1.0, grid)?;
    Ok(FiberReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / lhs.abs().max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_field::{make_mesh, Polynomial};

    #[test]
    fn radial_factor_closed_forms() {
        assert!((radial_factor(ThetaProfile::limit()) - 1.0 / 3.0).abs() < 1e-12);
        // θ′ = −2r on [0, 0.9] contributes (1 − 0.19³)/3; the spline adds a little
        let t = ThetaProfile::new(0.1).unwrap();
        let inner = (1.0 - 0.19f64.powi(3)) / 3.0;
        let f = radial_factor(t);
        assert!(f > inner && f < inner + 0.01);
    }

    #[test]
    fn poisson_identity_for_coordinates() {
        let mesh = make_mesh(4);
        let theta = ThetaProfile::new(0.1).unwrap();
        let x = BaseFunction::smooth(|p| p[0]);
        let y = BaseFunction::smooth(|p| p[1]);
        let pts = sample_points(40, 0.9, 3);
        let rep = bracket_identity_residual(&x, &y, theta, &mesh, &pts, GridSpec::default().steps()).unwrap();
        assert!(rep.max_rel_first < 2e-2, "{rep:?}");
        assert!(rep.max_rel_second < 1e-12, "{rep:?}");
        let same = bracket_identity_residual(&x, &x, theta, &mesh, &pts, GridSpec::default().steps()).unwrap();
        assert_eq!(same.max_abs_first, 0.0);
    }

    #[test]
    fn poisson_identity_converges() {
        let theta = ThetaProfile::new(0.1).unwrap();
        let poly_h = Polynomial::random(2, 1);
        let poly_k = Polynomial::random(2, 2);
        let h = BaseFunction::smooth(move |p| poly_h.eval(p));
        let k = BaseFunction::smooth(move |p| poly_k.eval(p));
        let pts = sample_points(30, 0.9, 8);
        let coarse = bracket_identity_residual(&h, &k, theta, &make_mesh(4), &pts, GridSpec::default().steps()).unwrap();
        let fine =
            bracket_identity_residual(&h, &k, theta, &make_mesh(5), &pts, GridSpec::default().doubled().steps()).unwrap();
        assert!(fine.max_rel_first <= 0.6 * coarse.max_rel_first, "{coarse:?} {fine:?}");
    }

    #[test]
    fn sgrad_of_height_on_zero_section() {
        let mesh = make_mesh(3);
        let theta = ThetaProfile::new(0.1).unwrap();
        let z = BaseFunction::smooth(|p| p[2]);
        let pts: Vec<ChartPoint> = sample_points(20, 0.0, 5);
        let steps = GridSpec::new(512, 512, 64, 64).unwrap().steps();
        let rep = sgrad_pushforward_residual(&z, theta, &mesh, &pts, steps).unwrap();
        assert!(rep.max_abs < 1e-6, "{rep:?}");
        let c = BaseFunction::smooth(|_| 2.0);
        let rep = sgrad_pushforward_residual(&c, theta, &mesh, &sample_points(5, 0.9, 1), steps).unwrap();
        assert!(rep.max_abs < 1e-12);
    }

    #[test]
    fn fiber_identity() {
        let mesh = make_mesh(4);
        let one = ScalarField::constant(&mesh, 1.0);
        let theta = ThetaProfile::new(0.1).unwrap();
        let rep = fiber_integral_residual(&one, theta, GridSpec::default()).unwrap();
        assert!(rep.residual < 1e-2, "{rep:?}");
        let limit = fiber_integral_residual(&one, ThetaProfile::limit(), GridSpec::default()).unwrap();
        assert!((limit.rhs - 1.0 / 3.0).abs() < 1e-4, "{limit:?}");
        let z = ScalarField::coordinate(&mesh, 2);
        let rep = fiber_integral_residual(&z, theta, GridSpec::default()).unwrap();
        assert!(rep.rhs.abs() < 1e-3, "{rep:?}");
    }
}
