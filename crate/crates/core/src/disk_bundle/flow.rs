use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};
use crate::sphere_field::{compose, steps_for, HamiltonianPath, VectorField};

use super::chart::ChartPoint;
use super::omega::omega_cartesian;
use super::profile::{Radial, ThetaProfile};

/// Base chart radius beyond which a trajectory switches chart.
const RECHART_RADIUS: f64 = 1.2;

/// Hamiltonian flow of ρ(r)·π*F_t on E, integrated with RK4 in Cartesian
/// fiber coordinates. Base derivatives come from the interpolated ambient
/// gradient of F through the chart Jacobian, so the projected motion uses
/// the same data as the flow on the sphere.
pub struct LiftedFlow<'a> {
    field: VectorField<'a>,
    radial: Radial,
}

impl<'a> LiftedFlow<'a> {
    pub fn new(path: &'a HamiltonianPath, radial: impl Into<Radial>) -> Result<Self> {
        Ok(LiftedFlow {
            field: VectorField::new(path)?,
            radial: radial.into(),
        })
    }

    /// X = P ∇g in (u, v, p, q) of the point's chart.
    pub fn velocity(&self, e: &ChartPoint, t: f64, hint: &mut usize) -> Result<[f64; 4]> {
        let (value, grad) = self.field.value_and_gradient(e.base(), t, hint)?;
        let (du, dv) = e.chart.jacobian(e.u, e.v);
        let r = e.r();
        let (rho, drho) = self.radial.jet(r);
        // ρ′(r)/r, continuous at 0 for profiles that are functions of r²
        let dr_over_r = if r > 1e-9 {
            drho / r
        } else {
            self.radial.jet(1e-9).1 / 1e-9
        };
        let g = [
            rho * geom::dot(grad, du),
            rho * geom::dot(grad, dv),
            dr_over_r * e.p * value,
            dr_over_r * e.q * value,
        ];
        let p = omega_cartesian(e.u, e.v, e.p, e.q).inverse();
        let mut x = [0.0; 4];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..4).map(|j| p[i][j] * g[j]).sum();
        }
        Ok(x)
    }

    pub fn rk4_step(&self, e: &ChartPoint, t: f64, dt: f64, hint: &mut usize) -> Result<ChartPoint> {
        let shift = |k: &[f64; 4], s: f64| ChartPoint {
            chart: e.chart,
            u: e.u + s * k[0],
            v: e.v + s * k[1],
            p: e.p + s * k[2],
            q: e.q + s * k[3],
        };
        let k1 = self.velocity(e, t, hint)?;
        let k2 = self.velocity(&shift(&k1, 0.5 * dt), t + 0.5 * dt, hint)?;
        let k3 = self.velocity(&shift(&k2, 0.5 * dt), t + 0.5 * dt, hint)?;
        let k4 = self.velocity(&shift(&k3, dt), t + dt, hint)?;
        let mut incr = [0.0; 4];
        for i in 0..4 {
            incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
        }
        Ok(shift(&incr, dt).rechart(RECHART_RADIUS))
    }

    /// Moves e from t0 to t1 in `steps` equal steps.
    pub fn transport(&self, e: &ChartPoint, t0: f64, t1: f64, steps: usize) -> Result<ChartPoint> {
        let mut x = *e;
        let mut hint = 0;
        if steps == 0 {
            return Ok(x);
        }
        let dt = (t1 - t0) / steps as f64;
        for i in 0..steps {
            x = self.rk4_step(&x, t0 + i as f64 * dt, dt, &mut hint)?;
        }
        Ok(x)
    }
}

/// Outcome of integrating a lifted flow against the base flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommuteReport {
    /// Largest spherical distance d(π f̃_t(e), f_t(π e)).
    pub max_distance: f64,
    /// Largest |r(f̃_t(e)) − r(e)|.
    pub max_r_drift: f64,
    pub r_conserved: bool,
    pub seeds: usize,
    pub steps: usize,
}

/// Tolerance for the conservation of r along lifted flows.
pub const R_DRIFT_TOLERANCE: f64 = 1e-6;

fn check_seeds(seeds: &[ChartPoint], theta: ThetaProfile) -> Result<()> {
    let limit = theta.core_radius();
    for e in seeds {
        if e.r() > limit + 1e-12 {
            return Err(Error::SeedOutsideCore { r: e.r(), limit });
        }
    }
    Ok(())
}

/// Integrates f̃ (generated by Θ_ε(F)) on E and f (generated by F) on S²
/// side by side and reports the largest base discrepancy over all steps.
pub fn flow_commutation_residual(
    path: &HamiltonianPath,
    theta: ThetaProfile,
    seeds: &[ChartPoint],
    dt: f64,
) -> Result<CommuteReport> {
    check_seeds(seeds, theta)?;
    let steps = steps_for(path, dt)?;
    let dt = 1.0 / steps as f64;
    let lifted = LiftedFlow::new(path, theta)?;
    let base = VectorField::new(path)?;
    let mut max_distance: f64 = 0.0;
    let mut max_r_drift: f64 = 0.0;
    for seed in seeds {
        let r0 = seed.r();
        let mut e = *seed;
        let mut b = seed.base();
        let (mut he, mut hb) = (0, 0);
        for i in 0..steps {
            let t = i as f64 * dt;
            e = lifted.rk4_step(&e, t, dt, &mut he)?;
            b = base.rk4_step(b, t, dt, &mut hb)?;
            max_distance = max_distance.max(geom::angle(e.base(), b));
            max_r_drift = max_r_drift.max((e.r() - r0).abs());
        }
    }
    Ok(CommuteReport {
        max_distance,
        max_r_drift,
        r_conserved: max_r_drift <= R_DRIFT_TOLERANCE,
        seeds: seeds.len(),
        steps,
    })
}

/// Largest |−Θ_ε(F#G) + Θ_ε(F)#Θ_ε(G)| along trajectories of Θ_ε(F#G),
/// sampled at the slice times of the paths.
///
/// At a point e and time t the term equals
/// θ(r)·(G_t(π f̃_t⁻¹ e) − G_t(f_t⁻¹ π e)), since r is conserved.
pub fn failure_term(
    f: &HamiltonianPath,
    g: &HamiltonianPath,
    theta: ThetaProfile,
    seeds: &[ChartPoint],
    dt: f64,
) -> Result<f64> {
    check_seeds(seeds, theta)?;
    let fg = compose(f, g, dt)?;
    let per_interval = steps_for(&fg, dt)? / fg.intervals();
    let sub = fg.spacing() / per_interval as f64;
    let along = LiftedFlow::new(&fg, theta)?;
    let lifted_f = LiftedFlow::new(f, theta)?;
    let base_f = VectorField::new(f)?;
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let mut e = *seed;
        let mut hint = 0;
        for k in 0..fg.intervals() {
            for i in 0..per_interval {
                e = along.rk4_step(&e, fg.time(k) + i as f64 * sub, sub, &mut hint)?;
            }
            let t = fg.time(k + 1);
            let n = (k + 1) * per_interval;
            let back_e = lifted_f.transport(&e, t, 0.0, n)?;
            let back_b = base_f.transport(e.base(), t, 0.0, n)?;
            let term = theta.value(e.r()) * (g.evaluate(back_e.base(), t)? - g.evaluate(back_b, t)?);
            worst = worst.max(term.abs());
        }
    }
    Ok(worst)
}

/// `count` points over a Fibonacci spiral on the base, all at fiber radius r.
pub fn seed_ring(count: usize, r: f64) -> Vec<ChartPoint> {
    (0..count)
        .map(|i| {
            let a = i as f64 * 2.399_963;
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let s = (1.0 - z * z).sqrt();
            let base: Vec3 = [s * a.cos(), s * a.sin(), z];
            ChartPoint::over(base, r, 0.7 * i as f64)
        })
        .collect()
}
