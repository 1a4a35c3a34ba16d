use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

use super::field::ScalarField;
use super::mesh::SphereMesh;

type ExactFn = dyn Fn(Vec3, f64) -> f64 + Send + Sync;

/// Time-dependent Hamiltonian sampled on the uniform grid t_k = k/m.
///
/// A path may carry the smooth function it was sampled from; point
/// evaluations then use it instead of interpolating the slices.
#[derive(Clone)]
pub struct HamiltonianPath {
    slices: Vec<ScalarField>,
    exact: Option<Arc<ExactFn>>,
}

impl fmt::Debug for HamiltonianPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianPath")
            .field("intervals", &self.intervals())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl HamiltonianPath {
    pub fn from_slices(slices: Vec<ScalarField>) -> Result<Self> {
        if slices.len() < 2 {
            return Err(Error::Config("a path needs at least two time slices".into()));
        }
        for s in &slices[1..] {
            s.same_mesh(&slices[0])?;
        }
        Ok(HamiltonianPath { slices, exact: None })
    }

    /// Samples `f(p, t)` on `intervals + 1` uniform time slices.
    pub fn from_fn<F>(mesh: &Arc<SphereMesh>, intervals: usize, f: F) -> Result<Self>
    where
        F: Fn(Vec3, f64) -> f64 + Send + Sync + 'static,
    {
        if intervals == 0 {
            return Err(Error::Config("a path needs at least one time interval".into()));
        }
        let slices = (0..=intervals)
            .map(|k| {
                let t = k as f64 / intervals as f64;
                ScalarField::from_fn(mesh, |p| f(p, t))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(HamiltonianPath {
            slices,
            exact: Some(Arc::new(f)),
        })
    }

    /// Time-independent path with a single interval.
    pub fn autonomous(h: &ScalarField) -> Self {
        HamiltonianPath {
            slices: vec![h.clone(), h.clone()],
            exact: None,
        }
    }

    pub fn autonomous_fn<F>(mesh: &Arc<SphereMesh>, f: F) -> Result<Self>
    where
        F: Fn(Vec3) -> f64 + Send + Sync + 'static,
    {
        Self::from_fn(mesh, 1, move |p, _| f(p))
    }

    pub fn zero(mesh: &Arc<SphereMesh>) -> Self {
        Self::autonomous(&ScalarField::constant(mesh, 0.0))
    }

    pub fn mesh(&self) -> &Arc<SphereMesh> {
        self.slices[0].mesh()
    }

    pub fn slices(&self) -> &[ScalarField] {
        &self.slices
    }

    pub fn intervals(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.intervals() as f64
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn bracket(&self, t: f64) -> (usize, f64) {
        let m = self.intervals();
        let s = t.clamp(0.0, 1.0) * m as f64;
        let k = (s.floor() as usize).min(m - 1);
        (k, s - k as f64)
    }

    /// F(p, t), from the smooth source when known.
    pub fn evaluate(&self, p: Vec3, t: f64) -> Result<f64> {
        if let Some(f) = &self.exact {
            return Ok(f(p, t));
        }
        let (k, a) = self.bracket(t);
        let loc = self.mesh().locate(p, 0)?;
        let m = self.mesh();
        Ok((1.0 - a) * m.blend(&loc, self.slices[k].values())
            + a * m.blend(&loc, self.slices[k + 1].values()))
    }

    /// Pointwise sum of two paths on the same grid.
    pub fn add(&self, other: &HamiltonianPath) -> Result<Self> {
        if self.intervals() != other.intervals() {
            return Err(Error::Config("paths have different time grids".into()));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        let exact = match (&self.exact, &other.exact) {
            (Some(f), Some(g)) => {
                let (f, g) = (Arc::clone(f), Arc::clone(g));
                Some(Arc::new(move |p, t| f(p, t) + g(p, t)) as Arc<ExactFn>)
            }
            _ => None,
        };
        Ok(HamiltonianPath { slices, exact })
    }

    pub fn scale(&self, s: f64) -> Self {
        HamiltonianPath {
            slices: self.slices.iter().map(|f| f.scale(s)).collect(),
            exact: self.exact.as_ref().map(|f| {
                let f = Arc::clone(f);
                Arc::new(move |p, t| s * f(p, t)) as Arc<ExactFn>
            }),
        }
    }
}

/// Interpolated symplectic gradient of a path.
///
/// Vertex gradients are ambient least-squares fits, blended barycentrically
/// and crossed with the base point. Linear Hamiltonians give exact rotations.
pub struct VectorField<'a> {
    path: &'a HamiltonianPath,
    grads: Vec<Vec<Vec3>>,
}

impl<'a> VectorField<'a> {
    pub fn new(path: &'a HamiltonianPath) -> Result<Self> {
        let grads = path
            .slices
            .iter()
            .map(|s| s.ambient_gradients())
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { path, grads })
    }

    /// Ambient gradient of F_t interpolated at p; `hint` is updated.
    pub fn gradient(&self, p: Vec3, t: f64, hint: &mut usize) -> Result<Vec3> {
        let mesh = self.path.mesh();
        let loc = mesh.locate(p, *hint)?;
        *hint = loc.triangle;
        let (k, a) = self.path.bracket(t);
        let g0 = mesh.blend_vec(&loc, &self.grads[k]);
        let g1 = mesh.blend_vec(&loc, &self.grads[k + 1]);
        Ok(geom::add(geom::scale(g0, 1.0 - a), geom::scale(g1, a)))
    }

    /// F_t(p) and the interpolated ambient gradient, from one point location.
    pub fn value_and_gradient(&self, p: Vec3, t: f64, hint: &mut usize) -> Result<(f64, Vec3)> {
        let mesh = self.path.mesh();
        let loc = mesh.locate(p, *hint)?;
        *hint = loc.triangle;
        let (k, a) = self.path.bracket(t);
        let g0 = mesh.blend_vec(&loc, &self.grads[k]);
        let g1 = mesh.blend_vec(&loc, &self.grads[k + 1]);
        let value = match &self.path.exact {
            Some(f) => f(p, t),
            None => {
                (1.0 - a) * mesh.blend(&loc, self.path.slices[k].values())
                    + a * mesh.blend(&loc, self.path.slices[k + 1].values())
            }
        };
        Ok((value, geom::add(geom::scale(g0, 1.0 - a), geom::scale(g1, a))))
    }

    /// sgrad F_t at p.
    pub fn velocity(&self, p: Vec3, t: f64, hint: &mut usize) -> Result<Vec3> {
        let g = self.gradient(p, t, hint)?;
        Ok(geom::scale(geom::cross(p, g), 4.0 * PI))
    }

    /// One RK4 step with re-projection of every stage.
    pub fn rk4_step(&self, p: Vec3, t: f64, dt: f64, hint: &mut usize) -> Result<Vec3> {
        let k1 = self.velocity(p, t, hint)?;
        let p2 = geom::normalize(geom::axpy(p, 0.5 * dt, k1));
        let k2 = self.velocity(p2, t + 0.5 * dt, hint)?;
        let p3 = geom::normalize(geom::axpy(p, 0.5 * dt, k2));
        let k3 = self.velocity(p3, t + 0.5 * dt, hint)?;
        let p4 = geom::normalize(geom::axpy(p, dt, k3));
        let k4 = self.velocity(p4, t + dt, hint)?;
        let incr = geom::add(geom::add(k1, k4), geom::scale(geom::add(k2, k3), 2.0));
        Ok(geom::normalize(geom::axpy(p, dt / 6.0, incr)))
    }

    /// Moves p from time t0 to t1 in `steps` equal steps (t1 < t0 runs backward).
    pub fn transport(&self, p: Vec3, t0: f64, t1: f64, steps: usize) -> Result<Vec3> {
        let mut x = p;
        let mut hint = 0;
        if steps == 0 {
            return Ok(x);
        }
        let dt = (t1 - t0) / steps as f64;
        for i in 0..steps {
            x = self.rk4_step(x, t0 + i as f64 * dt, dt, &mut hint)?;
        }
        Ok(x)
    }
}

/// Sampled trajectories of a Hamiltonian flow on [0, 1].
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub dt: f64,
    pub trajectories: Vec<Vec<Vec3>>,
}

impl FlowMap {
    pub fn steps(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.len() - 1)
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Time-1 images of the tracked points.
    pub fn final_positions(&self) -> Vec<Vec3> {
        self.trajectories.iter().map(|t| *t.last().unwrap()).collect()
    }
}

/// Number of RK4 steps per unit time for a step that must divide the grid.
pub fn steps_for(path: &HamiltonianPath, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 1e-12) {
        return Err(Error::StepUnderflow(dt));
    }
    let spacing = path.spacing();
    let ratio = spacing / dt;
    if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::StepGrid { dt, spacing });
    }
    Ok(ratio.round() as usize * path.intervals())
}

/// Integrates ∂_t f_t = sgrad F_t from t = 0 to 1 for each seed point.
pub fn hamiltonian_flow(path: &HamiltonianPath, points: &[Vec3], dt: f64) -> Result<FlowMap> {
    let steps = steps_for(path, dt)?;
    let dt = 1.0 / steps as f64;
    let field = VectorField::new(path)?;
    let mut trajectories = Vec::with_capacity(points.len());
    for &p in points {
        let mut x = geom::normalize(p);
        let mut hint = 0;
        let mut traj = Vec::with_capacity(steps + 1);
        traj.push(x);
        for i in 0..steps {
            x = field.rk4_step(x, i as f64 * dt, dt, &mut hint)?;
            traj.push(x);
        }
        trajectories.push(traj);
    }
    Ok(FlowMap { dt, trajectories })
}

/// Positions f_{t_k}(v) for every vertex v and slice time t_k.
fn forward_at_slices(field: &VectorField<'_>, path: &HamiltonianPath, per_interval: usize) -> Result<Vec<Vec<Vec3>>> {
    let m = path.intervals();
    let mesh = path.mesh();
    let mut out = vec![Vec::with_capacity(mesh.num_vertices()); m + 1];
    let dt = path.spacing() / per_interval as f64;
    for &v in mesh.vertices() {
        let mut x = v;
        let mut hint = 0;
        out[0].push(x);
        for k in 0..m {
            for i in 0..per_interval {
                let t = path.time(k) + i as f64 * dt;
                x = field.rk4_step(x, t, dt, &mut hint)?;
            }
            out[k + 1].push(x);
        }
    }
    Ok(out)
}

/// Positions f_{t_k}⁻¹(v), by flowing each vertex backward from t_k to 0.
fn backward_at_slices(field: &VectorField<'_>, path: &HamiltonianPath, per_interval: usize) -> Result<Vec<Vec<Vec3>>> {
    let m = path.intervals();
    let mesh = path.mesh();
    let mut out = Vec::with_capacity(m + 1);
    out.push(mesh.vertices().to_vec());
    for k in 1..=m {
        let slice = mesh
            .vertices()
            .iter()
            .map(|&v| field.transport(v, path.time(k), 0.0, k * per_interval))
            .collect::<Result<Vec<_>>>()?;
        out.push(slice);
    }
    Ok(out)
}

/// F̄(x, t) = −F(f_t(x), t), generating the inverse isotopy f_t⁻¹.
pub fn inverse_path(path: &HamiltonianPath, dt: f64) -> Result<HamiltonianPath> {
    let per_interval = steps_for(path, dt)? / path.intervals();
    let field = VectorField::new(path)?;
    let images = forward_at_slices(&field, path, per_interval)?;
    let mesh = path.mesh();
    let slices = images
        .iter()
        .enumerate()
        .map(|(k, pts)| {
            let t = path.time(k);
            let vals = pts
                .iter()
                .map(|&q| path.evaluate(q, t).map(|v| -v))
                .collect::<Result<Vec<_>>>()?;
            ScalarField::new(mesh, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    HamiltonianPath::from_slices(slices)
}

/// (F#G)(x, t) = F(x, t) + G(f_t⁻¹(x), t), generating f_t ∘ g_t.
pub fn compose(f: &HamiltonianPath, g: &HamiltonianPath, dt: f64) -> Result<HamiltonianPath> {
    if f.intervals() != g.intervals() {
        return Err(Error::Config("paths have different time grids".into()));
    }
    f.slices[0].same_mesh(&g.slices[0])?;
    let per_interval = steps_for(f, dt)? / f.intervals();
    let field = VectorField::new(f)?;
    let pre = backward_at_slices(&field, f, per_interval)?;
    let mesh = f.mesh();
    let slices = pre
        .iter()
        .enumerate()
        .map(|(k, pts)| {
            let t = f.time(k);
            let vals = pts
                .iter()
                .zip(f.slices[k].values())
                .map(|(&q, &fv)| g.evaluate(q, t).map(|gv| fv + gv))
                .collect::<Result<Vec<_>>>()?;
            ScalarField::new(mesh, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    HamiltonianPath::from_slices(slices)
}

/// ∫₀¹ Σ_{v ∈ mask} F_t(v)·weight(v) dt with the trapezoid rule in time.
///
/// `mask[v]` marks the support region; slices must vanish off it to 10⁻¹².
pub fn calabi(path: &HamiltonianPath, mask: &[bool]) -> Result<f64> {
    let mesh = path.mesh();
    if mask.len() != mesh.num_vertices() {
        return Err(Error::FieldLength {
            expected: mesh.num_vertices(),
            got: mask.len(),
        });
    }
    let w = mesh.weights();
    let mut per_slice = Vec::with_capacity(path.slices.len());
    for s in &path.slices {
        let mut acc = 0.0;
        for (v, (&val, &inside)) in s.values().iter().zip(mask).enumerate() {
            if inside {
                acc += val * w[v];
            } else if val.abs() > 1e-12 {
                return Err(Error::SupportViolation { vertex: v, value: val });
            }
        }
        per_slice.push(acc);
    }
    Ok(trapezoid(&per_slice, path.spacing()))
}

/// Trapezoid rule for uniformly spaced samples.
pub fn trapezoid(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    h * (samples[1..n - 1].iter().sum::<f64>() + 0.5 * (samples[0] + samples[n - 1]))
}

/// Angular radius of a cap with normalized area `area`.
pub fn cap_radius(area: f64) -> f64 {
    (1.0 - 2.0 * area).clamp(-1.0, 1.0).acos()
}

/// Vertices in the closed cap of normalized area `area` about `center`.
pub fn cap_mask(mesh: &SphereMesh, center: Vec3, area: f64) -> Vec<bool> {
    let c = geom::normalize(center);
    let cos_r = 1.0 - 2.0 * area;
    mesh.vertices().iter().map(|&p| geom::dot(p, c) >= cos_r - 1e-12).collect()
}

/// Autonomous F = (u·p)/4 with u ⟂ center, whose time-1 map is the rotation
/// by π about u. It carries a cap of area A < 1/2 to the antipodal cap, at
/// angular separation π − 2ρ where cos ρ = 1 − 2A.
pub fn displacing_rotation(mesh: &Arc<SphereMesh>, cap_center: Vec3, cap_area: f64) -> Result<HamiltonianPath> {
    if !(cap_area > 0.0 && cap_area < 0.5) {
        return Err(Error::CapTooLarge(cap_area));
    }
    let u = geom::orthogonal(geom::normalize(cap_center));
    HamiltonianPath::autonomous_fn(mesh, move |p| 0.25 * geom::dot(u, p))
}

/// Flows the cap's center and `samples` boundary points and returns the
/// smallest angular distance from an image point to the cap. Positive means
/// the time-1 image is disjoint from the closed cap.
pub fn certify_displacement(
    path: &HamiltonianPath,
    cap_center: Vec3,
    cap_area: f64,
    samples: usize,
    dt: f64,
) -> Result<f64> {
    let c = geom::normalize(cap_center);
    let rho = cap_radius(cap_area);
    let e1 = geom::orthogonal(c);
    let e2 = geom::cross(c, e1);
    let mut pts = vec![c];
    for i in 0..samples {
        let a = 2.0 * PI * i as f64 / samples as f64;
        let dir = geom::add(geom::scale(e1, a.cos()), geom::scale(e2, a.sin()));
        pts.push(geom::add(geom::scale(c, rho.cos()), geom::scale(dir, rho.sin())));
    }
    let flow = hamiltonian_flow(path, &pts, dt)?;
    let sep = flow
        .final_positions()
        .iter()
        .map(|&q| geom::angle(q, c) - rho)
        .fold(f64::INFINITY, f64::min);
    if sep > 0.0 {
        Ok(sep)
    } else {
        Err(Error::Certification(sep))
    }
}
