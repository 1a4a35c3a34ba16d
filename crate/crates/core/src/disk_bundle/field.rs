use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::sphere_field::{ScalarField, SphereMesh};

use super::chart::{Chart, ChartPoint};
use super::omega::{omega_cartesian, omega_polar};
use super::profile::{Radial, ThetaProfile};
use super::GridSpec;

type SmoothFn = dyn Fn(Vec3) -> f64 + Send + Sync;
type FreeFn = dyn Fn(&ChartPoint) -> f64 + Send + Sync;

/// A function on the base sphere: smooth closed form or mesh samples.
#[derive(Clone)]
pub enum BaseFunction {
    Smooth(Arc<SmoothFn>),
    Mesh(ScalarField),
}

impl fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseFunction::Smooth(_) => write!(f, "Smooth"),
            BaseFunction::Mesh(h) => write!(f, "Mesh({} vertices)", h.values().len()),
        }
    }
}

impl BaseFunction {
    pub fn smooth(f: impl Fn(Vec3) -> f64 + Send + Sync + 'static) -> Self {
        BaseFunction::Smooth(Arc::new(f))
    }

    pub fn value(&self, p: Vec3) -> Result<f64> {
        match self {
            BaseFunction::Smooth(f) => Ok(f(p)),
            BaseFunction::Mesh(h) => h.interpolate(p),
        }
    }

    /// Vertex samples on `mesh`.
    pub fn sample(&self, mesh: &Arc<SphereMesh>) -> Result<ScalarField> {
        match self {
            BaseFunction::Smooth(f) => ScalarField::from_fn(mesh, |p| f(p)),
            BaseFunction::Mesh(h) => {
                if Arc::ptr_eq(h.mesh(), mesh) {
                    Ok(h.clone())
                } else {
                    ScalarField::from_fn(mesh, |p| h.interpolate(p).unwrap_or(f64::NAN))
                }
            }
        }
    }
}

impl From<ScalarField> for BaseFunction {
    fn from(h: ScalarField) -> Self {
        BaseFunction::Mesh(h)
    }
}

/// Values on a (base vertex × r ring × φ ring) grid.
///
/// The φ coordinate at a vertex is taken in the chart preferred by that
/// vertex; r rings are i/n for i = 0..=n.
#[derive(Debug, Clone)]
pub struct SampledField {
    mesh: Arc<SphereMesh>,
    r_rings: usize,
    phi_rings: usize,
    values: Vec<f64>,
}

impl SampledField {
    fn index(&self, vertex: usize, i: usize, j: usize) -> usize {
        (vertex * (self.r_rings + 1) + i) * self.phi_rings + j
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at_vertex(&self, vertex: usize, e: &ChartPoint) -> f64 {
        let base = self.mesh.vertex(vertex);
        let local = e.in_chart(Chart::for_point(base));
        let x = (local.r() * self.r_rings as f64).min(self.r_rings as f64);
        let i = (x.floor() as usize).min(self.r_rings.saturating_sub(1));
        let a = x - i as f64;
        let y = local.phi() / (2.0 * PI) * self.phi_rings as f64;
        let j = (y.floor() as usize) % self.phi_rings;
        let b = y - y.floor();
        let j1 = (j + 1) % self.phi_rings;
        let g = |i, j| self.values[self.index(vertex, i, j)];
        (1.0 - a) * ((1.0 - b) * g(i, j) + b * g(i, j1)) + a * ((1.0 - b) * g(i + 1, j) + b * g(i + 1, j1))
    }

    fn value(&self, e: &ChartPoint) -> Result<f64> {
        let loc = self.mesh.locate(e.base(), 0)?;
        let tri = self.mesh.triangles()[loc.triangle];
        Ok((0..3).map(|k| loc.weights[k] * self.at_vertex(tri[k], e)).sum())
    }
}

/// A function on the disk bundle E.
#[derive(Clone)]
pub enum BundleField {
    /// ρ(r)·π*H.
    Structured { radial: Radial, base: BaseFunction },
    Sampled(SampledField),
    Free(Arc<FreeFn>),
}

impl fmt::Debug for BundleField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleField::Structured { radial, base } => write!(f, "Structured({radial:?}, {base:?})"),
            BundleField::Sampled(s) => write!(f, "Sampled({} values)", s.values.len()),
            BundleField::Free(_) => write!(f, "Free"),
        }
    }
}

/// Θ(H) = θ(r)·π*H.
pub fn lift(h: &ScalarField, theta: ThetaProfile) -> BundleField {
    BundleField::Structured {
        radial: theta.into(),
        base: BaseFunction::Mesh(h.clone()),
    }
}

impl BundleField {
    pub fn structured(radial: impl Into<Radial>, base: impl Into<BaseFunction>) -> Self {
        BundleField::Structured {
            radial: radial.into(),
            base: base.into(),
        }
    }

    /// θ(r)·π*H for a closed-form H.
    pub fn lift_smooth(f: impl Fn(Vec3) -> f64 + Send + Sync + 'static, radial: impl Into<Radial>) -> Self {
        Self::structured(radial, BaseFunction::smooth(f))
    }

    /// π*H.
    pub fn pullback(base: impl Into<BaseFunction>) -> Self {
        Self::structured(Radial::one(), base)
    }

    /// The purely radial field ρ(r).
    pub fn radial(radial: impl Into<Radial>) -> Self {
        Self::structured(radial, BaseFunction::smooth(|_| 1.0))
    }

    pub fn free(f: impl Fn(&ChartPoint) -> f64 + Send + Sync + 'static) -> Self {
        BundleField::Free(Arc::new(f))
    }

    pub fn value(&self, e: &ChartPoint) -> Result<f64> {
        match self {
            BundleField::Structured { radial, base } => Ok(radial.value(e.r()) * base.value(e.base())?),
            BundleField::Sampled(s) => s.value(e),
            BundleField::Free(f) => Ok(f(e)),
        }
    }

    /// Multiplies by a radial factor; structured fields stay structured.
    pub fn mul_radial(&self, rho: &Radial) -> BundleField {
        match self {
            BundleField::Structured { radial, base } => BundleField::Structured {
                radial: radial.mul(rho),
                base: base.clone(),
            },
            other => {
                let (f, rho) = (other.clone(), rho.clone());
                BundleField::free(move |e| rho.value(e.r()) * f.value(e).unwrap_or(f64::NAN))
            }
        }
    }

    pub fn linear_combination(&self, a: f64, other: &BundleField, b: f64) -> BundleField {
        let (f, g) = (self.clone(), other.clone());
        BundleField::free(move |e| {
            a * f.value(e).unwrap_or(f64::NAN) + b * g.value(e).unwrap_or(f64::NAN)
        })
    }

    /// Samples on the (vertex × r ring × φ ring) grid.
    pub fn sample(&self, mesh: &Arc<SphereMesh>, r_rings: usize, phi_rings: usize) -> Result<BundleField> {
        let mut values = Vec::with_capacity(mesh.num_vertices() * (r_rings + 1) * phi_rings);
        for &p in mesh.vertices() {
            for i in 0..=r_rings {
                let r = (i as f64 / r_rings as f64).min(1.0 - 1e-9);
                for j in 0..phi_rings {
                    let phi = 2.0 * PI * j as f64 / phi_rings as f64;
                    values.push(self.value(&ChartPoint::over(p, r, phi))?);
                }
            }
        }
        Ok(BundleField::Sampled(SampledField {
            mesh: Arc::clone(mesh),
            r_rings,
            phi_rings,
            values,
        }))
    }
}

/// Finite-difference steps in (u, v), r and φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    pub uv: f64,
    pub r: f64,
    pub phi: f64,
}

impl From<GridSpec> for FdSteps {
    fn from(g: GridSpec) -> Self {
        g.steps()
    }
}

/// Below this radius brackets use Cartesian fiber coordinates.
const POLAR_MIN_RADIUS: f64 = 1e-6;
/// Brackets are refused at and beyond this radius.
pub const BOUNDARY_GUARD: f64 = 1.0 - 1e-6;

fn d4(g: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    Ok((-g(2.0 * h)? + 8.0 * g(h)? - 8.0 * g(-h)? + g(-2.0 * h)?) / (12.0 * h))
}

/// Coordinates and the inverse form used for brackets at a point.
struct Frame {
    x: [f64; 4],
    polar: bool,
    chart: Chart,
    p: [[f64; 4]; 4],
    h: [f64; 4],
}

impl Frame {
    fn at(e: &ChartPoint, steps: FdSteps) -> Result<Frame> {
        let r = e.r();
        if r >= BOUNDARY_GUARD {
            return Err(Error::NearBoundary(r));
        }
        if r > POLAR_MIN_RADIUS {
            Ok(Frame {
                x: [e.u, e.v, r, e.phi()],
                polar: true,
                chart: e.chart,
                p: omega_polar(e.u, e.v, r).inverse(),
                h: [steps.uv, steps.uv, steps.r, steps.phi],
            })
        } else {
            Ok(Frame {
                x: [e.u, e.v, e.p, e.q],
                polar: false,
                chart: e.chart,
                p: omega_cartesian(e.u, e.v, e.p, e.q).inverse(),
                h: [steps.uv, steps.uv, steps.r, steps.r],
            })
        }
    }

    fn point(&self, x: [f64; 4]) -> ChartPoint {
        if self.polar {
            ChartPoint::new(self.chart, x[0], x[1], x[2], x[3])
        } else {
            ChartPoint {
                chart: self.chart,
                u: x[0],
                v: x[1],
                p: x[2],
                q: x[3],
            }
        }
    }

    fn gradient(&self, f: &dyn Fn(&ChartPoint) -> Result<f64>) -> Result<[f64; 4]> {
        let mut g = [0.0; 4];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = d4(
                |k| {
                    let mut x = self.x;
                    x[i] += k;
                    f(&self.point(x))
                },
                self.h[i],
            )?;
        }
        Ok(g)
    }

    /// Σ_{i<j} P_ij (a_i b_j − a_j b_i); exactly antisymmetric in (a, b).
    fn pair(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                s += self.p[i][j] * (a[i] * b[j] - a[j] * b[i]);
            }
        }
        s
    }

    /// Components of X_g = P ∇g in frame coordinates.
    fn hamiltonian_vector(&self, grad: &[f64; 4]) -> [f64; 4] {
        let mut x = [0.0; 4];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..4).map(|j| self.p[i][j] * grad[j]).sum();
        }
        x
    }
}

/// {f, g}_ω = df(X_g) where ω(X_g, ·) = −dg, from fourth-order central
/// differences in chart coordinates.
pub fn bracket_at(f: &BundleField, g: &BundleField, e: &ChartPoint, steps: FdSteps) -> Result<f64> {
    bracket_fn_at(&|x| f.value(x), &|x| g.value(x), e, steps)
}

pub(crate) fn bracket_fn_at(
    f: &dyn Fn(&ChartPoint) -> Result<f64>,
    g: &dyn Fn(&ChartPoint) -> Result<f64>,
    e: &ChartPoint,
    steps: FdSteps,
) -> Result<f64> {
    let frame = Frame::at(e, steps)?;
    let a = frame.gradient(f)?;
    let b = frame.gradient(g)?;
    Ok(frame.pair(&a, &b))
}

/// The bracket as a field on E, evaluated lazily by finite differences.
pub fn bracket_bundle(f: &BundleField, g: &BundleField, steps: FdSteps) -> BundleField {
    let (f, g) = (f.clone(), g.clone());
    BundleField::free(move |e| bracket_at(&f, &g, e, steps).unwrap_or(f64::NAN))
}

/// Base velocity π_*(sgrad f) at e as an ambient vector.
pub fn projected_sgrad(f: &BundleField, e: &ChartPoint, steps: FdSteps) -> Result<Vec3> {
    let frame = Frame::at(e, steps)?;
    let grad = frame.gradient(&|x| f.value(x))?;
    let x = frame.hamiltonian_vector(&grad);
    let (du, dv) = e.chart.jacobian(e.u, e.v);
    Ok([
        du[0] * x[0] + dv[0] * x[1],
        du[1] * x[0] + dv[1] * x[1],
        du[2] * x[0] + dv[2] * x[1],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_field::make_mesh;

    fn steps() -> FdSteps {
        GridSpec::default().steps()
    }

    fn points() -> Vec<ChartPoint> {
        vec![
            ChartPoint::new(Chart::North, 0.3, -0.2, 0.4, 1.0),
            ChartPoint::new(Chart::South, -0.7, 0.5, 0.85, 4.0),
            ChartPoint::new(Chart::North, 0.1, 0.9, 0.0, 0.0),
        ]
    }

    #[test]
    fn lift_basics() {
        let mesh = make_mesh(3);
        let theta = ThetaProfile::new(0.1).unwrap();
        let one = ScalarField::constant(&mesh, 1.0);
        let h = ScalarField::from_fn(&mesh, |p| p[0] - 2.0 * p[2]).unwrap();
        let k = ScalarField::from_fn(&mesh, |p| p[1] * p[2]).unwrap();
        let sum = lift(&h.add(&k).unwrap(), theta);
        for e in points() {
            assert!((lift(&one, theta).value(&e).unwrap() - theta.value(e.r())).abs() < 1e-15);
            let diff = sum.value(&e).unwrap() - lift(&h, theta).value(&e).unwrap() - lift(&k, theta).value(&e).unwrap();
            assert!(diff.abs() < 1e-14);
        }
        let zero = ChartPoint::over(mesh.vertex(5), 0.0, 0.0);
        assert!((lift(&h, theta).value(&zero).unwrap() - h.value(5)).abs() < 1e-12);
    }

    #[test]
    fn radial_multiplication_is_structural() {
        let theta = ThetaProfile::new(0.2).unwrap();
        let rho = Radial::r_squared();
        let f = |p: Vec3| p[0] * p[1] + p[2];
        let a = BundleField::lift_smooth(f, theta).mul_radial(&rho);
        let b = BundleField::lift_smooth(f, Radial::from(theta).mul(&rho));
        for e in points() {
            assert_eq!(a.value(&e).unwrap(), b.value(&e).unwrap());
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear() {
        let f = BundleField::free(|e| e.u * e.p + e.v.sin() * e.q * e.q);
        let g = BundleField::lift_smooth(|p| p[0] * p[2], ThetaProfile::new(0.1).unwrap());
        let h = BundleField::free(|e| (e.u - e.q).cos());
        for e in points() {
            let fg = bracket_at(&f, &g, &e, steps()).unwrap();
            assert_eq!(fg, -bracket_at(&g, &f, &e, steps()).unwrap());
            assert_eq!(bracket_at(&f, &f, &e, steps()).unwrap(), 0.0);
            let comb = f.linear_combination(2.0, &h, -3.0);
            let lhs = bracket_at(&comb, &g, &e, steps()).unwrap();
            let rhs = 2.0 * fg - 3.0 * bracket_at(&h, &g, &e, steps()).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn radial_functions_commute_with_pullbacks() {
        let theta = ThetaProfile::new(0.1).unwrap();
        let h = BundleField::lift_smooth(|p| p[0] + p[1] * p[2], theta);
        let base = BundleField::pullback(BaseFunction::smooth(|p| p[1] - p[2] * p[2]));
        let r2 = BundleField::radial(Radial::r_squared());
        let th = BundleField::radial(theta);
        for e in points() {
            assert!(bracket_at(&r2, &base, &e, steps()).unwrap().abs() < 1e-8);
            assert!(bracket_at(&th, &h, &e, steps()).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn r_squared_generates_the_fiber_rotation() {
        // ω(X, ·) = −d(r²) gives X = 2π ∂_φ, so {f, r²} = 2π ∂_φ f.
        let f = BundleField::free(|e| e.p);
        let r2 = BundleField::radial(Radial::r_squared());
        let e = ChartPoint::new(Chart::North, 0.2, 0.1, 0.5, 0.7);
        let got = bracket_at(&f, &r2, &e, steps()).unwrap();
        let expect = 2.0 * PI * (-0.5 * 0.7f64.sin());
        assert!((got - expect).abs() < 1e-3 * expect.abs(), "{got} vs {expect}");
    }

    #[test]
    fn jacobi_residual_shrinks_with_the_grid() {
        let f = BundleField::free(|e| e.u * e.p + e.v * e.v);
        let g = BundleField::free(|e| e.q * e.u - e.v * e.p);
        let h = BundleField::free(|e| e.u * e.v + e.q);
        let e = ChartPoint::new(Chart::North, 0.3, 0.2, 0.5, 0.4);
        let jacobi = |s: FdSteps| {
            let bgh = bracket_bundle(&g, &h, s);
            let bhf = bracket_bundle(&h, &f, s);
            let bfg = bracket_bundle(&f, &g, s);
            bracket_at(&f, &bgh, &e, s).unwrap() + bracket_at(&g, &bhf, &e, s).unwrap() + bracket_at(&h, &bfg, &e, s).unwrap()
        };
        let coarse = jacobi(GridSpec::new(16, 16, 8, 8).unwrap().steps()).abs();
        let fine = jacobi(GridSpec::new(64, 64, 32, 32).unwrap().steps()).abs();
        assert!(fine < 1e-2 && fine < coarse / 50.0, "{coarse} {fine}");
    }

    #[test]
    fn near_boundary_is_refused() {
        let f = BundleField::free(|e| e.u);
        let e = ChartPoint::new(Chart::North, 0.0, 0.0, 1.0 - 1e-7, 0.0);
        assert!(matches!(bracket_at(&f, &f, &e, steps()), Err(Error::NearBoundary(_))));
    }

    #[test]
    fn sampled_fields_interpolate() {
        let mesh = make_mesh(3);
        let theta = ThetaProfile::new(0.1).unwrap();
        let f = BundleField::lift_smooth(|p| p[2], theta);
        let s = f.sample(&mesh, 32, 16).unwrap();
        let e = ChartPoint::new(Chart::North, 0.2, 0.3, 0.5, 2.0);
        assert!((s.value(&e).unwrap() - f.value(&e).unwrap()).abs() < 2e-2);
    }
}
