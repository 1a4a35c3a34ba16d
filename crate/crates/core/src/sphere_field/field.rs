use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

use super::mesh::SphereMesh;

/// Values sampled at the vertices of a shared mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<SphereMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: &Arc<SphereMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::FieldLength {
                expected: mesh.num_vertices(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(ScalarField {
            mesh: Arc::clone(mesh),
            values,
        })
    }

    /// Samples `f` at every vertex.
    pub fn from_fn(mesh: &Arc<SphereMesh>, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self::new(mesh, values)
    }

    pub fn constant(mesh: &Arc<SphereMesh>, c: f64) -> Self {
        ScalarField {
            mesh: Arc::clone(mesh),
            values: vec![c; mesh.num_vertices()],
        }
    }

    /// The coordinate function x, y or z (axis 0, 1, 2).
    pub fn coordinate(mesh: &Arc<SphereMesh>, axis: usize) -> Self {
        ScalarField {
            mesh: Arc::clone(mesh),
            values: mesh.vertices().iter().map(|p| p[axis]).collect(),
        }
    }

    pub fn mesh(&self) -> &Arc<SphereMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn same_mesh(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.mesh, &other.mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(&self.mesh, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_mesh(other)?;
        Self::new(
            &self.mesh,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        ScalarField {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn shift(&self, c: f64) -> Self {
        ScalarField {
            mesh: Arc::clone(&self.mesh),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    pub fn integrate(&self) -> f64 {
        integrate(self)
    }

    /// The field minus its mean.
    pub fn normalized(&self) -> Self {
        self.shift(-self.integrate())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Piecewise-linear interpolation at a unit vector.
    pub fn interpolate(&self, p: Vec3) -> Result<f64> {
        let loc = self.mesh.locate(p, 0)?;
        Ok(self.mesh.blend(&loc, &self.values))
    }

    pub fn ambient_gradients(&self) -> Result<Vec<Vec3>> {
        self.mesh.ambient_gradients(&self.values)
    }

    pub fn tangent_gradients(&self) -> Result<Vec<Vec3>> {
        self.mesh.tangent_gradients(&self.values)
    }
}

/// Σ H(v)·weight(v), the mean of H for the normalized area.
pub fn integrate(h: &ScalarField) -> f64 {
    h.values
        .iter()
        .zip(h.mesh.weights())
        .map(|(v, w)| v * w)
        .sum()
}

/// Symplectic gradient 4π n × ∇H of a tangent gradient at n.
#[inline]
pub fn sgrad(n: Vec3, grad: Vec3) -> Vec3 {
    geom::scale(geom::cross(n, grad), 4.0 * PI)
}

/// {H,K} = dH(sgrad K) = 4π n·(∇K × ∇H) at each vertex.
///
/// Computed from one cross product per vertex, so antisymmetry is exact.
/// With this orientation {x, y} = −4πz.
pub fn poisson_bracket(h: &ScalarField, k: &ScalarField) -> Result<ScalarField> {
    h.same_mesh(k)?;
    let gh = h.tangent_gradients()?;
    let gk = k.tangent_gradients()?;
    let values = h
        .mesh
        .vertices()
        .iter()
        .zip(gh.iter().zip(&gk))
        .map(|(&n, (&a, &b))| 4.0 * PI * geom::dot(n, geom::cross(b, a)))
        .collect();
    ScalarField::new(&h.mesh, values)
}
