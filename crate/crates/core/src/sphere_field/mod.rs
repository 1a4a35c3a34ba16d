//! Fields, brackets and Hamiltonian flows on a triangulated round sphere.
//!
//! The symplectic form is the area form divided by 4π, so the sphere has
//! total area 1 and sgrad H = 4π n × ∇H.

mod field;
mod flow;
pub mod io;
mod mesh;
mod poly;

pub use field::{integrate, poisson_bracket, sgrad, ScalarField};
pub use flow::{
    calabi, cap_mask, cap_radius, certify_displacement, compose, displacing_rotation,
    hamiltonian_flow, inverse_path, steps_for, trapezoid, FlowMap, HamiltonianPath, VectorField,
};
pub use mesh::{Location, SphereMesh};
pub use poly::Polynomial;

use std::sync::Arc;

/// Shared icosphere of the given subdivision level.
pub fn make_mesh(level: u32) -> Arc<SphereMesh> {
    Arc::new(SphereMesh::icosphere(level))
}
