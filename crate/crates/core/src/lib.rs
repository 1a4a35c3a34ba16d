pub mod axioms;
pub mod disk_bundle;
pub mod error;
pub mod expr;
pub mod geom;
pub mod group_qm;
pub mod harness;
pub mod hirzebruch;
pub mod quadrature;
pub mod reduction;
pub mod reeb_median;
pub mod sphere_field;

pub use error::{Error, Result};
