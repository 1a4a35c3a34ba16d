//! Field expressions over `x`, `y`, `z` (and optionally `t`).
//!
//! Parsing and evaluation are delegated to `meval`, so the usual arithmetic,
//! `^`, and functions such as `sin`, `exp`, `sqrt`, `abs`, `max`, `min` work.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::sphere_field::{HamiltonianPath, ScalarField, SphereMesh};

thread_local! {
    static BUILTINS: meval::Context<'static> = meval::Context::new();
}

/// A parsed expression, reusable across meshes.
#[derive(Debug, Clone)]
pub struct FieldExpr {
    source: String,
    expr: meval::Expr,
}

impl FieldExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let expr: meval::Expr = source
            .parse()
            .map_err(|e: meval::Error| Error::Expression(e.to_string()))?;
        // reject unknown variables up front
        expr.clone()
            .bind4("x", "y", "z", "t")
            .map(|_| ())
            .map_err(|e| Error::Expression(e.to_string()))?;
        Ok(FieldExpr {
            source: source.to_string(),
            expr,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Closure evaluating the expression at (p, t). Evaluation errors give NaN,
    /// which field constructors reject.
    pub fn compile(&self) -> impl Fn(Vec3, f64) -> f64 + Send + Sync + 'static {
        let expr = self.expr.clone();
        move |p: Vec3, t: f64| {
            BUILTINS.with(|b| {
                let vars = [("x", p[0]), ("y", p[1]), ("z", p[2]), ("t", t)];
                expr.eval_with_context((vars, b)).unwrap_or(f64::NAN)
            })
        }
    }

    pub fn sample(&self, mesh: &Arc<SphereMesh>) -> Result<ScalarField> {
        let f = self.compile();
        ScalarField::from_fn(mesh, |p| f(p, 0.0))
    }

    pub fn path(&self, mesh: &Arc<SphereMesh>, intervals: usize) -> Result<HamiltonianPath> {
        HamiltonianPath::from_fn(mesh, intervals, self.compile())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_sample() {
        let m = Arc::new(SphereMesh::icosphere(1));
        let e = FieldExpr::parse("x*y + z^2 - t").unwrap();
        let f = e.compile();
        assert!((f([0.5, 0.5, 0.5], 1.0) - (0.25 + 0.25 - 1.0)).abs() < 1e-15);
        let s = e.sample(&m).unwrap();
        assert_eq!(s.values().len(), 42);
        assert!(FieldExpr::parse("x + w").is_err());
        assert!(FieldExpr::parse("x +").is_err());
    }
}
