use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geom::Vec3;

use super::{ScalarField, SphereMesh};

/// Polynomial in x, y, z, used as a smooth random test field.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    terms: Vec<([u8; 3], f64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<([u8; 3], f64)>) -> Self {
        Polynomial { terms }
    }

    /// All monomials of total degree ≤ `degree` with seeded coefficients in [−1, 1].
    pub fn random(degree: u8, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    terms.push(([a, b, c], rng.random_range(-1.0..=1.0)));
                }
            }
        }
        Polynomial { terms }
    }

    pub fn eval(&self, p: Vec3) -> f64 {
        self.terms
            .iter()
            .map(|&([a, b, c], k)| k * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
            .sum()
    }

    /// Ambient gradient.
    pub fn gradient(&self, p: Vec3) -> Vec3 {
        let mut g = [0.0; 3];
        for &(e, k) in &self.terms {
            for (axis, gi) in g.iter_mut().enumerate() {
                if e[axis] == 0 {
                    continue;
                }
                let mut term = k * e[axis] as f64;
                for (j, &pj) in p.iter().enumerate() {
                    let pow = if j == axis { e[j] as i32 - 1 } else { e[j] as i32 };
                    term *= pj.powi(pow);
                }
                *gi += term;
            }
        }
        g
    }

    pub fn sample(&self, mesh: &Arc<SphereMesh>) -> Result<ScalarField> {
        ScalarField::from_fn(mesh, |p| self.eval(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_cubic_has_twenty_terms_and_matching_gradient() {
        let p = Polynomial::random(3, 42);
        assert_eq!(p.terms.len(), 20);
        assert_eq!(p, Polynomial::random(3, 42));
        let x = [0.3, -0.4, 0.5];
        let g = p.gradient(x);
        let h = 1e-6;
        for axis in 0..3 {
            let mut a = x;
            let mut b = x;
            a[axis] += h;
            b[axis] -= h;
            let fd = (p.eval(a) - p.eval(b)) / (2.0 * h);
            assert!((fd - g[axis]).abs() < 1e-7);
        }
    }
}
