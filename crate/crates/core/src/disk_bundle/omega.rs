use std::f64::consts::PI;

use super::chart::{connection, sigma_density};

/// The symplectic form at a chart point as an antisymmetric 4×4 matrix,
/// ω = Σ_{i<j} m[i][j] dx_i∧dx_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega4 {
    pub m: [[f64; 4]; 4],
}

impl Omega4 {
    /// Builds the matrix from its upper triangle (12, 13, 14, 23, 24, 34).
    pub fn from_upper(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Omega4 {
            m: [
                [0.0, a, b, c],
                [-a, 0.0, d, e],
                [-b, -d, 0.0, f],
                [-c, -e, -f, 0.0],
            ],
        }
    }

    fn upper(&self) -> (f64, f64, f64, f64, f64, f64) {
        let m = &self.m;
        (m[0][1], m[0][2], m[0][3], m[1][2], m[1][3], m[2][3])
    }

    /// Pf = m12 m34 − m13 m24 + m14 m23; ω∧ω/2 = Pf dx1∧dx2∧dx3∧dx4.
    pub fn pfaffian(&self) -> f64 {
        let (a, b, c, d, e, f) = self.upper();
        a * f - b * e + c * d
    }

    pub fn det(&self) -> f64 {
        self.pfaffian().powi(2)
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..4).all(|i| (0..4).all(|j| self.m[i][j] == -self.m[j][i]))
    }

    /// Closed-form inverse of an antisymmetric 4×4 matrix.
    pub fn inverse(&self) -> [[f64; 4]; 4] {
        let (a, b, c, d, e, f) = self.upper();
        let k = 1.0 / self.pfaffian();
        [
            [0.0, -f * k, e * k, -d * k],
            [f * k, 0.0, -c * k, b * k],
            [-e * k, c * k, 0.0, -a * k],
            [d * k, -b * k, a * k, 0.0],
        ]
    }

    /// Largest entry of |self − other|.
    pub fn distance(&self, other: &Omega4) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }
}

/// ω = π*σ + d(r²α) in (u, v, r, φ):
/// (1 − r²) s du∧dv − 2r a_u du∧dr − 2r a_v dv∧dr + (r/π) dr∧dφ.
pub fn omega_polar(u: f64, v: f64, r: f64) -> Omega4 {
    let s = sigma_density(u, v);
    let (au, av) = connection(u, v);
    Omega4::from_upper((1.0 - r * r) * s, -2.0 * r * au, 0.0, -2.0 * r * av, 0.0, r / PI)
}

/// The same form in Cartesian fiber coordinates (u, v, p, q); regular at r = 0.
pub fn omega_cartesian(u: f64, v: f64, p: f64, q: f64) -> Omega4 {
    let s = sigma_density(u, v);
    let (au, av) = connection(u, v);
    let r2 = p * p + q * q;
    Omega4::from_upper(
        (1.0 - r2) * s,
        -2.0 * p * au,
        -2.0 * q * au,
        -2.0 * p * av,
        -2.0 * q * av,
        1.0 / PI,
    )
}

/// ω = −d((1 − r²)α), assembled by differentiating the coefficients of
/// β = −(1 − r²)(A + dφ/2π) with fourth-order central differences of step h.
pub fn omega_polar_exterior(u: f64, v: f64, r: f64, h: f64) -> Omega4 {
    let beta = |x: [f64; 4]| -> [f64; 4] {
        let (au, av) = connection(x[0], x[1]);
        let w = -(1.0 - x[2] * x[2]);
        [w * au, w * av, 0.0, w / (2.0 * PI)]
    };
    let x0 = [u, v, r, 0.0];
    // jac[i][j] = ∂_i β_j
    let mut jac = [[0.0; 4]; 4];
    for (i, row) in jac.iter_mut().enumerate() {
        let at = |k: f64| {
            let mut x = x0;
            x[i] += k * h;
            beta(x)
        };
        let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
        for j in 0..4 {
            row[j] = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
        }
    }
    let d = |i: usize, j: usize| jac[i][j] - jac[j][i];
    Omega4::from_upper(d(0, 1), d(0, 2), d(0, 3), d(1, 2), d(1, 3), d(2, 3))
}

/// |dA + σ| at (u, v), with dA = ∂_u a_v − ∂_v a_u from central differences.
pub fn curvature_residual(u: f64, v: f64, h: f64) -> f64 {
    let d4 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
    let dav_du = d4(&|k| connection(u + k, v).1);
    let dau_dv = d4(&|k| connection(u, v + k).0);
    (dav_du - dau_dv + sigma_density(u, v)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    #[test]
    fn closed_form_inverse() {
        let w = Omega4::from_upper(0.7, -0.2, 0.3, 0.5, -1.1, 0.4);
        let prod = matmul(&w.m, &w.inverse());
        for (i, row) in prod.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn polar_form_is_nondegenerate_inside() {
        for &(u, v, r) in &[(0.1, 0.2, 0.3), (-1.1, 0.4, 0.99), (0.0, 0.0, 0.5)] {
            let w = omega_polar(u, v, r);
            assert!(w.is_antisymmetric());
            let expect = (1.0 - r * r) * sigma_density(u, v) * r / PI;
            assert!((w.pfaffian() - expect).abs() < 1e-15);
            assert!(w.det() > 0.0);
        }
        // at r = 1 only the base block dies; the kernel is spanned by the α-direction
        let w = omega_polar(0.3, 0.1, 1.0);
        assert_eq!(w.pfaffian(), 0.0);
    }

    #[test]
    fn two_assembly_routes_agree() {
        for &(u, v, r) in &[(0.1, 0.2, 0.3), (-0.9, 0.4, 0.8), (0.5, -1.2, 0.05)] {
            let a = omega_polar(u, v, r);
            let b = omega_polar_exterior(u, v, r, 1e-3);
            assert!(a.distance(&b) < 1e-10, "{}", a.distance(&b));
        }
    }

    #[test]
    fn cartesian_and_polar_are_related_by_the_fiber_jacobian() {
        let (u, v, r, phi): (f64, f64, f64, f64) = (0.4, -0.3, 0.6, 0.9);
        let (p, q) = (r * phi.cos(), r * phi.sin());
        let c = omega_cartesian(u, v, p, q).m;
        // J maps (u,v,r,φ) tangent vectors to (u,v,p,q).
        let mut j = [[0.0; 4]; 4];
        j[0][0] = 1.0;
        j[1][1] = 1.0;
        j[2][2] = phi.cos();
        j[2][3] = -r * phi.sin();
        j[3][2] = phi.sin();
        j[3][3] = r * phi.cos();
        let mut jt = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                jt[a][b] = j[b][a];
            }
        }
        let pulled = matmul(&jt, &matmul(&c, &j));
        let w = omega_polar(u, v, r);
        for a in 0..4 {
            for b in 0..4 {
                assert!((pulled[a][b] - w.m[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn curvature_is_minus_sigma() {
        for &(u, v) in &[(0.0, 0.0), (0.3, -0.7), (1.5, 1.1)] {
            assert!(curvature_residual(u, v, 1e-3) < 1e-10);
        }
    }
}
