use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;

/// Stereographic base chart. North is (x, y)/(1 + z), south is (x, −y)/(1 − z);
/// both are positively oriented for the outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    North,
    South,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }

    /// Preferred chart for a base point.
    pub fn for_point(p: Vec3) -> Chart {
        if p[2] >= 0.0 {
            Chart::North
        } else {
            Chart::South
        }
    }

    pub fn from_sphere(self, p: Vec3) -> (f64, f64) {
        match self {
            Chart::North => (p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2])),
            Chart::South => (p[0] / (1.0 - p[2]), -p[1] / (1.0 - p[2])),
        }
    }

    pub fn to_sphere(self, u: f64, v: f64) -> Vec3 {
        let d = 1.0 + u * u + v * v;
        let (x, y, z) = (2.0 * u / d, 2.0 * v / d, (2.0 - d) / d);
        match self {
            Chart::North => [x, y, z],
            Chart::South => [x, -y, -z],
        }
    }

    /// ∂p/∂u and ∂p/∂v.
    pub fn jacobian(self, u: f64, v: f64) -> (Vec3, Vec3) {
        let d = 1.0 + u * u + v * v;
        let d2 = d * d;
        let du = [2.0 * (d - 2.0 * u * u) / d2, -4.0 * u * v / d2, -4.0 * u / d2];
        let dv = [-4.0 * u * v / d2, 2.0 * (d - 2.0 * v * v) / d2, -4.0 * v / d2];
        match self {
            Chart::North => (du, dv),
            Chart::South => ([du[0], -du[1], -du[2]], [dv[0], -dv[1], -dv[2]]),
        }
    }
}

/// Density s of σ = s du∧dv, the area form over 4π in either chart.
#[inline]
pub fn sigma_density(u: f64, v: f64) -> f64 {
    let d = 1.0 + u * u + v * v;
    1.0 / (PI * d * d)
}

/// Coefficients (a_u, a_v) of the connection form A = a_u du + a_v dv, with dA = −σ.
#[inline]
pub fn connection(u: f64, v: f64) -> (f64, f64) {
    let k = 1.0 / (2.0 * PI * (1.0 + u * u + v * v));
    (v * k, -u * k)
}

/// A point of E in a chart, with Cartesian fiber coordinates (p, q) = r(cos φ, sin φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub q: f64,
}

impl ChartPoint {
    pub fn new(chart: Chart, u: f64, v: f64, r: f64, phi: f64) -> Self {
        ChartPoint {
            chart,
            u,
            v,
            p: r * phi.cos(),
            q: r * phi.sin(),
        }
    }

    /// Point over `base` at fiber polar coordinates (r, φ) in the preferred chart.
    pub fn over(base: Vec3, r: f64, phi: f64) -> Self {
        let chart = Chart::for_point(base);
        let (u, v) = chart.from_sphere(base);
        Self::new(chart, u, v, r, phi)
    }

    pub fn r(&self) -> f64 {
        self.p.hypot(self.q)
    }

    pub fn phi(&self) -> f64 {
        self.q.atan2(self.p).rem_euclid(2.0 * PI)
    }

    pub fn rho2(&self) -> f64 {
        self.u * self.u + self.v * self.v
    }

    /// π(e).
    pub fn base(&self) -> Vec3 {
        self.chart.to_sphere(self.u, self.v)
    }

    /// The same point of E in the other chart. The base map is the inversion
    /// (u, v) ↦ (u, −v)/ρ² and the fiber angle shifts by −atan2(v, u); the
    /// formula is the same in both directions.
    pub fn transition(&self) -> ChartPoint {
        let rho2 = self.rho2();
        let psi = self.v.atan2(self.u);
        let (s, c) = (-psi).sin_cos();
        ChartPoint {
            chart: self.chart.other(),
            u: self.u / rho2,
            v: -self.v / rho2,
            p: c * self.p - s * self.q,
            q: s * self.p + c * self.q,
        }
    }

    /// Switches chart when the base coordinate radius exceeds `limit`.
    pub fn rechart(&self, limit: f64) -> ChartPoint {
        if self.rho2() > limit * limit {
            self.transition()
        } else {
            *self
        }
    }

    pub fn in_chart(&self, chart: Chart) -> ChartPoint {
        if self.chart == chart {
            *self
        } else {
            self.transition()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom;

    #[test]
    fn charts_invert_and_agree() {
        for &p in &[[0.3, -0.4, 0.866], [0.6, 0.0, -0.8], [-0.48, 0.6, 0.64]] {
            let p = geom::normalize(p);
            for chart in [Chart::North, Chart::South] {
                let (u, v) = chart.from_sphere(p);
                let back = chart.to_sphere(u, v);
                assert!(geom::norm(geom::sub(back, p)) < 1e-14);
            }
            let e = ChartPoint::over(p, 0.4, 1.1);
            let t = e.transition();
            assert!(geom::norm(geom::sub(t.base(), p)) < 1e-14);
            assert!((t.r() - 0.4).abs() < 1e-15);
            let back = t.transition();
            assert!((back.p - e.p).abs() < 1e-14 && (back.q - e.q).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let h = 1e-6;
        for chart in [Chart::North, Chart::South] {
            let (u, v) = (0.37, -0.81);
            let (du, dv) = chart.jacobian(u, v);
            let fu = geom::scale(geom::sub(chart.to_sphere(u + h, v), chart.to_sphere(u - h, v)), 0.5 / h);
            let fv = geom::scale(geom::sub(chart.to_sphere(u, v + h), chart.to_sphere(u, v - h)), 0.5 / h);
            assert!(geom::norm(geom::sub(du, fu)) < 1e-8);
            assert!(geom::norm(geom::sub(dv, fv)) < 1e-8);
        }
    }

    #[test]
    fn sigma_is_area_over_four_pi() {
        // |∂p/∂u × ∂p/∂v| = 4/(1+ρ²)², and the cross product points outward.
        for chart in [Chart::North, Chart::South] {
            let (u, v) = (0.2, 0.7);
            let (du, dv) = chart.jacobian(u, v);
            let n = geom::cross(du, dv);
            let p = chart.to_sphere(u, v);
            let area = geom::dot(n, p);
            assert!((area / (4.0 * PI) - sigma_density(u, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn connection_transforms_by_the_transition_angle() {
        // A_S pulled back to the north chart equals A_N + dψ/2π.
        let (u, v) = (0.6, -0.3);
        let h = 1e-6;
        let to_south = |u: f64, v: f64| {
            let r2 = u * u + v * v;
            (u / r2, -v / r2)
        };
        let (su, sv) = to_south(u, v);
        let (au, av) = connection(su, sv);
        let (su_u, sv_u) = {
            let a = to_south(u + h, v);
            let b = to_south(u - h, v);
            ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h))
        };
        let (su_v, sv_v) = {
            let a = to_south(u, v + h);
            let b = to_south(u, v - h);
            ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h))
        };
        let pull_u = au * su_u + av * sv_u;
        let pull_v = au * su_v + av * sv_v;
        let (nu, nv) = connection(u, v);
        let r2 = u * u + v * v;
        let dpsi = (-v / r2, u / r2);
        assert!((pull_u - (nu + dpsi.0 / (2.0 * PI))).abs() < 1e-8);
        assert!((pull_v - (nv + dpsi.1 / (2.0 * PI))).abs() < 1e-8);
    }
}
