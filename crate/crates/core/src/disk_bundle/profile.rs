use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Radial cutoff θ_ε: equal to 1 − r² on [0, 1 − ε], zero on [1 − ε/2, 1],
/// joined by the quintic Hermite piece matching value, slope and curvature
/// at both knots.
///
/// `eps = 0` is the limit profile 1 − r² on the whole disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaProfile {
    eps: f64,
}

impl ThetaProfile {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::EpsOutOfRange(eps));
        }
        Ok(ThetaProfile { eps })
    }

    pub fn limit() -> Self {
        ThetaProfile { eps: 0.0 }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn is_limit(&self) -> bool {
        self.eps == 0.0
    }

    /// Knots 1 − ε and 1 − ε/2.
    pub fn knots(&self) -> (f64, f64) {
        (1.0 - self.eps, 1.0 - 0.5 * self.eps)
    }

    /// Radius up to which θ = 1 − r².
    pub fn core_radius(&self) -> f64 {
        1.0 - self.eps
    }

    /// (θ, θ′, θ″) at r.
    pub fn jet(&self, r: f64) -> (f64, f64, f64) {
        let r = r.abs();
        let (a, b) = self.knots();
        if r <= a {
            return (1.0 - r * r, -2.0 * r, -2.0);
        }
        if r >= b {
            return (0.0, 0.0, 0.0);
        }
        let w = b - a;
        let t = (r - a) / w;
        let y0 = 1.0 - a * a;
        let y1 = -2.0 * a * w;
        let y2 = -2.0 * w * w;
        let t2 = t * t;
        let t3 = t2 * t;
        let s = 1.0 - t;
        let s2 = s * s;
        // quintic Hermite basis on [0, 1] for the left-end data
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t2 * t2 - 6.0 * t3 * t2;
        let h1 = t - 6.0 * t3 + 8.0 * t2 * t2 - 3.0 * t3 * t2;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t2 * t2 - t3 * t2);
        let d0 = -30.0 * t2 * s2;
        let d1 = s2 * (1.0 + 2.0 * t - 15.0 * t2);
        let d2 = 0.5 * t * s2 * (2.0 - 5.0 * t);
        let e0 = -60.0 * t * s * (1.0 - 2.0 * t);
        let e1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let e2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
        (
            y0 * h0 + y1 * h1 + y2 * h2,
            (y0 * d0 + y1 * d1 + y2 * d2) / w,
            (y0 * e0 + y1 * e1 + y2 * e2) / (w * w),
        )
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.jet(r).1
    }
}

type RadialFn = dyn Fn(f64) -> (f64, f64) + Send + Sync;

#[derive(Clone)]
enum Term {
    Theta(ThetaProfile),
    RSquared,
    Custom(Arc<RadialFn>),
}

impl Term {
    fn jet(&self, r: f64) -> (f64, f64) {
        match self {
            Term::Theta(t) => {
                let (v, d, _) = t.jet(r);
                (v, d)
            }
            Term::RSquared => (r * r, 2.0 * r),
            Term::Custom(f) => f(r),
        }
    }
}

/// A radial factor ρ(r), stored as a product of simple terms.
///
/// Multiplying two factors concatenates their terms, so equal products are
/// evaluated by identical floating-point operations.
#[derive(Clone, Default)]
pub struct Radial {
    terms: Vec<Term>,
}

impl fmt::Debug for Radial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Theta(p) => format!("theta({})", p.eps),
                Term::RSquared => "r^2".to_string(),
                Term::Custom(_) => "custom".to_string(),
            })
            .collect();
        write!(f, "Radial[{}]", names.join("*"))
    }
}

impl From<ThetaProfile> for Radial {
    fn from(t: ThetaProfile) -> Self {
        Radial { terms: vec![Term::Theta(t)] }
    }
}

impl Radial {
    /// The constant 1, giving π*H.
    pub fn one() -> Self {
        Radial::default()
    }

    pub fn r_squared() -> Self {
        Radial { terms: vec![Term::RSquared] }
    }

    /// Arbitrary factor given as r ↦ (ρ(r), ρ′(r)).
    pub fn custom(f: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        Radial {
            terms: vec![Term::Custom(Arc::new(f))],
        }
    }

    pub fn mul(&self, other: &Radial) -> Radial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Radial { terms }
    }

    /// (ρ(r), ρ′(r)).
    pub fn jet(&self, r: f64) -> (f64, f64) {
        let mut value = 1.0;
        let mut deriv = 0.0;
        for t in &self.terms {
            let (v, d) = t.jet(r);
            deriv = deriv * v + value * d;
            value *= v;
        }
        (value, deriv)
    }

    pub fn value(&self, r: f64) -> f64 {
        let mut value = 1.0;
        for t in &self.terms {
            value *= t.jet(r).0;
        }
        value
    }

    /// The ε of the first θ term, if any.
    pub fn theta(&self) -> Option<ThetaProfile> {
        self.terms.iter().find_map(|t| match t {
            Term::Theta(p) => Some(*p),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_values() {
        let t = ThetaProfile::new(0.1).unwrap();
        assert_eq!(t.value(0.0), 1.0);
        assert_eq!(t.value(0.9), 1.0 - 0.9 * 0.9);
        assert_eq!(t.value(1.0 - 0.1 / 4.0), 0.0);
        assert_eq!(t.derivative(0.0), 0.0);
        assert!(ThetaProfile::new(0.5).is_err());
        assert!(ThetaProfile::new(0.0).is_err());
    }

    #[test]
    fn spline_is_c2_and_monotone() {
        for &eps in &[0.02, 0.1, 0.25, 0.4, 0.49] {
            let t = ThetaProfile::new(eps).unwrap();
            let (a, b) = t.knots();
            for &k in &[a, b] {
                let lo = t.jet(k - 1e-12);
                let hi = t.jet(k + 1e-12);
                assert!((lo.0 - hi.0).abs() < 1e-9);
                assert!((lo.1 - hi.1).abs() < 1e-8, "eps {eps} slope {lo:?} {hi:?}");
                assert!((lo.2 - hi.2).abs() < 1e-4, "eps {eps} curvature {lo:?} {hi:?}");
            }
            let mut prev = f64::INFINITY;
            for i in 0..=2000 {
                let r = i as f64 / 2000.0;
                let (v, d, _) = t.jet(r);
                assert!(v >= 0.0 && v <= prev + 1e-15 && d <= 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let t = ThetaProfile::new(0.2).unwrap();
        let h = 1e-6;
        for &r in &[0.3, 0.82, 0.85, 0.88] {
            let fd = (t.value(r + h) - t.value(r - h)) / (2.0 * h);
            assert!((fd - t.derivative(r)).abs() < 1e-6);
            let fd2 = (t.derivative(r + h) - t.derivative(r - h)) / (2.0 * h);
            assert!((fd2 - t.jet(r).2).abs() < 1e-4);
        }
    }

    #[test]
    fn radial_products() {
        let t = ThetaProfile::new(0.1).unwrap();
        let rho = Radial::from(t).mul(&Radial::r_squared());
        let (v, d) = rho.jet(0.5);
        assert!((v - 0.75 * 0.25).abs() < 1e-15);
        assert!((d - (-1.0 * 0.25 + 0.75 * 1.0)).abs() < 1e-15);
        assert_eq!(Radial::one().value(0.7), 1.0);
    }
}
