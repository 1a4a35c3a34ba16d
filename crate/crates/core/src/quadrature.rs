//! Gauss–Legendre rules and a smooth step for partitions of unity.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule over the panels delimited by `breaks`.
pub fn composite_gauss(breaks: &[f64], panels_per_piece: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::new();
    for piece in breaks.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let h = (b - a) / panels_per_piece as f64;
        for k in 0..panels_per_piece {
            let lo = a + k as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
            }
        }
    }
    out
}

/// ∫_a^b f by composite Gauss–Legendre.
pub fn integrate_1d(f: impl Fn(f64) -> f64, breaks: &[f64], panels: usize) -> f64 {
    composite_gauss(breaks, panels, 8)
        .into_iter()
        .map(|(x, w)| w * f(x))
        .sum()
}

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    fn g(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    let a = g(t);
    let b = g(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n {n} deg {deg}");
            }
        }
    }

    #[test]
    fn composite_matches_closed_form() {
        // ∫₀¹ 2r(1−r²)² dr = 1/3
        let v = integrate_1d(|r| 2.0 * r * (1.0 - r * r).powi(2), &[0.0, 1.0], 4);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }
}
