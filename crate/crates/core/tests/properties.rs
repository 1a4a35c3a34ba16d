use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use qslab::disk_bundle::{omega_polar, ChartPoint, ThetaProfile};
use qslab::group_qm::{brooks_qm, pair_defect, GroupWord};
use qslab::hirzebruch::{classify, Classification, SurfaceClasses};
use qslab::reduction::{qs_from_qm, reduce_quasi_state, CalabiQm, PointEvaluation};
use qslab::reeb_median::zeta_med;
use qslab::sphere_field::{make_mesh, ScalarField, SphereMesh};

fn mesh() -> &'static Arc<SphereMesh> {
    static MESH: OnceLock<Arc<SphereMesh>> = OnceLock::new();
    MESH.get_or_init(|| make_mesh(3))
}

fn word() -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!['a', 'b', 'c', 'A', 'B', 'C']), 0..24)
        .prop_map(|v| v.into_iter().collect())
}

/// Free reduction by repeated cancellation of adjacent inverse pairs.
fn naive_reduce(s: &str) -> String {
    let mut v: Vec<char> = s.chars().collect();
    loop {
        let hit = v.windows(2).position(|w| w[0] != w[1] && w[0].eq_ignore_ascii_case(&w[1]));
        match hit {
            Some(i) => {
                v.drain(i..i + 2);
            }
            None => return v.into_iter().collect(),
        }
    }
}

fn count(hay: &str, needle: &str) -> i64 {
    (0..hay.len()).filter(|&i| hay[i..].starts_with(needle)).count() as i64
}

/// Cubic field with bounded coefficients.
fn cubic() -> impl Strategy<Value = [f64; 6]> {
    proptest::array::uniform6(-1.0..1.0f64)
}

fn field(c: [f64; 6]) -> ScalarField {
    ScalarField::from_fn(mesh(), |p| {
        c[0] * p[0] + c[1] * p[1] + c[2] * p[2] + c[3] * p[0] * p[1] + c[4] * p[2] * p[2] * p[2] + c[5] * p[0] * p[1] * p[2]
    })
    .unwrap()
}

proptest! {
    #[test]
    fn reduction_matches_naive_cancellation(s in word()) {
        let w = GroupWord::parse(&s).unwrap();
        let shown = if w.is_identity() { String::new() } else { w.to_string() };
        prop_assert_eq!(shown, naive_reduce(&s));
    }

    #[test]
    fn inverse_and_associativity(a in word(), b in word(), c in word()) {
        let (a, b, c) = (GroupWord::parse(&a).unwrap(), GroupWord::parse(&b).unwrap(), GroupWord::parse(&c).unwrap());
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
    }

    #[test]
    fn brooks_counts_and_defect(a in word(), b in word()) {
        let mu = brooks_qm(&GroupWord::parse("ab").unwrap()).unwrap();
        let g = GroupWord::parse(&a).unwrap();
        let text = if g.is_identity() { String::new() } else { g.to_string() };
        prop_assert_eq!(mu.evaluate(&g), (count(&text, "ab") - count(&text, "BA")) as f64);
        let h = GroupWord::parse(&b).unwrap();
        prop_assert!(pair_defect(&mu, &g, &h) <= mu.defect_bound().unwrap());
    }

    #[test]
    fn hirzebruch_arithmetic(k in 1i64..=100) {
        let s = SurfaceClasses::new(k).unwrap();
        prop_assert_eq!(s.determinant(), -1);
        match classify(k).unwrap() {
            Classification::Product { areas, .. } => {
                prop_assert!(k % 2 == 0);
                prop_assert_eq!(areas, [1, k / 2 + k]);
            }
            Classification::BlowUp { line_area, exceptional_area, .. } => {
                prop_assert!(k % 2 == 1);
                prop_assert_eq!(line_area - exceptional_area, 1);
                prop_assert_eq!(exceptional_area, (k - 1) / 2 + k);
            }
        }
    }

    #[test]
    fn theta_profile_shape(eps in 0.01..0.49f64, r1 in 0.0..1.0f64, r2 in 0.0..1.0f64) {
        let t = ThetaProfile::new(eps).unwrap();
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(t.value(lo) >= t.value(hi) - 1e-15);
        prop_assert!(t.value(hi) >= 0.0);
        if lo <= 1.0 - eps {
            prop_assert!((t.value(lo) - (1.0 - lo * lo)).abs() < 1e-14);
        }
        prop_assert!(t.value(1.0).abs() < 1e-14);
    }

    #[test]
    fn omega_is_antisymmetric_and_invertible(u in -1.5..1.5f64, v in -1.5..1.5f64, r in 0.0..0.99f64) {
        let w = omega_polar(u, v, r.max(1e-3));
        prop_assert!(w.is_antisymmetric());
        let inv = w.inverse();
        for i in 0..4 {
            for j in 0..4 {
                let e: f64 = (0..4).map(|k| w.m[i][k] * inv[k][j]).sum();
                let delta = f64::from(u8::from(i == j));
                prop_assert!((e - delta).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn median_normalization_and_monotonicity(c in cubic(), shift in -2.0..2.0f64, bump in 0.0..1.0f64) {
        let h = field(c);
        let z = zeta_med(&h).unwrap();
        prop_assert!((zeta_med(&h.shift(shift)).unwrap() - z - shift).abs() < 1e-12);
        prop_assert!((zeta_med(&ScalarField::constant(mesh(), shift)).unwrap() - shift).abs() < 1e-12);
        let bigger = h.add(&ScalarField::from_fn(mesh(), |p| bump * (1.0 + p[0]) * 0.5).unwrap()).unwrap();
        prop_assert!(zeta_med(&bigger).unwrap() >= z - 1e-12);
        prop_assert!(z >= h.min() - 1e-12 && z <= h.max() + 1e-12);
    }

    #[test]
    fn reduced_point_evaluation_is_evaluation(c in cubic(), eps in 0.02..0.45f64, r in 0.0..1.0f64, phi in 0.0..std::f64::consts::TAU) {
        let h = field(c);
        let theta = ThetaProfile::new(eps).unwrap();
        let p = [0.48, -0.6, 0.64];
        let zeta = PointEvaluation { point: ChartPoint::over(p, r * theta.core_radius(), phi) };
        let got = reduce_quasi_state(&zeta, theta, &h).unwrap();
        prop_assert!((got - h.interpolate(p).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn quasi_state_from_calabi_is_monotone(c in cubic(), bump in 0.0..1.0f64) {
        let mu = CalabiQm::cap(mesh(), [0.0, 0.0, 1.0], 0.2).unwrap();
        let h = field(c);
        let k = h.add(&ScalarField::from_fn(mesh(), |p| bump * p[1] * p[1]).unwrap()).unwrap();
        prop_assert!(qs_from_qm(&mu, &k, 1.0).unwrap() >= qs_from_qm(&mu, &h, 1.0).unwrap() - 1e-12);
        let c = qs_from_qm(&mu, &ScalarField::constant(mesh(), 0.7), 1.0).unwrap();
        prop_assert!((c - 0.7).abs() < 1e-12);
    }
}
