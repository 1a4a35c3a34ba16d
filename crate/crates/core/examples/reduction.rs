//! Reduced quasi-states and quasi-morphisms from the disk bundle to S².

use std::sync::Arc;

use qslab::axioms::{random_field, run_axiom_suite};
use qslab::disk_bundle::{ChartPoint, ThetaProfile};
use qslab::reduction::{
    lift_displacer, normalize_path, reduce_quasi_morphism, reduce_quasi_state, BaseSet, CalabiOnE, EQuadrature,
    PointEvaluation, ReducedQuasiState, ZeroSectionMedian,
};
use qslab::sphere_field::{cap_mask, displacing_rotation, make_mesh, HamiltonianPath};

fn main() -> qslab::Result<()> {
    let mesh = make_mesh(4);
    let theta = ThetaProfile::new(0.1)?;
    let h = random_field(&mesh, 11)?;

    let point = PointEvaluation { point: ChartPoint::over([0.0, 0.6, 0.8], 0.3, 1.0) };
    println!("reduced point evaluation {:.6}, H there {:.6}", reduce_quasi_state(&point, theta, &h)?, h.interpolate([0.0, 0.6, 0.8])?);

    let reduced = ReducedQuasiState::new(Arc::new(ZeroSectionMedian { mesh: Arc::clone(&mesh) }), theta)?;
    let rep = run_axiom_suite(&reduced, &mesh, 10, 5)?;
    println!("reduced median: normalizer {:.3}, quasi-linearity {:.2e}", reduced.normalizer(), rep.quasi_linearity_max);

    let f = normalize_path(&HamiltonianPath::autonomous(&h))?;
    let collar = CalabiOnE::collar(0.1, EQuadrature::Factored);
    println!("reduced Calabi on the collar {:?}", reduce_quasi_morphism(&collar, 0.1, &f, 1.0)?);
    let cap = CalabiOnE {
        base_mask: Some(cap_mask(&mesh, [0.0, 0.0, 1.0], 0.3)),
        r_min: 0.0,
        r_max: 1.0,
        quadrature: EQuadrature::Factored,
    };
    println!("reduced Calabi over a cap {:?}", reduce_quasi_morphism(&cap, 0.1, &f, 1.0 / 3.0)?);

    let g = displacing_rotation(&mesh, [0.0, 0.0, 1.0], 0.2)?;
    let (_, cert) = lift_displacer(&g, BaseSet::Cap { center: [0.0, 0.0, 1.0], area: 0.2 }, 0.1, 0.5, 12, 1e-2)?;
    println!("{cert:?}");
    Ok(())
}
