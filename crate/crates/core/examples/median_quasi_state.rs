//! Median of the contour tree and the quasi-state axioms on random fields.

use qslab::axioms::run_axiom_suite;
use qslab::expr::FieldExpr;
use qslab::reeb_median::{build_reeb, median, MedianQuasiState};
use qslab::sphere_field::make_mesh;

fn main() -> qslab::Result<()> {
    let mesh = make_mesh(4);
    for src in ["z", "x*x - 0.5*z", "z*z*z - 0.2*x"] {
        let g = build_reeb(&FieldExpr::parse(src)?.sample(&mesh)?)?;
        let m = median(&g);
        println!("{src:>14}: ζ = {:+.4}, {} leaves, balanced {}", m.level, g.leaves(), m.is_balanced());
    }
    let rep = run_axiom_suite(&MedianQuasiState, &make_mesh(3), 20, 3)?;
    println!("{rep:#?}");
    Ok(())
}
