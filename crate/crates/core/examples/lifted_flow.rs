//! Lifted flows on the disk bundle project to base flows and preserve r.

use qslab::disk_bundle::{failure_term, flow_commutation_residual, seed_ring, ThetaProfile};
use qslab::expr::FieldExpr;
use qslab::sphere_field::make_mesh;

fn main() -> qslab::Result<()> {
    let mesh = make_mesh(5);
    let theta = ThetaProfile::new(0.1)?;
    let seeds = seed_ring(16, 0.45);
    let f = FieldExpr::parse("0.1*(x*y + z)")?.path(&mesh, 10)?;
    let g = FieldExpr::parse("0.1*cos(2*pi*t)*x")?.path(&mesh, 10)?;
    let rep = flow_commutation_residual(&f, theta, &seeds, 1e-2)?;
    println!("{rep:#?}");
    println!("failure term {:.2e}", failure_term(&f, &g, theta, &seeds, 1e-2)?);
    Ok(())
}
