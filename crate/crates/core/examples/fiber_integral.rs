//! Liouville integral of a lifted function against its base integral.

use qslab::disk_bundle::{fiber_integral_residual, radial_factor, GridSpec, ThetaProfile};
use qslab::expr::FieldExpr;
use qslab::sphere_field::make_mesh;

fn main() -> qslab::Result<()> {
    let mesh = make_mesh(5);
    let h = FieldExpr::parse("1 + x*y + z*z")?.sample(&mesh)?;
    for eps in [0.3, 0.1, 0.02] {
        let theta = ThetaProfile::new(eps)?;
        let rep = fiber_integral_residual(&h, theta, GridSpec::default())?;
        println!("ε = {eps}: factor {:.5}, lhs {:.6}, rhs {:.6}, residual {:.2e}", radial_factor(theta), rep.lhs, rep.rhs, rep.residual);
    }
    Ok(())
}
