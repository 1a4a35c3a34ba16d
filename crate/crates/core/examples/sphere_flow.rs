//! Flows a height function on the icosphere and checks energy conservation.

use qslab::expr::FieldExpr;
use qslab::sphere_field::{hamiltonian_flow, make_mesh, poisson_bracket, HamiltonianPath};

fn main() -> qslab::Result<()> {
    let mesh = make_mesh(4);
    let h = FieldExpr::parse("z + 0.3*x*y")?.sample(&mesh)?;
    let k = FieldExpr::parse("x")?.sample(&mesh)?;
    println!("{} vertices, χ = {}", mesh.num_vertices(), mesh.euler_characteristic());
    println!("mean of H: {:.3e}", h.integrate());
    println!("sup |{{H, x}}|: {:.4}", poisson_bracket(&h, &k)?.sup_norm());

    let seeds = [[0.6, 0.0, 0.8], [0.0, -0.6, 0.8], [1.0, 0.0, 0.0]];
    let flow = hamiltonian_flow(&HamiltonianPath::autonomous(&h), &seeds, 1e-3)?;
    for (p, q) in seeds.iter().zip(flow.final_positions()) {
        println!("{p:?} -> [{:.4}, {:.4}, {:.4}], ΔH = {:.2e}", q[0], q[1], q[2], h.interpolate(q)? - h.interpolate(*p)?);
    }
    Ok(())
}
