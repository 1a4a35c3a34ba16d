//! Bracket of lifted functions on the disk bundle against the base bracket.

use qslab::disk_bundle::{
    bracket_identity_residual, sample_points, sgrad_pushforward_residual, BaseFunction, GridSpec, ThetaProfile,
};
use qslab::sphere_field::make_mesh;

fn main() -> qslab::Result<()> {
    let theta = ThetaProfile::new(0.1)?;
    let h = BaseFunction::smooth(|p| p[0] * p[1] + p[2]);
    let k = BaseFunction::smooth(|p| p[1] - p[0] * p[2]);
    let points = sample_points(20, theta.core_radius(), 1);
    for (level, grid) in [(4, GridSpec::new(32, 32, 16, 16)?), (5, GridSpec::default())] {
        let mesh = make_mesh(level);
        let b = bracket_identity_residual(&h, &k, theta, &mesh, &points, grid.steps())?;
        let s = sgrad_pushforward_residual(&h, theta, &mesh, &points, grid.steps())?;
        println!("level {level}, grid {grid}: bracket {:.2e}, sgrad {:.2e}", b.max_rel_first, s.max_rel);
    }
    Ok(())
}
