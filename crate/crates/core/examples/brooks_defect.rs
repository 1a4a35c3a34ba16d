//! Sampled defect and homogenization of the Brooks quasi-morphism of `ab`.

use qslab::group_qm::{brooks_homogenized, brooks_qm, defect_lower_bound, homogenize, GroupWord, WordSampler};

fn main() -> qslab::Result<()> {
    let pattern = GroupWord::parse("ab")?;
    let mu = brooks_qm(&pattern)?;
    let hom = brooks_homogenized(&pattern)?;
    let sampled = defect_lower_bound(&mu, &mut WordSampler::new(2, 12, 7), 5000);
    println!("defect bound {:?}, sampled {sampled}", mu.defect_bound());

    let g = GroupWord::parse("abAB")?.mul(&pattern);
    for n in [4, 16, 64] {
        let h = homogenize(&mu, &g, n)?;
        println!("N = {n:>2}: {:.4} ± {:.4}", h.value, h.error_radius);
    }
    println!("homogenized value {}", hom.evaluate(&g));
    Ok(())
}
