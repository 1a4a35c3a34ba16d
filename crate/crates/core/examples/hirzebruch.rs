//! Classification of the first few Hirzebruch surfaces.

use qslab::hirzebruch::{classify, verify_class_identities};

fn main() -> qslab::Result<()> {
    for k in 1..=6 {
        let rep = verify_class_identities(k)?;
        println!("F_{k}: {}", serde_json::to_string(&classify(k)?).unwrap());
        for i in &rep.identities {
            println!("    {} = {}", i.name, i.got);
        }
    }
    Ok(())
}
