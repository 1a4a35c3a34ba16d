//! Runs one harness suite and prints its records.

use qslab::harness::{run, ExperimentConfig, Suite};

fn main() -> qslab::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("fiber").parse()?;
    let report = run(&ExperimentConfig { suite, ..Default::default() })?;
    for r in &report.records {
        println!("{:<5} {:<40} {:.3e}", if r.pass { "ok" } else { "FAIL" }, r.name, r.value);
    }
    println!("suite {suite}: pass = {}", report.pass);
    Ok(())
}
