//! Trains on a synthetic two-class table and prints the held-out metrics.
//!
//! cargo run --release -p sxi-core --example synthetic_run

use std::time::Instant;

use sxi_core::pipeline::{train_pipeline, PipelineConfig};
use sxi_core::table::{synth_generate, SynthSpec};

fn main() -> sxi_core::Result<()> {
    let table = synth_generate(&SynthSpec {
        n: 2000,
        d: 10,
        positive_frac: 0.3,
        separation: 2.0,
        seed: 7,
    })?;
    let start = Instant::now();
    let out = train_pipeline(&table, &PipelineConfig::default())?;
    let r = &out.report;
    print!("{}", r.table);
    println!(
        "network: {:?} (cv AUC {:?})",
        r.search.best, r.search.cv_auc
    );
    println!(
        "delineation accuracy {:.4} -> {:.4} after calibration, alpha {}",
        r.calibration.baseline_accuracy, r.calibration.current_accuracy, r.alpha.alpha
    );
    println!("trained in {:.1?}", start.elapsed());
    Ok(())
}
