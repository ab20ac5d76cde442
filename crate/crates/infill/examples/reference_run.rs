//! Regenerates `reference/training_reference.json`.
//!
//!     cargo run --release -p meo-infill --example reference_run [out.json]

use std::time::Instant;

use meo_infill::training::SanityRun;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "crates/infill/reference/training_reference.json".into());
    let run = SanityRun::default();
    let started = Instant::now();
    let (outcome, _, _) = run
        .run(|step, loss| {
            if step % 200 == 0 {
                eprintln!("step {step:5}  loss {loss:.5}");
            }
        })
        .expect("reference run");
    let secs = started.elapsed().as_secs_f64();
    eprintln!("{outcome:?} in {secs:.1}s");
    let doc = serde_json::json!({ "run": run, "outcome": outcome, "seconds": secs });
    std::fs::write(&out, serde_json::to_string_pretty(&doc).unwrap() + "\n").expect("write reference");
}
