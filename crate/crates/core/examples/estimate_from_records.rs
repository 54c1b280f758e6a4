//! From raw records to effect estimates.
//!
//! Samples a trial from the drug model, writes it as CSV, reads it back,
//! smooths the empirical joint and compares the estimates to the truth.
//!
//! ```bash
//! cargo run --example estimate_from_records
//! ```

use medfx::effects::{self, MeasureRequest};
use medfx::ingest::{estimate_joint, RecordBatch};
use medfx::{fixtures, Contrast};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> medfx::Result<()> {
    let scm = fixtures::drug_scm(0.5)?;
    let truth = scm.observational_distribution()?;
    let schema: Vec<_> = ["X", "Z", "Y"].iter().map(|v| scm.spec(v).cloned()).collect::<Result<_, _>>()?;
    let req = MeasureRequest::new(Contrast::new("X", "x1", "x0"), "Z", "Y");

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    println!("     n   TV dist     NDE      NIE");
    for n in [100, 1_000, 10_000, 100_000] {
        let rows = scm.sample(&mut rng, n);
        let batch = RecordBatch::new(schema.clone(), rows, None)?;

        // Text round trip, as if the records came from a file.
        let csv = batch.to_csv()?;
        let batch = RecordBatch::from_csv(csv.as_bytes(), schema.clone(), "records.csv")?;

        let est = estimate_joint(&batch, 1.0)?;
        println!(
            "{n:>6}   {:.5}   {:+.4}  {:+.4}",
            est.total_variation(&truth)?,
            effects::nde(&est, &req)?.value,
            effects::nie(&est, &req)?.value,
        );
    }
    println!(
        "  true            {:+.4}  {:+.4}",
        effects::nde(&truth, &req)?.value,
        effects::nie(&truth, &req)?.value
    );
    Ok(())
}
