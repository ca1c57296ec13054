//! Score the pipeline on the bundled annotated dataset and print the
//! per-category tables.

use qaplan::eval::{parse_dataset, run_eval, BUNDLED_DATASET};
use qaplan::pipeline::Pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dataset = parse_dataset(BUNDLED_DATASET)?;
    let report = run_eval(&dataset, &Pipeline::bundled(), 3);
    print!("{}", report.to_text());

    let row = &report.overall;
    assert!(row.success_rate <= row.orchestration_rate.min(row.entity_rate));
    Ok(())
}
