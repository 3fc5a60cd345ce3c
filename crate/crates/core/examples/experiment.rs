//! A multi-seed experiment with CSV output and a summary table.

use coevo::experiment::{run_experiment, summarize, summary_csv, write_records, ExperimentConfig};

fn main() -> coevo::Result<()> {
    let config = ExperimentConfig {
        function: "sphere".into(),
        dimension: 16,
        algorithm: "cma".into(),
        max_evaluations: Some(100_000),
        ..ExperimentConfig::default()
    };
    println!("fingerprint {}", config.fingerprint());
    let records = run_experiment(&config)?;
    let dir = std::env::temp_dir().join("coevo-experiment");
    for path in write_records(&dir, &records, config.fitness_target)? {
        println!("wrote {}", path.display());
    }
    print!("{}", summary_csv(&summarize(&records, config.fitness_target)));
    Ok(())
}
