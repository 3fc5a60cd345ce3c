//! Serial cooperative coevolution under a random partition.

use coevo::cc::{run_cc, CcConfig};
use coevo::objective::{BaseFunction, ObjectiveInstance};
use coevo::partition::default_decompose;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coevo::Result<()> {
    let obj = ObjectiveInstance::rotated_shifted(BaseFunction::Schwefel12, 16, 5)?;
    let partition = default_decompose(16, 4, 5)?;
    let config = CcConfig { fitness_target: Some(1e-8), max_evaluations: Some(2_000_000), ..CcConfig::default() };
    let run = run_cc(&obj, &partition, &config, &mut ChaCha8Rng::seed_from_u64(5))?;
    println!("partition {partition}");
    for p in &run.record.points {
        println!("cycle {:>4}  evals {:>8}  best {:.3e}", p.cycle, p.evaluations, p.best_f);
    }
    println!("status {}", run.record.status);
    Ok(())
}
