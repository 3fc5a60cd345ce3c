//! Serial limited-memory CMA on a 256-d rotated cigar.

use coevo::lmcma::run_lmcma;
use coevo::objective::{BaseFunction, ObjectiveInstance};
use coevo::record::Budget;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coevo::Result<()> {
    let obj = ObjectiveInstance::rotated_shifted(BaseFunction::Cigar, 256, 1)?;
    let budget = Budget { fitness_target: Some(1e-8), max_evaluations: Some(400_000), ..Budget::default() };
    let (record, state) = run_lmcma(&obj, None, 3.0, &budget, &mut ChaCha8Rng::seed_from_u64(1))?;
    for p in record.points.iter().step_by(1000) {
        println!("gen {:>6}  evals {:>7}  best {:.3e}", p.cycle, p.evaluations, p.best_f);
    }
    println!("status {} after {} evaluations, best {:.3e}", record.status, record.total_evaluations(), record.final_best());
    println!("stored paths: {}, sigma {:.3e}", state.paths().len(), state.sigma());
    Ok(())
}
