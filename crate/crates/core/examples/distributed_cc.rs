//! The distributed driver: LM-CMA and CC workers with a serial meta level.

use coevo::dcc::{run_dcc, DccConfig};
use coevo::objective::{BaseFunction, ObjectiveInstance};

fn main() -> coevo::Result<()> {
    let obj = ObjectiveInstance::rotated_shifted(BaseFunction::DifferentPowers, 64, 2)?;
    let config = DccConfig { p: 8, k: 4, fitness_target: Some(1e-10), max_evaluations: Some(600_000), ..DccConfig::default() };
    let (p_es, p_cc) = config.split();
    println!("{p_es} LM-CMA workers, {p_cc} CC workers");
    let run = run_dcc(&obj, &config, 2)?;
    for p in run.record.points.iter().step_by(10) {
        println!("cycle {:>4}  evals {:>8}  best {:.3e}  {:.0} ms", p.cycle, p.evaluations, p.best_f, p.wall_ms);
    }
    println!("status {} with best {:.3e}", run.record.status, run.meta.best_f);
    Ok(())
}
