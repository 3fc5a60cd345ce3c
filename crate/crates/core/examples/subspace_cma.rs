//! CMA-ES on one group of variables with the rest frozen.

use coevo::cma::optimize_subspace;
use coevo::objective::{BaseFunction, ObjectiveInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> coevo::Result<()> {
    let obj = ObjectiveInstance::rotated_shifted(BaseFunction::Ellipsoid, 10, 3)?;
    let context = vec![1.0; 10];
    let group = [0, 2, 4, 6];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let before = obj.evaluate(&context)?;
    let result = optimize_subspace(&obj, &context, &group, 2000, &mut rng)?;
    println!("f(context) = {before:.4e}");
    println!("after optimizing x[{group:?}]: {:.4e} in {} evaluations", result.fitness, result.evaluations);
    println!("new group values: {:?}", result.best);
    Ok(())
}
