//! Set partitions of variable indices: counting, enumeration, refinement.

use coevo::partition::{count_partitions, default_decompose, enumerate_all};
use coevo::Partition;

fn main() -> coevo::Result<()> {
    for n in [3, 10, 25] {
        println!("partitions of {n} variables into at least two groups: {}", count_partitions(n)?);
    }
    for p in enumerate_all(3)? {
        println!("{p}");
    }
    let coarse: Partition = "[[1],[2,3]]".parse()?;
    let fine = coarse.refine(1, &[1], &[2])?;
    println!("{fine} refines {coarse}: {}", fine.is_refinement_of(&coarse));
    let random = default_decompose(12, 3, 42)?;
    println!("random 3-group decomposition of 12 variables: {random}");
    Ok(())
}
