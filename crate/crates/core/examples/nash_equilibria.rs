//! Pure Nash equilibria of the decomposition game on small functions.

use coevo::game::{
    appendix_oracle, check_downward_propagation, trace_best_response_dynamics, verify_pne, BestResponseOptions,
    GameFunction, DEFAULT_PNE_TOL,
};
use coevo::objective::FnObjective;
use coevo::partition::enumerate_all;
use coevo::Partition;

fn main() -> coevo::Result<()> {
    let opts = BestResponseOptions::default();
    let coord = Partition::singletons(2);

    for f in [GameFunction::F1, GameFunction::f2(), GameFunction::F3, GameFunction::F4] {
        let t = trace_best_response_dynamics(&f, &coord, &[5.0, -3.0], 10_000, &opts)?;
        println!("{f}: {} cycles, ends at {:?} with f = {:.3e}", t.cycles, t.final_point(), t.final_value());
    }

    for point in [[1.0, 1.0], [1.0, 2.0]] {
        let c = verify_pne(&GameFunction::F4, &coord, &point, DEFAULT_PNE_TOL, &opts)?;
        let exact = appendix_oracle(&GameFunction::F4, &point, &coord)?;
        println!("f4 at {point:?}: pne={} strict={} closed form={exact}", c.is_pne, c.is_strict);
    }

    let s = GameFunction::Schwefel221 { n: 4 };
    let halves: Partition = "[[1,2],[3,4]]".parse()?;
    for point in [[2.0, 1.0, 2.0, 1.0], [2.0, 1.0, 1.0, 1.0]] {
        let c = verify_pne(&s, &halves, &point, DEFAULT_PNE_TOL, &opts)?;
        println!("schwefel221 at {point:?}: pne={} gaps={:?}", c.is_pne, c.per_group_gap);
    }

    // (x+y)² + (y−1)² + (y+1)² + (y+z)²: every coarse PNE at the optimum
    // stays a PNE of every refinement.
    let f = FnObjective::new(3, |v: &[f64]| {
        (v[0] + v[1]).powi(2) + (v[1] - 1.0).powi(2) + (v[1] + 1.0).powi(2) + (v[1] + v[2]).powi(2)
    });
    let all = enumerate_all(3)?;
    let mut pairs = 0;
    for coarse in &all {
        for fine in all.iter().filter(|p| p.is_refinement_of(coarse)) {
            assert!(check_downward_propagation(&f, coarse, fine, &[0.0; 3], DEFAULT_PNE_TOL, &opts)?);
            pairs += 1;
        }
    }
    println!("downward propagation holds on all {pairs} refinement pairs");
    Ok(())
}
