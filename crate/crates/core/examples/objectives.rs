//! Benchmark functions, plain and rotated-shifted.

use coevo::objective::{BaseFunction, ObjectiveInstance};

fn main() -> coevo::Result<()> {
    let n = 16;
    println!("{:<18} {:>14} {:>14}", "function", "f(optimum)", "f(0) rotated");
    for base in BaseFunction::ALL {
        let plain = ObjectiveInstance::new(base, n)?;
        let rotated = ObjectiveInstance::rotated_shifted(base, n, 7)?;
        let at_opt = plain.evaluate(&base.optimum_point(n))?;
        let at_zero = rotated.evaluate(&vec![0.0; n])?;
        println!("{:<18} {:>14.3e} {:>14.3e}", base.id(), at_opt, at_zero);
    }
    let inst = ObjectiveInstance::rotated_shifted(BaseFunction::Ellipsoid, n, 7)?;
    let opt = inst.optimum_location().expect("known optimum").to_vec();
    println!("rotated ellipsoid at its shifted optimum: {:e}", inst.evaluate(&opt)?);
    println!("evaluations counted: {}", inst.evaluations());
    Ok(())
}
