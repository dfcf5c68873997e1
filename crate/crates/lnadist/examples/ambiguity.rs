//! Ambiguity functions `γ_{3,ν}[ℓ]` of the third-degree distortion kernels
//! for the default root-raised-cosine pulse.
use lnadist::pulses::{ambiguity_functions, PulseSpec, NUS};

fn main() -> lnadist::Result<()> {
    let spec = PulseSpec::default();
    let amb = ambiguity_functions(&spec, 4)?;
    println!("β = {}, Q = {}, span = {}", spec.roll_off, spec.oversampling, spec.span);
    print!("{:>4}", "ℓ");
    for nu in NUS {
        print!("{:>14}", format!("|γ3,{nu}|"));
    }
    println!();
    for lag in -4..=4 {
        print!("{lag:>4}");
        for nu in NUS {
            print!("{:>14.4e}", amb.gamma(nu, lag).norm());
        }
        println!();
    }
    Ok(())
}
