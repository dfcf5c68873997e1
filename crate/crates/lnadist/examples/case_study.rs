//! One user and one adjacent-band blocker: which distortion term dominates as
//! the blocker grows and the array gets larger.
use lnadist::analysis::case_one_user_one_blocker;
use lnadist::pulses::{ambiguity_functions, PulseSpec};
use lnadist::C64;

fn main() -> lnadist::Result<()> {
    let amb = ambiguity_functions(&PulseSpec::default(), 0)?;
    let a3 = C64::new(-0.0428, 0.003);
    for ratio in [0.1, 1e2, 1e4] {
        for m in [4usize, 16, 64, 256] {
            let cs = case_one_user_one_blocker(1.0, ratio, 0.0, 2.0, m, a3, &amb, 0);
            println!(
                "P_B/P_1 = {ratio:8.1e}  M = {m:3}  R_e[0] = {:10.4e}  dominant = {:10.4e}  {}",
                cs.exact.re,
                cs.dominant.re,
                cs.regime.label()
            );
        }
    }
    Ok(())
}
