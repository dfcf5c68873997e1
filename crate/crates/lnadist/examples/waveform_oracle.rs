//! Oversampled waveform simulation against the analytic error
//! autocorrelation of the decoded user.
use lnadist::validate::{oracle_comparison, oracle_config};

fn main() -> lnadist::Result<()> {
    let cfg = oracle_config(20_000, 4, 5);
    for row in oracle_comparison(&cfg, false)? {
        println!(
            "ℓ = {}   simulated {:+.5e} (±{:.1e})   analytic {:+.5e}   z = {:.2}",
            row.lag, row.simulated.re, row.se_re, row.analytic.re, row.z
        );
    }
    Ok(())
}
