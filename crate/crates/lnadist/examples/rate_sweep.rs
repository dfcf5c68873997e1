//! Achievable rate of a user next to a strong blocker as the array grows,
//! for line-of-sight and frequency-selective channels.
use lnadist::sim::{rate_vs_antennas, ChannelType, RateExperiment};

fn main() -> lnadist::Result<()> {
    let antennas = [1, 4, 16, 64];
    for ct in [ChannelType::Los, ChannelType::FrequencySelective] {
        let exp = RateExperiment { symbols: 1000, realizations: 2, ..RateExperiment::preset(ct, 70.0, 7) };
        for p in rate_vs_antennas(&exp, &antennas)? {
            let analytic = p.analytic_rate.map(|r| format!("{r:.4}")).unwrap_or_else(|| "-".into());
            println!("{:<20} M = {:3}   rate {:.4} ± {:.4}   third-degree closed form {analytic}", ct.name(), p.antennas, p.mean_rate, p.stderr);
        }
    }
    Ok(())
}
