//! Draw a scattering-cluster environment and look at the per-antenna
//! symbol-rate channel it produces after matched filtering.
use lnadist::channel::{draw_multipath_channel, ClusterParams, MultipathScenario};
use lnadist::pulses::{rrc_pulse, PulseSpec};

fn main() -> lnadist::Result<()> {
    let spec = PulseSpec::default();
    let pulse = rrc_pulse(&spec)?;
    let scenario = MultipathScenario::draw(&ClusterParams::frequency_selective(), 2, 42)?;
    for (k, d) in scenario.delays.iter().enumerate() {
        let d: Vec<String> = d.iter().map(|t| format!("{:.2}", t * 1e6)).collect();
        println!("transmitter {k}: delays [µs] {}", d.join(" "));
    }
    let m = 16;
    let mut energy = [0.0; 2];
    let realizations = 200;
    for r in 0..realizations {
        let ch = draw_multipath_channel(&scenario, m, spec.oversampling, r)?;
        let flat = ch.effective_flat(&pulse);
        for (k, row) in flat.iter().enumerate() {
            energy[k] += row.iter().map(|h| h.norm_sqr()).sum::<f64>() / (m * realizations as usize) as f64;
        }
    }
    println!("mean |h_eff|² per antenna: {:.3} and {:.3}", energy[0], energy[1]);
    Ok(())
}
