//! How many third-degree terms land at each frequency offset `ν`, split by
//! the power of the blocker they carry.
use lnadist::analysis::term_census;
use lnadist::pulses::NUS;

fn main() -> lnadist::Result<()> {
    let k: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let c = term_census(k)?;
    println!("K = {k} users plus one blocker");
    println!("{:>4} {:>8} {:>6} {:>6} {:>6} {:>6}", "ν", "total", "P_B³", "P_B²", "P_B", "1");
    for (s, nu) in NUS.iter().enumerate() {
        println!(
            "{nu:>4} {:>8} {:>6} {:>6} {:>6} {:>6}",
            c.totals()[s],
            c.with_blocker_power(3)[s],
            c.with_blocker_power(2)[s],
            c.with_blocker_power(1)[s],
            c.with_blocker_power(0)[s]
        );
    }
    Ok(())
}
