//! Run the invariant/oracle suite and print one line per property.
//!
//! `cargo run --release --example validation_suite -- --quick`

use lnadist::validate::{run_suite, SuiteOptions};

fn main() -> lnadist::Result<()> {
    let quick = std::env::args().any(|a| a == "--quick");
    let opts = SuiteOptions { quick, ..SuiteOptions::default() };
    for c in run_suite(&opts)? {
        println!("{:<34} {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    Ok(())
}
