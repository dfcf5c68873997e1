use clap::Parser;
use lnadist::cli::{exit_code, render, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = run(&cli);
    match &result {
        Ok(o) if cli.global.json => println!("{}", serde_json::to_string_pretty(o).expect("outcome serializes")),
        Ok(o) => print!("{}", render(o)),
        Err(e) => eprintln!("lnadist: {e}"),
    }
    std::process::exit(exit_code(&result));
}
