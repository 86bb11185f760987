//! Acceptance gate: runs every suite and prints one line per criterion.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;

use smithpow::selftest;

fn main() -> ExitCode {
    let outcomes = selftest::run_all();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<_> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed suites: {failed:?}");
        ExitCode::FAILURE
    }
}
